#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace boxqp {

// Each error class maps to one CLI exit code (see tools/cli.cpp).

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(std::size_t iteration)
      : std::runtime_error("numerical divergence at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

// Raised when a solver reports an objective above the recorded optimum.
class OptimumViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace boxqp
