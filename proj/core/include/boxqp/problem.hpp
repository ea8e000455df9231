#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace boxqp {

using Vector = std::vector<double>;

// Parameters of the random instance family `N-D-S`.
struct GeneratorSpec {
  std::size_t n = 0;
  double density = 1.0;
  std::uint64_t seed = 0;

  // "N-D-S" with D as a percentage, e.g. 20-50-2.
  std::string label() const;

  bool operator==(const GeneratorSpec&) const = default;
};

/// A box-constrained quadratic program
///
///   maximize   f(x) = 1/2 x'Qx + V'x
///   subject to lower <= x <= upper.
///
/// Q is stored dense and row-major. Instances are validated on construction
/// and immutable afterwards; `with_known_optimum` returns an annotated copy.
class BoxQPInstance {
 public:
  BoxQPInstance(std::size_t n, Vector q, Vector v, Vector lower, Vector upper,
                std::optional<GeneratorSpec> origin = std::nullopt,
                std::optional<double> known_optimum = std::nullopt);

  std::size_t n() const { return n_; }
  double q(std::size_t i, std::size_t j) const { return q_[i * n_ + j]; }
  std::span<const double> q_row(std::size_t i) const { return {q_.data() + i * n_, n_}; }
  std::span<const double> q_data() const { return q_; }
  std::span<const double> v() const { return v_; }
  std::span<const double> lower() const { return lower_; }
  std::span<const double> upper() const { return upper_; }

  const std::optional<GeneratorSpec>& origin() const { return origin_; }
  std::optional<std::string> label() const;
  const std::optional<double>& known_optimum() const { return known_optimum_; }

  BoxQPInstance with_known_optimum(std::optional<double> value) const;

  // Same problem with Q and V divided by `factor` (> 0). The maximizer is
  // unchanged; the objective is divided by `factor`.
  BoxQPInstance scaled(double factor) const;

  bool operator==(const BoxQPInstance&) const = default;

 private:
  std::size_t n_;
  Vector q_;
  Vector v_;
  Vector lower_;
  Vector upper_;
  std::optional<GeneratorSpec> origin_;
  std::optional<double> known_optimum_;
};

struct SolutionVector {
  Vector x;
  double objective = 0.0;
};

double evaluate_objective(const BoxQPInstance& inst, std::span<const double> x);

// Qx + V. `out` must have length n.
void gradient_into(const BoxQPInstance& inst, std::span<const double> x, std::span<double> out);
Vector gradient(const BoxQPInstance& inst, std::span<const double> x);

Vector project_to_box(const BoxQPInstance& inst, std::span<const double> x);
void project_in_place(const BoxQPInstance& inst, std::span<double> x);

// Box midpoint (lower + upper) / 2.
Vector box_midpoint(const BoxQPInstance& inst);

/// Random instance on [0,1]^n. Each upper-triangle entry of Q (diagonal
/// included) and each entry of V is kept with probability `density` and then
/// drawn uniformly from the integers -50..50; Q is mirrored.
BoxQPInstance generate_instance(const GeneratorSpec& spec);

}  // namespace boxqp
