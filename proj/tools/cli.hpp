#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace boxqp::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIoOrParse = 2,
  kCapacity = 3,
  kDivergence = 4,
};

// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "BOXQP_OUT_DIR";

// Runs one command line (args[0] is the program name) and returns its exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace boxqp::cli
