#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "boxqp/instance_io.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;
using boxqp::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  args.insert(args.begin(), "boxqp");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("boxqp-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("generate names files N-D-S and rejects bad densities") {
  const auto dir = fresh_dir("gen");
  auto r = call({"generate", "--n", "8", "--density", "0.5", "--seed", "3", "--count", "2",
                 "--out-dir", dir.string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "8-50-3.boxqp"));
  CHECK(fs::exists(dir / "8-50-4.boxqp"));
  const auto first = slurp(dir / "8-50-3.boxqp");
  call({"generate", "--n", "8", "--density", "0.5", "--seed", "3", "--out-dir", dir.string()});
  CHECK(slurp(dir / "8-50-3.boxqp") == first);
  CHECK(call({"generate", "--n", "8", "--density", "1.5", "--seed", "3"}).code == 1);
  CHECK(call({"generate", "--n", "8", "--density", "0", "--seed", "3"}).code == 1);
  CHECK(call({"generate", "--n", "4", "--density", "0.5", "--seed", "1", "--out-dir",
              "/proc/boxqp-denied"}).code == 2);
}

TEST_CASE("certify records the optimum and is idempotent") {
  const auto dir = fresh_dir("cert");
  call({"generate", "--n", "5", "--density", "0.8", "--seed", "1", "--out-dir", dir.string()});
  const auto file = (dir / "5-80-1.boxqp").string();
  CHECK(call({"certify", "--instance", file}).code == 0);
  const auto once = slurp(file);
  CHECK(once.find("\nOPT ") != std::string::npos);
  CHECK(call({"certify", "--instance", file}).code == 0);
  CHECK(slurp(file) == once);

  call({"generate", "--n", "13", "--density", "0.5", "--seed", "1", "--out-dir", dir.string()});
  CHECK(call({"certify", "--instance", (dir / "13-50-1.boxqp").string()}).code == 3);
  CHECK(call({"certify", "--instance", (dir / "missing.boxqp").string()}).code == 2);
}

TEST_CASE("solve on the parabola and flag handling") {
  const auto dir = fresh_dir("solve");
  const auto file = dir / "parabola.boxqp";
  boxqp::save_instance(boxqp::BoxQPInstance(1, {-2.0}, {1.0}, {0.0}, {1.0}, std::nullopt, 0.25), file);
  const auto out = dir / "res.csv";
  const std::vector<std::string> args{"solve", "--instance", file.string(), "--solver", "langevin",
                                      "--trials", "50", "--seed", "42", "--out", out.string(),
                                      "-P", "n_iter=3000"};
  auto r = call(args);
  REQUIRE(r.code == 0);
  const auto first = slurp(out);
  CHECK(call(args).code == 0);
  CHECK(slurp(out) == first);
  std::istringstream best(r.out.substr(r.out.find("best objective ") + 15));
  double value = 0.0;
  best >> value;
  CHECK(value >= 0.249);

  CHECK(call({"solve", "--instance", file.string(), "--solver", "annealer"}).code == 1);
  CHECK(call({"solve", "--instance", file.string(), "--solver", "langevin", "-P", "dt=-1"}).code == 1);

  // Flags override the config file.
  const auto cfg = dir / "solvers.cfg";
  std::ofstream(cfg) << "[langevin]\nn_iter = 100\nsigma = 0.3\n";
  r = call({"solve", "--instance", file.string(), "--solver", "langevin", "--trials", "2", "--config",
            cfg.string(), "-P", "sigma=0.05", "--out", out.string()});
  CHECK(r.code == 0);
  const auto text = slurp(out);
  CHECK(text.find("# n_iter = 100") != std::string::npos);
  CHECK(text.find("# sigma = 0.05") != std::string::npos);
}

TEST_CASE("solve warns when most trials diverge") {
  const auto dir = fresh_dir("diverge");
  const auto file = dir / "i.boxqp";
  call({"generate", "--n", "5", "--density", "1", "--seed", "2", "--out-dir", dir.string()});
  auto r = call({"solve", "--instance", (dir / "5-100-2.boxqp").string(), "--solver", "dl-ccvm",
                 "--trials", "3", "-P", "dt=5", "-P", "objective_scale=1", "--out",
                 (dir / "r.csv").string()});
  CHECK(r.code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
  CHECK(slurp(dir / "r.csv").find("diverged@") != std::string::npos);
}

TEST_CASE("bench skips uncertified files and is reproducible; report builds curves") {
  const auto dir = fresh_dir("bench");
  const auto inst_dir = dir / "instances";
  call({"generate", "--n", "4", "--density", "0.6", "--seed", "1", "--count", "2", "--out-dir",
        inst_dir.string()});
  call({"generate", "--n", "4", "--density", "0.6", "--seed", "9", "--out-dir", inst_dir.string()});
  call({"certify", "--instance", (inst_dir / "4-60-1.boxqp").string()});
  call({"certify", "--instance", (inst_dir / "4-60-2.boxqp").string()});

  const auto csv = dir / "bench.csv";
  std::vector<std::string> args{"bench", "--dir", inst_dir.string(), "--solvers", "langevin,mf-ccvm",
                                "--gaps", "0.1,5", "--trials", "10", "--trial-time", "0.01",
                                "--out", csv.string(), "-P", "n_iter=500"};
  auto r = call(args);
  REQUIRE(r.code == 0);
  CHECK(r.err.find("4-60-9") != std::string::npos);
  const auto first = slurp(csv);
  // header + 2 instances x 2 solvers x 2 gaps
  CHECK(std::count(first.begin(), first.end(), '\n') == 9);
  args.insert(args.begin(), {"--threads", "3"});
  CHECK(call(args).code == 0);
  CHECK(slurp(csv) == first);

  const auto curves = dir / "curves.csv";
  CHECK(call({"report", "--in", csv.string(), "--out", curves.string()}).code == 0);
  const auto text = slurp(curves);
  CHECK(text.rfind("solver,tts,N,gap_percent", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

TEST_CASE("default output directory comes from the environment") {
  const auto dir = fresh_dir("env");
  ::setenv(boxqp::cli::kOutDirEnv, dir.string().c_str(), 1);
  CHECK(call({"generate", "--n", "3", "--density", "1", "--seed", "5"}).code == 0);
  ::unsetenv(boxqp::cli::kOutDirEnv);
  CHECK(fs::exists(dir / "3-100-5.boxqp"));
}

TEST_CASE("usage errors") {
  CHECK(call({}).code == 1);
  CHECK(call({"frobnicate"}).code == 1);
  CHECK(call({"--help"}).code == 0);
}
