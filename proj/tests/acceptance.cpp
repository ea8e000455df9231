// Acceptance run: one PASS/FAIL line per criterion.
//
//   boxqp_acceptance [--only K] [--expect-fail K[,K...]]
//
// The exit status is 0 when every failing criterion is listed in
// --expect-fail. Listed criteria still print FAIL when they fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "boxqp/bench.hpp"
#include "boxqp/error.hpp"
#include "boxqp/instance_io.hpp"
#include "boxqp/oracle.hpp"
#include "boxqp/solvers.hpp"
#include "cli.hpp"
#include "support.hpp"

using namespace boxqp;
using boxqp::testing::central_difference;
using boxqp::testing::naive_objective;
using boxqp::testing::relative_error;
using boxqp::testing::unclamped_decode;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return percentile(v, 0.5);
}

BoxQPInstance certified(const GeneratorSpec& spec) {
  auto inst = generate_instance(spec);
  return inst.with_known_optimum(solve_exact(inst).solution.objective);
}

// Random instance on a random box, so the decode scale factors differ per axis.
BoxQPInstance random_box_instance(Rng& rng, std::size_t n, std::uint64_t seed) {
  const auto base = generate_instance({n, 0.1 + 0.9 * rng.uniform(), seed});
  Vector lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = -3.0 + 3.0 * rng.uniform();
    hi[i] = lo[i] + 0.1 + 4.0 * rng.uniform();
  }
  return BoxQPInstance(n, Vector(base.q_data().begin(), base.q_data().end()),
                       Vector(base.v().begin(), base.v().end()), lo, hi);
}

// 1. Coupling drifts equal the gradient of f composed with the decoding.
Verdict drift_equivalence() {
  const auto start = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 1 + rng.uniform_int(0, 19);
    const auto inst = random_box_instance(rng, n, 1000 + k);
    const double s = 0.05 + 2.0 * rng.uniform();
    Vector a(n);
    for (auto& ai : a) ai = s * (2.0 * rng.uniform() - 1.0);
    const auto composed = [&](const Vector& amp) {
      return naive_objective(inst, unclamped_decode(inst, amp, s));
    };
    // f composed with an affine map is quadratic: central differences are
    // exact apart from rounding, whatever the step.
    const auto fd = central_difference(composed, a, 1e-2 * s);
    worst = std::max({worst, relative_error(dl_drift(inst, a, s), fd),
                      relative_error(mf_encoded_drift(inst, a, s), fd)});
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-8 && elapsed < 10.0,
          fmt("max relative error %.2e over 100 pairs (bound 1e-8), %.2f s", worst, elapsed)};
}

// 2. Analytic gradient against central differences.
Verdict gradient_correctness() {
  Rng rng(202);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 1 + rng.uniform_int(0, 49);
    const auto inst = generate_instance({n, 0.1 + 0.9 * rng.uniform(), 2000u + k});
    Vector x(n);
    for (auto& xi : x) xi = rng.uniform();
    const auto fd = central_difference([&](const Vector& y) { return naive_objective(inst, y); }, x, 1e-5);
    worst = std::max(worst, relative_error(gradient(inst, x), fd));
  }
  return {worst <= 1e-6, fmt("max relative error %.2e over 100 instances (bound 1e-6)", worst)};
}

// 3. Active-set oracle against the fine grid.
Verdict oracle_cross_validation() {
  const auto start = Clock::now();
  double worst = 0.0;
  int kkt_failures = 0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 2 + k % 3;
    const auto inst = generate_instance({n, 0.3 + 0.7 * ((k * 7) % 10) / 9.0, 3000u + k});
    const auto exact = solve_exact(inst);
    const auto grid = grid_search(inst, 1e-3);
    worst = std::max(worst, std::abs(exact.solution.objective - grid.objective));
    kkt_failures += !verify_kkt(inst, exact.solution.x, 1e-8);
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-4 && kkt_failures == 0 && elapsed < 120.0,
          fmt("max |exact - grid| %.2e (bound 1e-4), %d first-order failures, %.1f s", worst,
              kkt_failures, elapsed)};
}

// 4. Each solver at the table midpoints on 20 certified N=10 instances, and
//    Langevin on the parabola.
Verdict solver_effectiveness() {
  const auto start = Clock::now();
  std::vector<BoxQPInstance> instances;
  for (std::uint64_t s = 0; s < 20; ++s) instances.push_back(certified({10, 0.5, s}));

  bool pass = true;
  std::ostringstream detail;
  for (auto kind : kAllSolvers) {
    const auto params = default_params(kind);
    int solved = 0;
    for (std::size_t k = 0; k < instances.size(); ++k) {
      const auto& inst = instances[k];
      const auto batch = run_batch(inst, params, 100, derive_seed(4, k));
      const bool hit = std::any_of(batch.begin(), batch.end(), [&](const TrialRecord& r) {
        return r.ok() && gap_of(r.result->x.objective, *inst.known_optimum()) <= 0.1 + 1e-9;
      });
      solved += hit;
    }
    const bool ok = solved >= 16;
    pass &= ok;
    detail << solver_name(kind) << " " << solved << "/20" << (ok ? "" : " (<16)") << "; ";
  }

  // sigma at the low end of its tuning range (see the parabola unit test for
  // the stationary-variance argument).
  auto lp = default_params(SolverKind::Langevin);
  lp.sigma = 0.02;
  const auto parabola = boxqp::testing::parabola();
  const auto batch = run_batch(parabola, lp, 1000, 44);
  int hits = 0;
  for (const auto& r : batch) hits += r.ok() && r.result->x.objective >= 0.249;
  const bool parabola_ok = hits >= 950;
  pass &= parabola_ok;
  const double elapsed = seconds_since(start);
  pass &= elapsed < 600.0;
  detail << fmt("parabola f >= 0.249 in %d/1000 trials at sigma 0.02; %.0f s", hits, elapsed);
  return {pass, detail.str()};
}

// 5. Most coordinates of the global maximizer sit on a bound.
Verdict boundary_property() {
  int qualifying = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto exact = solve_exact(generate_instance({10, 0.5, 500 + s}));
    const auto at_bound = std::count_if(exact.status.begin(), exact.status.end(),
                                        [](BoundStatus b) { return b != BoundStatus::Free; });
    qualifying += 2 * at_bound >= 10;
  }
  return {qualifying >= 45, fmt("%d/50 maximizers with >= 50%% of variables at a bound (need 45)", qualifying)};
}

// 6. Time-to-solution arithmetic.
Verdict tts_arithmetic() {
  const double a = r99(0.99), b = r99(0.5), c = physical_tts(15000, 20, 10e-12, 0.99);
  const bool pass = a == 1.0 && std::abs(b - 6.6439) <= 1e-3 && c == 3.0e-6;
  return {pass, fmt("r99(0.99)=%.17g r99(0.5)=%.6f physical_tts=%.17g s", a, b, c)};
}

// 7. Median machine TTS at gap 0.1% hardly depends on density, for every
//    solver. Medians are taken over solved instances, as in the curves.
Verdict density_independence() {
  const auto start = Clock::now();
  const std::vector<double> densities{0.3, 0.7, 1.0};
  std::vector<std::uint64_t> seeds(10);
  for (std::uint64_t s = 0; s < 10; ++s) seeds[s] = 700 + s;
  std::vector<std::vector<BoxQPInstance>> sets;
  for (double d : densities) {
    sets.emplace_back();
    for (auto s : seeds) sets.back().push_back(certified({10, d, s}));
  }
  const std::pair<SolverKind, const char*> grids[] = {
      {SolverKind::Langevin, "sigma=0.02,0.26,0.5"},
      {SolverKind::PumpedLangevin, "p0=1.5,1.75,2"},
      {SolverKind::DlCcvm, "p0=1.75,2.125,2.5"},
      {SolverKind::MfCcvm, "lambda=10,15,20"},
  };

  bool pass = true;
  std::ostringstream detail;
  for (const auto& [kind, axis] : grids) {
    const auto grid = ParamGrid::parse(axis).points(default_params(kind));
    std::vector<SolverParams> tuned;
    for (const auto& insts : sets) tuned.push_back(grid_tune(insts, grid, 50, 7).best);
    BenchOptions opts;
    opts.n_trials = 100;
    opts.master_seed = 77;
    const auto rows = density_sweep(10, densities, seeds, tuned, opts);

    std::vector<double> medians;
    std::vector<std::size_t> solved;
    for (double d : densities) {
      std::vector<double> tts;
      for (const auto& r : rows)
        if (r.density == d && std::isfinite(r.machine_tts_s)) tts.push_back(r.machine_tts_s);
      solved.push_back(tts.size());
      medians.push_back(tts.empty() ? kInfinity : median(tts));
    }
    const double ratio = *std::max_element(medians.begin(), medians.end()) /
                         *std::min_element(medians.begin(), medians.end());
    const bool ok = std::isfinite(ratio) && ratio < 10.0;
    pass &= ok;
    detail << solver_name(kind)
           << fmt(" %.3g/%.3g/%.3g s (solved %zu/%zu/%zu) ratio %.2f%s; ", medians[0], medians[1], medians[2],
                  solved[0], solved[1], solved[2], ratio, ok ? "" : "(!)");
  }
  detail << fmt("densities 0.3/0.7/1.0, bound 10, %.0f s", seconds_since(start));
  return {pass, detail.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 8. Byte-identical pipeline output across reruns and thread counts.
Verdict determinism() {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "boxqp-acceptance-determinism";
  fs::remove_all(dir);
  const auto inst_dir = dir / "instances";
  std::ostringstream sink;
  const auto cli = [&](std::vector<std::string> args) {
    args.insert(args.begin(), "boxqp");
    return cli::run(args, sink, sink);
  };
  int rc = cli({"generate", "--n", "6", "--density", "0.6", "--seed", "1", "--count", "3", "--out-dir",
                inst_dir.string()});
  for (int s = 1; s <= 3; ++s) rc |= cli({"certify", "--instance", (inst_dir / fmt("6-60-%d.boxqp", s)).string()});

  std::vector<std::string> outputs;
  for (const char* threads : {"1", "4", "1"}) {
    const auto csv = dir / fmt("bench-%s-%zu.csv", threads, outputs.size());
    const auto sweep = dir / fmt("sweep-%s-%zu.csv", threads, outputs.size());
    const auto curves = dir / fmt("curves-%s-%zu.csv", threads, outputs.size());
    rc |= cli({"--threads", threads, "bench", "--dir", inst_dir.string(), "--trials", "40", "--seed", "9",
               "--trial-time", "0.004", "--out", csv.string(), "-P", "n_iter=2000"});
    rc |= cli({"--threads", threads, "sweep", "--n", "5", "--densities", "0.3,1", "--seeds", "0:3",
               "--solver", "mf-ccvm", "--trials", "20", "--trial-time", "0.004", "--out", sweep.string(),
               "-P", "n_iter=1000"});
    rc |= cli({"report", "--in", csv.string(), "--out", curves.string()});
    outputs.push_back(slurp(csv) + slurp(sweep) + slurp(curves));
  }
  const bool same = outputs[0] == outputs[1] && outputs[1] == outputs[2] && !outputs[0].empty();
  return {rc == 0 && same, fmt("bench, sweep and report outputs %s across 3 runs (threads 1/4/1), %zu bytes",
                               same ? "identical" : "DIFFER", outputs[0].size())};
}

// Sum over n_iter steps of (noisy step - silent step) at a frozen state; one
// sample per coordinate per run.
template <class State, class Step>
std::vector<double> accumulated_noise(const State& frozen, const BoxQPInstance& inst, const SolverParams& p,
                                      Step step, Rng& rng, std::size_t runs,
                                      std::function<const Vector&(const State&)> component) {
  NoiseSource noise(rng);
  auto silent = NoiseSource::silent();
  std::vector<double> samples;
  samples.reserve(runs * inst.n());
  Vector total(inst.n());
  for (std::size_t r = 0; r < runs; ++r) {
    std::fill(total.begin(), total.end(), 0.0);
    for (std::size_t k = 0; k < p.n_iter; ++k) {
      State a = frozen, b = frozen;
      step(a, inst, p, k, noise);
      step(b, inst, p, k, silent);
      const auto& va = component(a);
      const auto& vb = component(b);
      for (std::size_t i = 0; i < inst.n(); ++i) total[i] += va[i] - vb[i];
    }
    samples.insert(samples.end(), total.begin(), total.end());
  }
  return samples;
}

double variance(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return v / static_cast<double>(xs.size() - 1);
}

// 9. Accumulated noise variance is unchanged by (dt, n) -> (dt/2, 2n).
Verdict noise_scaling() {
  const auto raw = generate_instance({10, 0.5, 900});
  const std::size_t runs = 10000;  // x 10 coordinates = 1e5 samples
  const std::size_t steps = 200;
  Rng rng(909);
  bool pass = true;
  std::ostringstream detail;
  for (auto kind : kAllSolvers) {
    auto coarse = default_params(kind);
    // The measured-mean clip is a nonlinearity applied after the noise;
    // switched off so the feedback channel stays Gaussian (see ledger).
    coarse.clip_measured = false;
    coarse.n_iter = steps;
    auto fine = coarse;
    fine.dt /= 2.0;
    fine.n_iter *= 2;
    auto inst = raw.scaled(objective_scale_for(raw, coarse));
    const std::size_t n = inst.n();
    if (kind == SolverKind::Langevin || kind == SolverKind::PumpedLangevin) {
      // Widen the box so the per-step clamp, a projection rather than part
      // of the noise, never binds at the frozen state.
      inst = BoxQPInstance(n, Vector(inst.q_data().begin(), inst.q_data().end()),
                           Vector(inst.v().begin(), inst.v().end()), Vector(n, -1e3), Vector(n, 1e3));
    }

    std::vector<double> vc, vf;
    std::vector<std::string> parts;
    switch (kind) {
      case SolverKind::Langevin:
      case SolverKind::PumpedLangevin: {
        const AmplitudeState frozen{Vector(n, 0.5)};
        auto step = kind == SolverKind::Langevin ? step_langevin : step_pumped_langevin;
        auto c = [](const AmplitudeState& s) -> const Vector& { return s.c; };
        vc.push_back(variance(accumulated_noise<AmplitudeState>(frozen, inst, coarse, step, rng, runs, c)));
        vf.push_back(variance(accumulated_noise<AmplitudeState>(frozen, inst, fine, step, rng, runs, c)));
        parts = {"c"};
        break;
      }
      case SolverKind::DlCcvm: {
        const QuadratureState frozen{Vector(n, 0.3), Vector(n, 0.2)};
        auto c = [](const QuadratureState& s) -> const Vector& { return s.c; };
        auto q = [](const QuadratureState& s) -> const Vector& { return s.s; };
        vc.push_back(variance(accumulated_noise<QuadratureState>(frozen, inst, coarse, step_dl_ccvm, rng, runs, c)));
        vf.push_back(variance(accumulated_noise<QuadratureState>(frozen, inst, fine, step_dl_ccvm, rng, runs, c)));
        vc.push_back(variance(accumulated_noise<QuadratureState>(frozen, inst, coarse, step_dl_ccvm, rng, runs, q)));
        vf.push_back(variance(accumulated_noise<QuadratureState>(frozen, inst, fine, step_dl_ccvm, rng, runs, q)));
        parts = {"c", "s"};
        break;
      }
      case SolverKind::MfCcvm: {
        const MeanFieldState frozen{Vector(n, 0.05), Vector(n, 1.2), {}};
        auto m = [](const MeanFieldState& s) -> const Vector& { return s.mu; };
        vc.push_back(variance(accumulated_noise<MeanFieldState>(frozen, inst, coarse, step_mf_ccvm, rng, runs, m)));
        vf.push_back(variance(accumulated_noise<MeanFieldState>(frozen, inst, fine, step_mf_ccvm, rng, runs, m)));
        parts = {"mu"};
        break;
      }
    }
    for (std::size_t k = 0; k < vc.size(); ++k) {
      const double ratio = vf[k] / vc[k];
      const bool ok = std::abs(ratio - 1.0) <= 0.05;
      pass &= ok;
      detail << solver_name(kind) << "." << parts[k] << " " << fmt("%.4f", ratio) << (ok ? "" : "(!)") << " ";
    }
  }
  return {pass, "variance ratio fine/coarse: " + detail.str() + "(bound 1 +/- 0.05)"};
}

// 10. 1000 MF trials at N=20 within the time budget, no divergence across
//     the table's ranges.
Verdict performance_envelope() {
  const auto inst = generate_instance({20, 0.5, 2});
  const auto start = Clock::now();
  const auto batch = run_batch(inst, default_params(SolverKind::MfCcvm), 1000, 10);
  const double elapsed = seconds_since(start);
  std::size_t failed = std::count_if(batch.begin(), batch.end(), [](const auto& r) { return !r.ok(); });

  std::size_t corner_failed = 0, corner_trials = 0;
  for (double p0 : {0.1, 1.0})
    for (double lambda : {10.0, 20.0}) {
      auto p = default_params(SolverKind::MfCcvm);
      p.p0 = p0;
      p.lambda = lambda;
      const auto corner = run_batch(inst, p, 50, 11);
      corner_trials += corner.size();
      corner_failed += std::count_if(corner.begin(), corner.end(), [](const auto& r) { return !r.ok(); });
    }
  const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
  // The budget is stated for 8 cores; scale it when fewer are available.
  const double budget = 300.0 * 8.0 / std::min(8u, cores);
  const bool pass = elapsed < budget && failed == 0 && corner_failed == 0;
  return {pass, fmt("1000 trials in %.1f s on %u core(s) (budget %.0f s), %zu diverged; range corners: %zu/%zu diverged",
                    elapsed, cores, budget, failed, corner_failed, corner_trials)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected_failures;
  int only = 0;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--only" && a + 1 < argc) {
      only = std::stoi(argv[++a]);
    } else if (arg == "--expect-fail" && a + 1 < argc) {
      std::stringstream ss(argv[++a]);
      std::string item;
      while (std::getline(ss, item, ',')) expected_failures.insert(std::stoi(item));
    } else {
      std::fprintf(stderr, "usage: %s [--only K] [--expect-fail K[,K...]]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"drift equivalence", drift_equivalence},
      {"gradient correctness", gradient_correctness},
      {"oracle cross-validation", oracle_cross_validation},
      {"solver effectiveness", solver_effectiveness},
      {"boundary-solution property", boundary_property},
      {"TTS arithmetic", tts_arithmetic},
      {"density independence", density_independence},
      {"determinism", determinism},
      {"noise scaling", noise_scaling},
      {"performance envelope", performance_envelope},
  };

  int unexpected = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (only && id != only) continue;
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const bool known = expected_failures.count(id) > 0;
    std::printf("criterion %2d %s  %s: %s%s\n", id, v.pass ? "PASS" : "FAIL", criteria[k].first,
                v.detail.c_str(), !v.pass && known ? " [known, see ledger]" : "");
    std::fflush(stdout);
    if (!v.pass && !known) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
