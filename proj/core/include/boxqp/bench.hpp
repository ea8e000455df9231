#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boxqp/problem.hpp"
#include "boxqp/solver_params.hpp"
#include "boxqp/solvers.hpp"

namespace boxqp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kDefaultPulseSeconds = 10e-12;
// Optima with magnitude at or below this use an absolute gap.
inline constexpr double kZeroOptimumThreshold = 1e-9;
// Absolute gap scale used for such optima.
inline constexpr double kZeroOptimumScale = 1.0;

struct GapLevel {
  double percent = 0.1;

  explicit GapLevel(double pct);
  bool operator==(const GapLevel&) const = default;
};

/// Shortfall of `found` below `optimum` in percent:
/// 100 (optimum - found) / |optimum|, or 100 (optimum - found) / 1.0 when
/// |optimum| <= 1e-9. Throws OptimumViolation when `found` exceeds the
/// optimum by more than 1e-9 relative; smaller excesses count as gap 0.
double gap_of(double found, double optimum);

// Fraction of trials whose objective is within `gap`; failed trials count
// as misses. Throws InvalidArgument on an empty list.
double success_probability(std::span<const TrialRecord> results, double optimum, GapLevel gap);
double success_probability(std::span<const double> objectives, double optimum, GapLevel gap);

/// Trials needed for 99% cumulative success: log(0.01)/log(1 - p_s).
/// Returns 1 for p_s >= 0.99 and +inf for p_s == 0.
double r99(double p_s);

// r99(p_s) * n_iter * n * t_pulse.
double physical_tts(std::size_t n_iter, std::size_t n, double t_pulse, double p_s);
// r99(p_s) * wall_time_per_trial.
double machine_tts(double wall_time_per_trial, double p_s);

// Median per-trial wall time of a batch.
double median_wall_time(std::span<const TrialRecord> records);

// Linear interpolation between order statistics, q in [0, 1]. `sorted` must
// be ascending and non-empty.
double percentile(std::span<const double> sorted, double q);

struct GapResult {
  double gap_percent = 0.0;
  double p_s = 0.0;
  double r99 = kInfinity;
  double machine_tts_s = kInfinity;
  double physical_tts_s = kInfinity;
};

struct BenchmarkRecord {
  std::string instance_label;
  std::size_t n = 0;
  std::optional<double> density;
  std::optional<std::uint64_t> seed;
  SolverKind solver = SolverKind::Langevin;
  std::vector<GapResult> per_gap;  // in the order of the requested gaps
  std::size_t n_trials = 0;
  std::size_t failed_trials = 0;
  std::size_t n_iter = 0;
  double wall_time_per_trial_s = 0.0;
  double t_pulse_s = kDefaultPulseSeconds;
  double optimum = 0.0;
  double best_objective = 0.0;
};

struct BenchOptions {
  std::vector<GapLevel> gaps{GapLevel(0.1), GapLevel(1.0), GapLevel(5.0)};
  std::size_t n_trials = 1000;
  std::uint64_t master_seed = 0;
  double t_pulse = kDefaultPulseSeconds;
  unsigned threads = 0;
  // Fixed machine time per trial instead of the measured median. Makes the
  // machine TTS columns reproducible.
  std::optional<double> trial_seconds;
};

/// Runs a batch on a certified instance (known_optimum required) and scores
/// it at every gap level.
BenchmarkRecord benchmark_instance(const BoxQPInstance& inst, const SolverParams& params,
                                   const BenchOptions& options);

enum class TtsKind { Machine, Physical };

struct CurvePoint {
  std::size_t n = 0;
  std::size_t instances = 0;
  std::size_t solved = 0;  // instances with p_s > 0
  bool present = false;    // false when no instance was solved
  double median = kInfinity;
  double p25 = kInfinity;
  double p75 = kInfinity;

  double solved_fraction() const {
    return instances ? static_cast<double>(solved) / static_cast<double>(instances) : 0.0;
  }
};

struct AggregateCurve {
  SolverKind solver = SolverKind::Langevin;
  double gap_percent = 0.0;
  TtsKind kind = TtsKind::Physical;
  std::vector<CurvePoint> points;  // ascending n
};

/// Median and interquartile range of finite TTS values per problem size for
/// one solver and gap. Unsolved instances are counted but excluded from
/// percentiles. Records of other solvers are ignored.
AggregateCurve aggregate(std::span<const BenchmarkRecord> records, SolverKind solver,
                         GapLevel gap, TtsKind kind);

struct SweepRow {
  double density = 0.0;
  std::uint64_t seed = 0;
  std::string label;
  double optimum = 0.0;
  double p_s = 0.0;
  double r99 = kInfinity;
  double machine_tts_s = kInfinity;
  double physical_tts_s = kInfinity;
};

/// Generates, certifies and benchmarks instance n-D-S for every density and
/// seed at gap 0.1%. `params` holds either one parameter set or one per
/// density. Rows are ordered by density, then seed.
std::vector<SweepRow> density_sweep(std::size_t n, std::span<const double> densities,
                                    std::span<const std::uint64_t> seeds,
                                    std::span<const SolverParams> params,
                                    const BenchOptions& options);

/// Cartesian grid over parameter keys; the first axis varies slowest.
class ParamGrid {
 public:
  ParamGrid() = default;
  // "key=v1,v2;key2=w1" form.
  static ParamGrid parse(std::string_view text);

  void add_axis(std::string key, std::vector<std::string> values);
  std::vector<SolverParams> points(const SolverParams& base) const;

 private:
  std::vector<std::pair<std::string, std::vector<std::string>>> axes_;
};

struct TuneResult {
  std::size_t best_index = 0;
  SolverParams best;
  std::vector<double> mean_success;  // per grid point
};

/// Grid point with the highest mean success probability at gap 0.1% over
/// the certified instance set; ties keep the earliest point. Every point
/// sees the same trial seeds. Throws InvalidArgument for an empty grid.
TuneResult grid_tune(std::span<const BoxQPInstance> instances,
                     std::span<const SolverParams> grid, std::size_t n_trials,
                     std::uint64_t master_seed, unsigned threads = 0);

// Serialization. Infinite values are written as "inf".
std::string format_number(double value);
inline constexpr const char* kBenchCsvHeader =
    "solver,N,density,seed,gap_percent,p_s,r99,machine_tts_s,physical_tts_s";
std::string bench_csv(std::span<const BenchmarkRecord> records);
std::vector<BenchmarkRecord> parse_bench_csv(const std::string& text);
std::string records_json(std::span<const BenchmarkRecord> records);
std::string curves_csv(std::span<const AggregateCurve> curves);
std::string sweep_csv(std::span<const SweepRow> rows, SolverKind solver);

}  // namespace boxqp
