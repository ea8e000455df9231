#include "boxqp/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "boxqp/error.hpp"
#include "boxqp/instance_io.hpp"
#include "boxqp/oracle.hpp"
#include "boxqp/rng.hpp"

namespace boxqp {

namespace {

// Slack on gap comparisons so that, e.g., 199.8 against 200 counts as 0.1%.
constexpr double kGapSlack = 1e-9;

bool within(double found, double optimum, GapLevel gap) {
  return gap_of(found, optimum) <= gap.percent + kGapSlack;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(const std::string& s) {
  if (s == "inf") return kInfinity;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw InvalidArgument("bad number '" + s + "'");
  return v;
}

}  // namespace

GapLevel::GapLevel(double pct) : percent(pct) {
  if (!(pct > 0.0) || !std::isfinite(pct)) throw InvalidArgument("gap level must be positive");
}

double gap_of(double found, double optimum) {
  const double scale = std::abs(optimum) > kZeroOptimumThreshold ? std::abs(optimum) : kZeroOptimumScale;
  const double gap = 100.0 * (optimum - found) / scale;
  if (gap < 0.0) {
    if (found - optimum > 1e-9 * std::max(1.0, std::abs(optimum))) {
      std::ostringstream os;
      os.precision(17);
      os << "objective " << found << " exceeds recorded optimum " << optimum
         << " (stale known optimum?)";
      throw OptimumViolation(os.str());
    }
    return 0.0;
  }
  return gap;
}

double success_probability(std::span<const double> objectives, double optimum, GapLevel gap) {
  if (objectives.empty()) throw InvalidArgument("success probability of an empty result list");
  std::size_t hits = 0;
  for (double f : objectives)
    if (within(f, optimum, gap)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(objectives.size());
}

double success_probability(std::span<const TrialRecord> results, double optimum, GapLevel gap) {
  if (results.empty()) throw InvalidArgument("success probability of an empty result list");
  std::size_t hits = 0;
  for (const auto& r : results)
    if (r.ok() && within(r.result->x.objective, optimum, gap)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

double r99(double p_s) {
  if (!(p_s >= 0.0 && p_s <= 1.0)) throw InvalidArgument("success probability must lie in [0, 1]");
  if (p_s >= 0.99) return 1.0;
  if (p_s == 0.0) return kInfinity;
  return std::log(0.01) / std::log1p(-p_s);
}

double physical_tts(std::size_t n_iter, std::size_t n, double t_pulse, double p_s) {
  if (!(t_pulse > 0.0)) throw InvalidArgument("pulse spacing must be positive");
  // Work in picoseconds: pulse spacings are whole picoseconds in practice,
  // which are exact doubles, so e.g. 15000 * 20 * 10 ps comes out as 3e-6 s.
  const double t_max =
      static_cast<double>(n_iter) * static_cast<double>(n) * (t_pulse * 1e12) / 1e12;
  const double r = r99(p_s);
  return std::isinf(r) ? kInfinity : r * t_max;
}

double machine_tts(double wall_time_per_trial, double p_s) {
  const double r = r99(p_s);
  return std::isinf(r) ? kInfinity : r * wall_time_per_trial;
}

double median_wall_time(std::span<const TrialRecord> records) {
  if (records.empty()) throw InvalidArgument("median of an empty batch");
  std::vector<double> times;
  times.reserve(records.size());
  for (const auto& r : records) times.push_back(r.wall_seconds);
  std::sort(times.begin(), times.end());
  return percentile(times, 0.5);
}

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("percentile of an empty set");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BenchmarkRecord benchmark_instance(const BoxQPInstance& inst, const SolverParams& params,
                                   const BenchOptions& options) {
  if (!inst.known_optimum()) throw InvalidArgument("instance has no certified optimum");
  const double optimum = *inst.known_optimum();
  const auto batch = run_batch(inst, params, options.n_trials, options.master_seed, options.threads);

  BenchmarkRecord rec;
  rec.instance_label = inst.label().value_or("unlabelled");
  rec.n = inst.n();
  if (const auto& origin = inst.origin()) {
    rec.density = origin->density;
    rec.seed = origin->seed;
  }
  rec.solver = params.kind;
  rec.n_trials = options.n_trials;
  rec.n_iter = params.n_iter;
  rec.t_pulse_s = options.t_pulse;
  rec.optimum = optimum;
  rec.wall_time_per_trial_s = options.trial_seconds ? *options.trial_seconds : median_wall_time(batch);
  rec.best_objective = -kInfinity;
  for (const auto& r : batch) {
    if (!r.ok())
      ++rec.failed_trials;
    else
      rec.best_objective = std::max(rec.best_objective, r.result->x.objective);
  }
  for (const auto& gap : options.gaps) {
    GapResult g;
    g.gap_percent = gap.percent;
    g.p_s = success_probability(batch, optimum, gap);
    g.r99 = r99(g.p_s);
    g.machine_tts_s = machine_tts(rec.wall_time_per_trial_s, g.p_s);
    g.physical_tts_s = physical_tts(rec.n_iter, rec.n, rec.t_pulse_s, g.p_s);
    rec.per_gap.push_back(g);
  }
  return rec;
}

AggregateCurve aggregate(std::span<const BenchmarkRecord> records, SolverKind solver, GapLevel gap,
                         TtsKind kind) {
  AggregateCurve curve;
  curve.solver = solver;
  curve.gap_percent = gap.percent;
  curve.kind = kind;
  std::map<std::size_t, std::pair<std::size_t, std::vector<double>>> groups;
  for (const auto& rec : records) {
    if (rec.solver != solver) continue;
    for (const auto& g : rec.per_gap) {
      if (std::abs(g.gap_percent - gap.percent) > 1e-12) continue;
      auto& [count, values] = groups[rec.n];
      ++count;
      const double tts = kind == TtsKind::Machine ? g.machine_tts_s : g.physical_tts_s;
      if (g.p_s > 0.0 && std::isfinite(tts)) values.push_back(tts);
    }
  }
  for (auto& [n, group] : groups) {
    auto& [count, values] = group;
    CurvePoint pt;
    pt.n = n;
    pt.instances = count;
    pt.solved = values.size();
    if (!values.empty()) {
      std::sort(values.begin(), values.end());
      pt.present = true;
      pt.p25 = percentile(values, 0.25);
      pt.median = percentile(values, 0.5);
      pt.p75 = percentile(values, 0.75);
    }
    curve.points.push_back(pt);
  }
  return curve;
}

std::vector<SweepRow> density_sweep(std::size_t n, std::span<const double> densities,
                                    std::span<const std::uint64_t> seeds,
                                    std::span<const SolverParams> params,
                                    const BenchOptions& options) {
  if (params.empty() || (params.size() != 1 && params.size() != densities.size()))
    throw InvalidArgument("density sweep needs one parameter set or one per density");
  std::vector<SweepRow> rows;
  std::uint64_t row_index = 0;
  for (std::size_t d = 0; d < densities.size(); ++d) {
    const auto& p = params.size() == 1 ? params[0] : params[d];
    for (auto seed : seeds) {
      const GeneratorSpec spec{n, densities[d], seed};
      auto inst = generate_instance(spec);
      inst = inst.with_known_optimum(solve_exact(inst).solution.objective);
      BenchOptions opts = options;
      opts.gaps = {GapLevel(0.1)};
      opts.master_seed = derive_seed(options.master_seed, row_index++);
      const auto rec = benchmark_instance(inst, p, opts);
      SweepRow row;
      row.density = densities[d];
      row.seed = seed;
      row.label = spec.label();
      row.optimum = rec.optimum;
      row.p_s = rec.per_gap[0].p_s;
      row.r99 = rec.per_gap[0].r99;
      row.machine_tts_s = rec.per_gap[0].machine_tts_s;
      row.physical_tts_s = rec.per_gap[0].physical_tts_s;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

ParamGrid ParamGrid::parse(std::string_view text) {
  ParamGrid grid;
  for (const auto& axis : split(text, ';')) {
    if (axis.empty()) continue;
    const auto eq = axis.find('=');
    if (eq == std::string::npos) throw InvalidArgument("grid axis '" + axis + "' lacks '='");
    auto values = split(std::string_view(axis).substr(eq + 1), ',');
    grid.add_axis(axis.substr(0, eq), std::move(values));
  }
  return grid;
}

void ParamGrid::add_axis(std::string key, std::vector<std::string> values) {
  if (values.empty()) throw InvalidArgument("grid axis '" + key + "' has no values");
  axes_.emplace_back(std::move(key), std::move(values));
}

std::vector<SolverParams> ParamGrid::points(const SolverParams& base) const {
  std::vector<SolverParams> out{base};
  for (const auto& [key, values] : axes_) {
    std::vector<SolverParams> next;
    next.reserve(out.size() * values.size());
    for (const auto& p : out) {
      for (const auto& v : values) {
        SolverParams q = p;
        q.set(key, v);
        next.push_back(std::move(q));
      }
    }
    out = std::move(next);
  }
  return out;
}

TuneResult grid_tune(std::span<const BoxQPInstance> instances, std::span<const SolverParams> grid,
                     std::size_t n_trials, std::uint64_t master_seed, unsigned threads) {
  if (grid.empty()) throw InvalidArgument("parameter grid is empty");
  if (instances.empty()) throw InvalidArgument("tuning needs at least one instance");
  for (const auto& inst : instances)
    if (!inst.known_optimum()) throw InvalidArgument("tuning instances must be certified");
  TuneResult out;
  double best = -1.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double total = 0.0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const auto batch = run_batch(instances[i], grid[g], n_trials, derive_seed(master_seed, i), threads);
      total += success_probability(batch, *instances[i].known_optimum(), GapLevel(0.1));
    }
    const double mean = total / static_cast<double>(instances.size());
    out.mean_success.push_back(mean);
    if (mean > best) {
      best = mean;
      out.best_index = g;
    }
  }
  out.best = grid[out.best_index];
  return out;
}

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return format_real(value);
}

std::string bench_csv(std::span<const BenchmarkRecord> records) {
  std::string out = std::string(kBenchCsvHeader) + "\n";
  for (const auto& rec : records) {
    for (const auto& g : rec.per_gap) {
      out += std::string(solver_name(rec.solver)) + "," + std::to_string(rec.n) + "," +
             (rec.density ? format_real(*rec.density) : "-") + "," +
             (rec.seed ? std::to_string(*rec.seed) : "-") + "," + format_number(g.gap_percent) +
             "," + format_number(g.p_s) + "," + format_number(g.r99) + "," +
             format_number(g.machine_tts_s) + "," + format_number(g.physical_tts_s) + "\n";
    }
  }
  return out;
}

std::vector<BenchmarkRecord> parse_bench_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != kBenchCsvHeader)
    throw ParseError(1, std::string("expected CSV header '") + kBenchCsvHeader + "'");
  std::vector<BenchmarkRecord> records;
  std::map<std::tuple<std::string, std::size_t, std::string, std::string>, std::size_t> index;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw ParseError(line_no, "expected 9 columns");
    try {
      const auto key = std::make_tuple(f[0], static_cast<std::size_t>(std::stoull(f[1])), f[2], f[3]);
      auto it = index.find(key);
      if (it == index.end()) {
        BenchmarkRecord rec;
        rec.solver = parse_solver_kind(f[0]);
        rec.n = std::get<1>(key);
        if (f[2] != "-") rec.density = parse_number(f[2]);
        if (f[3] != "-") rec.seed = std::stoull(f[3]);
        rec.instance_label = std::to_string(rec.n) + "-" + f[2] + "-" + f[3];
        it = index.emplace(key, records.size()).first;
        records.push_back(std::move(rec));
      }
      GapResult g;
      g.gap_percent = parse_number(f[4]);
      g.p_s = parse_number(f[5]);
      g.r99 = parse_number(f[6]);
      g.machine_tts_s = parse_number(f[7]);
      g.physical_tts_s = parse_number(f[8]);
      records[it->second].per_gap.push_back(g);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return records;
}

std::string records_json(std::span<const BenchmarkRecord> records) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return format_number(v);
    return v;
  };
  nlohmann::json doc = nlohmann::json::object();
  doc["zero_optimum_gap_scale"] = kZeroOptimumScale;
  doc["records"] = nlohmann::json::array();
  for (const auto& rec : records) {
    for (const auto& g : rec.per_gap) {
      nlohmann::json j;
      j["instance_label"] = rec.instance_label;
      j["solver_kind"] = std::string(solver_name(rec.solver));
      j["N"] = rec.n;
      j["gap_percent"] = g.gap_percent;
      j["success_probability"] = g.p_s;
      j["r99"] = num(g.r99);
      j["machine_tts_seconds"] = num(g.machine_tts_s);
      j["physical_tts_seconds"] = num(g.physical_tts_s);
      j["n_trials"] = rec.n_trials;
      j["failed_trials"] = rec.failed_trials;
      j["n_iter"] = rec.n_iter;
      j["wall_time_per_trial_seconds"] = rec.wall_time_per_trial_s;
      j["t_pulse_seconds"] = rec.t_pulse_s;
      j["optimum"] = rec.optimum;
      j["best_objective"] = num(rec.best_objective);
      doc["records"].push_back(std::move(j));
    }
  }
  return doc.dump(2) + "\n";
}

std::string curves_csv(std::span<const AggregateCurve> curves) {
  std::string out = "solver,tts,N,gap_percent,median_tts_s,p25_tts_s,p75_tts_s,solved_fraction,note\n";
  for (const auto& c : curves) {
    for (const auto& pt : c.points) {
      out += std::string(solver_name(c.solver)) + "," +
             (c.kind == TtsKind::Machine ? "machine" : "physical") + "," + std::to_string(pt.n) +
             "," + format_number(c.gap_percent) + ",";
      if (pt.present) {
        out += format_number(pt.median) + "," + format_number(pt.p25) + "," + format_number(pt.p75);
      } else {
        out += ",,";
      }
      out += "," + format_number(pt.solved_fraction()) + "," + (pt.present ? "" : "absent: no instance solved") +
             "\n";
    }
  }
  return out;
}

std::string sweep_csv(std::span<const SweepRow> rows, SolverKind solver) {
  std::string out = "solver,density,seed,label,optimum,p_s,r99,machine_tts_s,physical_tts_s\n";
  for (const auto& r : rows) {
    out += std::string(solver_name(solver)) + "," + format_real(r.density) + "," +
           std::to_string(r.seed) + "," + r.label + "," + format_real(r.optimum) + "," +
           format_number(r.p_s) + "," + format_number(r.r99) + "," + format_number(r.machine_tts_s) +
           "," + format_number(r.physical_tts_s) + "\n";
  }
  return out;
}

}  // namespace boxqp
