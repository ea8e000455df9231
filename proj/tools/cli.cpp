#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "boxqp/bench.hpp"
#include "boxqp/error.hpp"
#include "boxqp/instance_io.hpp"
#include "boxqp/oracle.hpp"
#include "boxqp/solvers.hpp"

namespace boxqp::cli {

namespace fs = std::filesystem;

namespace {

fs::path default_out_dir() {
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return ".";
}

fs::path resolve_out(const std::string& given, const std::string& fallback_name) {
  if (!given.empty()) return given;
  return default_out_dir() / fallback_name;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> parse_reals(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw InvalidArgument("invalid number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument("empty list");
  return out;
}

// "3,5,9" or "0:10" (half-open range).
std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> out;
  if (auto colon = spec.find(':'); colon != std::string::npos) {
    const auto lo = std::stoull(spec.substr(0, colon));
    const auto hi = std::stoull(spec.substr(colon + 1));
    for (auto s = lo; s < hi; ++s) out.push_back(s);
  } else {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) out.push_back(std::stoull(item));
  }
  if (out.empty()) throw InvalidArgument("no seeds given");
  return out;
}

std::vector<GapLevel> parse_gaps(const std::string& list) {
  std::vector<GapLevel> gaps;
  for (double g : parse_reals(list)) gaps.emplace_back(g);
  return gaps;
}

struct ParamOptions {
  std::string config;
  std::vector<std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "Solver config file");
    cmd->add_option("-P,--param", overrides, "Parameter override key=value (wins over --config)");
  }

  SolverParams resolve(SolverKind kind) const {
    SolverConfig cfg = config.empty() ? SolverConfig{} : SolverConfig::load(config);
    SolverParams p = cfg.params_for(kind);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InvalidArgument("expected key=value, got '" + kv + "'");
      p.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    p.validate();
    return p;
  }
};

std::vector<fs::path> instance_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".boxqp") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

void write_vector(std::ostream& os, std::span<const double> x) {
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? " " : "") << format_real(x[i]);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic solvers and time-to-solution benchmarks for box-constrained QP"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

  // generate
  auto* gen = app.add_subcommand("generate", "Write random N-D-S instances");
  std::size_t gen_n = 0;
  double gen_density = 1.0;
  std::uint64_t gen_seed = 0;
  std::size_t gen_count = 1;
  std::string gen_dir;
  gen->add_option("--n", gen_n, "Problem size")->required()->check(CLI::PositiveNumber);
  gen->add_option("--density", gen_density, "Density of nonzero entries in (0, 1]")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", gen_seed, "First seed")->required();
  gen->add_option("--count", gen_count, "Number of consecutive seeds")->check(CLI::PositiveNumber);
  gen->add_option("--out-dir", gen_dir, "Output directory (default $BOXQP_OUT_DIR or .)");

  // certify
  auto* cert = app.add_subcommand("certify", "Compute the global optimum and record it in the file");
  std::string cert_file;
  std::string cert_method = "active-set";
  double cert_resolution = 1e-3;
  std::size_t cert_limit = kDefaultOracleLimit;
  cert->add_option("--instance", cert_file, "Instance file")->required();
  cert->add_option("--method", cert_method, "active-set or grid")
      ->check(CLI::IsMember({"active-set", "grid"}));
  cert->add_option("--resolution", cert_resolution, "Grid spacing for --method grid");
  cert->add_option("--n-limit", cert_limit, "Largest n accepted by the active-set oracle");

  // solve
  auto* solve = app.add_subcommand("solve", "Run a batch of trials on one instance");
  std::string solve_file, solve_solver, solve_out;
  std::size_t solve_trials = 1000;
  std::uint64_t solve_seed = 0;
  ParamOptions solve_params;
  solve->add_option("--instance", solve_file, "Instance file")->required();
  solve->add_option("--solver", solve_solver, "langevin, pumped, dl-ccvm or mf-ccvm")->required();
  solve->add_option("--trials", solve_trials, "Number of trials")->check(CLI::PositiveNumber);
  solve->add_option("--seed", solve_seed, "Master seed");
  solve->add_option("--out", solve_out, "Results file");
  solve_params.attach(solve);

  // bench
  auto* bench = app.add_subcommand("bench", "Benchmark every certified instance of a directory");
  std::string bench_dir, bench_out, bench_records, bench_solvers = "langevin,pumped,dl-ccvm,mf-ccvm";
  std::string bench_gaps = "0.1,1,5";
  double bench_pulse = kDefaultPulseSeconds;
  std::size_t bench_trials = 1000;
  std::uint64_t bench_seed = 0;
  std::optional<double> bench_trial_time;
  ParamOptions bench_params;
  bench->add_option("--dir", bench_dir, "Directory of .boxqp files")->required();
  bench->add_option("--solvers", bench_solvers, "Comma-separated solver names");
  bench->add_option("--gaps", bench_gaps, "Gap levels in percent");
  bench->add_option("--t-pulse", bench_pulse, "Pulse spacing in seconds");
  bench->add_option("--trials", bench_trials, "Trials per instance")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_seed, "Master seed");
  bench->add_option("--trial-time", bench_trial_time,
                    "Fixed machine seconds per trial instead of the measured median");
  bench->add_option("--out", bench_out, "CSV output");
  bench->add_option("--records", bench_records, "Structured record document (JSON)");
  bench_params.attach(bench);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Density sweep at gap 0.1%");
  std::size_t sweep_n = 10;
  std::string sweep_densities = "0.3,0.7,1.0", sweep_seeds = "0:10", sweep_solver, sweep_out;
  std::size_t sweep_trials = 100;
  std::uint64_t sweep_seed = 0;
  double sweep_pulse = kDefaultPulseSeconds;
  std::optional<double> sweep_trial_time;
  ParamOptions sweep_params;
  sweep->add_option("--n", sweep_n, "Problem size")->check(CLI::PositiveNumber);
  sweep->add_option("--densities", sweep_densities, "Comma-separated densities");
  sweep->add_option("--seeds", sweep_seeds, "Seed list (a,b,c) or half-open range (lo:hi)");
  sweep->add_option("--solver", sweep_solver, "Solver name")->required();
  sweep->add_option("--trials", sweep_trials, "Trials per instance")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", sweep_seed, "Master seed");
  sweep->add_option("--t-pulse", sweep_pulse, "Pulse spacing in seconds");
  sweep->add_option("--trial-time", sweep_trial_time, "Fixed machine seconds per trial");
  sweep->add_option("--out", sweep_out, "CSV output");
  sweep_params.attach(sweep);

  // tune
  auto* tune = app.add_subcommand("tune", "Grid search of solver parameters on certified instances");
  std::string tune_dir, tune_solver, tune_grid, tune_out;
  std::size_t tune_trials = 100;
  std::uint64_t tune_seed = 0;
  ParamOptions tune_params;
  tune->add_option("--dir", tune_dir, "Directory of certified .boxqp files")->required();
  tune->add_option("--solver", tune_solver, "Solver name")->required();
  tune->add_option("--grid", tune_grid, "Grid as key=v1,v2;key2=w1,w2")->required();
  tune->add_option("--trials", tune_trials, "Trials per instance and grid point")
      ->check(CLI::PositiveNumber);
  tune->add_option("--seed", tune_seed, "Master seed");
  tune->add_option("--out", tune_out, "Config file receiving the best parameters");
  tune_params.attach(tune);

  // report
  auto* report = app.add_subcommand("report", "Median/IQR TTS curves from a bench CSV");
  std::string report_in, report_out, report_tts = "physical", report_gaps;
  report->add_option("--in", report_in, "CSV written by bench")->required();
  report->add_option("--tts", report_tts, "physical or machine")
      ->check(CLI::IsMember({"physical", "machine"}));
  report->add_option("--gaps", report_gaps, "Gap levels (default: all in the input)");
  report->add_option("--out", report_out, "Curve CSV output");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*gen) {
      if (!(gen_density > 0.0)) throw InvalidArgument("density must lie in (0, 1]");
      const fs::path dir = gen_dir.empty() ? default_out_dir() : fs::path(gen_dir);
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (!fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
      for (std::size_t k = 0; k < gen_count; ++k) {
        const GeneratorSpec spec{gen_n, gen_density, gen_seed + k};
        const auto path = dir / (spec.label() + ".boxqp");
        save_instance(generate_instance(spec), path);
        out << path.string() << "\n";
      }
      return kOk;
    }

    if (*cert) {
      auto inst = load_instance(cert_file);
      SolutionVector best;
      if (cert_method == "grid") {
        best = grid_search(inst, cert_resolution);
      } else {
        const auto exact = solve_exact(inst, cert_limit, threads == 0 ? 1 : threads);
        best = exact.solution;
        if (exact.degenerate) err << "warning: optimum lies on a degenerate free block\n";
      }
      save_instance(inst.with_known_optimum(best.objective), cert_file);
      out << "OPT " << format_real(best.objective) << "\nX ";
      write_vector(out, best.x);
      out << "\n";
      return kOk;
    }

    if (*solve) {
      const auto kind = parse_solver_kind(solve_solver);
      const auto params = solve_params.resolve(kind);
      const auto inst = load_instance(solve_file);
      const auto batch = run_batch(inst, params, solve_trials, solve_seed, threads);
      std::ostringstream doc;
      doc << "# solver " << solver_name(kind) << " trials " << solve_trials << " seed " << solve_seed
          << "\n";
      for (const auto& [k, v] : params.entries()) doc << "# " << k << " = " << v << "\n";
      doc << "trial,seed,objective,status\n";
      const TrialRecord* best = nullptr;
      std::size_t failed = 0;
      for (const auto& r : batch) {
        doc << r.index << "," << r.seed << ",";
        if (r.ok()) {
          doc << format_real(r.result->x.objective) << ",ok\n";
          if (!best || r.result->x.objective > best->result->x.objective) best = &r;
        } else {
          ++failed;
          doc << "nan,";
          if (r.divergence_iteration)
            doc << "diverged@" << *r.divergence_iteration << "\n";
          else
            doc << "failed\n";
        }
      }
      if (best) {
        doc << "best_objective," << format_real(best->result->x.objective) << "\nbest_x,";
        write_vector(doc, best->result->x.x);
        doc << "\n";
      }
      const auto path = resolve_out(solve_out, "solve.csv");
      write_file_atomic(path, doc.str());
      if (2 * failed > batch.size())
        err << "warning: " << failed << " of " << batch.size() << " trials failed\n";
      if (best) {
        out << "best objective " << format_real(best->result->x.objective) << "\n";
        if (inst.known_optimum())
          out << "gap " << format_real(gap_of(best->result->x.objective, *inst.known_optimum()))
              << " %\n";
      }
      return kOk;
    }

    if (*bench) {
      BenchOptions opts;
      opts.gaps = parse_gaps(bench_gaps);
      opts.n_trials = bench_trials;
      opts.master_seed = bench_seed;
      opts.t_pulse = bench_pulse;
      opts.threads = threads;
      opts.trial_seconds = bench_trial_time;
      std::vector<SolverKind> kinds;
      {
        std::stringstream ss(bench_solvers);
        std::string name;
        while (std::getline(ss, name, ','))
          if (!name.empty()) kinds.push_back(parse_solver_kind(name));
      }
      std::vector<BenchmarkRecord> records;
      std::uint64_t index = 0;
      for (const auto& file : instance_files(bench_dir)) {
        const auto inst = load_instance(file);
        if (!inst.known_optimum()) {
          err << "warning: skipping uncertified instance " << file.string() << "\n";
          continue;
        }
        for (auto kind : kinds) {
          BenchOptions o = opts;
          o.master_seed = derive_seed(bench_seed, index++);
          auto rec = benchmark_instance(inst, bench_params.resolve(kind), o);
          rec.instance_label = inst.label().value_or(file.stem().string());
          if (2 * rec.failed_trials > rec.n_trials)
            err << "warning: " << rec.failed_trials << " trials failed on " << file.string() << "\n";
          records.push_back(std::move(rec));
        }
      }
      write_file_atomic(resolve_out(bench_out, "bench.csv"), bench_csv(records));
      if (!bench_records.empty()) write_file_atomic(bench_records, records_json(records));
      out << records.size() << " records\n";
      return kOk;
    }

    if (*sweep) {
      const auto kind = parse_solver_kind(sweep_solver);
      const auto params = sweep_params.resolve(kind);
      BenchOptions opts;
      opts.n_trials = sweep_trials;
      opts.master_seed = sweep_seed;
      opts.t_pulse = sweep_pulse;
      opts.threads = threads;
      opts.trial_seconds = sweep_trial_time;
      const auto densities = parse_reals(sweep_densities);
      const auto seeds = parse_seeds(sweep_seeds);
      const auto rows = density_sweep(sweep_n, densities, seeds, std::span(&params, 1), opts);
      write_file_atomic(resolve_out(sweep_out, "sweep.csv"), sweep_csv(rows, kind));
      out << rows.size() << " rows\n";
      return kOk;
    }

    if (*tune) {
      const auto kind = parse_solver_kind(tune_solver);
      const auto base = tune_params.resolve(kind);
      std::vector<BoxQPInstance> instances;
      for (const auto& file : instance_files(tune_dir)) {
        auto inst = load_instance(file);
        if (inst.known_optimum())
          instances.push_back(std::move(inst));
        else
          err << "warning: skipping uncertified instance " << file.string() << "\n";
      }
      const auto grid = ParamGrid::parse(tune_grid).points(base);
      for (const auto& p : grid) p.validate();
      const auto result = grid_tune(instances, grid, tune_trials, tune_seed, threads);
      for (std::size_t g = 0; g < grid.size(); ++g)
        out << "point " << g << " mean_p_s " << format_real(result.mean_success[g]) << "\n";
      out << "best point " << result.best_index << "\n";
      const auto text = format_params(result.best);
      out << text;
      if (!tune_out.empty()) write_file_atomic(tune_out, text);
      return kOk;
    }

    if (*report) {
      const auto records = parse_bench_csv(read_text(report_in));
      const TtsKind kind = report_tts == "machine" ? TtsKind::Machine : TtsKind::Physical;
      std::vector<double> gaps;
      if (!report_gaps.empty()) {
        gaps = parse_reals(report_gaps);
      } else {
        for (const auto& rec : records)
          for (const auto& g : rec.per_gap)
            if (std::find(gaps.begin(), gaps.end(), g.gap_percent) == gaps.end())
              gaps.push_back(g.gap_percent);
      }
      std::vector<AggregateCurve> curves;
      for (auto solver : kAllSolvers) {
        const bool present = std::any_of(records.begin(), records.end(),
                                         [&](const auto& r) { return r.solver == solver; });
        if (!present) continue;
        for (double g : gaps) curves.push_back(aggregate(records, solver, GapLevel(g), kind));
      }
      write_file_atomic(resolve_out(report_out, "report.csv"), curves_csv(curves));
      out << curves.size() << " curves\n";
      return kOk;
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << "\n";
    return kCapacity;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kDivergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoOrParse;
  }
  return kUsage;
}

}  // namespace boxqp::cli
