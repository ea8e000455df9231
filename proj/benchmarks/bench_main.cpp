#include <benchmark/benchmark.h>

#include "boxqp/bench.hpp"
#include "boxqp/oracle.hpp"
#include "boxqp/solvers.hpp"

using namespace boxqp;

namespace {

BoxQPInstance instance_of(benchmark::State& state) {
  return generate_instance({static_cast<std::size_t>(state.range(0)), 0.5, 1});
}

void BM_Gradient(benchmark::State& state) {
  const auto inst = instance_of(state);
  const Vector x(inst.n(), 0.3);
  Vector g(inst.n());
  for (auto _ : state) {
    gradient_into(inst, x, g);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_Gradient)->RangeMultiplier(4)->Range(10, 640);

template <SolverKind Kind>
void BM_Step(benchmark::State& state) {
  const auto inst = instance_of(state);
  const auto p = default_params(Kind);
  Rng rng(1);
  NoiseSource noise(rng);
  std::size_t k = 0;
  // The coherent machines run on the rescaled problem, as in run_trial.
  const auto scaled = inst.scaled(objective_scale_for(inst, p));
  if constexpr (Kind == SolverKind::DlCcvm) {
    auto st = initial_quadratures(inst);
    for (auto _ : state) {
      step_dl_ccvm(st, scaled, p, k++ % p.n_iter, noise);
      // Keep the state bounded over long benchmark runs.
      if (k % p.n_iter == 0) st = initial_quadratures(inst);
    }
  } else if constexpr (Kind == SolverKind::MfCcvm) {
    auto st = initial_mean_field(inst);
    for (auto _ : state) {
      step_mf_ccvm(st, scaled, p, k++ % p.n_iter, noise);
      if (k % p.n_iter == 0) st = initial_mean_field(inst);
    }
  } else {
    auto st = initial_amplitudes(inst);
    for (auto _ : state) {
      if constexpr (Kind == SolverKind::Langevin)
        step_langevin(st, inst, p, k++, noise);
      else
        step_pumped_langevin(st, inst, p, k++ % p.n_iter, noise);
    }
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_TEMPLATE(BM_Step, SolverKind::Langevin)->Arg(10)->Arg(50)->Arg(200);
BENCHMARK_TEMPLATE(BM_Step, SolverKind::PumpedLangevin)->Arg(10)->Arg(50)->Arg(200);
BENCHMARK_TEMPLATE(BM_Step, SolverKind::DlCcvm)->Arg(10)->Arg(50)->Arg(200);
BENCHMARK_TEMPLATE(BM_Step, SolverKind::MfCcvm)->Arg(10)->Arg(50)->Arg(200);

void BM_Trial(benchmark::State& state) {
  const auto inst = generate_instance({10, 0.5, 1});
  const auto p = default_params(static_cast<SolverKind>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(inst, p, seed++));
  state.SetLabel(std::string(solver_name(p.kind)));
}
BENCHMARK(BM_Trial)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_SolveExact(benchmark::State& state) {
  const auto inst = instance_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(solve_exact(inst));
}
BENCHMARK(BM_SolveExact)->DenseRange(4, 10, 2)->Unit(benchmark::kMillisecond);

void BM_GridSearch(benchmark::State& state) {
  const auto inst = generate_instance({3, 0.5, 1});
  for (auto _ : state) benchmark::DoNotOptimize(grid_search(inst, 1.0 / static_cast<double>(state.range(0))));
}
BENCHMARK(BM_GridSearch)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
