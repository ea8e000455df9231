#include "boxqp/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "boxqp/error.hpp"

namespace boxqp {

namespace {

Vector& scratch(std::size_t n) {
  thread_local Vector buffer;
  buffer.resize(n);
  return buffer;
}

void guard(std::span<const double> values, std::size_t iteration) {
  for (double v : values)
    if (!(std::abs(v) <= kDivergenceBound)) throw DivergenceError(iteration);
}

double time_at(const SolverParams& params, std::size_t iteration) {
  return static_cast<double>(iteration) * params.dt;
}

}  // namespace

AmplitudeState initial_amplitudes(const BoxQPInstance& inst) { return {box_midpoint(inst)}; }

QuadratureState initial_quadratures(const BoxQPInstance& inst) {
  return {Vector(inst.n(), 0.0), Vector(inst.n(), 0.0)};
}

MeanFieldState initial_mean_field(const BoxQPInstance& inst) {
  return {Vector(inst.n(), 0.0), Vector(inst.n(), 0.5), Vector(inst.n(), 0.0)};
}

void step_langevin(AmplitudeState& state, const BoxQPInstance& inst, const SolverParams& params,
                   std::size_t iteration, NoiseSource& noise) {
  auto& c = state.c;
  auto& grad = scratch(inst.n());
  gradient_into(inst, c, grad);
  const double dt = params.dt;
  const double amp = params.sigma * std::sqrt(dt);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += grad[i] * dt + amp * noise.normal();
  guard(c, iteration);
  project_in_place(inst, c);
}

void step_pumped_langevin(AmplitudeState& state, const BoxQPInstance& inst,
                          const SolverParams& params, std::size_t iteration, NoiseSource& noise) {
  auto& c = state.c;
  auto& grad = scratch(inst.n());
  gradient_into(inst, c, grad);
  const double dt = params.dt;
  const double p = params.pump()(time_at(params, iteration));
  const double amp = params.sigma * std::sqrt(dt);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double ci = c[i];
    c[i] += ((-1.0 + p - ci * ci) * ci + grad[i]) * dt + amp * noise.normal();
  }
  guard(c, iteration);
  project_in_place(inst, c);
}

void encoded_drift_into(const BoxQPInstance& inst, std::span<const double> amplitudes,
                        double s_sat, std::span<double> out) {
  const std::size_t n = inst.n();
  if (amplitudes.size() != n || out.size() != n)
    throw InvalidArgument("encoded drift: dimension mismatch");
  const auto lo = inst.lower();
  const auto hi = inst.upper();
  const auto v = inst.v();
  auto& x = scratch(n);
  for (std::size_t j = 0; j < n; ++j)
    x[j] = 0.5 * (amplitudes[j] / s_sat + 1.0) * (hi[j] - lo[j]) + lo[j];
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = inst.q_row(i);
    double acc = v[i];
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    out[i] = (hi[i] - lo[i]) / (2.0 * s_sat) * acc;
  }
}

Vector dl_drift(const BoxQPInstance& inst, std::span<const double> c, double s_sat) {
  if (!(s_sat > 0.0)) throw InvalidArgument("saturation amplitude must be positive");
  Vector out(inst.n());
  encoded_drift_into(inst, c, s_sat, out);
  return out;
}

Vector mf_encoded_drift(const BoxQPInstance& inst, std::span<const double> mu_measured,
                        double s_sat) {
  return dl_drift(inst, mu_measured, s_sat);
}

void step_dl_ccvm(QuadratureState& state, const BoxQPInstance& inst, const SolverParams& params,
                  std::size_t iteration, NoiseSource& noise) {
  const std::size_t n = inst.n();
  const double s_sat = params.saturation();
  const double t = time_at(params, iteration);
  const double dt = params.dt;
  const double p = params.pump()(t);
  const double r = params.noise_factor()(t);
  const double sqrt_dt = std::sqrt(dt);
  const double amp_c = r / params.a_s * sqrt_dt;
  const double amp_s = 1.0 / (r * params.a_s) * sqrt_dt;

  thread_local Vector drift_c, drift_s;
  drift_c.resize(n);
  drift_s.resize(n);
  encoded_drift_into(inst, state.c, s_sat, drift_c);
  encoded_drift_into(inst, state.s, s_sat, drift_s);

  auto& c = state.c;
  auto& s = state.s;
  for (std::size_t i = 0; i < n; ++i) {
    const double ci = c[i];
    const double si = s[i];
    const double energy = ci * ci + si * si;
    const double spread = std::sqrt(energy + 0.5);
    c[i] = ci + ((-1.0 + p - energy) * ci + drift_c[i]) * dt + amp_c * spread * noise.normal();
    s[i] = si + ((-1.0 - p - energy) * si + drift_s[i]) * dt + amp_s * spread * noise.normal();
  }
  guard(c, iteration);
  guard(s, iteration);
}

Vector mf_measured_mean(std::span<const double> mu, double j, double dt, NoiseSource& noise) {
  if (!(j > 0.0)) throw InvalidArgument("measurement strength must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  const double scale = 1.0 / std::sqrt(4.0 * j * dt);
  Vector out(mu.begin(), mu.end());
  for (auto& m : out) m += scale * noise.normal();
  return out;
}

void step_mf_ccvm(MeanFieldState& state, const BoxQPInstance& inst, const SolverParams& params,
                  std::size_t iteration, NoiseSource& noise) {
  const std::size_t n = inst.n();
  const double s_sat = params.saturation();
  const double t = time_at(params, iteration);
  const double dt = params.dt;
  const double j = params.measurement()(t);
  const double p = params.pump()(t);
  const double sqrt_dt = std::sqrt(dt);
  const double sqrt_j = std::sqrt(j);
  const double g2 = params.g * params.g;
  // mu~ = mu + sqrt(1/(4j)) dW/dt with dW = sqrt(dt) z.
  const double meas_scale = 1.0 / (std::sqrt(4.0 * j) * dt);

  thread_local Vector dw, feedback;
  dw.resize(n);
  feedback.resize(n);
  auto& mu = state.mu;
  auto& sigma = state.sigma;
  auto& measured = state.mu_measured;
  measured.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    dw[i] = sqrt_dt * noise.normal();
    measured[i] = mu[i] + meas_scale * dw[i];
    if (params.clip_measured) measured[i] = std::clamp(measured[i], -s_sat, s_sat);
  }
  encoded_drift_into(inst, measured, s_sat, feedback);

  const double loss = -(1.0 + j) + p;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = mu[i];
    const double v = sigma[i];
    const double m2 = m * m;
    mu[i] = m + (loss - g2 * m2) * m * dt + params.lambda * feedback[i] * dt +
            sqrt_j * (v - 0.5) * dw[i];
    sigma[i] = v + 2.0 * (loss - 3.0 * g2 * m2) * v * dt - 2.0 * j * (v - 0.5) * (v - 0.5) * dt +
               ((1.0 + j) + 2.0 * g2 * m2) * dt;
  }
  guard(mu, iteration);
  guard(sigma, iteration);
  if (params.clip)
    for (auto& m : mu) m = std::clamp(m, -s_sat, s_sat);
}

SolutionVector decode_amplitudes(std::span<const double> amplitudes, double s_sat,
                                 const BoxQPInstance& inst) {
  if (amplitudes.size() != inst.n()) throw InvalidArgument("decode: dimension mismatch");
  const auto lo = inst.lower();
  const auto hi = inst.upper();
  SolutionVector out;
  out.x.resize(inst.n());
  for (std::size_t i = 0; i < inst.n(); ++i) {
    const double a = std::clamp(amplitudes[i], -s_sat, s_sat);
    out.x[i] = std::clamp(0.5 * (a / s_sat + 1.0) * (hi[i] - lo[i]) + lo[i], lo[i], hi[i]);
  }
  out.objective = evaluate_objective(inst, out.x);
  return out;
}

double objective_scale_for(const BoxQPInstance& inst, const SolverParams& params) {
  if (params.objective_scale > 0.0) return params.objective_scale;
  double total = 0.0;
  for (double q : inst.q_data()) total += std::abs(q);
  return total > 0.0 ? std::sqrt(total) : 1.0;
}

TrialResult run_trial(const BoxQPInstance& original, const SolverParams& params,
                      std::uint64_t seed) {
  params.validate();
  const double scale = objective_scale_for(original, params);
  const BoxQPInstance inst = scale == 1.0 ? original : original.scaled(scale);
  Rng rng(seed);
  NoiseSource noise(rng);
  const std::size_t steps = params.n_iter;

  TrialResult result;
  result.seed = seed;
  result.n_iter_used = steps;
  switch (params.kind) {
    case SolverKind::Langevin:
    case SolverKind::PumpedLangevin: {
      auto state = initial_amplitudes(inst);
      const bool pumped = params.kind == SolverKind::PumpedLangevin;
      for (std::size_t k = 0; k < steps; ++k) {
        if (pumped)
          step_pumped_langevin(state, inst, params, k, noise);
        else
          step_langevin(state, inst, params, k, noise);
      }
      result.x.x = project_to_box(original, state.c);
      result.raw_final_state = {std::move(state.c)};
      break;
    }
    case SolverKind::DlCcvm: {
      auto state = initial_quadratures(inst);
      for (std::size_t k = 0; k < steps; ++k) step_dl_ccvm(state, inst, params, k, noise);
      result.x = decode_dl(state.c, params.saturation(), original);
      result.raw_final_state = {std::move(state.c), std::move(state.s)};
      break;
    }
    case SolverKind::MfCcvm: {
      auto state = initial_mean_field(inst);
      for (std::size_t k = 0; k < steps; ++k) step_mf_ccvm(state, inst, params, k, noise);
      result.x = decode_mf(state.mu_measured, params.saturation(), original);
      result.raw_final_state = {std::move(state.mu), std::move(state.sigma)};
      break;
    }
  }
  result.x.objective = evaluate_objective(original, result.x.x);
  return result;
}

std::vector<TrialRecord> run_batch(const BoxQPInstance& inst, const SolverParams& params,
                                   std::size_t n_trials, std::uint64_t master_seed,
                                   unsigned threads) {
  if (n_trials == 0) throw InvalidArgument("n_trials must be at least 1");
  params.validate();
  std::vector<TrialRecord> records(n_trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n_trials; k = next++) {
      auto& rec = records[k];
      rec.index = k;
      rec.seed = derive_seed(master_seed, k);
      const auto start = std::chrono::steady_clock::now();
      try {
        rec.result = run_trial(inst, params, rec.seed);
      } catch (const DivergenceError& e) {
        rec.error = e.what();
        rec.divergence_iteration = e.iteration();
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      rec.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_trials));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return records;
}

}  // namespace boxqp
