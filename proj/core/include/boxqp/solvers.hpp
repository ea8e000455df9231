#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boxqp/problem.hpp"
#include "boxqp/rng.hpp"
#include "boxqp/solver_params.hpp"

namespace boxqp {

/// Source of standard normal draws for the step functions. A silent source
/// returns zeros, which turns every step into its deterministic drift.
class NoiseSource {
 public:
  explicit NoiseSource(Rng& rng) : rng_(&rng) {}
  static NoiseSource silent() { return NoiseSource(); }

  double normal() { return rng_ ? rng_->normal() : 0.0; }

 private:
  NoiseSource() = default;
  Rng* rng_ = nullptr;
};

// Largest state magnitude tolerated before a trial is aborted.
inline constexpr double kDivergenceBound = 1e6;

// Langevin and pumped Langevin: amplitudes live directly in the box.
struct AmplitudeState {
  Vector c;
};

// DL-CCVM: in-phase and quadrature components.
struct QuadratureState {
  Vector c;
  Vector s;
};

// MF-CCVM: Gaussian means and variances plus the last measured means.
struct MeanFieldState {
  Vector mu;
  Vector sigma;
  Vector mu_measured;
};

AmplitudeState initial_amplitudes(const BoxQPInstance& inst);
QuadratureState initial_quadratures(const BoxQPInstance& inst);
MeanFieldState initial_mean_field(const BoxQPInstance& inst);

// Every step ascends f: the drift follows +grad f (or the gradient of f
// composed with the amplitude decoding), so trajectories settle near maxima.

/// c += grad f(c) dt + sigma sqrt(dt) z, then clamp to the box.
void step_langevin(AmplitudeState& state, const BoxQPInstance& inst, const SolverParams& params,
                   std::size_t iteration, NoiseSource& noise);

/// As step_langevin with the extra gain term (-1 + p(t) - c^2) c dt.
void step_pumped_langevin(AmplitudeState& state, const BoxQPInstance& inst,
                          const SolverParams& params, std::size_t iteration, NoiseSource& noise);

/// Gradient of f(decode(a)) with respect to the amplitudes a, where
/// decode(a)_i = (a_i/s + 1)(u_i - l_i)/2 + l_i (no clamping):
///
///   out_i = (u_i - l_i)/(2s) * (sum_j Q_ij decode(a)_j + V_i).
///
/// This is the coupling drift of both optical machines.
void encoded_drift_into(const BoxQPInstance& inst, std::span<const double> amplitudes,
                        double s_sat, std::span<double> out);
Vector dl_drift(const BoxQPInstance& inst, std::span<const double> c, double s_sat);
Vector mf_encoded_drift(const BoxQPInstance& inst, std::span<const double> mu_measured,
                        double s_sat);

/// Euler-Maruyama step of the delay-line machine. No clamping.
void step_dl_ccvm(QuadratureState& state, const BoxQPInstance& inst, const SolverParams& params,
                  std::size_t iteration, NoiseSource& noise);

/// mu + z / sqrt(4 j dt) for standard normals z. Throws InvalidArgument for j <= 0.
Vector mf_measured_mean(std::span<const double> mu, double j, double dt, NoiseSource& noise);

/// Euler-Maruyama step of the measurement-feedback machine. The Wiener
/// increment that perturbs mu is the one seen by the measurement of the same
/// step; the measured means are stored in `state.mu_measured`.
void step_mf_ccvm(MeanFieldState& state, const BoxQPInstance& inst, const SolverParams& params,
                  std::size_t iteration, NoiseSource& noise);

/// Clamp amplitudes to [-s, s] and map them affinely onto the box.
SolutionVector decode_amplitudes(std::span<const double> amplitudes, double s_sat,
                                 const BoxQPInstance& inst);
inline SolutionVector decode_dl(std::span<const double> c, double s_sat, const BoxQPInstance& inst) {
  return decode_amplitudes(c, s_sat, inst);
}
inline SolutionVector decode_mf(std::span<const double> mu_measured, double s_sat,
                                const BoxQPInstance& inst) {
  return decode_amplitudes(mu_measured, s_sat, inst);
}

// Divisor applied to Q and V before the dynamics (see SolverParams).
double objective_scale_for(const BoxQPInstance& inst, const SolverParams& params);

struct TrialResult {
  SolutionVector x;  // decoded and inside the box, objective of the original instance
  // c; or (c, s); or (mu, sigma) in the order listed.
  std::vector<Vector> raw_final_state;
  std::uint64_t seed = 0;
  std::size_t n_iter_used = 0;
};

/// One full trial: initial state, n_iter steps at t = k dt, decoding.
/// Deterministic in (inst, params, seed). Throws DivergenceError.
TrialResult run_trial(const BoxQPInstance& inst, const SolverParams& params, std::uint64_t seed);

struct TrialRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::optional<TrialResult> result;  // empty when the trial failed
  std::string error;
  std::optional<std::size_t> divergence_iteration;
  double wall_seconds = 0.0;

  bool ok() const { return result.has_value(); }
};

/// Runs `n_trials` trials; trial k uses derive_seed(master_seed, k). The
/// returned list is ordered by k and does not depend on `threads`
/// (0 selects the hardware concurrency). Failed trials are recorded, not
/// thrown.
std::vector<TrialRecord> run_batch(const BoxQPInstance& inst, const SolverParams& params,
                                   std::size_t n_trials, std::uint64_t master_seed,
                                   unsigned threads = 0);

}  // namespace boxqp
