#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "boxqp/schedule.hpp"

namespace boxqp {

enum class SolverKind { Langevin, PumpedLangevin, DlCcvm, MfCcvm };

inline constexpr SolverKind kAllSolvers[] = {SolverKind::Langevin, SolverKind::PumpedLangevin,
                                             SolverKind::DlCcvm, SolverKind::MfCcvm};

// "langevin", "pumped", "dl-ccvm", "mf-ccvm".
std::string_view solver_name(SolverKind kind);
// Throws InvalidArgument on unknown names.
SolverKind parse_solver_kind(std::string_view name);

/// Parameters for one solver. Fields irrelevant to `kind` are ignored.
///
/// Defaults (`default_params`) are the midpoints of the published tuning
/// ranges: n_iter 15000; dt 0.0075 (Langevin, pumped), 0.0275 (DL),
/// 0.0025 (MF); sigma 0.26; p0 1.75 (pumped), 2.125 (DL), 0.55 (MF);
/// (r0, beta) = (10, 3); A_s = 10; (j0, alpha) = (20, 3); lambda 15;
/// g 0.01; MF saturation bound 0.2.
struct SolverParams {
  SolverKind kind = SolverKind::Langevin;
  std::size_t n_iter = 15000;
  double dt = 0.0075;
  double sigma = 0.26;
  double p0 = 0.0;
  double r0 = 10.0;
  double beta = 3.0;
  double a_s = 10.0;
  // Saturation amplitude. Unset means sqrt(|1 - p0|) for DL and 0.2 for MF.
  std::optional<double> s_sat;
  double j0 = 20.0;
  double alpha = 3.0;
  double lambda = 15.0;
  double g = 0.01;
  // MF only: clip mu to [-s, s] after every round trip.
  bool clip = false;
  // MF only: clip the measured amplitude to [-s, s] before it enters the
  // feedback gradient. Off by default in a bare struct, on in default_params.
  bool clip_measured = false;
  // Q and V are divided by this factor before the dynamics run. 0 selects
  // sqrt(sum |Q_ij|) for the instance at hand. default_params uses 1 for the
  // two Langevin solvers and auto for the coherent machines.
  double objective_scale = 0.0;

  double horizon() const { return dt * static_cast<double>(n_iter); }
  double saturation() const;

  Schedule pump() const;         // pumped, DL, MF
  Schedule noise_factor() const; // DL r(t)
  Schedule measurement() const;  // MF j(t)

  // Throws InvalidArgument when the values are unusable for `kind`.
  void validate() const;

  // Sets one field from its config-file key; throws InvalidArgument on an
  // unknown key or malformed value.
  void set(std::string_view key, std::string_view value);

  // Key/value pairs of every field relevant to `kind`, in a stable order.
  std::vector<std::pair<std::string, std::string>> entries() const;

  bool operator==(const SolverParams&) const = default;
};

SolverParams default_params(SolverKind kind);

/// Key-value config text, one `key = value` per line, grouped in sections
/// named after solvers:
///
///   [dl-ccvm]
///   p0 = 2.0
///   dt = 0.02
///
/// `#` starts a comment. Keys before any section header apply to every
/// solver.
class SolverConfig {
 public:
  static SolverConfig parse(const std::string& text);
  static SolverConfig load(const std::filesystem::path& path);

  // Defaults for `kind`, then the global section, then the solver's section.
  SolverParams params_for(SolverKind kind) const;

  std::string format() const;
  void set(std::string section, std::string key, std::string value);

 private:
  // section name ("" for global) -> ordered key/value list
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections_;
};

// Config text holding exactly the given parameters in their solver section.
std::string format_params(const SolverParams& params);

}  // namespace boxqp
