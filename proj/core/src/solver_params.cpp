#include "boxqp/solver_params.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "boxqp/error.hpp"
#include "boxqp/instance_io.hpp"

namespace boxqp {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double to_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out))
    throw InvalidArgument("invalid value '" + std::string(value) + "' for " + std::string(key));
  return out;
}

std::size_t to_count(std::string_view key, std::string_view value) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw InvalidArgument("invalid value '" + std::string(value) + "' for " + std::string(key));
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true" || value == "on") return true;
  if (value == "0" || value == "false" || value == "off") return false;
  throw InvalidArgument("invalid boolean '" + std::string(value) + "' for " + std::string(key));
}

void require(bool ok, const char* message) {
  if (!ok) throw InvalidArgument(message);
}

}  // namespace

std::string_view solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::Langevin:
      return "langevin";
    case SolverKind::PumpedLangevin:
      return "pumped";
    case SolverKind::DlCcvm:
      return "dl-ccvm";
    case SolverKind::MfCcvm:
      return "mf-ccvm";
  }
  return "?";
}

SolverKind parse_solver_kind(std::string_view name) {
  for (auto kind : kAllSolvers)
    if (solver_name(kind) == name) return kind;
  throw InvalidArgument("unknown solver '" + std::string(name) +
                        "' (expected langevin, pumped, dl-ccvm or mf-ccvm)");
}

double SolverParams::saturation() const {
  if (s_sat) return *s_sat;
  if (kind == SolverKind::MfCcvm) return 0.2;
  // The saturation amplitude of an above-threshold oscillator is sqrt(p0 - 1).
  return std::sqrt(std::abs(1.0 - p0));
}

Schedule SolverParams::pump() const {
  if (kind == SolverKind::MfCcvm) return Schedule::mf_pump(p0, j0, alpha, horizon());
  return Schedule::linear_pump(p0, horizon());
}

Schedule SolverParams::noise_factor() const { return Schedule::exp_noise(r0, beta, horizon()); }

Schedule SolverParams::measurement() const {
  return Schedule::exp_measurement(j0, alpha, horizon());
}

void SolverParams::validate() const {
  require(n_iter > 0, "n_iter must be positive");
  require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
  require(objective_scale >= 0.0, "objective_scale must be non-negative");
  switch (kind) {
    case SolverKind::Langevin:
      require(sigma >= 0.0, "sigma must be non-negative");
      break;
    case SolverKind::PumpedLangevin:
      require(sigma >= 0.0, "sigma must be non-negative");
      require(p0 > 0.0, "p0 must be positive");
      break;
    case SolverKind::DlCcvm:
      require(p0 > 0.0, "p0 must be positive");
      require(a_s > 0.0, "a_s must be positive");
      require(r0 > 0.0, "r0 must be positive");
      require(saturation() > 0.0, "saturation amplitude must be positive");
      break;
    case SolverKind::MfCcvm:
      require(j0 > 0.0, "j0 must be positive");
      require(lambda > 0.0, "lambda must be positive");
      require(g > 0.0, "g must be positive");
      require(saturation() > 0.0, "saturation bound must be positive");
      // Linear gain p(t) - (1 + j(t)) peaks at p0 (t = T).
      if (p0 > 0.0)
        require(saturation() < std::sqrt(p0) / g, "saturation bound must be below sqrt(p0)/g");
      break;
  }
}

void SolverParams::set(std::string_view key, std::string_view raw) {
  const auto value = trim(raw);
  if (key == "n_iter") {
    n_iter = to_count(key, value);
  } else if (key == "dt") {
    dt = to_real(key, value);
  } else if (key == "sigma") {
    sigma = to_real(key, value);
  } else if (key == "p0") {
    p0 = to_real(key, value);
  } else if (key == "r0") {
    r0 = to_real(key, value);
  } else if (key == "beta") {
    beta = to_real(key, value);
  } else if (key == "a_s") {
    a_s = to_real(key, value);
  } else if (key == "s_sat") {
    if (value == "auto")
      s_sat.reset();
    else
      s_sat = to_real(key, value);
  } else if (key == "j0") {
    j0 = to_real(key, value);
  } else if (key == "alpha") {
    alpha = to_real(key, value);
  } else if (key == "lambda") {
    lambda = to_real(key, value);
  } else if (key == "g") {
    g = to_real(key, value);
  } else if (key == "clip") {
    clip = to_bool(key, value);
  } else if (key == "clip_measured") {
    clip_measured = to_bool(key, value);
  } else if (key == "objective_scale") {
    objective_scale = value == "auto" ? 0.0 : to_real(key, value);
  } else {
    throw InvalidArgument("unknown parameter '" + std::string(key) + "'");
  }
}

std::vector<std::pair<std::string, std::string>> SolverParams::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("n_iter", std::to_string(n_iter));
  out.emplace_back("dt", format_real(dt));
  switch (kind) {
    case SolverKind::Langevin:
      out.emplace_back("sigma", format_real(sigma));
      break;
    case SolverKind::PumpedLangevin:
      out.emplace_back("sigma", format_real(sigma));
      out.emplace_back("p0", format_real(p0));
      break;
    case SolverKind::DlCcvm:
      out.emplace_back("p0", format_real(p0));
      out.emplace_back("r0", format_real(r0));
      out.emplace_back("beta", format_real(beta));
      out.emplace_back("a_s", format_real(a_s));
      out.emplace_back("s_sat", s_sat ? format_real(*s_sat) : "auto");
      break;
    case SolverKind::MfCcvm:
      out.emplace_back("p0", format_real(p0));
      out.emplace_back("j0", format_real(j0));
      out.emplace_back("alpha", format_real(alpha));
      out.emplace_back("lambda", format_real(lambda));
      out.emplace_back("g", format_real(g));
      out.emplace_back("s_sat", s_sat ? format_real(*s_sat) : "auto");
      out.emplace_back("clip", clip ? "1" : "0");
      out.emplace_back("clip_measured", clip_measured ? "1" : "0");
      break;
  }
  out.emplace_back("objective_scale", objective_scale == 0.0 ? "auto" : format_real(objective_scale));
  return out;
}

SolverParams default_params(SolverKind kind) {
  SolverParams p;
  p.kind = kind;
  switch (kind) {
    case SolverKind::Langevin:
      p.dt = 0.0075;
      p.sigma = 0.26;
      p.objective_scale = 1.0;
      break;
    case SolverKind::PumpedLangevin:
      p.dt = 0.0075;
      p.sigma = 0.26;
      p.p0 = 1.75;
      p.objective_scale = 1.0;
      break;
    case SolverKind::DlCcvm:
      p.dt = 0.0275;
      p.p0 = 2.125;
      break;
    case SolverKind::MfCcvm:
      p.dt = 0.0025;
      p.p0 = 0.55;
      p.clip_measured = true;
      break;
  }
  return p;
}

SolverConfig SolverConfig::parse(const std::string& text) {
  SolverConfig config;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      parse_solver_kind(section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    // Reject unknown keys and bad values early, with the line number.
    try {
      SolverParams probe = default_params(section.empty() ? SolverKind::Langevin
                                                          : parse_solver_kind(section));
      probe.set(key, value);
    } catch (const InvalidArgument& e) {
      throw ParseError(line_no, e.what());
    }
    config.set(section, key, value);
  }
  return config;
}

SolverConfig SolverConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void SolverConfig::set(std::string section, std::string key, std::string value) {
  auto& entries = sections_[std::move(section)];
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries.emplace_back(std::move(key), std::move(value));
}

SolverParams SolverConfig::params_for(SolverKind kind) const {
  SolverParams p = default_params(kind);
  for (const auto& name : {std::string(), std::string(solver_name(kind))}) {
    if (auto it = sections_.find(name); it != sections_.end())
      for (const auto& [k, v] : it->second) p.set(k, v);
  }
  return p;
}

std::string SolverConfig::format() const {
  std::string out;
  for (const auto& [name, entries] : sections_) {
    if (!name.empty()) out += "[" + name + "]\n";
    for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
  }
  return out;
}

std::string format_params(const SolverParams& params) {
  std::string out = "[" + std::string(solver_name(params.kind)) + "]\n";
  for (const auto& [k, v] : params.entries()) out += k + " = " + v + "\n";
  return out;
}

}  // namespace boxqp
