#include "boxqp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "boxqp/error.hpp"
#include "boxqp/rng.hpp"

namespace boxqp {

namespace {

void check_dim(const BoxQPInstance& inst, std::size_t got, const char* what) {
  if (got != inst.n()) {
    std::ostringstream os;
    os << what << ": expected length " << inst.n() << ", got " << got;
    throw InvalidArgument(os.str());
  }
}

std::string density_percent(double density) {
  std::ostringstream os;
  os << density * 100.0;
  return os.str();
}

}  // namespace

std::string GeneratorSpec::label() const {
  return std::to_string(n) + "-" + density_percent(density) + "-" + std::to_string(seed);
}

BoxQPInstance::BoxQPInstance(std::size_t n, Vector q, Vector v, Vector lower, Vector upper,
                             std::optional<GeneratorSpec> origin,
                             std::optional<double> known_optimum)
    : n_(n),
      q_(std::move(q)),
      v_(std::move(v)),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      origin_(origin),
      known_optimum_(known_optimum) {
  if (n_ == 0) throw ValidationError("problem size must be positive");
  if (q_.size() != n_ * n_) throw ValidationError("Q must be n x n");
  if (v_.size() != n_ || lower_.size() != n_ || upper_.size() != n_)
    throw ValidationError("V and bounds must have length n");
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (q_[i * n_ + j] != q_[j * n_ + i]) {
        std::ostringstream os;
        os << "Q is not symmetric at (" << i << ", " << j << ")";
        throw ValidationError(os.str());
      }
    }
    if (!(lower_[i] < upper_[i])) {
      std::ostringstream os;
      os << "lower bound must be below upper bound for variable " << i;
      throw ValidationError(os.str());
    }
  }
  if (origin_ && origin_->n != n_) throw ValidationError("label size does not match n");
}

std::optional<std::string> BoxQPInstance::label() const {
  if (!origin_) return std::nullopt;
  return origin_->label();
}

BoxQPInstance BoxQPInstance::with_known_optimum(std::optional<double> value) const {
  BoxQPInstance copy = *this;
  copy.known_optimum_ = value;
  return copy;
}

BoxQPInstance BoxQPInstance::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw InvalidArgument("scale factor must be positive");
  BoxQPInstance copy = *this;
  for (auto& e : copy.q_) e /= factor;
  for (auto& e : copy.v_) e /= factor;
  if (copy.known_optimum_) *copy.known_optimum_ /= factor;
  return copy;
}

double evaluate_objective(const BoxQPInstance& inst, std::span<const double> x) {
  check_dim(inst, x.size(), "evaluate_objective");
  const std::size_t n = inst.n();
  const auto v = inst.v();
  double quad = 0.0;
  double lin = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = inst.q_row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    quad += x[i] * acc;
    lin += v[i] * x[i];
  }
  return 0.5 * quad + lin;
}

void gradient_into(const BoxQPInstance& inst, std::span<const double> x, std::span<double> out) {
  check_dim(inst, x.size(), "gradient");
  check_dim(inst, out.size(), "gradient output");
  const std::size_t n = inst.n();
  const auto v = inst.v();
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = inst.q_row(i);
    double acc = v[i];
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    out[i] = acc;
  }
}

Vector gradient(const BoxQPInstance& inst, std::span<const double> x) {
  Vector g(inst.n());
  gradient_into(inst, x, g);
  return g;
}

void project_in_place(const BoxQPInstance& inst, std::span<double> x) {
  check_dim(inst, x.size(), "project_to_box");
  const auto lo = inst.lower();
  const auto hi = inst.upper();
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
}

Vector project_to_box(const BoxQPInstance& inst, std::span<const double> x) {
  Vector out(x.begin(), x.end());
  project_in_place(inst, out);
  return out;
}

Vector box_midpoint(const BoxQPInstance& inst) {
  Vector mid(inst.n());
  for (std::size_t i = 0; i < inst.n(); ++i) mid[i] = 0.5 * (inst.lower()[i] + inst.upper()[i]);
  return mid;
}

BoxQPInstance generate_instance(const GeneratorSpec& spec) {
  if (spec.n == 0) throw InvalidArgument("problem size must be positive");
  if (!(spec.density > 0.0 && spec.density <= 1.0))
    throw InvalidArgument("density must lie in (0, 1]");
  const std::size_t n = spec.n;
  Rng rng(spec.seed);
  auto draw = [&]() -> double {
    if (!rng.bernoulli(spec.density)) return 0.0;
    return static_cast<double>(rng.uniform_int(-50, 50));
  };
  Vector q(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double value = draw();
      q[i * n + j] = value;
      q[j * n + i] = value;
    }
  }
  Vector v(n);
  for (auto& e : v) e = draw();
  return BoxQPInstance(n, std::move(q), std::move(v), Vector(n, 0.0), Vector(n, 1.0), spec);
}

}  // namespace boxqp
