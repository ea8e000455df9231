#include "boxqp/schedule.hpp"

#include <cmath>

#include "boxqp/error.hpp"

namespace boxqp {

Schedule::Schedule(Kind kind, double a, double b, double c, double horizon)
    : kind_(kind), a_(a), b_(b), c_(c), horizon_(horizon) {
  if (kind_ != Kind::Constant && !(horizon_ > 0.0))
    throw InvalidArgument("schedule horizon must be positive");
}

Schedule Schedule::constant(double value) { return {Kind::Constant, value, 0.0, 0.0, 1.0}; }

Schedule Schedule::linear_pump(double p0, double horizon) {
  return {Kind::LinearPump, p0, 0.0, 0.0, horizon};
}

Schedule Schedule::mf_pump(double p0, double j0, double alpha, double horizon) {
  return {Kind::MfPump, p0, j0, alpha, horizon};
}

Schedule Schedule::exp_measurement(double j0, double alpha, double horizon) {
  return {Kind::ExpMeasurement, j0, alpha, 0.0, horizon};
}

Schedule Schedule::exp_noise(double r0, double beta, double horizon) {
  return {Kind::ExpNoise, r0, beta, 0.0, horizon};
}

double Schedule::operator()(double t) const {
  const double frac = t / horizon_;
  switch (kind_) {
    case Kind::Constant:
      return a_;
    case Kind::LinearPump:
      return frac * a_;
    case Kind::MfPump:
      return frac * a_ + 1.0 + b_ * std::exp(-c_ * frac);
    case Kind::ExpMeasurement:
    case Kind::ExpNoise:
      return a_ * std::exp(-b_ * frac);
  }
  return 0.0;
}

}  // namespace boxqp
