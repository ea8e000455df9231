#pragma once

namespace boxqp {

/// Scalar control schedule over normalized time t in [0, T].
///
///   linear-pump      p(t) = (t/T) p0
///   mf-pump          p(t) = (t/T) p0 + 1 + j0 exp(-alpha t/T)
///   exp-measurement  j(t) = j0 exp(-alpha t/T)
///   exp-noise        r(t) = r0 exp(-beta t/T)
///   constant         value
class Schedule {
 public:
  enum class Kind { Constant, LinearPump, MfPump, ExpMeasurement, ExpNoise };

  static Schedule constant(double value);
  static Schedule linear_pump(double p0, double horizon);
  static Schedule mf_pump(double p0, double j0, double alpha, double horizon);
  static Schedule exp_measurement(double j0, double alpha, double horizon);
  static Schedule exp_noise(double r0, double beta, double horizon);

  double operator()(double t) const;

  Kind kind() const { return kind_; }
  double horizon() const { return horizon_; }

 private:
  Schedule(Kind kind, double a, double b, double c, double horizon);

  Kind kind_;
  double a_;
  double b_;
  double c_;
  double horizon_;
};

}  // namespace boxqp
