#pragma once

// Independent reference computations shared by the tests. Nothing here calls
// into the library's own objective or gradient code.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "boxqp/problem.hpp"

namespace boxqp::testing {

// Textbook double loop for 1/2 x'Qx + V'x.
inline double naive_objective(const BoxQPInstance& inst, const std::vector<double>& x) {
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < inst.n(); ++i) {
    for (std::size_t j = 0; j < inst.n(); ++j) quad += inst.q(i, j) * x[i] * x[j];
    lin += inst.v()[i] * x[i];
  }
  return 0.5 * quad + lin;
}

// Central differences of an arbitrary scalar function.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// max_i |a_i - b_i| / max(1, max_i |b_i|)
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, scale = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return diff / scale;
}

// The affine amplitude-to-box map without clamping, written out directly.
inline std::vector<double> unclamped_decode(const BoxQPInstance& inst, const std::vector<double>& a,
                                            double s) {
  std::vector<double> x(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    x[i] = 0.5 * (a[i] / s + 1.0) * (inst.upper()[i] - inst.lower()[i]) + inst.lower()[i];
  return x;
}

inline BoxQPInstance unit_box(std::size_t n, std::vector<double> q, std::vector<double> v) {
  return BoxQPInstance(n, std::move(q), std::move(v), std::vector<double>(n, 0.0),
                       std::vector<double>(n, 1.0));
}

// maximize -x^2 + x on [0, 1]; optimum 1/4 at x = 1/2.
inline BoxQPInstance parabola() { return unit_box(1, {-2.0}, {1.0}); }

// Standard normal tail P(|Z| <= a).
inline double normal_within(double a) { return std::erf(a / std::sqrt(2.0)); }

}  // namespace boxqp::testing
