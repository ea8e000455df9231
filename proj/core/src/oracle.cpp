#include "boxqp/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>

#include "boxqp/error.hpp"

namespace boxqp {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kPivotThreshold = 1e-12;

struct Candidate {
  std::uint64_t code = 0;
  double objective = -std::numeric_limits<double>::infinity();
  Vector x;
  bool degenerate = false;
  bool valid = false;
};

// Keeps `best` unless `next` is better by more than the tie tolerance; the
// caller visits codes in increasing order.
void consider(Candidate& best, Candidate&& next) {
  if (!best.valid || next.objective > best.objective + kTieTolerance) best = std::move(next);
}

// Solves a x = b in place (a is m x m row-major). Returns false when a pivot
// falls below the relative threshold.
bool solve_pivoted(std::vector<double>& a, std::vector<double>& b, std::size_t m) {
  double norm = 0.0;
  for (double e : a) norm = std::max(norm, std::abs(e));
  const double threshold = kPivotThreshold * norm;
  if (norm == 0.0) return false;
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(a[r * m + col]) > std::abs(a[piv * m + col])) piv = r;
    if (std::abs(a[piv * m + col]) < threshold) return false;
    if (piv != col) {
      for (std::size_t k = 0; k < m; ++k) std::swap(a[col * m + k], a[piv * m + k]);
      std::swap(b[col], b[piv]);
    }
    const double d = a[col * m + col];
    for (std::size_t r = col + 1; r < m; ++r) {
      const double factor = a[r * m + col] / d;
      if (factor == 0.0) continue;
      for (std::size_t k = col; k < m; ++k) a[r * m + k] -= factor * a[col * m + k];
      b[r] -= factor * b[col];
    }
  }
  for (std::size_t col = m; col-- > 0;) {
    double acc = b[col];
    for (std::size_t k = col + 1; k < m; ++k) acc -= a[col * m + k] * b[k];
    b[col] = acc / a[col * m + col];
  }
  return true;
}

// Minimum-norm solution when the singular system is consistent.
std::optional<Vector> solve_min_norm(const std::vector<double>& a, const std::vector<double>& b,
                                     std::size_t m) {
  Eigen::MatrixXd mat(m, m);
  Eigen::VectorXd rhs(m);
  for (std::size_t r = 0; r < m; ++r) {
    rhs(r) = b[r];
    for (std::size_t c = 0; c < m; ++c) mat(r, c) = a[r * m + c];
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(mat);
  cod.setThreshold(kPivotThreshold);
  const Eigen::VectorXd sol = cod.solve(rhs);
  const double residual = (mat * sol - rhs).norm();
  if (residual > 1e-9 * (1.0 + rhs.norm() + mat.norm())) return std::nullopt;
  return Vector(sol.data(), sol.data() + m);
}

std::vector<BoundStatus> decode_code(std::uint64_t code, std::size_t n) {
  std::vector<BoundStatus> status(n);
  for (std::size_t i = n; i-- > 0;) {
    status[i] = static_cast<BoundStatus>(code % 3);
    code /= 3;
  }
  return status;
}

Candidate scan_range(const BoxQPInstance& inst, std::uint64_t begin, std::uint64_t end,
                     std::size_t& feasible) {
  const std::size_t n = inst.n();
  const auto lo = inst.lower();
  const auto hi = inst.upper();
  const auto v = inst.v();
  Candidate best;
  std::vector<std::size_t> free_idx;
  std::vector<double> a, b;
  Vector x(n);
  for (std::uint64_t code = begin; code < end; ++code) {
    const auto status = decode_code(code, n);
    free_idx.clear();
    for (std::size_t i = 0; i < n; ++i) {
      switch (status[i]) {
        case BoundStatus::AtLower:
          x[i] = lo[i];
          break;
        case BoundStatus::AtUpper:
          x[i] = hi[i];
          break;
        case BoundStatus::Free:
          x[i] = 0.0;
          free_idx.push_back(i);
          break;
      }
    }
    const std::size_t m = free_idx.size();
    bool degenerate = false;
    if (m > 0) {
      a.assign(m * m, 0.0);
      b.assign(m, 0.0);
      for (std::size_t r = 0; r < m; ++r) {
        const std::size_t i = free_idx[r];
        const auto row = inst.q_row(i);
        double rhs = -v[i];
        for (std::size_t j = 0; j < n; ++j)
          if (status[j] != BoundStatus::Free) rhs -= row[j] * x[j];
        b[r] = rhs;
        for (std::size_t c = 0; c < m; ++c) a[r * m + c] = row[free_idx[c]];
      }
      const auto a_copy = a;
      const auto b_copy = b;
      if (!solve_pivoted(a, b, m)) {
        auto sol = solve_min_norm(a_copy, b_copy, m);
        if (!sol) continue;
        b = std::move(*sol);
        degenerate = true;
      }
      bool inside = true;
      for (std::size_t r = 0; r < m && inside; ++r) {
        const std::size_t i = free_idx[r];
        const double slack = kTieTolerance * (1.0 + std::abs(lo[i]) + std::abs(hi[i]));
        if (!(b[r] >= lo[i] - slack && b[r] <= hi[i] + slack)) inside = false;
        x[i] = std::clamp(b[r], lo[i], hi[i]);
      }
      if (!inside) continue;
    }
    Candidate cand;
    cand.code = code;
    cand.objective = evaluate_objective(inst, x);
    cand.x = x;
    cand.degenerate = degenerate;
    cand.valid = true;
    ++feasible;
    consider(best, std::move(cand));
  }
  return best;
}

}  // namespace

ExactSolution solve_exact(const BoxQPInstance& inst, std::size_t n_limit, unsigned threads) {
  const std::size_t n = inst.n();
  if (n > n_limit) {
    throw CapacityError("active-set oracle limited to n <= " + std::to_string(n_limit) +
                        " (instance has n = " + std::to_string(n) + ")");
  }
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= 3;

  threads = std::max(1u, threads);
  const std::uint64_t chunk = (total + threads - 1) / threads;
  std::vector<std::uint64_t> begins;
  for (std::uint64_t begin = 0; begin < total; begin += chunk) begins.push_back(begin);
  std::vector<std::size_t> counts(begins.size(), 0);
  std::vector<Candidate> parts(begins.size());
  {
    std::vector<std::future<void>> jobs;
    for (std::size_t p = 0; p < begins.size(); ++p) {
      auto job = [&, p] {
        parts[p] = scan_range(inst, begins[p], std::min(total, begins[p] + chunk), counts[p]);
      };
      if (p + 1 == begins.size())
        job();
      else
        jobs.push_back(std::async(std::launch::async, job));
    }
    for (auto& job : jobs) job.get();
  }
  // Parts are visited in code order, so the tie-break matches a serial scan.
  Candidate best;
  std::size_t feasible = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    feasible += counts[p];
    if (parts[p].valid) consider(best, std::move(parts[p]));
  }
  if (!best.valid) throw ValidationError("active-set enumeration found no feasible candidate");

  ExactSolution out;
  out.solution.x = std::move(best.x);
  out.solution.objective = evaluate_objective(inst, out.solution.x);
  out.status = decode_code(best.code, n);
  out.degenerate = best.degenerate;
  out.feasible_candidates = feasible;
  return out;
}

SolutionVector grid_search(const BoxQPInstance& inst, double resolution) {
  const std::size_t n = inst.n();
  if (n > 4) throw CapacityError("grid search limited to n <= 4");
  if (!(resolution > 0.0)) throw InvalidArgument("resolution must be positive");
  const auto lo = inst.lower();
  const auto hi = inst.upper();
  const auto v = inst.v();

  std::vector<std::size_t> cells(n);
  std::vector<double> step(n);
  for (std::size_t i = 0; i < n; ++i) {
    cells[i] = static_cast<std::size_t>(std::ceil((hi[i] - lo[i]) / resolution - 1e-9));
    cells[i] = std::max<std::size_t>(cells[i], 1);
    step[i] = (hi[i] - lo[i]) / static_cast<double>(cells[i]);
  }
  auto grid_value = [&](std::size_t i, std::size_t k) {
    return k == cells[i] ? hi[i] : lo[i] + static_cast<double>(k) * step[i];
  };

  // Exact grid maximum of 1/2 a z^2 + b z over the last axis. This runs once
  // per point of the other axes, so the constants are hoisted.
  const std::size_t last = n - 1;
  const double a_last = inst.q(last, last);
  Vector zs(cells[last] + 1);
  for (std::size_t k = 0; k <= cells[last]; ++k) zs[k] = grid_value(last, k);
  const double z_lo = zs.front(), z_hi = zs.back();
  const double e_lo = 0.5 * a_last * z_lo * z_lo, e_hi = 0.5 * a_last * z_hi * z_hi;
  const double neg_inv_a = a_last < 0.0 ? -1.0 / a_last : 0.0;
  const double inv_step = 1.0 / step[last];
  const double top = static_cast<double>(cells[last]);
  auto best_last = [&](double b, double& value) -> std::size_t {
    std::size_t pick = 0;
    value = e_lo + b * z_lo;
    const double at_hi = e_hi + b * z_hi;
    if (at_hi > value) {
      value = at_hi;
      pick = cells[last];
    }
    if (a_last < 0.0) {
      const double vertex = (b * neg_inv_a - lo[last]) * inv_step;
      if (vertex > 0.0 && vertex < top) {
        const auto k = static_cast<std::size_t>(vertex);
        for (std::size_t c : {k, std::min(k + 1, cells[last])}) {
          const double z = zs[c];
          const double hv = (0.5 * a_last * z + b) * z;
          if (hv > value) {
            value = hv;
            pick = c;
          }
        }
      }
    }
    return pick;
  };

  Vector point(n);
  Vector best_point(n);
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(n, 0);  // odometer over axes 0..n-2
  if (n == 1) {
    double value = 0.0;
    const auto k = best_last(v[0], value);
    best_point[0] = grid_value(0, k);
  } else {
    const std::size_t inner = n - 2;
    const double q_inner = inst.q(inner, inner);
    const double q_cross = inst.q(last, inner);
    Vector ys(cells[inner] + 1), ys_quad(ys.size()), ys_cross(ys.size());
    for (std::size_t k = 0; k < ys.size(); ++k) {
      ys[k] = grid_value(inner, k);
      ys_quad[k] = 0.5 * q_inner * ys[k] * ys[k];
      ys_cross[k] = q_cross * ys[k];
    }
    while (true) {
      // Contributions of axes 0..inner-1.
      double outer_value = 0.0;
      double lin_inner = v[inner];
      double lin_last = v[last];
      for (std::size_t i = 0; i < inner; ++i) {
        point[i] = grid_value(i, idx[i]);
        double acc = v[i];
        for (std::size_t j = 0; j < inner; ++j) acc += 0.5 * inst.q(i, j) * grid_value(j, idx[j]);
        outer_value += acc * point[i];
        lin_inner += inst.q(inner, i) * point[i];
        lin_last += inst.q(last, i) * point[i];
      }
      for (std::size_t k = 0; k <= cells[inner]; ++k) {
        const double y = ys[k];
        const double prefix = outer_value + ys_quad[k] + lin_inner * y;
        double tail = 0.0;
        const auto k_last = best_last(lin_last + ys_cross[k], tail);
        if (prefix + tail > best_value) {
          best_value = prefix + tail;
          for (std::size_t i = 0; i < inner; ++i) best_point[i] = point[i];
          best_point[inner] = y;
          best_point[last] = zs[k_last];
        }
      }
      // Advance the odometer over axes 0..inner-1.
      std::size_t axis = inner;
      while (axis > 0) {
        --axis;
        if (++idx[axis] <= cells[axis]) break;
        idx[axis] = 0;
        if (axis == 0) {
          axis = n;  // done
          break;
        }
      }
      if (inner == 0 || axis == n) break;
    }
  }
  return {best_point, evaluate_objective(inst, best_point)};
}

bool verify_kkt(const BoxQPInstance& inst, std::span<const double> x, double tol) {
  if (x.size() != inst.n()) throw InvalidArgument("verify_kkt: dimension mismatch");
  const auto lo = inst.lower();
  const auto hi = inst.upper();
  const auto grad = gradient(inst, x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
    if (x[i] == lo[i]) {
      if (grad[i] > tol) return false;
    } else if (x[i] == hi[i]) {
      if (grad[i] < -tol) return false;
    } else if (std::abs(grad[i]) > tol) {
      return false;
    }
  }
  return true;
}

}  // namespace boxqp
