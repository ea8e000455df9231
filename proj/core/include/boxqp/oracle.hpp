#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "boxqp/problem.hpp"

namespace boxqp {

enum class BoundStatus : std::uint8_t { AtLower = 0, AtUpper = 1, Free = 2 };

struct ExactSolution {
  SolutionVector solution;
  std::vector<BoundStatus> status;  // active set of the returned candidate
  bool degenerate = false;          // returned candidate came from a singular free block
  std::size_t feasible_candidates = 0;
};

inline constexpr std::size_t kDefaultOracleLimit = 12;

/// Global maximizer by active-set enumeration.
///
/// Every local maximizer of a quadratic over a box is stationary on its free
/// coordinates, so enumerating all 3^n lower/upper/free assignments and
/// solving Q_FF x_F = -(V_F + Q_FB x_B) for each one visits the global
/// maximum. Free blocks whose pivots fall below 1e-12 times their max-norm
/// are solved in the minimum-norm sense when consistent. Ties within 1e-12
/// keep the lexicographically smallest assignment.
///
/// Throws CapacityError when n > n_limit.
ExactSolution solve_exact(const BoxQPInstance& inst, std::size_t n_limit = kDefaultOracleLimit,
                          unsigned threads = 1);

/// Best point of the regular grid with spacing at most `resolution` on every
/// axis, endpoints included. Limited to n <= 4.
SolutionVector grid_search(const BoxQPInstance& inst, double resolution);

/// First-order conditions of a local maximizer: |df/dx_i| <= tol in the
/// interior, df/dx_i <= tol at a lower bound, df/dx_i >= -tol at an upper
/// bound. Points outside the box fail.
bool verify_kkt(const BoxQPInstance& inst, std::span<const double> x, double tol);

}  // namespace boxqp
