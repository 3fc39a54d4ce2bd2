#pragma once

#include <utility>
#include <vector>

#include "adrl/common.hpp"

namespace adrl::ot {

// Entropic partial optimal transport between two sets of sizes m and n:
//
//   min_T  <T, M> + alpha * sum_ij T_ij log T_ij
//   s.t.   T 1 <= 1,  T^T 1 <= 1,  sum_ij T_ij = min(m, n),  T >= 0
//
// solved in the log domain: alternating Bregman (KL) projections (Dykstra
// correction on the capped side) warm-start the dual potentials, then a
// semismooth Newton step on the KKT system polishes them — the projection
// tail alone contracts like 1 - exp(-gap/alpha) once the plan concentrates
// near a vertex, which is the common regime at small alpha.
struct PartialOtResult {
  int rows = 0;
  int cols = 0;
  std::vector<Real> plan;  // row-major, rows*cols
  Real cost = 0;           // <T, M>
  Real objective = 0;      // cost + alpha * sum T log T
  Real mass = 0;
  Real max_row_violation = 0;
  Real max_col_violation = 0;
  Real mass_error = 0;
  bool converged = false;
  int iterations = 0;

  Real at(int i, int j) const {
    return plan[static_cast<std::size_t>(i) * cols + j];
  }
};

// cost is row-major m*n with finite entries; alpha > 0. Either dimension
// may be zero (empty plan, converged). Non-convergence is reported, not
// thrown; callers that require convergence check the flag.
PartialOtResult solve_partial_ot(const std::vector<Real>& cost, int m, int n,
                                 Real alpha, int max_iters = 1000,
                                 Real tol = 1e-6);

// Hard pairs (i, j) with plan value > threshold. With row/col sums <= 1
// each row and column appears at most once.
std::vector<std::pair<int, int>> threshold_match(const PartialOtResult& result,
                                                 Real threshold = 0.5);

}  // namespace adrl::ot
