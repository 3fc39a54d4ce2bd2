#pragma once

#include <vector>

#include "adrl/common.hpp"

namespace adrl::ot {

// Reference optimizer for tiny instances (m * n <= 6): minimizes
// <T, M> + alpha * sum(T log T) over the partial-transport polytope
// (row sums <= 1, col sums <= 1, total mass = min(m, n)) by projected
// local search from the uniform feasible plan. The objective is strictly
// convex, so local search converges to the global optimum.
struct BruteForceOtResult {
  int rows = 0;
  int cols = 0;
  std::vector<Real> plan;  // rows x cols, row-major
  Real objective = 0.0;

  Real at(int i, int j) const { return plan[static_cast<std::size_t>(i) * cols + j]; }
};

BruteForceOtResult brute_force_partial_ot(const std::vector<Real>& cost, int m,
                                          int n, Real alpha);

}  // namespace adrl::ot
