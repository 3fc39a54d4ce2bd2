#include "adrl/ot/hungarian.hpp"

#include <cmath>
#include <limits>

namespace adrl::ot {
namespace {

// Potential-based shortest augmenting path assignment for m <= n.
// 1-indexed internal arrays; row 0 / col 0 are sentinels.
std::vector<int> assign_rows(const std::vector<Real>& cost, int m, int n) {
  const Real inf = std::numeric_limits<Real>::infinity();
  std::vector<Real> u(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<Real> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);    // col -> row
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);

  for (int i = 1; i <= m; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<Real> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = p[static_cast<std::size_t>(j0)];
      Real delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const Real cur =
            cost[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] -
            u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(static_cast<std::size_t>(m), -1);
  for (int j = 1; j <= n; ++j) {
    if (p[static_cast<std::size_t>(j)] > 0) {
      row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] =
          j - 1;
    }
  }
  return row_to_col;
}

}  // namespace

std::vector<int> hungarian_match(const std::vector<Real>& cost, int m, int n) {
  if (m < 0 || n < 0) throw ContractViolation("hungarian_match: negative dim");
  if (cost.size() != static_cast<std::size_t>(m) * n) {
    throw ContractViolation("hungarian_match: cost size mismatch");
  }
  for (Real c : cost) {
    if (!std::isfinite(c)) throw ContractViolation("hungarian_match: non-finite cost");
  }
  if (m == 0 || n == 0) return std::vector<int>(static_cast<std::size_t>(m), -1);
  if (m <= n) return assign_rows(cost, m, n);

  // Transpose, assign columns to rows, invert.
  std::vector<Real> t(static_cast<std::size_t>(n) * m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      t[static_cast<std::size_t>(j) * m + i] =
          cost[static_cast<std::size_t>(i) * n + j];
    }
  }
  auto col_to_row = assign_rows(t, n, m);
  std::vector<int> row_to_col(static_cast<std::size_t>(m), -1);
  for (int j = 0; j < n; ++j) {
    if (col_to_row[static_cast<std::size_t>(j)] >= 0) {
      row_to_col[static_cast<std::size_t>(col_to_row[static_cast<std::size_t>(j)])] = j;
    }
  }
  return row_to_col;
}

}  // namespace adrl::ot
