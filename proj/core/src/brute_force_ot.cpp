#include "adrl/ot/brute_force.hpp"

#include <algorithm>
#include <cmath>

namespace adrl::ot {
namespace {

Real entropy_term(Real t) { return t > 0.0 ? t * std::log(t) : 0.0; }

Real objective_of(const std::vector<Real>& plan, const std::vector<Real>& cost,
                  Real alpha) {
  Real obj = 0.0;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    obj += plan[k] * cost[k] + alpha * entropy_term(plan[k]);
  }
  return obj;
}

// A move is a signed sparse direction; applying with step delta must keep
// cells nonnegative and row/col sums within 1.
struct Move {
  int cell[4];
  Real sign[4];
  int arity;
};

bool feasible_after(const std::vector<Real>& plan, const Move& mv, Real delta,
                    int m, int n) {
  std::vector<Real> next(plan);
  for (int k = 0; k < mv.arity; ++k) {
    next[static_cast<std::size_t>(mv.cell[k])] += mv.sign[k] * delta;
    if (next[static_cast<std::size_t>(mv.cell[k])] < 0.0) return false;
  }
  constexpr Real kSlack = 1.0 + 1e-12;
  for (int i = 0; i < m; ++i) {
    Real row = 0.0;
    for (int j = 0; j < n; ++j) row += next[static_cast<std::size_t>(i) * n + j];
    if (row > kSlack) return false;
  }
  for (int j = 0; j < n; ++j) {
    Real col = 0.0;
    for (int i = 0; i < m; ++i) col += next[static_cast<std::size_t>(i) * n + j];
    if (col > kSlack) return false;
  }
  return true;
}

// Mass-preserving elementary directions of the partial-transport polytope.
// For m * n <= 6 the alternating paths/cycles of the constraint network have
// at most four cells, so these three families are exhaustive:
//   transfers  : +a -b over any two cells
//   rectangles : alternating four-cycles (preserve every row and col sum)
//   paths      : four-cell alternating paths (shift slack between two rows
//                or two columns through an interior row/column)
std::vector<Move> enumerate_moves(int m, int n) {
  std::vector<Move> moves;
  auto id = [n](int i, int j) { return i * n + j; };

  for (int a = 0; a < m * n; ++a) {
    for (int b = 0; b < m * n; ++b) {
      if (a == b) continue;
      moves.push_back(Move{{a, b, 0, 0}, {1.0, -1.0, 0.0, 0.0}, 2});
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int i2 = i + 1; i2 < m; ++i2) {
      for (int j = 0; j < n; ++j) {
        for (int j2 = j + 1; j2 < n; ++j2) {
          moves.push_back(Move{{id(i, j), id(i, j2), id(i2, j), id(i2, j2)},
                               {1.0, -1.0, -1.0, 1.0},
                               4});
          moves.push_back(Move{{id(i, j), id(i, j2), id(i2, j), id(i2, j2)},
                               {-1.0, 1.0, 1.0, -1.0},
                               4});
        }
      }
    }
  }
  for (int i1 = 0; i1 < m; ++i1) {
    for (int i2 = 0; i2 < m; ++i2) {
      if (i1 == i2) continue;
      for (int j1 = 0; j1 < n; ++j1) {
        for (int j2 = 0; j2 < n; ++j2) {
          for (int j3 = 0; j3 < n; ++j3) {
            if (j1 == j2 || j2 == j3 || j1 == j3) continue;
            moves.push_back(
                Move{{id(i1, j1), id(i1, j2), id(i2, j2), id(i2, j3)},
                     {1.0, -1.0, 1.0, -1.0},
                     4});
          }
        }
      }
    }
  }
  for (int j1 = 0; j1 < n; ++j1) {
    for (int j2 = 0; j2 < n; ++j2) {
      if (j1 == j2) continue;
      for (int i1 = 0; i1 < m; ++i1) {
        for (int i2 = 0; i2 < m; ++i2) {
          for (int i3 = 0; i3 < m; ++i3) {
            if (i1 == i2 || i2 == i3 || i1 == i3) continue;
            moves.push_back(
                Move{{id(i1, j1), id(i2, j1), id(i2, j2), id(i3, j2)},
                     {1.0, -1.0, 1.0, -1.0},
                     4});
          }
        }
      }
    }
  }
  return moves;
}

}  // namespace

BruteForceOtResult brute_force_partial_ot(const std::vector<Real>& cost, int m,
                                          int n, Real alpha) {
  if (m < 0 || n < 0) throw ContractViolation("brute_force_partial_ot: negative dim");
  if (m * n > 6) throw ContractViolation("brute_force_partial_ot: instance too large");
  if (cost.size() != static_cast<std::size_t>(m) * n) {
    throw ContractViolation("brute_force_partial_ot: cost size mismatch");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ContractViolation("brute_force_partial_ot: alpha must be positive");
  }
  for (Real c : cost) {
    if (!std::isfinite(c)) throw ContractViolation("brute_force_partial_ot: non-finite cost");
  }

  BruteForceOtResult out;
  out.rows = m;
  out.cols = n;
  if (m == 0 || n == 0) return out;

  const Real mass = static_cast<Real>(std::min(m, n));
  out.plan.assign(static_cast<std::size_t>(m) * n, mass / (m * n));
  out.objective = objective_of(out.plan, cost, alpha);

  const auto moves = enumerate_moves(m, n);
  Real delta = 0.25;
  while (delta > 1e-11) {
    bool improved = true;
    while (improved) {
      improved = false;
      Real best_obj = out.objective;
      const Move* best_move = nullptr;
      for (const auto& mv : moves) {
        if (!feasible_after(out.plan, mv, delta, m, n)) continue;
        std::vector<Real> next(out.plan);
        for (int k = 0; k < mv.arity; ++k) {
          next[static_cast<std::size_t>(mv.cell[k])] += mv.sign[k] * delta;
        }
        const Real obj = objective_of(next, cost, alpha);
        if (obj < best_obj - 1e-15) {
          best_obj = obj;
          best_move = &mv;
        }
      }
      if (best_move != nullptr) {
        for (int k = 0; k < best_move->arity; ++k) {
          out.plan[static_cast<std::size_t>(best_move->cell[k])] +=
              best_move->sign[k] * delta;
          out.plan[static_cast<std::size_t>(best_move->cell[k])] =
              std::max(out.plan[static_cast<std::size_t>(best_move->cell[k])], 0.0);
        }
        out.objective = best_obj;
        improved = true;
      }
    }
    delta *= 0.5;
  }
  out.objective = objective_of(out.plan, cost, alpha);
  return out;
}

}  // namespace adrl::ot
