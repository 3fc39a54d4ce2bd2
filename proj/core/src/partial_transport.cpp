#include "adrl/ot/partial_transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

extern "C" void dgesv_(const int* n, const int* nrhs, double* a, const int* lda,
                       int* ipiv, double* b, const int* ldb, int* info);

namespace adrl::ot {
namespace {

// Internal frame assumes m <= n. The total mass min(m, n) = m saturates every
// row cap, so the problem is equivalent to exact row marginals (= 1) with
// capped column sums (<= 1); the mass constraint is then implied. The plan is
// a diagonal scaling of the kernel: log T_ij = u_i + v_j - M_ij / alpha with
// v <= 0 and v_j < 0 only on saturated columns.
struct Potentials {
  std::vector<Real> u, v;
};

struct Frame {
  const std::vector<Real>* cost;  // row-major m*n, m <= n
  int m, n;
  Real alpha;

  Real log_entry(int i, int j, const Potentials& p) const {
    return p.u[static_cast<std::size_t>(i)] + p.v[static_cast<std::size_t>(j)] -
           (*cost)[static_cast<std::size_t>(i) * n + j] / alpha;
  }
};

Real logsumexp(const std::vector<Real>& x) {
  Real mx = -std::numeric_limits<Real>::infinity();
  for (Real t : x) mx = std::max(mx, t);
  if (!std::isfinite(mx)) return mx;
  Real acc = 0;
  for (Real t : x) acc += std::exp(t - mx);
  return mx + std::log(acc);
}

struct Residuals {
  std::vector<Real> row_sum, col_sum;
  Real max_row_dev = 0;   // max |row - 1|
  Real max_col_excess = 0;  // max (col - 1)+
  Real mass_error = 0;

  Real worst() const { return std::max({max_row_dev, max_col_excess, mass_error}); }
};

Residuals compute_residuals(const Frame& f, const Potentials& p) {
  Residuals r;
  r.row_sum.assign(static_cast<std::size_t>(f.m), 0.0);
  r.col_sum.assign(static_cast<std::size_t>(f.n), 0.0);
  for (int i = 0; i < f.m; ++i) {
    for (int j = 0; j < f.n; ++j) {
      const Real t = std::exp(f.log_entry(i, j, p));
      r.row_sum[static_cast<std::size_t>(i)] += t;
      r.col_sum[static_cast<std::size_t>(j)] += t;
    }
  }
  Real total = 0;
  for (Real rs : r.row_sum) {
    r.max_row_dev = std::max(r.max_row_dev, std::abs(rs - 1.0));
    total += rs;
  }
  for (Real cs : r.col_sum) r.max_col_excess = std::max(r.max_col_excess, cs - 1.0);
  r.max_col_excess = std::max(r.max_col_excess, 0.0);
  r.mass_error = std::abs(total - static_cast<Real>(f.m));
  return r;
}

// One alternating-projection cycle: exact row normalization, then the
// column-cap projection. With the previous column correction restored first
// (Dykstra), the cap step reduces to recomputing v_j = -max(lse_j, 0) against
// v = 0; when m == n the caps are forced to equality and the projection
// normalizes unconditionally (plain Sinkhorn, corrections inert).
void projection_cycle(const Frame& f, Potentials& p) {
  std::vector<Real> buf(static_cast<std::size_t>(f.n));
  for (int i = 0; i < f.m; ++i) {
    for (int j = 0; j < f.n; ++j) {
      buf[static_cast<std::size_t>(j)] = f.log_entry(i, j, p) - p.u[static_cast<std::size_t>(i)];
    }
    p.u[static_cast<std::size_t>(i)] = -logsumexp(buf);
  }
  const bool saturated = (f.m == f.n);
  std::vector<Real> colbuf(static_cast<std::size_t>(f.m));
  for (int j = 0; j < f.n; ++j) {
    for (int i = 0; i < f.m; ++i) {
      colbuf[static_cast<std::size_t>(i)] = f.log_entry(i, j, p) - p.v[static_cast<std::size_t>(j)];
    }
    const Real lse = logsumexp(colbuf);
    p.v[static_cast<std::size_t>(j)] = saturated ? -lse : -std::max(lse, 0.0);
  }
}

// Semismooth Newton on the dual potentials. Alternating projections identify
// the scalings but their tail contraction degrades like exp(-gap/alpha) once
// the plan concentrates near a vertex, so after warm-up we solve the KKT
// system (rows = 1; saturated cols = 1; v <= 0 elsewhere) directly. Returns
// Newton iterations used.
int newton_polish(const Frame& f, Potentials& p, Real target, int max_steps) {
  const int m = f.m, n = f.n;
  Residuals res = compute_residuals(f, p);
  int steps = 0;
  int bad_steps = 0;
  while (steps < max_steps && res.worst() > target) {
    ++steps;
    // Active columns: currently priced (v < 0) or violating the cap. When
    // m == n every column cap is forced to equality, price sign regardless.
    std::vector<int> active;
    for (int j = 0; j < n; ++j) {
      if (m == n || p.v[static_cast<std::size_t>(j)] < 0.0 ||
          res.col_sum[static_cast<std::size_t>(j)] > 1.0) {
        active.push_back(j);
      }
    }
    // If every column is active the system has the constant gauge shift in
    // its null space; pin the last active column.
    const bool pin = (static_cast<int>(active.size()) == n);
    const int na = static_cast<int>(active.size()) - (pin ? 1 : 0);
    const int dim = m + na;

    std::vector<Real> J(static_cast<std::size_t>(dim) * dim, 0.0);
    std::vector<Real> rhs(static_cast<std::size_t>(dim));
    auto Jat = [&](int a, int b) -> Real& {
      return J[static_cast<std::size_t>(b) * dim + a];  // column-major for dgesv
    };
    for (int i = 0; i < m; ++i) {
      Jat(i, i) = res.row_sum[static_cast<std::size_t>(i)];
      rhs[static_cast<std::size_t>(i)] = 1.0 - res.row_sum[static_cast<std::size_t>(i)];
    }
    for (int a = 0; a < na; ++a) {
      const int j = active[static_cast<std::size_t>(a)];
      Jat(m + a, m + a) = res.col_sum[static_cast<std::size_t>(j)];
      rhs[static_cast<std::size_t>(m + a)] = 1.0 - res.col_sum[static_cast<std::size_t>(j)];
      for (int i = 0; i < m; ++i) {
        const Real t = std::exp(f.log_entry(i, j, p));
        Jat(i, m + a) = t;
        Jat(m + a, i) = t;
      }
    }

    int info = 0;
    const int nrhs = 1;
    std::vector<int> ipiv(static_cast<std::size_t>(dim));
    dgesv_(&dim, &nrhs, J.data(), &dim, ipiv.data(), rhs.data(), &dim, &info);
    if (info != 0) {
      if (++bad_steps >= 2) break;
      projection_cycle(f, p);
      res = compute_residuals(f, p);
      continue;
    }

    Real step_inf = 0;
    for (Real d : rhs) step_inf = std::max(step_inf, std::abs(d));
    Real tau = std::min(1.0, 30.0 / std::max(step_inf, 1e-300));

    const Potentials saved = p;
    const Real phi0 = res.worst();
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      p = saved;
      for (int i = 0; i < m; ++i) p.u[static_cast<std::size_t>(i)] += tau * rhs[static_cast<std::size_t>(i)];
      for (int a = 0; a < na; ++a) {
        p.v[static_cast<std::size_t>(active[static_cast<std::size_t>(a)])] +=
            tau * rhs[static_cast<std::size_t>(m + a)];
      }
      // Dual feasibility: cap prices never act outward. Skip the clamp in
      // the fully saturated case, where the gauge makes signs conventional.
      if (!pin) {
        for (auto& vj : p.v) vj = std::min(vj, 0.0);
      }
      Residuals trial = compute_residuals(f, p);
      if (trial.worst() < phi0) {
        res = trial;
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) {
      p = saved;
      if (++bad_steps >= 2) break;
      // Re-anchor with a projection cycle and retry.
      projection_cycle(f, p);
      res = compute_residuals(f, p);
    } else {
      bad_steps = 0;
    }
  }
  // Fix the gauge so reported prices are nonpositive.
  Real shift = 0;
  for (Real vj : p.v) shift = std::max(shift, vj);
  if (shift > 0) {
    for (auto& vj : p.v) vj -= shift;
    for (auto& ui : p.u) ui += shift;
  }
  return steps;
}

}  // namespace

PartialOtResult solve_partial_ot(const std::vector<Real>& cost, int m, int n,
                                 Real alpha, int max_iters, Real tol) {
  if (m < 0 || n < 0) throw ContractViolation("solve_partial_ot: negative dim");
  if (cost.size() != static_cast<std::size_t>(m) * n) {
    throw ContractViolation("solve_partial_ot: cost size mismatch");
  }
  if (!(alpha > 0)) throw ContractViolation("solve_partial_ot: alpha must be > 0");
  if (max_iters < 1) throw ContractViolation("solve_partial_ot: max_iters < 1");
  if (!(tol > 0)) throw ContractViolation("solve_partial_ot: tol must be > 0");
  for (Real c : cost) {
    if (!std::isfinite(c)) throw ContractViolation("solve_partial_ot: non-finite cost");
  }

  PartialOtResult res;
  res.rows = m;
  res.cols = n;
  if (m == 0 || n == 0) {
    res.converged = true;
    return res;
  }

  const bool transposed = m > n;
  std::vector<Real> work_cost;
  const std::vector<Real>* c = &cost;
  int mm = m, nn = n;
  if (transposed) {
    mm = n;
    nn = m;
    work_cost.resize(cost.size());
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        work_cost[static_cast<std::size_t>(j) * m + i] =
            cost[static_cast<std::size_t>(i) * n + j];
      }
    }
    c = &work_cost;
  }

  Potentials p;
  p.u.assign(static_cast<std::size_t>(mm), 0.0);
  p.v.assign(static_cast<std::size_t>(nn), 0.0);

  // Anneal the regularizer from a smooth level down to alpha, rescaling the
  // potentials between levels. At small alpha the projection cycles alone
  // move the dual prices by only O(alpha) per cycle and off-support entries
  // underflow, so they can neither identify the support nor feed Newton a
  // nonsingular system without this warm start.
  Real spread = 0;
  {
    Real lo = (*c)[0], hi = (*c)[0];
    for (Real x : *c) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    spread = hi - lo;
  }
  std::vector<Real> ladder{alpha};
  for (Real a = 2 * alpha; a < spread / 4; a *= 2) ladder.push_back(a);
  std::reverse(ladder.begin(), ladder.end());

  const Real target = std::min(tol, Real(1e-10));
  int cycles = 0;
  int newton_steps = 0;
  Residuals r;
  Real level_alpha = ladder.front();
  for (std::size_t li = 0; li < ladder.size(); ++li) {
    const Real next_alpha = ladder[li];
    const Real scale = level_alpha / next_alpha;
    if (scale != 1.0) {
      for (auto& x : p.u) x *= scale;
      for (auto& x : p.v) x *= scale;
    }
    level_alpha = next_alpha;
    const Frame frame{c, mm, nn, level_alpha};
    const bool last = (li + 1 == ladder.size());
    const Real level_target = last ? target : std::max(target, Real(1e-3));
    const int level_cap = last ? max_iters : std::min(max_iters, 50);
    Real prev_worst = std::numeric_limits<Real>::infinity();
    int stalled = 0;
    int level_cycles = 0;
    while (cycles < max_iters && level_cycles < level_cap) {
      projection_cycle(frame, p);
      ++cycles;
      ++level_cycles;
      r = compute_residuals(frame, p);
      if (r.worst() < level_target) break;
      stalled = (r.worst() > 0.5 * prev_worst) ? stalled + 1 : 0;
      prev_worst = r.worst();
      if (stalled >= 8) break;  // sublinear tail; hand over to Newton
    }
    if (last && r.worst() >= target) {
      newton_steps = newton_polish(frame, p, target, 60);
      r = compute_residuals(frame, p);
    }
  }
  const Frame frame{c, mm, nn, alpha};
  res.iterations = cycles + newton_steps;
  res.converged = r.worst() < tol;
  res.mass_error = r.mass_error;
  if (transposed) {
    res.max_row_violation = r.max_col_excess;
    res.max_col_violation = r.max_row_dev;
  } else {
    res.max_row_violation = r.max_row_dev;
    res.max_col_violation = r.max_col_excess;
  }

  const std::size_t sz = static_cast<std::size_t>(m) * n;
  res.plan.resize(sz);
  res.cost = 0;
  Real ent = 0;
  res.mass = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const Real t = transposed ? std::exp(frame.log_entry(j, i, p))
                                : std::exp(frame.log_entry(i, j, p));
      res.plan[static_cast<std::size_t>(i) * n + j] = t;
      res.cost += t * cost[static_cast<std::size_t>(i) * n + j];
      if (t > 0) ent += t * std::log(t);
      res.mass += t;
    }
  }
  res.objective = res.cost + alpha * ent;
  return res;
}

std::vector<std::pair<int, int>> threshold_match(const PartialOtResult& result,
                                                 Real threshold) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < result.rows; ++i) {
    for (int j = 0; j < result.cols; ++j) {
      if (result.at(i, j) > threshold) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

}  // namespace adrl::ot
