#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include "adrl/ot/brute_force.hpp"
#include "adrl/ot/hungarian.hpp"
#include "adrl/ot/partial_transport.hpp"
#include "adrl/rng.hpp"

using namespace adrl;
using namespace adrl::ot;

namespace {

std::vector<Real> random_cost(Rng& rng, int m, int n, Real lo = 0.0,
                              Real hi = 2.0) {
  std::vector<Real> cost(static_cast<std::size_t>(m) * n);
  for (auto& c : cost) c = rng.uniform(lo, hi);
  return cost;
}

struct MatchingOptimum {
  Real best = 0.0;
  Real second = 0.0;  // best cost among matchings differing from the best
  std::set<std::pair<int, int>> pairs;
};

void enumerate_matchings(const std::vector<Real>& cost, int m, int n, int row,
                         std::vector<bool>& used, std::vector<int>& pick,
                         Real acc, MatchingOptimum& out) {
  if (row == m) {
    if (acc < out.best) {
      out.second = out.best;
      out.best = acc;
      out.pairs.clear();
      for (int i = 0; i < m; ++i) out.pairs.emplace(i, pick[static_cast<std::size_t>(i)]);
    } else if (acc < out.second) {
      out.second = acc;
    }
    return;
  }
  for (int j = 0; j < n; ++j) {
    if (used[static_cast<std::size_t>(j)]) continue;
    used[static_cast<std::size_t>(j)] = true;
    pick[static_cast<std::size_t>(row)] = j;
    enumerate_matchings(cost, m, n, row + 1, used, pick,
                        acc + cost[static_cast<std::size_t>(row) * n + j], out);
    used[static_cast<std::size_t>(j)] = false;
  }
}

// Exact optimum over partial matchings (min(m,n) cells, distinct rows/cols)
// by exhaustive enumeration. Only usable for small instances.
MatchingOptimum best_partial_matching(const std::vector<Real>& cost, int m,
                                      int n) {
  MatchingOptimum out;
  out.best = 1e18;
  out.second = 1e18;
  if (m <= n) {
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    std::vector<int> pick(static_cast<std::size_t>(m), -1);
    enumerate_matchings(cost, m, n, 0, used, pick, 0.0, out);
    return out;
  }
  std::vector<Real> t(static_cast<std::size_t>(n) * m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      t[static_cast<std::size_t>(j) * m + i] = cost[static_cast<std::size_t>(i) * n + j];
    }
  }
  MatchingOptimum tout = best_partial_matching(t, n, m);
  out.best = tout.best;
  out.second = tout.second;
  for (auto [j, i] : tout.pairs) out.pairs.emplace(i, j);
  return out;
}

Real matching_cost(const std::vector<Real>& cost, int n,
                   const std::vector<int>& row_to_col) {
  Real total = 0.0;
  for (int i = 0; i < static_cast<int>(row_to_col.size()); ++i) {
    if (row_to_col[static_cast<std::size_t>(i)] >= 0) {
      total += cost[static_cast<std::size_t>(i) * n + row_to_col[static_cast<std::size_t>(i)]];
    }
  }
  return total;
}

}  // namespace

TEST_CASE("partial ot: one source, two targets has a logistic closed form") {
  const Real alpha = 0.05;
  auto res = solve_partial_ot({0.0, 1.0}, 1, 2, alpha);
  REQUIRE(res.converged);
  const Real expected = 1.0 / (1.0 + std::exp(-1.0 / alpha));
  CHECK(res.at(0, 0) == doctest::Approx(expected).epsilon(0).scale(0).epsilon(1e-12));
  CHECK(std::abs(res.at(0, 0) - expected) < 1e-9);
  CHECK(std::abs(res.at(0, 1) - (1.0 - expected)) < 1e-9);
  CHECK(std::abs(res.mass - 1.0) < 1e-9);
}

TEST_CASE("partial ot: huge alpha yields the uniform feasible plan") {
  Rng rng(11);
  const int m = 3, n = 2;
  auto cost = random_cost(rng, m, n);
  auto res = solve_partial_ot(cost, m, n, 1e6);
  REQUIRE(res.converged);
  const Real uniform = static_cast<Real>(std::min(m, n)) / (m * n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      CHECK(std::abs(res.at(i, j) - uniform) < 1e-6);
    }
  }
}

TEST_CASE("partial ot: solver matches the exhaustive oracle on tiny instances") {
  Rng rng(29);
  const std::pair<int, int> shapes[] = {{1, 1}, {1, 3}, {3, 1}, {2, 2},
                                        {2, 3}, {3, 2}, {1, 6}, {6, 1}};
  const Real alphas[] = {0.05, 0.3, 1.0};
  for (auto [m, n] : shapes) {
    for (Real alpha : alphas) {
      for (int rep = 0; rep < 3; ++rep) {
        auto cost = random_cost(rng, m, n);
        auto res = solve_partial_ot(cost, m, n, alpha, 20000);
        auto ref = brute_force_partial_ot(cost, m, n, alpha);
        INFO("shape ", m, "x", n, " alpha ", alpha, " rep ", rep);
        REQUIRE(res.converged);
        CHECK(std::abs(res.objective - ref.objective) < 1e-4);
        CHECK(res.max_row_violation < 1e-6);
        CHECK(res.max_col_violation < 1e-6);
        CHECK(res.mass_error < 1e-6);
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < n; ++j) {
            CHECK(std::abs(res.at(i, j) - ref.at(i, j)) < 2e-3);
          }
        }
      }
    }
  }
}

TEST_CASE("threshold match invariant holds for any feasible plan") {
  Rng rng(167);
  for (int rep = 0; rep < 50; ++rep) {
    const int m = 1 + static_cast<int>(rng.uniform_int(5));
    const int n = 1 + static_cast<int>(rng.uniform_int(5));
    PartialOtResult fake;
    fake.rows = m;
    fake.cols = n;
    fake.plan.resize(static_cast<std::size_t>(m) * n);
    // Random nonnegative rows scaled to sum at most 1, then columns scaled
    // down to respect their caps: an arbitrary feasible-ish plan.
    for (int i = 0; i < m; ++i) {
      Real rs = 0;
      for (int j = 0; j < n; ++j) {
        const Real x = rng.uniform() < 0.3 ? rng.uniform(0.5, 1.0) : rng.uniform(0.0, 0.2);
        fake.plan[static_cast<std::size_t>(i) * n + j] = x;
        rs += x;
      }
      const Real scale = rng.uniform(0.2, 1.0) / std::max(rs, Real(1));
      for (int j = 0; j < n; ++j) fake.plan[static_cast<std::size_t>(i) * n + j] *= scale;
    }
    for (int j = 0; j < n; ++j) {
      Real cs = 0;
      for (int i = 0; i < m; ++i) cs += fake.at(i, j);
      if (cs > 1.0) {
        for (int i = 0; i < m; ++i) fake.plan[static_cast<std::size_t>(i) * n + j] /= cs;
      }
    }
    std::set<int> rows, cols;
    for (auto [i, j] : threshold_match(fake)) {
      CHECK(rows.insert(i).second);
      CHECK(cols.insert(j).second);
    }
  }
}

TEST_CASE("partial ot: feasibility residuals stay below tolerance at scale") {
  Rng rng(47);
  const std::pair<int, int> shapes[] = {{8, 13}, {13, 8}, {10, 10}, {12, 12}};
  for (auto [m, n] : shapes) {
    auto cost = random_cost(rng, m, n);
    auto res = solve_partial_ot(cost, m, n, 0.05, 20000);
    INFO("shape ", m, "x", n);
    REQUIRE(res.converged);
    CHECK(res.max_row_violation <= 1e-9);
    CHECK(res.max_col_violation <= 1e-9);
    CHECK(res.mass_error <= 1e-9);
    CHECK(std::abs(res.mass - std::min(m, n)) < 1e-8);
    Real plan_min = 1e18;
    for (Real t : res.plan) plan_min = std::min(plan_min, t);
    CHECK(plan_min >= 0.0);
  }
}

TEST_CASE("partial ot: small alpha recovers the optimal hard matching") {
  Rng rng(83);
  const std::pair<int, int> shapes[] = {{2, 3}, {3, 2}, {2, 2}, {1, 5}, {4, 4}};
  for (auto [m, n] : shapes) {
    // Reject instances whose best two matchings are close, so the limit
    // plan is unambiguous at this alpha.
    std::vector<Real> cost;
    MatchingOptimum opt;
    do {
      cost = random_cost(rng, m, n);
      opt = best_partial_matching(cost, m, n);
    } while (opt.second - opt.best < 0.2);

    auto res = solve_partial_ot(cost, m, n, 0.01, 50000);
    INFO("shape ", m, "x", n);
    REQUIRE(res.converged);
    auto pairs = threshold_match(res);
    std::set<std::pair<int, int>> got(pairs.begin(), pairs.end());
    CHECK(got == opt.pairs);
    for (auto [i, j] : pairs) CHECK(res.at(i, j) > 0.99);
  }
}

TEST_CASE("partial ot: all-zero costs give the uniform doubly stochastic plan") {
  auto res = solve_partial_ot(std::vector<Real>(9, 0.0), 3, 3, 0.05);
  REQUIRE(res.converged);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(std::abs(res.at(i, j) - 1.0 / 3) < 1e-9);
  }
}

TEST_CASE("partial ot: transposing the costs transposes the plan") {
  Rng rng(59);
  const std::pair<int, int> shapes[] = {{3, 5}, {4, 4}, {6, 2}};
  for (auto [m, n] : shapes) {
    auto cost = random_cost(rng, m, n);
    std::vector<Real> tcost(cost.size());
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        tcost[static_cast<std::size_t>(j) * m + i] = cost[static_cast<std::size_t>(i) * n + j];
      }
    }
    auto a = solve_partial_ot(cost, m, n, 0.05);
    auto b = solve_partial_ot(tcost, n, m, 0.05);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) CHECK(std::abs(a.at(i, j) - b.at(j, i)) < 1e-6);
    }
  }
}

TEST_CASE("partial ot: shrinking alpha converges to the unique matching support") {
  Rng rng(97);
  for (int rep = 0; rep < 3; ++rep) {
    std::vector<Real> cost;
    MatchingOptimum opt;
    do {
      cost = random_cost(rng, 3, 3);
      opt = best_partial_matching(cost, 3, 3);
    } while (opt.second - opt.best < 0.25);
    Real prev_offsupport = 2.0;
    for (Real alpha : {0.05, 0.01, 0.002}) {
      auto res = solve_partial_ot(cost, 3, 3, alpha);
      INFO("rep ", rep, " alpha ", alpha);
      REQUIRE(res.converged);
      Real offsupport = 0.0;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          if (!opt.pairs.count({i, j})) offsupport = std::max(offsupport, res.at(i, j));
        }
      }
      CHECK(offsupport <= prev_offsupport + 1e-12);
      prev_offsupport = offsupport;
      if (alpha <= 0.01) {
        auto pairs = threshold_match(res);
        std::set<std::pair<int, int>> got(pairs.begin(), pairs.end());
        CHECK(got == opt.pairs);
      }
    }
    CHECK(prev_offsupport < 1e-6);
  }
}

TEST_CASE("threshold match uses each row and column at most once") {
  Rng rng(131);
  for (int rep = 0; rep < 20; ++rep) {
    const int m = 1 + static_cast<int>(rng.uniform_int(6));
    const int n = 1 + static_cast<int>(rng.uniform_int(6));
    auto cost = random_cost(rng, m, n);
    auto res = solve_partial_ot(cost, m, n, 0.05, 20000);
    auto pairs = threshold_match(res);
    std::set<int> rows, cols;
    for (auto [i, j] : pairs) {
      CHECK(rows.insert(i).second);
      CHECK(cols.insert(j).second);
    }
  }
}

TEST_CASE("partial ot: invalid inputs are rejected, empty inputs are not") {
  CHECK_THROWS_AS(solve_partial_ot({0.0}, 1, 2, 0.05), ContractViolation);
  CHECK_THROWS_AS(solve_partial_ot({0.0, 1.0}, 1, 2, 0.0), ContractViolation);
  CHECK_THROWS_AS(solve_partial_ot({0.0, 1.0}, 1, 2, -1.0), ContractViolation);
  CHECK_THROWS_AS(
      solve_partial_ot({0.0, std::numeric_limits<Real>::infinity()}, 1, 2, 0.05),
      ContractViolation);

  auto empty = solve_partial_ot({}, 0, 3, 0.05);
  CHECK(empty.converged);
  CHECK(empty.plan.empty());
  CHECK(empty.mass == 0.0);
  CHECK(threshold_match(empty).empty());

  auto single = solve_partial_ot({7.5}, 1, 1, 0.05);
  REQUIRE(single.converged);
  CHECK(std::abs(single.at(0, 0) - 1.0) < 1e-9);
  CHECK(std::abs(single.objective - 7.5) < 1e-8);
}

TEST_CASE("oracle: rejects oversized and malformed instances") {
  Rng rng(7);
  CHECK_THROWS_AS(brute_force_partial_ot(random_cost(rng, 3, 3), 3, 3, 0.05),
                  ContractViolation);
  CHECK_THROWS_AS(brute_force_partial_ot({0.0}, 1, 2, 0.05), ContractViolation);
  CHECK_THROWS_AS(brute_force_partial_ot({0.0, 1.0}, 1, 2, 0.0),
                  ContractViolation);
}

TEST_CASE("oracle: matches the logistic closed form") {
  const Real alpha = 0.05;
  auto ref = brute_force_partial_ot({0.0, 1.0}, 1, 2, alpha);
  const Real expected = 1.0 / (1.0 + std::exp(-1.0 / alpha));
  CHECK(std::abs(ref.at(0, 0) - expected) < 1e-6);
  CHECK(std::abs(ref.at(0, 1) - (1.0 - expected)) < 1e-6);
}

TEST_CASE("hungarian: agrees with permutation enumeration") {
  Rng rng(173);
  const std::pair<int, int> shapes[] = {{5, 5}, {3, 5}, {5, 3}, {1, 4}, {4, 1}};
  for (auto [m, n] : shapes) {
    for (int rep = 0; rep < 10; ++rep) {
      auto cost = random_cost(rng, m, n, -1.0, 3.0);
      auto match = hungarian_match(cost, m, n);
      auto opt = best_partial_matching(cost, m, n);
      INFO("shape ", m, "x", n, " rep ", rep);
      REQUIRE(static_cast<int>(match.size()) == m);
      std::set<int> cols;
      int assigned = 0;
      for (int j : match) {
        if (j >= 0) {
          CHECK(j < n);
          CHECK(cols.insert(j).second);
          ++assigned;
        }
      }
      CHECK(assigned == std::min(m, n));
      CHECK(matching_cost(cost, n, match) == doctest::Approx(opt.best).epsilon(1e-12));
    }
  }
}

TEST_CASE("hungarian: validates inputs and handles empty instances") {
  CHECK(hungarian_match({}, 0, 4).empty());
  CHECK(hungarian_match({}, 3, 0) == std::vector<int>({-1, -1, -1}));
  CHECK_THROWS_AS(hungarian_match({0.0}, 1, 2), ContractViolation);
  CHECK_THROWS_AS(
      hungarian_match({0.0, std::numeric_limits<Real>::quiet_NaN()}, 1, 2),
      ContractViolation);
}

TEST_CASE("hungarian and small-alpha transport select equally cheap pairs") {
  Rng rng(211);
  for (int rep = 0; rep < 5; ++rep) {
    const int m = 3, n = 4;
    std::vector<Real> cost;
    MatchingOptimum opt;
    do {
      cost = random_cost(rng, m, n);
      opt = best_partial_matching(cost, m, n);
    } while (opt.second - opt.best < 0.2);
    auto match = hungarian_match(cost, m, n);
    auto res = solve_partial_ot(cost, m, n, 0.01, 50000);
    REQUIRE(res.converged);
    auto pairs = threshold_match(res);
    std::set<std::pair<int, int>> ot_pairs(pairs.begin(), pairs.end());
    std::set<std::pair<int, int>> hung_pairs;
    for (int i = 0; i < m; ++i) {
      if (match[static_cast<std::size_t>(i)] >= 0) {
        hung_pairs.emplace(i, match[static_cast<std::size_t>(i)]);
      }
    }
    CHECK(hung_pairs == opt.pairs);
    CHECK(ot_pairs == hung_pairs);
  }
}
