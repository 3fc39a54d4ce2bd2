#pragma once

#include <cstdint>
#include <vector>

#include "adrl/common.hpp"

namespace adrl::rl {

struct GaeResult {
  std::vector<Real> advantages;
  std::vector<Real> targets;  // value targets: advantage + value
};

// Generalized advantage estimation over one env's step sequence. Values are
// in environment-return space. done_t marks transitions into a terminal
// state; the recursion never leaks across them. bootstrap_value estimates
// the state after the last step and is ignored when that step terminated.
//   delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)
//   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
GaeResult compute_gae(const std::vector<Real>& rewards,
                      const std::vector<Real>& values,
                      const std::vector<std::uint8_t>& dones,
                      Real bootstrap_value, Real gamma, Real lambda);

}  // namespace adrl::rl
