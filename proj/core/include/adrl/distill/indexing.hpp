#pragma once

#include <vector>

#include "adrl/rl/rollout.hpp"

namespace adrl::distill {

// Per-step achievement indices for an episode. For transition index t,
// next[t] points into the trajectory's achievement arrays at the upcoming
// achievement (smallest t_i with t <= t_i), or -1 once none remain; prev[t]
// points at the most recent achievement strictly before t (largest t_i < t),
// or -1 until the first unlock. Both are monotone nondecreasing in t.
struct IndexedTrajectory {
  std::vector<int> next;
  std::vector<int> prev;

  int length() const { return static_cast<int>(next.size()); }
};

// Requires achievement times to be strictly increasing transition indices
// that coincide exactly with the reward-1 transitions.
IndexedTrajectory index_achievements(const rl::Trajectory& traj);

}  // namespace adrl::distill
