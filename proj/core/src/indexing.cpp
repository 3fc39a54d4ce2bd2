#include "adrl/distill/indexing.hpp"

#include <string>

#include "adrl/common.hpp"

namespace adrl::distill {

IndexedTrajectory index_achievements(const rl::Trajectory& traj) {
  const int T = traj.length();
  const auto& times = traj.achievement_times;
  const int m = static_cast<int>(times.size());
  if (static_cast<int>(traj.rewards.size()) != T ||
      static_cast<int>(traj.obs.size()) != T + 1) {
    throw ContractViolation("index_achievements: inconsistent trajectory lengths");
  }
  if (traj.achievement_ids.size() != times.size()) {
    throw ContractViolation("index_achievements: achievement arrays disagree");
  }
  for (int i = 0; i < m; ++i) {
    if (times[static_cast<std::size_t>(i)] < 0 ||
        times[static_cast<std::size_t>(i)] >= T) {
      throw ContractViolation("index_achievements: achievement time out of range");
    }
    if (i > 0 && times[static_cast<std::size_t>(i)] <=
                     times[static_cast<std::size_t>(i - 1)]) {
      throw ContractViolation("index_achievements: achievement times not increasing");
    }
  }
  int k = 0;
  for (int t = 0; t < T; ++t) {
    const bool unlocked = k < m && times[static_cast<std::size_t>(k)] == t;
    if (unlocked) ++k;
    const bool rewarded = traj.rewards[static_cast<std::size_t>(t)] == 1.0;
    if (unlocked != rewarded) {
      throw ContractViolation(
          "index_achievements: rewards and achievement times disagree at step " +
          std::to_string(t));
    }
  }

  IndexedTrajectory out;
  out.next.assign(static_cast<std::size_t>(T), -1);
  out.prev.assign(static_cast<std::size_t>(T), -1);
  int u = 0;
  for (int t = 0; t < T; ++t) {
    while (u < m && times[static_cast<std::size_t>(u)] < t) ++u;
    out.next[static_cast<std::size_t>(t)] = u < m ? u : -1;
    out.prev[static_cast<std::size_t>(t)] = u - 1;
  }
  return out;
}

}  // namespace adrl::distill
