#pragma once

#include <cstdint>
#include <vector>

#include "adrl/env/vec_env.hpp"
#include "adrl/net/agent_net.hpp"
#include "adrl/rl/value_norm.hpp"
#include "adrl/rng.hpp"

namespace adrl::rl {

// One completed (or in-progress) episode. obs has length T+1 (s_0 .. s_T);
// actions/rewards have length T, so transition t is
// (obs[t], actions[t], obs[t+1]). Achievements are the transitions with
// reward 1, listed in unlock order.
struct Trajectory {
  std::vector<std::vector<std::uint8_t>> obs;
  std::vector<int> actions;
  std::vector<Real> rewards;
  std::vector<int> achievement_times;  // strictly increasing step indices
  std::vector<int> achievement_ids;   // env achievement ids, parallel
  std::uint64_t seed = 0;

  int length() const { return static_cast<int>(actions.size()); }
  int achievement_count() const {
    return static_cast<int>(achievement_times.size());
  }
};

// Fixed-size on-policy batch in [t][e] row order (row = t * envs + e).
// Values and targets live in environment-return space except the
// explicitly normalized copies used by the value loss.
struct RolloutBatch {
  int steps = 0;      // per env
  int envs = 0;
  int obs_size = 0;
  int latent = 0;
  std::vector<std::uint8_t> obs;   // [rows, obs_size]
  std::vector<Real> memory;        // [rows, latent], as used at collection
  std::vector<int> actions;        // [rows]
  std::vector<Real> log_probs;     // [rows], under the collecting policy
  std::vector<Real> values;        // [rows], denormalized V_old
  std::vector<Real> rewards;       // [rows]
  std::vector<std::uint8_t> dones; // [rows]

  // Filled by finalization.
  std::vector<Real> advantages;    // [rows]
  std::vector<Real> targets;       // [rows], return space
  std::vector<Real> targets_norm;  // [rows], under the updated normalizer
  bool finalized = false;

  int rows() const { return steps * envs; }
  int row(int t, int e) const { return t * envs + e; }
};

struct CollectResult {
  RolloutBatch batch;
  std::vector<Trajectory> completed;  // episodes that ended in this rollout
  int episodes_completed = 0;
  Real reward_sum = 0;
};

// Steps a vec env under the current policy, maintaining one memory vector
// per env slot (the last unlocked achievement's nu, zero from episode
// start) and per-env episode fragments that carry across rollouts. The
// returned batch is finalized: advantages via GAE and value targets folded
// into the normalizer.
class RolloutCollector {
 public:
  RolloutCollector(env::VecEnv& venv, const net::AgentNet& net,
                   std::uint64_t seed);

  // total_steps is spread evenly across env slots (must divide).
  // use_memory=false pins every memory vector to the zero sentinel.
  CollectResult collect(ValueNormalizer& vnorm, int total_steps, Real gamma,
                        Real lambda, bool use_memory = true);

  // In-progress fragment for slot e (carried into the next rollout).
  const Trajectory& partial(int e) const;
  const std::vector<Real>& memory(int e) const;

 private:
  env::VecEnv* venv_;
  const net::AgentNet* net_;
  Rng action_rng_;
  std::vector<Trajectory> partial_;
  std::vector<std::vector<Real>> memory_;
  bool started_ = false;
};

}  // namespace adrl::rl
