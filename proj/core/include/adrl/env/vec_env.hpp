#pragma once

#include "adrl/env/env.hpp"
#include "adrl/rng.hpp"

namespace adrl::env {

// Serial batch of envs with auto-reset. When an episode ends, the slot is
// reseeded from the vec env's own seed stream and the item carries both the
// terminal observation (inside result) and the fresh reset observation.
class VecEnv {
 public:
  VecEnv(std::vector<std::unique_ptr<Env>> envs, std::uint64_t seed);

  struct Item {
    StepResult result;
    bool was_reset = false;
    Observation reset_obs;  // set iff was_reset
    std::uint64_t reset_seed = 0;
  };

  int size() const { return static_cast<int>(envs_.size()); }
  Env& env(int i) { return *envs_[static_cast<std::size_t>(i)]; }
  const Env& env(int i) const { return *envs_[static_cast<std::size_t>(i)]; }

  // Seeds every slot; returns the observations to act on.
  std::vector<Observation> reset_all();
  // One action per slot; slots step left to right (deterministic).
  std::vector<Item> step(const std::vector<int>& actions);

  // Observation the policy should act on for slot i (reset obs after an
  // auto-reset, else the last step's obs).
  const Observation& current_obs(int i) const;
  std::uint64_t episode_seed(int i) const {
    return episode_seed_[static_cast<std::size_t>(i)];
  }

 private:
  std::vector<std::unique_ptr<Env>> envs_;
  Rng seed_stream_;
  std::vector<Observation> current_;
  std::vector<std::uint64_t> episode_seed_;
  bool live_ = false;
};

}  // namespace adrl::env
