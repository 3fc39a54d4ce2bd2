#pragma once

#include "adrl/env/env.hpp"
#include "adrl/rng.hpp"

namespace adrl::env {

// Fixed-length episodes where achievements fire at scheduled timesteps and
// actions change nothing. The reset seed picks one schedule from the bank.
// Observations encode elapsed time and the last completed achievement,
// either one-hot or as binary codes.
struct ScriptedConfig {
  // schedules[i] = ordered (time, achievement id) pairs, times in
  // [1, episode_len], strictly increasing; ids may repeat across times.
  std::vector<std::vector<std::pair<int, int>>> schedules;
  int episode_len = 32;
  int num_achievements = 4;
  int action_count = 5;
  bool binary_encoding = false;

  void validate() const;
};

class ScriptedEnv : public Env {
 public:
  explicit ScriptedEnv(ScriptedConfig cfg);

  Observation reset(std::uint64_t seed) override;
  StepResult step(int action) override;

  int action_count() const override { return cfg_.action_count; }
  std::vector<int> observation_shape() const override;
  const AchievementGraph& graph() const override { return graph_; }
  UnlockMask unlocked() const override { return unlocked_; }
  int steps_taken() const override { return t_; }
  bool done() const override { return done_; }
  std::string kind() const override { return "scripted"; }
  nlohmann::json config_json() const override;
  std::unique_ptr<Env> clone_config() const override;

  const ScriptedConfig& config() const { return cfg_; }
  int active_schedule() const { return schedule_idx_; }

 private:
  Observation observe() const;

  ScriptedConfig cfg_;
  AchievementGraph graph_;
  int time_bits_ = 0, last_bits_ = 0;

  int schedule_idx_ = 0;
  int t_ = 0;
  int last_ = -1;  // last completion, repeats included
  UnlockMask unlocked_ = 0;
  bool done_ = false;
  bool live_ = false;
};

}  // namespace adrl::env
