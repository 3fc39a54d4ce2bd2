#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "adrl/env/achievement.hpp"

namespace adrl::env {

// Observations are flat one-hot/binary grids with values in {0,1}.
struct Observation {
  std::vector<std::uint8_t> data;
};

struct StepResult {
  Observation obs;  // observation after the transition (terminal one if done)
  Real reward = 0;
  bool done = false;
  // Achievement completed by this transition, set on repeats as well;
  // first_unlock marks the rewarded first completion of the episode.
  std::optional<int> unlocked;
  bool first_unlock = false;
};

class Env {
 public:
  virtual ~Env() = default;

  // Fully determines the episode layout; the env is deterministic afterwards.
  virtual Observation reset(std::uint64_t seed) = 0;
  // Throws ContractViolation when called before reset or after done.
  virtual StepResult step(int action) = 0;

  virtual int action_count() const = 0;
  virtual std::vector<int> observation_shape() const = 0;
  int observation_size() const {
    int n = 1;
    for (int d : observation_shape()) n *= d;
    return n;
  }

  virtual const AchievementGraph& graph() const = 0;
  virtual UnlockMask unlocked() const = 0;  // first unlocks so far this episode
  virtual int steps_taken() const = 0;
  virtual bool done() const = 0;

  virtual std::string kind() const = 0;
  virtual nlohmann::json config_json() const = 0;
  virtual std::unique_ptr<Env> clone_config() const = 0;  // fresh, not reset
};

// Builds an env from its kind string and config (the recording header
// format). Throws NumericError on unknown kind or malformed config.
std::unique_ptr<Env> make_env(const std::string& kind,
                              const nlohmann::json& config);

}  // namespace adrl::env
