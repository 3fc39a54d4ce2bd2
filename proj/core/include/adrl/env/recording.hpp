#pragma once

#include <functional>

#include <nlohmann/json.hpp>

#include "adrl/env/env.hpp"

namespace adrl::env {

// Compact episode trace: env identity + seed + actions, with rewards and
// completions stored for integrity checks. Observations are not stored;
// replay re-simulates them from the seed.
struct EpisodeRecording {
  std::string env_kind;
  nlohmann::json env_config;
  std::uint64_t seed = 0;
  std::vector<int> actions;
  std::vector<Real> rewards;
  std::vector<int> completions;  // -1 = none (repeats included)

  nlohmann::json to_json() const;
  static EpisodeRecording from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static EpisodeRecording load(const std::string& path);
};

// Runs one full episode with the given policy and records it.
EpisodeRecording record_episode(
    Env& env, std::uint64_t seed,
    const std::function<int(const Observation&)>& policy);

struct ReplayedEpisode {
  std::vector<Observation> observations;  // length = steps + 1
  std::vector<StepResult> steps;
  AchievementGraph graph;
};

// Re-simulates a recording; throws NumericError if rewards or completions
// diverge from the stored trace.
ReplayedEpisode replay(const EpisodeRecording& rec);

}  // namespace adrl::env
