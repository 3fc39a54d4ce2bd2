#include "adrl/env/recording.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "adrl/env/keychain.hpp"
#include "adrl/env/scripted.hpp"

namespace adrl::env {

std::unique_ptr<Env> make_env(const std::string& kind,
                              const nlohmann::json& config) {
  try {
    if (kind == "keychain") {
      KeychainConfig c;
      c.main_rooms = config.at("main_rooms").get<int>();
      c.side_branch = config.at("side_branch").get<bool>();
      c.room_w = config.at("room_w").get<int>();
      c.room_h = config.at("room_h").get<int>();
      c.step_limit = config.at("step_limit").get<int>();
      c.randomize_palette = config.at("randomize_palette").get<bool>();
      return std::make_unique<KeychainEnv>(c);
    }
    if (kind == "scripted") {
      ScriptedConfig c;
      for (const auto& s : config.at("schedules")) {
        std::vector<std::pair<int, int>> sched;
        for (const auto& e : s) {
          sched.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        }
        c.schedules.push_back(std::move(sched));
      }
      c.episode_len = config.at("episode_len").get<int>();
      c.num_achievements = config.at("num_achievements").get<int>();
      c.action_count = config.at("action_count").get<int>();
      c.binary_encoding = config.at("binary_encoding").get<bool>();
      return std::make_unique<ScriptedEnv>(c);
    }
  } catch (const nlohmann::json::exception& e) {
    throw NumericError(std::string("make_env: malformed config: ") + e.what());
  }
  throw NumericError("make_env: unknown env kind '" + kind + "'");
}

nlohmann::json EpisodeRecording::to_json() const {
  nlohmann::json j;
  j["format"] = "adrl-episode-v1";
  j["env_kind"] = env_kind;
  j["env_config"] = env_config;
  j["seed"] = seed;
  j["actions"] = actions;
  j["rewards"] = rewards;
  j["completions"] = completions;
  return j;
}

EpisodeRecording EpisodeRecording::from_json(const nlohmann::json& j) {
  EpisodeRecording rec;
  try {
    if (j.at("format").get<std::string>() != "adrl-episode-v1") {
      throw NumericError("EpisodeRecording: unknown format tag");
    }
    rec.env_kind = j.at("env_kind").get<std::string>();
    rec.env_config = j.at("env_config");
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.actions = j.at("actions").get<std::vector<int>>();
    rec.rewards = j.at("rewards").get<std::vector<Real>>();
    rec.completions = j.at("completions").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw NumericError(std::string("EpisodeRecording: malformed json: ") +
                       e.what());
  }
  if (rec.actions.size() != rec.rewards.size() ||
      rec.actions.size() != rec.completions.size()) {
    throw NumericError("EpisodeRecording: array length mismatch");
  }
  return rec;
}

void EpisodeRecording::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw NumericError("EpisodeRecording::save: cannot open " + path);
  out << to_json().dump(2) << "\n";
}

EpisodeRecording EpisodeRecording::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NumericError("EpisodeRecording::load: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw NumericError(std::string("EpisodeRecording::load: parse error: ") +
                       e.what());
  }
  return from_json(j);
}

EpisodeRecording record_episode(
    Env& env, std::uint64_t seed,
    const std::function<int(const Observation&)>& policy) {
  EpisodeRecording rec;
  rec.env_kind = env.kind();
  rec.env_config = env.config_json();
  rec.seed = seed;
  Observation obs = env.reset(seed);
  while (!env.done()) {
    const int a = policy(obs);
    StepResult r = env.step(a);
    rec.actions.push_back(a);
    rec.rewards.push_back(r.reward);
    rec.completions.push_back(r.unlocked.value_or(-1));
    obs = std::move(r.obs);
  }
  return rec;
}

ReplayedEpisode replay(const EpisodeRecording& rec) {
  auto env = make_env(rec.env_kind, rec.env_config);
  ReplayedEpisode out;
  out.observations.push_back(env->reset(rec.seed));
  for (std::size_t i = 0; i < rec.actions.size(); ++i) {
    StepResult r = env->step(rec.actions[i]);
    if (std::abs(r.reward - rec.rewards[i]) > 1e-12 ||
        r.unlocked.value_or(-1) != rec.completions[i]) {
      throw NumericError("replay: trace diverges at step " + std::to_string(i));
    }
    out.observations.push_back(r.obs);
    out.steps.push_back(std::move(r));
  }
  out.graph = env->graph();
  return out;
}

}  // namespace adrl::env
