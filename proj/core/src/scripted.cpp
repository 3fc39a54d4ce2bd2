#include "adrl/env/scripted.hpp"

#include <nlohmann/json.hpp>

namespace adrl::env {
namespace {

int bits_for(int max_value) {
  int b = 1;
  while ((1 << b) <= max_value) ++b;
  return b;
}

}  // namespace

void ScriptedConfig::validate() const {
  if (schedules.empty()) throw ContractViolation("ScriptedConfig: no schedules");
  if (episode_len < 1) throw ContractViolation("ScriptedConfig: episode_len < 1");
  if (num_achievements < 1 || num_achievements > 64) {
    throw ContractViolation("ScriptedConfig: num_achievements out of range");
  }
  if (action_count < 1) throw ContractViolation("ScriptedConfig: action_count < 1");
  for (const auto& sched : schedules) {
    int prev = 0;
    for (auto [t, id] : sched) {
      if (t < 1 || t > episode_len) {
        throw ContractViolation("ScriptedConfig: schedule time out of range");
      }
      if (t <= prev) {
        throw ContractViolation("ScriptedConfig: schedule times must increase");
      }
      if (id < 0 || id >= num_achievements) {
        throw ContractViolation("ScriptedConfig: bad achievement id");
      }
      prev = t;
    }
  }
}

ScriptedEnv::ScriptedEnv(ScriptedConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (int i = 0; i < cfg_.num_achievements; ++i) {
    graph_.names.push_back("ach_" + std::to_string(i));
  }
  graph_.validate();
  time_bits_ = bits_for(cfg_.episode_len);
  last_bits_ = bits_for(cfg_.num_achievements);  // encodes last+1, 0 = none
}

std::vector<int> ScriptedEnv::observation_shape() const {
  if (cfg_.binary_encoding) return {time_bits_ + last_bits_};
  return {cfg_.episode_len + 1 + cfg_.num_achievements + 1};
}

Observation ScriptedEnv::observe() const {
  Observation o;
  if (cfg_.binary_encoding) {
    o.data.assign(static_cast<std::size_t>(time_bits_ + last_bits_), 0);
    for (int b = 0; b < time_bits_; ++b) {
      o.data[static_cast<std::size_t>(b)] =
          static_cast<std::uint8_t>((t_ >> b) & 1);
    }
    const int lv = last_ + 1;
    for (int b = 0; b < last_bits_; ++b) {
      o.data[static_cast<std::size_t>(time_bits_ + b)] =
          static_cast<std::uint8_t>((lv >> b) & 1);
    }
  } else {
    o.data.assign(
        static_cast<std::size_t>(cfg_.episode_len + 1 + cfg_.num_achievements + 1),
        0);
    o.data[static_cast<std::size_t>(t_)] = 1;
    o.data[static_cast<std::size_t>(cfg_.episode_len + 1 + last_ + 1)] = 1;
  }
  return o;
}

Observation ScriptedEnv::reset(std::uint64_t seed) {
  Rng rng(seed);
  schedule_idx_ = rng.uniform_int(static_cast<int>(cfg_.schedules.size()));
  t_ = 0;
  last_ = -1;
  unlocked_ = 0;
  done_ = false;
  live_ = true;
  return observe();
}

StepResult ScriptedEnv::step(int action) {
  if (!live_) throw ContractViolation("ScriptedEnv::step before reset");
  if (done_) throw ContractViolation("ScriptedEnv::step after episode end");
  if (action < 0 || action >= cfg_.action_count) {
    throw ContractViolation("ScriptedEnv::step: bad action");
  }
  ++t_;
  StepResult r;
  for (auto [time, id] : cfg_.schedules[static_cast<std::size_t>(schedule_idx_)]) {
    if (time == t_) {
      r.unlocked = id;
      last_ = id;
      if (!((unlocked_ >> id) & 1u)) {
        unlocked_ |= UnlockMask{1} << id;
        r.reward = 1;
        r.first_unlock = true;
      }
      break;
    }
  }
  if (t_ >= cfg_.episode_len) done_ = true;
  r.done = done_;
  r.obs = observe();
  return r;
}

nlohmann::json ScriptedEnv::config_json() const {
  nlohmann::json scheds = nlohmann::json::array();
  for (const auto& sched : cfg_.schedules) {
    nlohmann::json s = nlohmann::json::array();
    for (auto [t, id] : sched) s.push_back({t, id});
    scheds.push_back(std::move(s));
  }
  return nlohmann::json{{"schedules", std::move(scheds)},
                        {"episode_len", cfg_.episode_len},
                        {"num_achievements", cfg_.num_achievements},
                        {"action_count", cfg_.action_count},
                        {"binary_encoding", cfg_.binary_encoding}};
}

std::unique_ptr<Env> ScriptedEnv::clone_config() const {
  return std::make_unique<ScriptedEnv>(cfg_);
}

}  // namespace adrl::env
