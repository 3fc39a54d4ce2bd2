#include "adrl/env/vec_env.hpp"

namespace adrl::env {

VecEnv::VecEnv(std::vector<std::unique_ptr<Env>> envs, std::uint64_t seed)
    : envs_(std::move(envs)), seed_stream_(Rng::stream(seed, "env-seeds")) {
  if (envs_.empty()) throw ContractViolation("VecEnv: no envs");
  for (const auto& e : envs_) {
    if (!e) throw ContractViolation("VecEnv: null env");
    if (e->action_count() != envs_[0]->action_count() ||
        e->observation_size() != envs_[0]->observation_size()) {
      throw ContractViolation("VecEnv: mixed action/observation spaces");
    }
  }
  current_.resize(envs_.size());
  episode_seed_.resize(envs_.size(), 0);
}

std::vector<Observation> VecEnv::reset_all() {
  for (std::size_t i = 0; i < envs_.size(); ++i) {
    episode_seed_[i] = seed_stream_.next_u64();
    current_[i] = envs_[i]->reset(episode_seed_[i]);
  }
  live_ = true;
  return current_;
}

std::vector<VecEnv::Item> VecEnv::step(const std::vector<int>& actions) {
  if (!live_) throw ContractViolation("VecEnv::step before reset_all");
  if (actions.size() != envs_.size()) {
    throw ContractViolation("VecEnv::step: one action per env required");
  }
  std::vector<Item> items(envs_.size());
  for (std::size_t i = 0; i < envs_.size(); ++i) {
    Item& it = items[i];
    it.result = envs_[i]->step(actions[i]);
    if (it.result.done) {
      it.was_reset = true;
      it.reset_seed = seed_stream_.next_u64();
      it.reset_obs = envs_[i]->reset(it.reset_seed);
      episode_seed_[i] = it.reset_seed;
      current_[i] = it.reset_obs;
    } else {
      current_[i] = it.result.obs;
    }
  }
  return items;
}

const Observation& VecEnv::current_obs(int i) const {
  return current_[static_cast<std::size_t>(i)];
}

}  // namespace adrl::env
