#include "adrl/rl/rollout.hpp"

#include <utility>

#include "adrl/nd/ops.hpp"
#include "adrl/rl/gae.hpp"

namespace adrl::rl {

using nd::Tensor;

RolloutCollector::RolloutCollector(env::VecEnv& venv, const net::AgentNet& net,
                                   std::uint64_t seed)
    : venv_(&venv),
      net_(&net),
      action_rng_(Rng::stream(seed, "action-sampling")) {
  if (venv.size() < 1) throw ContractViolation("RolloutCollector: empty vec env");
  for (int e = 0; e < venv.size(); ++e) {
    if (venv.env(e).observation_size() != net.obs_size()) {
      throw ContractViolation("RolloutCollector: observation size mismatch");
    }
    if (venv.env(e).action_count() != net.action_count()) {
      throw ContractViolation("RolloutCollector: action count mismatch");
    }
  }
}

const Trajectory& RolloutCollector::partial(int e) const {
  if (!started_ || e < 0 || e >= static_cast<int>(partial_.size())) {
    throw ContractViolation("RolloutCollector: bad partial index");
  }
  return partial_[static_cast<std::size_t>(e)];
}

const std::vector<Real>& RolloutCollector::memory(int e) const {
  if (!started_ || e < 0 || e >= static_cast<int>(memory_.size())) {
    throw ContractViolation("RolloutCollector: bad memory index");
  }
  return memory_[static_cast<std::size_t>(e)];
}

namespace {

Tensor obs_to_tensor(const std::vector<const std::vector<std::uint8_t>*>& rows,
                     int obs_size) {
  const int B = static_cast<int>(rows.size());
  std::vector<Real> v(static_cast<std::size_t>(B) * obs_size);
  for (int i = 0; i < B; ++i) {
    const auto& r = *rows[static_cast<std::size_t>(i)];
    for (int j = 0; j < obs_size; ++j) {
      v[static_cast<std::size_t>(i) * obs_size + j] = static_cast<Real>(r[j]);
    }
  }
  return Tensor::constant(B, obs_size, std::move(v));
}

}  // namespace

CollectResult RolloutCollector::collect(ValueNormalizer& vnorm, int total_steps,
                                        Real gamma, Real lambda,
                                        bool use_memory) {
  const int E = venv_->size();
  if (total_steps < E || total_steps % E != 0) {
    throw ContractViolation("collect: total_steps must be a positive multiple of env count");
  }
  const int T = total_steps / E;
  const int obs_size = net_->obs_size();
  const int h = net_->latent_size();

  if (!started_) {
    const auto obs0 = venv_->reset_all();
    partial_.assign(static_cast<std::size_t>(E), Trajectory{});
    memory_.assign(static_cast<std::size_t>(E), std::vector<Real>(h, 0.0));
    for (int e = 0; e < E; ++e) {
      partial_[e].obs.push_back(obs0[e].data);
      partial_[e].seed = venv_->episode_seed(e);
    }
    started_ = true;
  }

  CollectResult out;
  RolloutBatch& b = out.batch;
  b.steps = T;
  b.envs = E;
  b.obs_size = obs_size;
  b.latent = h;
  const std::size_t rows = static_cast<std::size_t>(T) * E;
  b.obs.reserve(rows * obs_size);
  b.memory.reserve(rows * h);
  b.actions.reserve(rows);
  b.log_probs.reserve(rows);
  b.values.reserve(rows);
  b.rewards.reserve(rows);
  b.dones.reserve(rows);

  const Tensor zero_mem = Tensor::zeros(E, h);
  std::vector<int> actions(static_cast<std::size_t>(E));

  auto memory_tensor = [&]() {
    if (!use_memory) return zero_mem;
    std::vector<Real> m(static_cast<std::size_t>(E) * h);
    for (int e = 0; e < E; ++e) {
      std::copy(memory_[e].begin(), memory_[e].end(),
                m.begin() + static_cast<std::size_t>(e) * h);
    }
    return Tensor::constant(E, h, std::move(m));
  };

  for (int t = 0; t < T; ++t) {
    std::vector<const std::vector<std::uint8_t>*> cur(static_cast<std::size_t>(E));
    for (int e = 0; e < E; ++e) cur[e] = &venv_->current_obs(e).data;
    const Tensor obs_t = obs_to_tensor(cur, obs_size);
    const Tensor mem_t = memory_tensor();
    const net::HeadsOut ho = net_->heads(net_->encode(obs_t), mem_t);
    for (int e = 0; e < E; ++e) {
      actions[e] = ho.dist.sample_row(e, action_rng_);
    }
    const Tensor logp = ho.dist.log_prob(actions);

    for (int e = 0; e < E; ++e) {
      b.obs.insert(b.obs.end(), cur[e]->begin(), cur[e]->end());
      b.memory.insert(b.memory.end(), mem_t.values().begin() + static_cast<std::size_t>(e) * h,
                      mem_t.values().begin() + static_cast<std::size_t>(e + 1) * h);
      b.actions.push_back(actions[e]);
      b.log_probs.push_back(logp.at(e, 0));
      b.values.push_back(vnorm.denormalize(ho.value.at(e, 0)));
    }

    const auto items = venv_->step(actions);
    for (int e = 0; e < E; ++e) {
      const env::StepResult& r = items[e].result;
      b.rewards.push_back(r.reward);
      b.dones.push_back(r.done ? 1 : 0);
      out.reward_sum += r.reward;

      Trajectory& traj = partial_[e];
      traj.actions.push_back(actions[e]);
      traj.rewards.push_back(r.reward);
      traj.obs.push_back(r.obs.data);

      if (r.first_unlock) {
        const int ti = traj.length() - 1;
        traj.achievement_times.push_back(ti);
        traj.achievement_ids.push_back(r.unlocked.value());
        if (use_memory) {
          // nu of the unlock transition becomes the slot's memory; a
          // degenerate latent difference carries no signal, so keep the
          // previous memory in that case.
          const Tensor prev = obs_to_tensor({&traj.obs[static_cast<std::size_t>(ti)]}, obs_size);
          const Tensor next = obs_to_tensor({&traj.obs[static_cast<std::size_t>(ti) + 1]}, obs_size);
          const net::AgentNet::MaskedRepr nu = net_->achievement_repr_masked(prev, next);
          if (nu.valid[0]) {
            for (int j = 0; j < h; ++j) memory_[e][static_cast<std::size_t>(j)] = nu.repr.at(0, j);
          }
        }
      }
      if (r.done) {
        out.completed.push_back(std::move(traj));
        traj = Trajectory{};
        traj.obs.push_back(items[e].reset_obs.data);
        traj.seed = items[e].reset_seed;
        memory_[e].assign(static_cast<std::size_t>(h), 0.0);
      }
    }
  }
  out.episodes_completed = static_cast<int>(out.completed.size());

  // Bootstrap from the post-rollout states, then finalize per env column.
  std::vector<const std::vector<std::uint8_t>*> cur(static_cast<std::size_t>(E));
  for (int e = 0; e < E; ++e) cur[e] = &venv_->current_obs(e).data;
  const net::HeadsOut tail = net_->heads(net_->encode(obs_to_tensor(cur, obs_size)),
                                         memory_tensor());

  b.advantages.resize(rows);
  b.targets.resize(rows);
  std::vector<Real> col_r(static_cast<std::size_t>(T));
  std::vector<Real> col_v(static_cast<std::size_t>(T));
  std::vector<std::uint8_t> col_d(static_cast<std::size_t>(T));
  for (int e = 0; e < E; ++e) {
    for (int t = 0; t < T; ++t) {
      const int i = b.row(t, e);
      col_r[t] = b.rewards[static_cast<std::size_t>(i)];
      col_v[t] = b.values[static_cast<std::size_t>(i)];
      col_d[t] = b.dones[static_cast<std::size_t>(i)];
    }
    const GaeResult g = compute_gae(col_r, col_v, col_d,
                                    vnorm.denormalize(tail.value.at(e, 0)),
                                    gamma, lambda);
    for (int t = 0; t < T; ++t) {
      const int i = b.row(t, e);
      b.advantages[static_cast<std::size_t>(i)] = g.advantages[static_cast<std::size_t>(t)];
      b.targets[static_cast<std::size_t>(i)] = g.targets[static_cast<std::size_t>(t)];
    }
  }
  vnorm.update(b.targets);
  b.targets_norm.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    b.targets_norm[i] = vnorm.normalize(b.targets[i]);
  }
  b.finalized = true;
  return out;
}

}  // namespace adrl::rl
