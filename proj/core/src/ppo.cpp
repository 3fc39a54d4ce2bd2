#include "adrl/rl/ppo.hpp"

#include <cmath>
#include <string>

#include "adrl/nd/ops.hpp"

namespace adrl::rl {

using nd::Tensor;

void PpoConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ContractViolation("PpoConfig: gamma outside [0,1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ContractViolation("PpoConfig: gae smoothing outside [0,1]");
  if (rollout_steps < 1) throw ContractViolation("PpoConfig: rollout_steps < 1");
  if (epochs < 1) throw ContractViolation("PpoConfig: epochs < 1");
  if (minibatches < 1) throw ContractViolation("PpoConfig: minibatches < 1");
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ContractViolation("PpoConfig: clip_eps outside (0,1)");
  if (entropy_coef < 0.0) throw ContractViolation("PpoConfig: entropy_coef < 0");
  if (value_coef < 0.0) throw ContractViolation("PpoConfig: value_coef < 0");
  if (!(lr > 0.0)) throw ContractViolation("PpoConfig: lr <= 0");
}

namespace {

struct Minibatch {
  Tensor obs;
  Tensor memory;
  std::vector<int> actions;
  Tensor log_probs_old;  // [B,1]
  Tensor advantages;     // [B,1]
  Tensor targets_norm;   // [B,1]
};

Minibatch gather(const RolloutBatch& b, const std::vector<int>& idx,
                 const std::vector<Real>& adv) {
  const int B = static_cast<int>(idx.size());
  Minibatch m;
  std::vector<Real> obs(static_cast<std::size_t>(B) * b.obs_size);
  std::vector<Real> mem(static_cast<std::size_t>(B) * b.latent);
  std::vector<Real> lp(static_cast<std::size_t>(B));
  std::vector<Real> a(static_cast<std::size_t>(B));
  std::vector<Real> tg(static_cast<std::size_t>(B));
  m.actions.resize(static_cast<std::size_t>(B));
  for (int i = 0; i < B; ++i) {
    const std::size_t r = static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]);
    for (int j = 0; j < b.obs_size; ++j) {
      obs[static_cast<std::size_t>(i) * b.obs_size + j] =
          static_cast<Real>(b.obs[r * b.obs_size + j]);
    }
    std::copy(b.memory.begin() + static_cast<std::ptrdiff_t>(r * b.latent),
              b.memory.begin() + static_cast<std::ptrdiff_t>((r + 1) * b.latent),
              mem.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(i) * b.latent));
    m.actions[static_cast<std::size_t>(i)] = b.actions[r];
    lp[static_cast<std::size_t>(i)] = b.log_probs[r];
    a[static_cast<std::size_t>(i)] = adv[r];
    tg[static_cast<std::size_t>(i)] = b.targets_norm[r];
  }
  m.obs = Tensor::constant(B, b.obs_size, std::move(obs));
  m.memory = Tensor::constant(B, b.latent, std::move(mem));
  m.log_probs_old = Tensor::constant(B, 1, std::move(lp));
  m.advantages = Tensor::constant(B, 1, std::move(a));
  m.targets_norm = Tensor::constant(B, 1, std::move(tg));
  return m;
}

}  // namespace

PpoStats ppo_update(const RolloutBatch& batch, const net::AgentNet& net,
                    nd::ParamStore& params, nd::Adam& opt,
                    const PpoConfig& cfg, Rng& shuffle_rng) {
  cfg.validate();
  if (!batch.finalized) throw ContractViolation("ppo_update: batch not finalized");
  const int N = batch.rows();
  if (N < 1) throw ContractViolation("ppo_update: empty batch");
  if (N < cfg.minibatches) throw ContractViolation("ppo_update: fewer rows than minibatches");
  if (batch.obs_size != net.obs_size() || batch.latent != net.latent_size()) {
    throw ContractViolation("ppo_update: batch/net shape mismatch");
  }

  // Per-rollout advantage standardization.
  std::vector<Real> adv = batch.advantages;
  if (cfg.standardize_advantages) {
    Real mu = 0;
    for (Real x : adv) mu += x;
    mu /= static_cast<Real>(N);
    Real var = 0;
    for (Real x : adv) var += (x - mu) * (x - mu);
    var /= static_cast<Real>(N);
    const Real sd = std::sqrt(var) + 1e-8;
    for (Real& x : adv) x = (x - mu) / sd;
  }

  PpoStats stats;
  {
    // Explained variance of the collection-time value function.
    Real tm = 0;
    for (Real t : batch.targets) tm += t;
    tm /= static_cast<Real>(N);
    Real tvar = 0, rvar = 0;
    for (int i = 0; i < N; ++i) {
      const Real d = batch.targets[static_cast<std::size_t>(i)] - tm;
      tvar += d * d;
      const Real e = batch.targets[static_cast<std::size_t>(i)] -
                     batch.values[static_cast<std::size_t>(i)];
      rvar += e * e;
    }
    stats.explained_variance = tvar > 0 ? 1.0 - rvar / tvar : 0.0;
  }

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<int> perm = shuffle_rng.permutation(N);
    int offset = 0;
    for (int mb = 0; mb < cfg.minibatches; ++mb) {
      const int size = N / cfg.minibatches + (mb < N % cfg.minibatches ? 1 : 0);
      if (size == 0) continue;
      std::vector<int> idx(perm.begin() + offset, perm.begin() + offset + size);
      offset += size;
      const Minibatch m = gather(batch, idx, adv);

      const net::HeadsOut out = net.heads(net.encode(m.obs), m.memory);
      const Tensor logp = out.dist.log_prob(m.actions);
      const Tensor ratio = nd::exp(nd::sub(logp, m.log_probs_old));
      const Tensor clipped = nd::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
      const Tensor surrogate =
          nd::min_elem(nd::mul(ratio, m.advantages), nd::mul(clipped, m.advantages));
      const Tensor policy_loss = nd::neg(nd::mean(surrogate));
      const Tensor value_loss =
          nd::mean(nd::scale(nd::square(nd::sub(out.value, m.targets_norm)), 0.5));
      const Tensor entropy = nd::mean(out.dist.entropy());
      const Tensor loss =
          nd::add(nd::add(policy_loss, nd::scale(value_loss, cfg.value_coef)),
                  nd::scale(entropy, -cfg.entropy_coef));

      if (!std::isfinite(loss.item())) {
        throw NumericError(
            "ppo_update: non-finite loss at epoch " + std::to_string(epoch) +
            " minibatch " + std::to_string(mb) +
            " (policy " + std::to_string(policy_loss.item()) +
            ", value " + std::to_string(value_loss.item()) +
            ", entropy " + std::to_string(entropy.item()) + ")");
      }

      params.zero_grad();
      nd::backward(loss);
      const nd::Adam::StepStats ss = opt.step(params, cfg.max_grad_norm);

      stats.policy_loss += policy_loss.item();
      stats.value_loss += value_loss.item();
      stats.entropy += entropy.item();
      stats.grad_norm += ss.grad_norm;
      Real kl = 0, clipped_count = 0;
      for (int i = 0; i < size; ++i) {
        kl += m.log_probs_old.at(i, 0) - logp.at(i, 0);
        if (std::abs(ratio.at(i, 0) - 1.0) > cfg.clip_eps) clipped_count += 1;
      }
      stats.approx_kl += kl / static_cast<Real>(size);
      stats.clip_fraction += clipped_count / static_cast<Real>(size);
      stats.minibatch_count += 1;
    }
  }

  if (stats.minibatch_count > 0) {
    const Real inv = 1.0 / static_cast<Real>(stats.minibatch_count);
    stats.policy_loss *= inv;
    stats.value_loss *= inv;
    stats.entropy *= inv;
    stats.approx_kl *= inv;
    stats.clip_fraction *= inv;
    stats.grad_norm *= inv;
  }
  return stats;
}

}  // namespace adrl::rl
