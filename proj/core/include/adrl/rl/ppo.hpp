#pragma once

#include "adrl/nd/adam.hpp"
#include "adrl/net/agent_net.hpp"
#include "adrl/rl/rollout.hpp"
#include "adrl/rng.hpp"

namespace adrl::rl {

struct PpoConfig {
  Real gamma = 0.95;
  Real gae_lambda = 0.65;
  int rollout_steps = 4096;  // total across the env batch
  int epochs = 3;
  int minibatches = 8;
  Real clip_eps = 0.2;
  Real entropy_coef = 0.01;
  Real value_coef = 0.5;
  Real lr = 3e-4;
  Real max_grad_norm = 0.5;
  // Zero-mean/unit-std advantages per rollout before the policy loss.
  bool standardize_advantages = true;

  void validate() const;
};

struct PpoStats {
  Real policy_loss = 0;  // negated clipped surrogate, mean over minibatches
  Real value_loss = 0;
  Real entropy = 0;
  Real approx_kl = 0;       // mean(logp_old - logp_new)
  Real clip_fraction = 0;   // share of samples with |ratio - 1| > clip_eps
  Real grad_norm = 0;       // mean pre-clip global norm
  Real explained_variance = 0;
  int minibatch_count = 0;
};

// Clipped-surrogate update: for each of cfg.epochs passes, partitions the
// batch by a fresh random permutation into cfg.minibatches chunks and runs
// one Adam step per chunk on
//   -mean(min(ratio * A, clip(ratio) * A))
//   + value_coef * mean(0.5 * (V - target_norm)^2)
//   - entropy_coef * mean(entropy).
// Ratios use the stored collection-time log-probs and memory vectors; the
// value loss lives in normalized-target space. A non-finite loss aborts
// with diagnostics before any parameter change from that minibatch.
PpoStats ppo_update(const RolloutBatch& batch, const net::AgentNet& net,
                    nd::ParamStore& params, nd::Adam& opt,
                    const PpoConfig& cfg, Rng& shuffle_rng);

}  // namespace adrl::rl
