#pragma once

#include <memory>
#include <vector>

#include "adrl/distill/indexing.hpp"
#include "adrl/nd/adam.hpp"
#include "adrl/nd/param_store.hpp"
#include "adrl/net/agent_net.hpp"
#include "adrl/rl/rollout.hpp"
#include "adrl/rng.hpp"

namespace adrl::distill {

// Frozen copy of all parameters taken at auxiliary-phase start. Outputs
// evaluated through it are constants: the copies do not require gradients.
class PolicySnapshot {
 public:
  PolicySnapshot(const nd::ParamStore& params, const net::AgentNet& src);

  const net::AgentNet& net() const { return *net_; }

 private:
  std::unique_ptr<nd::ParamStore> params_;
  std::unique_ptr<net::AgentNet> net_;
};

struct DistillConfig {
  Real beta_pi = 1.0;    // policy-preservation weight (0 disables)
  Real beta_v = 1.0;     // value-preservation weight (0 disables)
  Real ot_alpha = 0.05;  // entropic coefficient of the soft matching
  int policy_phases = 8;  // rollouts gathered per auxiliary phase
  int aux_epochs = 6;     // optimization epochs per auxiliary phase
  // Contrastive logit scale. No published value exists for it; 0.1 is a
  // common contrastive-learning default and it is exposed here as tunable.
  Real temperature = 0.1;
  int negatives_per_anchor = 1;  // the loss form admits exactly one
  int episodes_per_batch = 8;    // prediction-pass minibatch, in episodes
  Real max_grad_norm = 0.5;
  bool predict = true;  // next-achievement prediction loss
  bool match = true;    // cross-episode matching loss

  void validate() const;
};

// Completed episodes accumulated across the policy phases of one outer
// iteration; cleared before the next round of collection begins.
class EpisodeBuffer {
 public:
  void add(std::vector<rl::Trajectory> episodes);
  void clear() { episodes_.clear(); }
  const std::vector<rl::Trajectory>& episodes() const { return episodes_; }
  bool empty() const { return episodes_.empty(); }
  std::size_t size() const { return episodes_.size(); }

 private:
  std::vector<rl::Trajectory> episodes_;
};

struct PredLoss {
  nd::Tensor loss;  // [1,1] mean over anchors; zero constant when skipped
  int anchors = 0;
  bool skipped = false;
};

// Next-achievement prediction. Every step with a defined upcoming
// achievement (and a non-degenerate representation for it) anchors one
// term softplus((psi_neg . nu - psi_pos . nu) / temperature), where the
// positive is psi at that step, the negative is psi at a uniformly drawn
// other anchor step of the same episode, and nu is the upcoming
// achievement's representation. Fewer than two anchor steps -> skipped.
PredLoss loss_pred(const rl::Trajectory& traj, const net::AgentNet& net,
                   Real temperature, Rng& rng);

struct MatchLoss {
  nd::Tensor loss;  // [1,1] mean over matched pairs; zero constant if none
  int pairs = 0;    // pairs contributing a term
  int matched = 0;  // hard-matching size before the negative requirement
  bool skipped = false;
  bool ot_converged = true;
  Real ot_residual = 0;  // worst marginal / mass violation of the soft plan
};

// Cross-episode matching. Source achievements are matched to target ones
// by thresholding the entropic partial transport plan over the cosine
// distance between current achievement representations (held constant:
// no gradient flows through the matching), then each matched pair (i, k)
// contributes the same InfoNCE form with anchor nu_source(i), positive
// nu_target(k), and a uniformly drawn non-matched target negative. A
// target with fewer than two achievements yields no usable pair.
MatchLoss loss_match(const rl::Trajectory& source,
                     const rl::Trajectory& target, const net::AgentNet& net,
                     Real temperature, Real alpha, Rng& rng);

struct RegTerms {
  nd::Tensor r_pi;  // [1,1] mean KL(old || new) over the episode's steps
  nd::Tensor r_v;   // [1,1] mean half squared value drift
};

// Output-preservation penalties against the snapshot, evaluated on every
// step of the episode with per-step memory recomputed end-to-end under
// each parameter set.
RegTerms regularizers(const rl::Trajectory& traj, const net::AgentNet& net,
                      const PolicySnapshot& snapshot);

struct AuxStats {
  Real loss_pred = 0;  // anchor-weighted mean over the whole phase
  Real loss_match = 0;  // pair-weighted mean
  Real r_pi = 0;        // state-weighted means
  Real r_v = 0;
  int pred_anchors = 0;
  int pred_skipped = 0;  // episode visits without enough usable anchors
  int match_pairs = 0;
  int match_skipped = 0;  // directed matchings that yielded no pair
  int ot_unconverged = 0;
  Real ot_residual_max = 0;
  int steps = 0;        // optimizer steps taken
  Real grad_norm = 0;   // mean pre-clip gradient norm
};

// One auxiliary phase over the buffered episodes: snapshot the current
// outputs, then per epoch run one prediction pass over shuffled episode
// minibatches and one matching pass over shuffled consecutive episode
// pairs (each pair used in both directions). Every optimizer step adds
// beta_pi * R_pi + beta_v * R_v computed on the states of the episodes in
// that step. Episodes without achievements contribute nothing, so a
// buffer with none anywhere leaves the parameters untouched.
AuxStats auxiliary_phase(const EpisodeBuffer& buffer,
                         const net::AgentNet& net, nd::ParamStore& params,
                         nd::Adam& opt, const DistillConfig& cfg, Rng& rng);

}  // namespace adrl::distill
