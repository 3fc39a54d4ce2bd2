#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adrl/nd/categorical.hpp"
#include "adrl/nd/param_store.hpp"
#include "adrl/rng.hpp"

namespace adrl::net {

// Width presets. `latent` is the encoder output h and doubles as the size of
// the achievement representation, so heads and the projection MLP consume 2h.
struct SizeProfile {
  int hidden = 256;       // encoder first dense width
  int latent = 256;       // encoder output h
  int film_hidden = 256;  // action-conditioning MLP width
  int psi_hidden = 256;   // projection MLP width

  static SizeProfile desk();     // 256 throughout
  static SizeProfile paper();    // encoder 256 -> 1024, wide side nets
  static SizeProfile compact();  // 128 throughout
  static SizeProfile tiny();     // 32 throughout (tests)
  static SizeProfile named(const std::string& name);
  void validate() const;
};

struct HeadsOut {
  nd::Categorical dist;
  nd::Tensor value;  // [B,1], in normalized-target space
};

// Shared-encoder agent: encoder phi, policy/value heads over
// Concat(phi, memory), achievement representation nu, FiLM action
// conditioning, and the projection head psi. Layer norm precedes every
// dense layer. All parameters live in the caller's ParamStore under the
// "enc.", "head.", "pi.", "v.", "film.", "psi." prefixes; registration
// order is fixed so optimizer state and checkpoints stay aligned.
class AgentNet {
 public:
  AgentNet(nd::ParamStore& params, int obs_size, int action_count,
           const SizeProfile& profile, Rng& rng);

  // Attach to parameters a sibling AgentNet already registered in `params`
  // (e.g. a frozen copy): validates names and shapes, registers nothing.
  AgentNet(nd::ParamStore& params, int obs_size, int action_count,
           const SizeProfile& profile);

  int obs_size() const { return obs_size_; }
  int action_count() const { return action_count_; }
  bool bound_to(const nd::ParamStore& params) const {
    return params_ == &params;
  }
  int latent_size() const { return profile_.latent; }
  const SizeProfile& profile() const { return profile_; }

  // [B, obs_size] -> [B, latent]
  nd::Tensor encode(const nd::Tensor& obs) const;

  // latent [B,h] + memory [B,h] (zero rows = no achievement yet).
  HeadsOut heads(const nd::Tensor& latent, const nd::Tensor& memory) const;

  // normalize(phi(next) - phi(prev)). The strict form throws NumericError
  // on a degenerate (near-zero) difference.
  nd::Tensor achievement_repr(const nd::Tensor& obs_prev,
                              const nd::Tensor& obs_next) const;

  // Batched training form: degenerate rows come back as exact zero vectors
  // with valid = 0 (gradient-blocked), callers skip them as anchors.
  struct MaskedRepr {
    nd::Tensor repr;
    std::vector<std::uint8_t> valid;
  };
  MaskedRepr achievement_repr_masked(const nd::Tensor& obs_prev,
                                     const nd::Tensor& obs_next) const;

  // nu from already-encoded latents; shared by both forms above.
  nd::Tensor nu_from_latents(const nd::Tensor& phi_prev,
                             const nd::Tensor& phi_next) const;

  // (1 + eta(a)) * latent + delta(a) with one-hot actions.
  nd::Tensor film(const nd::Tensor& latent,
                  const std::vector<int>& actions) const;

  // psi: project Concat(film(phi, a), memory) to a unit row per sample.
  nd::Tensor state_action_repr(const nd::Tensor& obs,
                               const std::vector<int>& actions,
                               const nd::Tensor& memory) const;

  static constexpr Real kDegenerateNormEps = 1e-8;

 private:
  nd::Tensor film_mlp(const nd::Tensor& onehot, const std::string& prefix) const;
  nd::Tensor one_hot_actions(const std::vector<int>& actions) const;

  nd::ParamStore* params_;
  int obs_size_;
  int action_count_;
  SizeProfile profile_;
};

}  // namespace adrl::net
