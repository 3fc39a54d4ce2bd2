#include "adrl/net/agent_net.hpp"

#include <cmath>

#include "adrl/nd/ops.hpp"
#include "adrl/net/init.hpp"

namespace adrl::net {

using nd::Tensor;

SizeProfile SizeProfile::desk() { return {256, 256, 256, 256}; }
SizeProfile SizeProfile::paper() { return {256, 1024, 1024, 1024}; }
SizeProfile SizeProfile::compact() { return {128, 128, 128, 128}; }
SizeProfile SizeProfile::tiny() { return {32, 32, 32, 32}; }

SizeProfile SizeProfile::named(const std::string& name) {
  if (name == "desk") return desk();
  if (name == "paper") return paper();
  if (name == "compact") return compact();
  if (name == "tiny") return tiny();
  throw ContractViolation("SizeProfile: unknown profile '" + name + "'");
}

void SizeProfile::validate() const {
  if (hidden < 1 || latent < 1 || film_hidden < 1 || psi_hidden < 1) {
    throw ContractViolation("SizeProfile: all widths must be >= 1");
  }
}

namespace {

void add_layer_norm(nd::ParamStore& p, const std::string& prefix, int dim) {
  p.add(prefix + ".g", 1, dim, std::vector<Real>(static_cast<std::size_t>(dim), 1.0));
  p.add(prefix + ".b", 1, dim, std::vector<Real>(static_cast<std::size_t>(dim), 0.0));
}

void add_dense(nd::ParamStore& p, Rng& rng, const std::string& prefix, int in,
               int out) {
  p.add(prefix + ".w", in, out, fan_in_init(rng, in, out));
  p.add(prefix + ".b", 1, out, std::vector<Real>(static_cast<std::size_t>(out), 0.0));
}

}  // namespace

AgentNet::AgentNet(nd::ParamStore& params, int obs_size, int action_count,
                   const SizeProfile& profile, Rng& rng)
    : params_(&params),
      obs_size_(obs_size),
      action_count_(action_count),
      profile_(profile) {
  if (obs_size < 1) throw ContractViolation("AgentNet: obs_size < 1");
  if (action_count < 2) throw ContractViolation("AgentNet: action_count < 2");
  profile_.validate();
  const int h = profile_.latent;

  add_layer_norm(params, "enc.ln1", obs_size);
  add_dense(params, rng, "enc.fc1", obs_size, profile_.hidden);
  add_layer_norm(params, "enc.ln2", profile_.hidden);
  add_dense(params, rng, "enc.fc2", profile_.hidden, h);

  add_layer_norm(params, "head.ln", 2 * h);
  params.add("pi.w", 2 * h, action_count,
             orthogonal_init(rng, 2 * h, action_count, 0.01));
  params.add("pi.b", 1, action_count,
             std::vector<Real>(static_cast<std::size_t>(action_count), 0.0));
  params.add("v.w", 2 * h, 1, orthogonal_init(rng, 2 * h, 1, 0.1));
  params.add("v.b", 1, 1, {0.0});

  for (const char* side : {"film.eta", "film.delta"}) {
    const std::string s(side);
    add_layer_norm(params, s + ".ln1", action_count);
    add_dense(params, rng, s + ".fc1", action_count, profile_.film_hidden);
    add_layer_norm(params, s + ".ln2", profile_.film_hidden);
    add_dense(params, rng, s + ".fc2", profile_.film_hidden, h);
  }

  add_layer_norm(params, "psi.ln1", 2 * h);
  add_dense(params, rng, "psi.fc1", 2 * h, profile_.psi_hidden);
  add_layer_norm(params, "psi.ln2", profile_.psi_hidden);
  add_dense(params, rng, "psi.fc2", profile_.psi_hidden, h);
}

AgentNet::AgentNet(nd::ParamStore& params, int obs_size, int action_count,
                   const SizeProfile& profile)
    : params_(&params),
      obs_size_(obs_size),
      action_count_(action_count),
      profile_(profile) {
  if (obs_size < 1) throw ContractViolation("AgentNet: obs_size < 1");
  if (action_count < 2) throw ContractViolation("AgentNet: action_count < 2");
  profile_.validate();
  const int h = profile_.latent;

  const auto need = [&params](const std::string& name, int rows, int cols) {
    if (!params.has(name)) {
      throw ContractViolation("AgentNet attach: missing parameter '" + name + "'");
    }
    const Tensor t = params.get(name);
    if (t.rows() != rows || t.cols() != cols) {
      throw ContractViolation("AgentNet attach: shape mismatch for '" + name + "'");
    }
  };
  const auto need_ln = [&need](const std::string& prefix, int dim) {
    need(prefix + ".g", 1, dim);
    need(prefix + ".b", 1, dim);
  };
  const auto need_dense = [&need](const std::string& prefix, int in, int out) {
    need(prefix + ".w", in, out);
    need(prefix + ".b", 1, out);
  };

  need_ln("enc.ln1", obs_size);
  need_dense("enc.fc1", obs_size, profile_.hidden);
  need_ln("enc.ln2", profile_.hidden);
  need_dense("enc.fc2", profile_.hidden, h);
  need_ln("head.ln", 2 * h);
  need("pi.w", 2 * h, action_count);
  need("pi.b", 1, action_count);
  need("v.w", 2 * h, 1);
  need("v.b", 1, 1);
  for (const char* side : {"film.eta", "film.delta"}) {
    const std::string s(side);
    need_ln(s + ".ln1", action_count);
    need_dense(s + ".fc1", action_count, profile_.film_hidden);
    need_ln(s + ".ln2", profile_.film_hidden);
    need_dense(s + ".fc2", profile_.film_hidden, h);
  }
  need_ln("psi.ln1", 2 * h);
  need_dense("psi.fc1", 2 * h, profile_.psi_hidden);
  need_ln("psi.ln2", profile_.psi_hidden);
  need_dense("psi.fc2", profile_.psi_hidden, h);
}

Tensor AgentNet::encode(const Tensor& obs) const {
  if (obs.cols() != obs_size_) {
    throw ContractViolation("encode: observation width mismatch");
  }
  Tensor x = nd::layer_norm(obs, params_->get("enc.ln1.g"), params_->get("enc.ln1.b"));
  x = nd::relu(nd::add_rowvec(nd::matmul(x, params_->get("enc.fc1.w")),
                              params_->get("enc.fc1.b")));
  x = nd::layer_norm(x, params_->get("enc.ln2.g"), params_->get("enc.ln2.b"));
  x = nd::relu(nd::add_rowvec(nd::matmul(x, params_->get("enc.fc2.w")),
                              params_->get("enc.fc2.b")));
  return x;
}

HeadsOut AgentNet::heads(const Tensor& latent, const Tensor& memory) const {
  const int h = profile_.latent;
  if (latent.cols() != h) throw ContractViolation("heads: latent width mismatch");
  if (memory.cols() != h) throw ContractViolation("heads: memory width mismatch");
  if (latent.rows() != memory.rows()) {
    throw ContractViolation("heads: latent/memory batch mismatch");
  }
  Tensor z = nd::concat_cols(latent, memory);
  z = nd::layer_norm(z, params_->get("head.ln.g"), params_->get("head.ln.b"));
  Tensor logits = nd::add_rowvec(nd::matmul(z, params_->get("pi.w")),
                                 params_->get("pi.b"));
  Tensor value = nd::add_rowvec(nd::matmul(z, params_->get("v.w")),
                                params_->get("v.b"));
  return {nd::Categorical(logits), value};
}

Tensor AgentNet::nu_from_latents(const Tensor& phi_prev,
                                 const Tensor& phi_next) const {
  return nd::l2_normalize_rows(nd::sub(phi_next, phi_prev));
}

AgentNet::MaskedRepr AgentNet::achievement_repr_masked(
    const Tensor& obs_prev, const Tensor& obs_next) const {
  const Tensor diff = nd::sub(encode(obs_next), encode(obs_prev));
  const int B = diff.rows();
  const int h = diff.cols();
  MaskedRepr out;
  out.valid.assign(static_cast<std::size_t>(B), 1);
  std::vector<Real> mask(static_cast<std::size_t>(B), 1.0);
  bool any_invalid = false;
  for (int i = 0; i < B; ++i) {
    Real sq = 0;
    for (int j = 0; j < h; ++j) {
      const Real d = diff.at(i, j);
      sq += d * d;
    }
    if (std::sqrt(sq) < kDegenerateNormEps) {
      out.valid[static_cast<std::size_t>(i)] = 0;
      mask[static_cast<std::size_t>(i)] = 0.0;
      any_invalid = true;
    }
  }
  Tensor repr = nd::l2_normalize_rows(diff);
  if (any_invalid) {
    repr = nd::mul_colvec(repr, Tensor::constant(B, 1, std::move(mask)));
  }
  out.repr = repr;
  return out;
}

Tensor AgentNet::achievement_repr(const Tensor& obs_prev,
                                  const Tensor& obs_next) const {
  MaskedRepr m = achievement_repr_masked(obs_prev, obs_next);
  for (std::size_t i = 0; i < m.valid.size(); ++i) {
    if (!m.valid[i]) {
      throw NumericError("achievement_repr: degenerate latent difference at row " +
                         std::to_string(i));
    }
  }
  return m.repr;
}

Tensor AgentNet::one_hot_actions(const std::vector<int>& actions) const {
  const int B = static_cast<int>(actions.size());
  std::vector<Real> oh(static_cast<std::size_t>(B) * action_count_, 0.0);
  for (int i = 0; i < B; ++i) {
    const int a = actions[static_cast<std::size_t>(i)];
    if (a < 0 || a >= action_count_) {
      throw ContractViolation("invalid action index " + std::to_string(a));
    }
    oh[static_cast<std::size_t>(i) * action_count_ + a] = 1.0;
  }
  return Tensor::constant(B, action_count_, std::move(oh));
}

Tensor AgentNet::film_mlp(const Tensor& onehot, const std::string& prefix) const {
  Tensor x = nd::layer_norm(onehot, params_->get(prefix + ".ln1.g"),
                            params_->get(prefix + ".ln1.b"));
  x = nd::relu(nd::add_rowvec(nd::matmul(x, params_->get(prefix + ".fc1.w")),
                              params_->get(prefix + ".fc1.b")));
  x = nd::layer_norm(x, params_->get(prefix + ".ln2.g"),
                     params_->get(prefix + ".ln2.b"));
  return nd::add_rowvec(nd::matmul(x, params_->get(prefix + ".fc2.w")),
                        params_->get(prefix + ".fc2.b"));
}

Tensor AgentNet::film(const Tensor& latent, const std::vector<int>& actions) const {
  if (latent.cols() != profile_.latent) {
    throw ContractViolation("film: latent width mismatch");
  }
  if (latent.rows() != static_cast<int>(actions.size())) {
    throw ContractViolation("film: latent/action batch mismatch");
  }
  const Tensor onehot = one_hot_actions(actions);
  const Tensor eta = film_mlp(onehot, "film.eta");
  const Tensor delta = film_mlp(onehot, "film.delta");
  return nd::add(nd::add(latent, nd::mul(eta, latent)), delta);
}

Tensor AgentNet::state_action_repr(const Tensor& obs,
                                   const std::vector<int>& actions,
                                   const Tensor& memory) const {
  if (memory.cols() != profile_.latent) {
    throw ContractViolation("state_action_repr: memory width mismatch");
  }
  if (obs.rows() != memory.rows()) {
    throw ContractViolation("state_action_repr: obs/memory batch mismatch");
  }
  const Tensor phi = encode(obs);
  Tensor z = nd::concat_cols(film(phi, actions), memory);
  z = nd::layer_norm(z, params_->get("psi.ln1.g"), params_->get("psi.ln1.b"));
  z = nd::relu(nd::add_rowvec(nd::matmul(z, params_->get("psi.fc1.w")),
                              params_->get("psi.fc1.b")));
  z = nd::layer_norm(z, params_->get("psi.ln2.g"), params_->get("psi.ln2.b"));
  z = nd::add_rowvec(nd::matmul(z, params_->get("psi.fc2.w")),
                     params_->get("psi.fc2.b"));
  return nd::l2_normalize_rows(z);
}

}  // namespace adrl::net
