#include "adrl/distill/distill.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <utility>

#include "adrl/common.hpp"
#include "adrl/nd/ops.hpp"
#include "adrl/ot/partial_transport.hpp"

namespace adrl::distill {

using nd::Tensor;

namespace {

Tensor obs_rows(const rl::Trajectory& traj, const std::vector<int>& rows,
                int obs_size) {
  std::vector<Real> data(rows.size() * static_cast<std::size_t>(obs_size));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& src = traj.obs[static_cast<std::size_t>(rows[r])];
    if (static_cast<int>(src.size()) != obs_size) {
      throw ContractViolation("distill: observation width mismatch");
    }
    for (int c = 0; c < obs_size; ++c) {
      data[r * static_cast<std::size_t>(obs_size) + static_cast<std::size_t>(c)] =
          static_cast<Real>(src[static_cast<std::size_t>(c)]);
    }
  }
  return Tensor::constant(static_cast<int>(rows.size()), obs_size,
                          std::move(data));
}

// Everything the losses need from one episode under one parameter set.
struct EpisodeFeatures {
  Tensor phi;  // [T+1, h]
  Tensor nu;   // [m, h]; degenerate rows are exact zero (gradient-blocked)
  std::vector<std::uint8_t> valid;  // per achievement
  std::vector<int> eff;             // latest valid index <= i, -1 if none
  std::vector<int> anchors;         // steps with a usable upcoming nu
};

EpisodeFeatures compute_features(const rl::Trajectory& traj,
                                 const IndexedTrajectory& idx,
                                 const net::AgentNet& net) {
  const int T = traj.length();
  const int m = traj.achievement_count();
  EpisodeFeatures f;
  std::vector<int> all(static_cast<std::size_t>(T) + 1);
  std::iota(all.begin(), all.end(), 0);
  f.phi = net.encode(obs_rows(traj, all, net.obs_size()));
  f.valid.assign(static_cast<std::size_t>(m), 1);
  f.eff.assign(static_cast<std::size_t>(m), -1);
  if (m == 0) {
    f.nu = Tensor::zeros(0, net.latent_size());
    return f;
  }
  std::vector<int> pre(static_cast<std::size_t>(m)),
      post(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    pre[static_cast<std::size_t>(i)] = traj.achievement_times[static_cast<std::size_t>(i)];
    post[static_cast<std::size_t>(i)] = pre[static_cast<std::size_t>(i)] + 1;
  }
  const Tensor before = nd::gather_rows(f.phi, pre);
  const Tensor after = nd::gather_rows(f.phi, post);
  Tensor unit = net.nu_from_latents(before, after);

  const int h = net.latent_size();
  std::vector<Real> mask(static_cast<std::size_t>(m), 1.0);
  bool any_invalid = false;
  for (int i = 0; i < m; ++i) {
    Real sq = 0;
    for (int j = 0; j < h; ++j) {
      const Real d = after.at(i, j) - before.at(i, j);
      sq += d * d;
    }
    if (std::sqrt(sq) < net::AgentNet::kDegenerateNormEps) {
      f.valid[static_cast<std::size_t>(i)] = 0;
      mask[static_cast<std::size_t>(i)] = 0.0;
      any_invalid = true;
    }
  }
  if (any_invalid) {
    unit = nd::mul_colvec(unit, Tensor::constant(m, 1, std::move(mask)));
  }
  f.nu = unit;
  int last = -1;
  for (int i = 0; i < m; ++i) {
    if (f.valid[static_cast<std::size_t>(i)]) last = i;
    f.eff[static_cast<std::size_t>(i)] = last;
  }
  for (int t = 0; t < T; ++t) {
    const int n = idx.next[static_cast<std::size_t>(t)];
    if (n >= 0 && f.valid[static_cast<std::size_t>(n)]) f.anchors.push_back(t);
  }
  return f;
}

// Memory rows for the given steps: the representation of the last valid
// achievement before each step, or an exact-zero row before the first.
Tensor step_memory(const EpisodeFeatures& f, const IndexedTrajectory& idx,
                   const std::vector<int>& steps, int latent) {
  const int K = static_cast<int>(steps.size());
  std::vector<int> safe(static_cast<std::size_t>(K), 0);
  std::vector<Real> mask(static_cast<std::size_t>(K), 0.0);
  bool any = false;
  for (int k = 0; k < K; ++k) {
    const int p = idx.prev[static_cast<std::size_t>(steps[static_cast<std::size_t>(k)])];
    const int mi = p < 0 ? -1 : f.eff[static_cast<std::size_t>(p)];
    if (mi >= 0) {
      safe[static_cast<std::size_t>(k)] = mi;
      mask[static_cast<std::size_t>(k)] = 1.0;
      any = true;
    }
  }
  if (!any) return Tensor::zeros(K, latent);
  return nd::mul_colvec(nd::gather_rows(f.nu, safe),
                        Tensor::constant(K, 1, std::move(mask)));
}

struct PredTerms {
  Tensor sum;  // [1,1] over anchors
  int anchors = 0;
};

std::optional<PredTerms> pred_terms(const rl::Trajectory& traj,
                                    const IndexedTrajectory& idx,
                                    const EpisodeFeatures& f,
                                    const net::AgentNet& net, Real temperature,
                                    Rng& rng) {
  const int K = static_cast<int>(f.anchors.size());
  if (K < 2) return std::nullopt;
  std::vector<int> acts(static_cast<std::size_t>(K));
  std::vector<int> target(static_cast<std::size_t>(K));
  std::vector<int> negidx(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const int t = f.anchors[static_cast<std::size_t>(k)];
    acts[static_cast<std::size_t>(k)] = traj.actions[static_cast<std::size_t>(t)];
    target[static_cast<std::size_t>(k)] = idx.next[static_cast<std::size_t>(t)];
    const int r = rng.uniform_int(K - 1);
    negidx[static_cast<std::size_t>(k)] = r >= k ? r + 1 : r;
  }
  const Tensor obs = obs_rows(traj, f.anchors, net.obs_size());
  const Tensor mem = step_memory(f, idx, f.anchors, net.latent_size());
  const Tensor psi = net.state_action_repr(obs, acts, mem);
  const Tensor nu_sel = nd::gather_rows(f.nu, target);
  const Tensor pos = nd::dot_rows(psi, nu_sel);
  const Tensor neg = nd::dot_rows(nd::gather_rows(psi, negidx), nu_sel);
  const Tensor terms =
      nd::softplus(nd::scale(nd::sub(neg, pos), 1.0 / temperature));
  return PredTerms{nd::sum(terms), K};
}

struct MatchTerms {
  Tensor sum = Tensor::scalar(0.0);
  int pairs = 0;
  int matched = 0;
  bool attempted = false;  // both sides had something to match
  bool converged = true;
  Real residual = 0;
};

MatchTerms match_terms(const EpisodeFeatures& a, const EpisodeFeatures& b,
                       Real temperature, Real alpha, Rng& rng) {
  MatchTerms out;
  std::vector<int> va, vb;
  for (std::size_t i = 0; i < a.valid.size(); ++i) {
    if (a.valid[i]) va.push_back(static_cast<int>(i));
  }
  for (std::size_t i = 0; i < b.valid.size(); ++i) {
    if (b.valid[i]) vb.push_back(static_cast<int>(i));
  }
  if (va.empty() || vb.empty()) return out;
  out.attempted = true;

  // The plan is computed from values only; no gradient crosses it.
  const int ma = static_cast<int>(va.size());
  const int nb = static_cast<int>(vb.size());
  const int h = a.nu.cols();
  std::vector<Real> cost(static_cast<std::size_t>(ma) * nb);
  for (int i = 0; i < ma; ++i) {
    for (int k = 0; k < nb; ++k) {
      Real dot = 0;
      for (int j = 0; j < h; ++j) {
        dot += a.nu.at(va[static_cast<std::size_t>(i)], j) *
               b.nu.at(vb[static_cast<std::size_t>(k)], j);
      }
      cost[static_cast<std::size_t>(i) * nb + k] = 1.0 - dot;
    }
  }
  const ot::PartialOtResult plan = ot::solve_partial_ot(cost, ma, nb, alpha);
  out.converged = plan.converged;
  out.residual = std::max({plan.max_row_violation, plan.max_col_violation,
                           plan.mass_error});
  const auto hard = ot::threshold_match(plan);
  out.matched = static_cast<int>(hard.size());
  if (nb < 2 || hard.empty()) return out;

  const int P = static_cast<int>(hard.size());
  std::vector<int> anchor_rows(static_cast<std::size_t>(P));
  std::vector<int> pos_rows(static_cast<std::size_t>(P));
  std::vector<int> neg_rows(static_cast<std::size_t>(P));
  for (int p = 0; p < P; ++p) {
    const auto [i, k] = hard[static_cast<std::size_t>(p)];
    anchor_rows[static_cast<std::size_t>(p)] = va[static_cast<std::size_t>(i)];
    pos_rows[static_cast<std::size_t>(p)] = vb[static_cast<std::size_t>(k)];
    const int r = rng.uniform_int(nb - 1);
    neg_rows[static_cast<std::size_t>(p)] =
        vb[static_cast<std::size_t>(r >= k ? r + 1 : r)];
  }
  const Tensor anchor = nd::gather_rows(a.nu, anchor_rows);
  const Tensor pos = nd::dot_rows(anchor, nd::gather_rows(b.nu, pos_rows));
  const Tensor neg = nd::dot_rows(anchor, nd::gather_rows(b.nu, neg_rows));
  out.sum = nd::sum(nd::softplus(nd::scale(nd::sub(neg, pos), 1.0 / temperature)));
  out.pairs = P;
  return out;
}

struct RegSums {
  Tensor pi_sum;  // [1,1]
  Tensor v_sum;   // [1,1]
  int states = 0;
};

RegSums reg_sums(const rl::Trajectory& traj, const IndexedTrajectory& idx,
                 const EpisodeFeatures& cur, const net::AgentNet& net,
                 const EpisodeFeatures& old_f, const net::AgentNet& old_net) {
  const int T = traj.length();
  std::vector<int> steps(static_cast<std::size_t>(T));
  std::iota(steps.begin(), steps.end(), 0);
  const net::HeadsOut live =
      net.heads(nd::gather_rows(cur.phi, steps),
                step_memory(cur, idx, steps, net.latent_size()));
  const net::HeadsOut frozen =
      old_net.heads(nd::gather_rows(old_f.phi, steps),
                    step_memory(old_f, idx, steps, old_net.latent_size()));
  const Tensor kl = frozen.dist.kl_to(live.dist);
  const Tensor dv =
      nd::scale(nd::square(nd::sub(live.value, frozen.value)), 0.5);
  return {nd::sum(kl), nd::sum(dv), T};
}

void accumulate(std::optional<Tensor>& acc, const Tensor& term) {
  acc = acc ? nd::add(*acc, term) : term;
}

}  // namespace

PolicySnapshot::PolicySnapshot(const nd::ParamStore& params,
                               const net::AgentNet& src)
    : params_(std::make_unique<nd::ParamStore>()) {
  for (const auto& e : params.entries()) {
    params_->add(e.name, e.tensor.rows(), e.tensor.cols(), e.tensor.values(),
                 /*requires_grad=*/false);
  }
  net_ = std::make_unique<net::AgentNet>(*params_, src.obs_size(),
                                         src.action_count(), src.profile());
}

void DistillConfig::validate() const {
  const auto bad = [](const std::string& what) {
    throw ContractViolation("DistillConfig: " + what);
  };
  if (!std::isfinite(beta_pi) || beta_pi < 0) bad("beta_pi must be >= 0");
  if (!std::isfinite(beta_v) || beta_v < 0) bad("beta_v must be >= 0");
  if (!std::isfinite(ot_alpha) || ot_alpha <= 0) bad("ot_alpha must be positive");
  if (policy_phases < 1) bad("policy_phases must be >= 1");
  if (aux_epochs < 1) bad("aux_epochs must be >= 1");
  if (!std::isfinite(temperature) || temperature <= 0) {
    bad("temperature must be positive");
  }
  if (negatives_per_anchor != 1) {
    bad("the contrastive form admits exactly one negative per anchor");
  }
  if (episodes_per_batch < 1) bad("episodes_per_batch must be >= 1");
  if (!std::isfinite(max_grad_norm) || max_grad_norm <= 0) {
    bad("max_grad_norm must be positive");
  }
}

void EpisodeBuffer::add(std::vector<rl::Trajectory> episodes) {
  for (auto& t : episodes) episodes_.push_back(std::move(t));
}

PredLoss loss_pred(const rl::Trajectory& traj, const net::AgentNet& net,
                   Real temperature, Rng& rng) {
  if (!std::isfinite(temperature) || temperature <= 0) {
    throw ContractViolation("loss_pred: temperature must be positive");
  }
  const IndexedTrajectory idx = index_achievements(traj);
  const EpisodeFeatures f = compute_features(traj, idx, net);
  const auto terms = pred_terms(traj, idx, f, net, temperature, rng);
  PredLoss out;
  if (!terms) {
    out.loss = Tensor::scalar(0.0);
    out.skipped = true;
    return out;
  }
  out.loss = nd::scale(terms->sum, 1.0 / terms->anchors);
  out.anchors = terms->anchors;
  return out;
}

MatchLoss loss_match(const rl::Trajectory& source,
                     const rl::Trajectory& target, const net::AgentNet& net,
                     Real temperature, Real alpha, Rng& rng) {
  if (!std::isfinite(temperature) || temperature <= 0) {
    throw ContractViolation("loss_match: temperature must be positive");
  }
  if (!std::isfinite(alpha) || alpha <= 0) {
    throw ContractViolation("loss_match: alpha must be positive");
  }
  const IndexedTrajectory idx_s = index_achievements(source);
  const IndexedTrajectory idx_t = index_achievements(target);
  const EpisodeFeatures fs = compute_features(source, idx_s, net);
  const EpisodeFeatures ft = compute_features(target, idx_t, net);
  const MatchTerms terms = match_terms(fs, ft, temperature, alpha, rng);
  MatchLoss out;
  out.matched = terms.matched;
  out.ot_converged = terms.converged;
  out.ot_residual = terms.residual;
  if (terms.pairs == 0) {
    out.loss = Tensor::scalar(0.0);
    out.skipped = true;
    return out;
  }
  out.loss = nd::scale(terms.sum, 1.0 / terms.pairs);
  out.pairs = terms.pairs;
  return out;
}

RegTerms regularizers(const rl::Trajectory& traj, const net::AgentNet& net,
                      const PolicySnapshot& snapshot) {
  if (traj.length() < 1) {
    throw ContractViolation("regularizers: empty trajectory");
  }
  const IndexedTrajectory idx = index_achievements(traj);
  const EpisodeFeatures cur = compute_features(traj, idx, net);
  const EpisodeFeatures old_f = compute_features(traj, idx, snapshot.net());
  const RegSums sums =
      reg_sums(traj, idx, cur, net, old_f, snapshot.net());
  return {nd::scale(sums.pi_sum, 1.0 / sums.states),
          nd::scale(sums.v_sum, 1.0 / sums.states)};
}

AuxStats auxiliary_phase(const EpisodeBuffer& buffer,
                         const net::AgentNet& net, nd::ParamStore& params,
                         nd::Adam& opt, const DistillConfig& cfg, Rng& rng) {
  cfg.validate();
  if (!net.bound_to(params)) {
    throw ContractViolation("auxiliary_phase: net is not bound to params");
  }
  AuxStats stats;
  const auto& eps = buffer.episodes();
  if (eps.empty() || (!cfg.predict && !cfg.match)) return stats;

  std::vector<IndexedTrajectory> idx;
  idx.reserve(eps.size());
  for (const auto& t : eps) idx.push_back(index_achievements(t));

  // Structural pools; usability under the current parameters (degenerate
  // representations) is rechecked inside every minibatch.
  std::vector<int> pred_pool, match_pool;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const int m = eps[i].achievement_count();
    if (m < 1) continue;
    match_pool.push_back(static_cast<int>(i));
    // Steps with a defined upcoming achievement: 0 .. last unlock time.
    if (eps[i].achievement_times.back() + 1 >= 2) {
      pred_pool.push_back(static_cast<int>(i));
    }
  }
  const bool run_pred = cfg.predict && !pred_pool.empty();
  const bool run_match = cfg.match && match_pool.size() >= 2;
  if (!run_pred && !run_match) return stats;

  const PolicySnapshot snap(params, net);
  const bool with_regs = cfg.beta_pi != 0.0 || cfg.beta_v != 0.0;

  double pred_sum = 0, match_sum = 0, rpi_sum = 0, rv_sum = 0, grad_sum = 0;
  long state_count = 0;

  const auto step_once = [&](Tensor loss, const char* pass, int epoch) {
    const Real v = loss.item();
    if (!std::isfinite(v)) {
      throw NumericError(std::string("auxiliary_phase: non-finite ") + pass +
                         " loss " + std::to_string(v) + " at epoch " +
                         std::to_string(epoch));
    }
    params.zero_grad();
    nd::backward(loss);
    const nd::Adam::StepStats st = opt.step(params, cfg.max_grad_norm);
    grad_sum += st.grad_norm;
    ++stats.steps;
  };

  for (int epoch = 0; epoch < cfg.aux_epochs; ++epoch) {
    if (run_pred) {
      const std::vector<int> order =
          rng.permutation(static_cast<int>(pred_pool.size()));
      for (std::size_t start = 0; start < order.size();
           start += static_cast<std::size_t>(cfg.episodes_per_batch)) {
        const std::size_t stop =
            std::min(start + static_cast<std::size_t>(cfg.episodes_per_batch),
                     order.size());
        std::optional<Tensor> loss_sum, rpi, rv;
        int anchors = 0, states = 0;
        for (std::size_t o = start; o < stop; ++o) {
          const int ei = pred_pool[static_cast<std::size_t>(order[o])];
          const EpisodeFeatures f = compute_features(eps[ei], idx[ei], net);
          const auto terms =
              pred_terms(eps[ei], idx[ei], f, net, cfg.temperature, rng);
          if (!terms) {
            ++stats.pred_skipped;
            continue;
          }
          accumulate(loss_sum, terms->sum);
          anchors += terms->anchors;
          if (with_regs) {
            const EpisodeFeatures of =
                compute_features(eps[ei], idx[ei], snap.net());
            const RegSums rs =
                reg_sums(eps[ei], idx[ei], f, net, of, snap.net());
            accumulate(rpi, rs.pi_sum);
            accumulate(rv, rs.v_sum);
            states += rs.states;
          }
        }
        if (anchors == 0) continue;
        pred_sum += loss_sum->item();
        stats.pred_anchors += anchors;
        Tensor loss = nd::scale(*loss_sum, 1.0 / anchors);
        if (with_regs && states > 0) {
          rpi_sum += rpi->item();
          rv_sum += rv->item();
          state_count += states;
          if (cfg.beta_pi != 0.0) {
            loss = nd::add(loss, nd::scale(*rpi, cfg.beta_pi / states));
          }
          if (cfg.beta_v != 0.0) {
            loss = nd::add(loss, nd::scale(*rv, cfg.beta_v / states));
          }
        }
        step_once(loss, "prediction", epoch);
      }
    }

    if (run_match) {
      const std::vector<int> order =
          rng.permutation(static_cast<int>(match_pool.size()));
      for (std::size_t p = 0; p + 1 < order.size(); p += 2) {
        const int ia = match_pool[static_cast<std::size_t>(order[p])];
        const int ib = match_pool[static_cast<std::size_t>(order[p + 1])];
        const EpisodeFeatures fa = compute_features(eps[ia], idx[ia], net);
        const EpisodeFeatures fb = compute_features(eps[ib], idx[ib], net);
        const MatchTerms ab =
            match_terms(fa, fb, cfg.temperature, cfg.ot_alpha, rng);
        const MatchTerms ba =
            match_terms(fb, fa, cfg.temperature, cfg.ot_alpha, rng);
        for (const MatchTerms* mt : {&ab, &ba}) {
          if (mt->attempted) {
            if (!mt->converged) ++stats.ot_unconverged;
            stats.ot_residual_max =
                std::max(stats.ot_residual_max, mt->residual);
          }
          if (mt->pairs == 0) ++stats.match_skipped;
        }
        const int pairs = ab.pairs + ba.pairs;
        if (pairs == 0) continue;
        match_sum += ab.sum.item() + ba.sum.item();
        stats.match_pairs += pairs;
        Tensor loss = nd::scale(nd::add(ab.sum, ba.sum), 1.0 / pairs);
        if (with_regs) {
          const EpisodeFeatures oa = compute_features(eps[ia], idx[ia], snap.net());
          const EpisodeFeatures ob = compute_features(eps[ib], idx[ib], snap.net());
          const RegSums ra = reg_sums(eps[ia], idx[ia], fa, net, oa, snap.net());
          const RegSums rb = reg_sums(eps[ib], idx[ib], fb, net, ob, snap.net());
          const Tensor rpi = nd::add(ra.pi_sum, rb.pi_sum);
          const Tensor rv = nd::add(ra.v_sum, rb.v_sum);
          const int states = ra.states + rb.states;
          rpi_sum += rpi.item();
          rv_sum += rv.item();
          state_count += states;
          if (cfg.beta_pi != 0.0) {
            loss = nd::add(loss, nd::scale(rpi, cfg.beta_pi / states));
          }
          if (cfg.beta_v != 0.0) {
            loss = nd::add(loss, nd::scale(rv, cfg.beta_v / states));
          }
        }
        step_once(loss, "matching", epoch);
      }
    }
  }

  if (stats.pred_anchors > 0) stats.loss_pred = pred_sum / stats.pred_anchors;
  if (stats.match_pairs > 0) stats.loss_match = match_sum / stats.match_pairs;
  if (state_count > 0) {
    stats.r_pi = rpi_sum / static_cast<double>(state_count);
    stats.r_v = rv_sum / static_cast<double>(state_count);
  }
  if (stats.steps > 0) stats.grad_norm = grad_sum / stats.steps;
  return stats;
}

}  // namespace adrl::distill
