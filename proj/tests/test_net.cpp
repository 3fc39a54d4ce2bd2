#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "adrl/nd/checkpoint.hpp"
#include "adrl/nd/ops.hpp"
#include "adrl/net/agent_net.hpp"
#include "adrl/net/init.hpp"
#include "support/grad_check.hpp"

using namespace adrl;
using namespace adrl::nd;
using namespace adrl::net;

namespace {

Tensor random_obs(Rng& rng, int batch, int width) {
  std::vector<Real> v(static_cast<std::size_t>(batch) * width);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor::constant(batch, width, std::move(v));
}

Tensor random_constant(Rng& rng, int rows, int cols) {
  std::vector<Real> v(static_cast<std::size_t>(rows) * cols);
  for (auto& x : v) x = rng.normal();
  return Tensor::constant(rows, cols, std::move(v));
}

Real max_abs_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  Real m = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  }
  return m;
}

Real row_norm(const Tensor& t, int r) {
  Real sq = 0;
  for (int j = 0; j < t.cols(); ++j) sq += t.at(r, j) * t.at(r, j);
  return std::sqrt(sq);
}

}  // namespace

TEST_CASE("size profiles: presets, lookup, validation") {
  CHECK(SizeProfile::desk().latent == 256);
  CHECK(SizeProfile::paper().hidden == 256);
  CHECK(SizeProfile::paper().latent == 1024);
  CHECK(SizeProfile::paper().psi_hidden == 1024);
  CHECK(SizeProfile::compact().latent == 128);
  CHECK(SizeProfile::tiny().latent == 32);
  CHECK(SizeProfile::named("desk").hidden == SizeProfile::desk().hidden);
  CHECK(SizeProfile::named("paper").latent == 1024);
  CHECK(SizeProfile::named("compact").psi_hidden == 128);
  CHECK(SizeProfile::named("tiny").film_hidden == 32);
  CHECK_THROWS_AS(SizeProfile::named("huge"), ContractViolation);
  SizeProfile bad;
  bad.latent = 0;
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
}

TEST_CASE("fan-in init: moments and validation") {
  Rng rng(5);
  const int fan_in = 400, fan_out = 50;
  auto w = fan_in_init(rng, fan_in, fan_out);
  REQUIRE(w.size() == static_cast<std::size_t>(fan_in) * fan_out);
  Real mean = 0;
  for (Real x : w) mean += x;
  mean /= static_cast<Real>(w.size());
  Real var = 0;
  for (Real x : w) var += (x - mean) * (x - mean);
  var /= static_cast<Real>(w.size());
  CHECK(std::abs(mean) < 2e-3);
  CHECK(var > 0.9 / fan_in);
  CHECK(var < 1.1 / fan_in);
  CHECK_THROWS_AS(fan_in_init(rng, 0, 4), ContractViolation);
  CHECK_THROWS_AS(fan_in_init(rng, 4, 0), ContractViolation);
}

TEST_CASE("orthogonal init: gain-scaled orthonormality both orientations") {
  Rng rng(6);
  const auto tall = orthogonal_init(rng, 10, 4, 2.0);
  // Columns scaled-orthonormal: W^T W = gain^2 I.
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      Real dot = 0;
      for (int i = 0; i < 10; ++i) dot += tall[i * 4 + a] * tall[i * 4 + b];
      CHECK(std::abs(dot - (a == b ? 4.0 : 0.0)) < 1e-12);
    }
  }
  const auto wide = orthogonal_init(rng, 3, 7, 1.0);
  // Rows orthonormal: W W^T = I.
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      Real dot = 0;
      for (int j = 0; j < 7; ++j) dot += wide[a * 7 + j] * wide[b * 7 + j];
      CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-12);
    }
  }
  Rng r1(9), r2(9);
  CHECK(orthogonal_init(r1, 6, 6, 1.0) == orthogonal_init(r2, 6, 6, 1.0));
  CHECK_THROWS_AS(orthogonal_init(rng, 0, 3, 1.0), ContractViolation);
}

TEST_CASE("agent net: registration order and head initialization") {
  ParamStore params;
  Rng rng(11);
  AgentNet net(params, 5, 3, SizeProfile{8, 8, 8, 8}, rng);

  std::vector<std::string> expected = {
      "enc.ln1.g", "enc.ln1.b", "enc.fc1.w", "enc.fc1.b",
      "enc.ln2.g", "enc.ln2.b", "enc.fc2.w", "enc.fc2.b",
      "head.ln.g", "head.ln.b", "pi.w", "pi.b", "v.w", "v.b",
  };
  for (const char* side : {"film.eta", "film.delta"}) {
    for (const char* leaf : {".ln1.g", ".ln1.b", ".fc1.w", ".fc1.b",
                             ".ln2.g", ".ln2.b", ".fc2.w", ".fc2.b"}) {
      expected.push_back(std::string(side) + leaf);
    }
  }
  for (const char* leaf : {".ln1.g", ".ln1.b", ".fc1.w", ".fc1.b",
                           ".ln2.g", ".ln2.b", ".fc2.w", ".fc2.b"}) {
    expected.push_back(std::string("psi") + leaf);
  }
  REQUIRE(params.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(params.entries()[i].name == expected[i]);
  }
  CHECK(params.param_count() == 754);

  // Policy head: columns scaled-orthonormal with gain 0.01.
  const Tensor pw = params.get("pi.w");
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      Real dot = 0;
      for (int i = 0; i < 16; ++i) dot += pw.at(i, a) * pw.at(i, b);
      CHECK(std::abs(dot - (a == b ? 1e-4 : 0.0)) < 1e-15);
    }
  }
  // Value head column norm = 0.1; all biases zero; layer norms at identity.
  const Tensor vw = params.get("v.w");
  Real vsq = 0;
  for (int i = 0; i < 16; ++i) vsq += vw.at(i, 0) * vw.at(i, 0);
  CHECK(std::abs(std::sqrt(vsq) - 0.1) < 1e-12);
  for (const auto& e : params.entries()) {
    const bool is_bias = e.name.ends_with(".b");
    const bool is_ln_gain =
        e.name.ends_with("ln.g") || e.name.ends_with("ln1.g") || e.name.ends_with("ln2.g");
    for (Real x : e.tensor.values()) {
      if (is_bias) CHECK(x == 0.0);
      if (is_ln_gain) CHECK(x == 1.0);
    }
  }

  CHECK_THROWS_AS(AgentNet(params, 0, 3, SizeProfile::tiny(), rng),
                  ContractViolation);
  CHECK_THROWS_AS(AgentNet(params, 5, 1, SizeProfile::tiny(), rng),
                  ContractViolation);
}

TEST_CASE("agent net: deterministic construction and forward") {
  ParamStore pa, pb;
  Rng ra(123), rb(123);
  AgentNet na(pa, 7, 4, SizeProfile::tiny(), ra);
  AgentNet nb(pb, 7, 4, SizeProfile::tiny(), rb);
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa.entries()[i].name == pb.entries()[i].name);
    CHECK(pa.entries()[i].tensor.values() == pb.entries()[i].tensor.values());
  }
  Rng ro(7);
  const Tensor obs = random_obs(ro, 3, 7);
  const Tensor mem = Tensor::zeros(3, na.latent_size());
  const HeadsOut ha = na.heads(na.encode(obs), mem);
  const HeadsOut hb = nb.heads(nb.encode(obs), mem);
  CHECK(ha.dist.log_probs().values() == hb.dist.log_probs().values());
  CHECK(ha.value.values() == hb.value.values());
}

TEST_CASE("encode: shapes, identical rows, width validation") {
  for (const char* name : {"desk", "paper", "compact", "tiny"}) {
    ParamStore params;
    Rng rng(21);
    const SizeProfile prof = SizeProfile::named(name);
    AgentNet net(params, 6, 5, prof, rng);
    Rng ro(22);
    std::vector<Real> v(2 * 6);
    for (auto& x : v) x = ro.uniform(-1.0, 1.0);
    std::vector<Real> dup(3 * 6);
    for (int j = 0; j < 6; ++j) {
      dup[j] = v[j];
      dup[6 + j] = v[6 + j];
      dup[12 + j] = v[j];  // row 2 == row 0
    }
    const Tensor obs = Tensor::constant(3, 6, std::move(dup));
    const Tensor phi = net.encode(obs);
    REQUIRE(phi.rows() == 3);
    REQUIRE(phi.cols() == prof.latent);
    // Matmul row blocking can reorder FMAs per row, so equality is only
    // required up to rounding.
    for (int j = 0; j < phi.cols(); ++j) {
      CHECK(std::abs(phi.at(0, j) - phi.at(2, j)) < 1e-12);
      CHECK(std::isfinite(phi.at(1, j)));
    }
    CHECK_THROWS_AS(net.encode(Tensor::zeros(2, 7)), ContractViolation);
  }
}

TEST_CASE("heads: simplex output, memory sensitivity, zero-memory sentinel") {
  ParamStore params;
  Rng rng(31);
  AgentNet net(params, 6, 4, SizeProfile::tiny(), rng);
  Rng ro(32);
  const Tensor obs = random_obs(ro, 3, 6);
  const Tensor phi = net.encode(obs);
  const Tensor zero_mem = Tensor::zeros(3, net.latent_size());
  const HeadsOut out = net.heads(phi, zero_mem);
  REQUIRE(out.dist.batch() == 3);
  REQUIRE(out.dist.actions() == 4);
  REQUIRE(out.value.rows() == 3);
  REQUIRE(out.value.cols() == 1);
  const Tensor probs = out.dist.probs();
  for (int i = 0; i < 3; ++i) {
    Real s = 0;
    for (int a = 0; a < 4; ++a) {
      CHECK(probs.at(i, a) > 0.0);
      s += probs.at(i, a);
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
    CHECK(out.dist.entropy().at(i, 0) > 0.0);
    CHECK(std::isfinite(out.value.at(i, 0)));
  }

  // Same latent, different memory -> different policy and value.
  const Tensor mem = l2_normalize_rows(random_constant(ro, 3, net.latent_size()));
  const HeadsOut out2 = net.heads(phi, mem);
  CHECK(max_abs_diff(out2.dist.log_probs(), out.dist.log_probs()) > 1e-9);
  CHECK(max_abs_diff(out2.value, out.value) > 1e-9);

  CHECK_THROWS_AS(net.heads(phi, Tensor::zeros(3, 7)), ContractViolation);
  CHECK_THROWS_AS(net.heads(phi, Tensor::zeros(2, net.latent_size())),
                  ContractViolation);
  CHECK_THROWS_AS(net.heads(Tensor::zeros(3, 7), zero_mem), ContractViolation);
}

TEST_CASE("heads: gradient flows into a memory leaf") {
  ParamStore params;
  Rng rng(41);
  AgentNet net(params, 5, 3, SizeProfile{8, 8, 8, 8}, rng);
  Rng ro(42);
  const Tensor obs = random_obs(ro, 2, 5);
  std::vector<Real> mv(static_cast<std::size_t>(2) * net.latent_size());
  for (auto& x : mv) x = ro.normal();
  Tensor mem = Tensor::leaf(2, net.latent_size(), std::move(mv), true);
  const HeadsOut out = net.heads(net.encode(obs), mem);
  Tensor loss = add(mean(out.dist.log_prob({0, 2})), mean(square(out.value)));
  backward(loss);
  REQUIRE(mem.grad().size() == mem.numel());
  Real g = 0;
  for (Real x : mem.grad()) g = std::max(g, std::abs(x));
  CHECK(g > 0.0);
}

TEST_CASE("achievement representation: unit rows, degenerate handling") {
  ParamStore params;
  Rng rng(51);
  AgentNet net(params, 6, 3, SizeProfile::tiny(), rng);
  Rng ro(52);
  const Tensor prev = random_obs(ro, 3, 6);
  const Tensor next = random_obs(ro, 3, 6);
  const Tensor nu = net.achievement_repr(prev, next);
  REQUIRE(nu.rows() == 3);
  REQUIRE(nu.cols() == net.latent_size());
  for (int i = 0; i < 3; ++i) CHECK(std::abs(row_norm(nu, i) - 1.0) < 1e-9);

  // Identical prev/next rows: strict form throws, masked form zeroes the row.
  std::vector<Real> pv = prev.values();
  std::vector<Real> nv = next.values();
  for (int j = 0; j < 6; ++j) nv[6 + j] = pv[6 + j];
  const Tensor prev2 = Tensor::constant(3, 6, std::move(pv));
  const Tensor next2 = Tensor::constant(3, 6, std::move(nv));
  CHECK_THROWS_AS(net.achievement_repr(prev2, next2), NumericError);

  params.zero_grad();
  const AgentNet::MaskedRepr m = net.achievement_repr_masked(prev2, next2);
  REQUIRE(m.valid.size() == 3);
  CHECK(m.valid[0] == 1);
  CHECK(m.valid[1] == 0);
  CHECK(m.valid[2] == 1);
  for (int j = 0; j < m.repr.cols(); ++j) CHECK(m.repr.at(1, j) == 0.0);
  CHECK(std::abs(row_norm(m.repr, 0) - 1.0) < 1e-9);
  CHECK(std::abs(row_norm(m.repr, 2) - 1.0) < 1e-9);

  // Masked rows stay off the gradient path: encoder grads remain finite.
  backward(sum(m.repr));
  const Tensor w = params.get("enc.fc2.w");
  for (Real x : w.grad()) CHECK(std::isfinite(x));
}

TEST_CASE("nu is invariant to a common shift of both latents") {
  ParamStore params;
  Rng rng(61);
  AgentNet net(params, 6, 3, SizeProfile::tiny(), rng);
  Rng ro(62);
  const int h = net.latent_size();
  const Tensor a = random_constant(ro, 4, h);
  const Tensor b = random_constant(ro, 4, h);
  const Tensor shift = random_constant(ro, 1, h);
  const Tensor base = net.nu_from_latents(a, b);
  const Tensor shifted = net.nu_from_latents(add_rowvec(a, shift), add_rowvec(b, shift));
  CHECK(max_abs_diff(base, shifted) < 1e-12);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(row_norm(base, i) - 1.0) < 1e-9);
}

TEST_CASE("film: identity at zeroed output layers, action validation") {
  ParamStore params;
  Rng rng(71);
  AgentNet net(params, 5, 4, SizeProfile{8, 8, 8, 8}, rng);
  Rng ro(72);
  const Tensor latent = random_constant(ro, 3, net.latent_size());

  const Tensor before = net.film(latent, {0, 3, 1});
  CHECK(max_abs_diff(before, latent) > 1e-9);

  for (const char* name : {"film.eta.fc2.w", "film.eta.fc2.b",
                           "film.delta.fc2.w", "film.delta.fc2.b"}) {
    Tensor t = params.get(name);
    std::fill(t.values().begin(), t.values().end(), 0.0);
  }
  const Tensor after = net.film(latent, {0, 3, 1});
  for (std::size_t i = 0; i < latent.numel(); ++i) {
    CHECK(after.values()[i] == latent.values()[i]);
  }

  CHECK_THROWS_AS(net.film(latent, {0, 4, 1}), ContractViolation);
  CHECK_THROWS_AS(net.film(latent, {0, -1, 1}), ContractViolation);
  CHECK_THROWS_AS(net.film(latent, {0, 1}), ContractViolation);
}

TEST_CASE("state-action representation: unit rows and validation") {
  ParamStore params;
  Rng rng(81);
  AgentNet net(params, 6, 4, SizeProfile::tiny(), rng);
  Rng ro(82);
  const Tensor obs = random_obs(ro, 3, 6);
  const Tensor mem = l2_normalize_rows(random_constant(ro, 3, net.latent_size()));
  const Tensor psi = net.state_action_repr(obs, {1, 0, 3}, mem);
  REQUIRE(psi.rows() == 3);
  REQUIRE(psi.cols() == net.latent_size());
  for (int i = 0; i < 3; ++i) CHECK(std::abs(row_norm(psi, i) - 1.0) < 1e-9);

  CHECK_THROWS_AS(net.state_action_repr(obs, {1, 0, 3}, Tensor::zeros(3, 5)),
                  ContractViolation);
  CHECK_THROWS_AS(
      net.state_action_repr(obs, {1, 0, 3}, Tensor::zeros(2, net.latent_size())),
      ContractViolation);
}

TEST_CASE("gradient check: encoder") {
  ParamStore params;
  Rng rng(91);
  AgentNet net(params, 5, 3, SizeProfile{8, 8, 8, 8}, rng);
  Rng ro(92);
  const Tensor obs = random_obs(ro, 2, 5);
  const Tensor c = random_constant(ro, 2, net.latent_size());
  auto loss = [&]() {
    const Tensor phi = net.encode(obs);
    return add(mean(mul(phi, c)), mean(square(phi)));
  };
  const auto rep = testing::check_gradients(params, loss);
  INFO("worst: ", rep.worst_param, "[", rep.worst_index, "]");
  CHECK(rep.max_rel_err < 1e-4);
}

TEST_CASE("gradient check: heads over latent and memory") {
  ParamStore params;
  Rng rng(101);
  AgentNet net(params, 5, 3, SizeProfile{8, 8, 8, 8}, rng);
  Rng ro(102);
  const Tensor obs = random_obs(ro, 2, 5);
  const Tensor mem = l2_normalize_rows(random_constant(ro, 2, net.latent_size()));
  auto loss = [&]() {
    const HeadsOut out = net.heads(net.encode(obs), mem);
    return add(mean(out.dist.log_prob({0, 2})), mean(square(out.value)));
  };
  const auto rep = testing::check_gradients(params, loss);
  INFO("worst: ", rep.worst_param, "[", rep.worst_index, "]");
  CHECK(rep.max_rel_err < 1e-4);
}

TEST_CASE("gradient check: state-action representation through film") {
  ParamStore params;
  Rng rng(111);
  AgentNet net(params, 5, 3, SizeProfile{8, 8, 8, 8}, rng);
  Rng ro(112);
  const Tensor obs = random_obs(ro, 2, 5);
  const Tensor mem = l2_normalize_rows(random_constant(ro, 2, net.latent_size()));
  const Tensor c = random_constant(ro, 2, net.latent_size());
  const std::vector<int> actions = {2, 0};
  auto loss = [&]() {
    return mean(mul(net.state_action_repr(obs, actions, mem), c));
  };
  const auto rep = testing::check_gradients(params, loss);
  INFO("worst: ", rep.worst_param, "[", rep.worst_index, "]");
  CHECK(rep.max_rel_err < 1e-4);
}

TEST_CASE("backward reaches every parameter slice") {
  ParamStore params;
  Rng rng(121);
  AgentNet net(params, 5, 3, SizeProfile{8, 8, 8, 8}, rng);
  Rng ro(122);
  const Tensor obs = random_obs(ro, 4, 5);
  const Tensor obs2 = random_obs(ro, 4, 5);
  const Tensor mem = l2_normalize_rows(random_constant(ro, 4, net.latent_size()));
  const Tensor c1 = random_constant(ro, 4, net.latent_size());
  const Tensor c2 = random_constant(ro, 4, net.latent_size());
  const std::vector<int> actions = {0, 2, 1, 2};

  params.zero_grad();
  const HeadsOut out = net.heads(net.encode(obs), mem);
  Tensor loss = add(mean(out.dist.log_prob(actions)), mean(square(out.value)));
  loss = add(loss, mean(mul(net.state_action_repr(obs, actions, mem), c1)));
  loss = add(loss, mean(mul(net.achievement_repr(obs, obs2), c2)));
  backward(loss);

  for (const auto& e : params.entries()) {
    REQUIRE(e.tensor.grad().size() == e.tensor.numel());
    Real g = 0;
    for (Real x : e.tensor.grad()) g = std::max(g, std::abs(x));
    INFO("slice: ", e.name);
    CHECK(g > 0.0);
  }
}

TEST_CASE("checkpoint: bit-exact roundtrip with metadata") {
  ParamStore params;
  Rng rng(131);
  AgentNet net(params, 6, 3, SizeProfile{8, 8, 8, 8}, rng);
  const auto before = params.snapshot();
  const std::string meta = "{\"phase\":3,\"note\":\"line1\\nline2\"}";
  const std::string path = "/tmp/adrl_test_ckpt.bin";
  save_checkpoint(path, params, meta);

  CHECK(read_checkpoint_metadata(path) == meta);

  for (const auto& e : params.entries()) {
    Tensor t = params.get(e.name);
    for (auto& x : t.values()) x += 1.0;
  }
  const std::string got = load_checkpoint(path, params);
  CHECK(got == meta);
  const auto after = params.snapshot();
  REQUIRE(after.size() == before.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    REQUIRE(after[i].size() == before[i].size());
    CHECK(std::memcmp(after[i].data(), before[i].data(),
                      before[i].size() * sizeof(Real)) == 0);
  }
  std::remove(path.c_str());
}

TEST_CASE("checkpoint: malformed files and store mismatches") {
  const std::string path = "/tmp/adrl_test_ckpt_bad.bin";

  ParamStore params;
  params.add("w", 2, 3, {1, 2, 3, 4, 5, 6});
  save_checkpoint(path, params, "m");

  {
    ParamStore wrong_shape;
    wrong_shape.add("w", 3, 2, {0, 0, 0, 0, 0, 0});
    CHECK_THROWS_AS(load_checkpoint(path, wrong_shape), NumericError);
  }
  {
    ParamStore wrong_name;
    wrong_name.add("x", 2, 3, {0, 0, 0, 0, 0, 0});
    CHECK_THROWS_AS(load_checkpoint(path, wrong_name), NumericError);
  }
  {
    ParamStore extra;
    extra.add("w", 2, 3, {0, 0, 0, 0, 0, 0});
    extra.add("y", 1, 1, {0});
    CHECK_THROWS_AS(load_checkpoint(path, extra), NumericError);
  }

  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << "NOTACKPTgarbage";
  }
  CHECK_THROWS_AS(load_checkpoint(path, params), NumericError);
  CHECK_THROWS_AS(read_checkpoint_metadata(path), NumericError);

  save_checkpoint(path, params, "m");
  {
    std::ifstream in(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    bytes.resize(bytes.size() / 2);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  CHECK_THROWS_AS(load_checkpoint(path, params), NumericError);

  CHECK_THROWS_AS(load_checkpoint("/tmp/adrl_no_such_ckpt.bin", params),
                  NumericError);
  std::remove(path.c_str());
}
