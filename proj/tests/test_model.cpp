#include <cmath>
#include <random>

#include "doctest.h"
#include "tbsm/errors.hpp"
#include "tbsm/model.hpp"
#include "tbsm/ops.hpp"
#include "tbsm/rng.hpp"

using namespace tbsm;

namespace {

Tensor random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Tensor m = Tensor::zeros({r, c});
  for (auto& x : m.values()) x = dist(rng);
  return m;
}

Tensor random_vec(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Tensor v = Tensor::zeros({n});
  for (auto& x : v.values()) x = dist(rng);
  return v;
}

// Moves every parameter off its initialization (zero biases sit exactly on
// relu kinks, where central differences disagree with subgradients).
void jitter_params(TbsmParams& p, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 0.05);
  std::vector<Tensor> params;
  collect_params(p, params);
  for (auto& t : params) {
    for (auto& v : t.values()) v += dist(rng);
  }
}

TbsmConfig toy_config(HeadKind head, SimilarityVariant sim, TslArrangement arr, int k) {
  TbsmConfig cfg;
  cfg.tau = 5;
  cfg.n = 4;
  cfg.d = 4;
  cfg.num_users = 10;
  cfg.num_items = 10;
  cfg.num_cats = 10;
  cfg.head_kind = head;
  cfg.similarity = sim;
  cfg.arrangement = arr;
  cfg.k = k;
  if (arr == TslArrangement::Seq) cfg.seq_lengths = {3, 5};
  cfg.mha_heads = 8;
  cfg.mha_dim = 2;
  cfg.lstm_layers = 5;
  return cfg;
}

std::vector<Event> toy_sequence(int tau, std::mt19937_64& rng) {
  std::vector<Event> seq;
  for (int t = 0; t < tau; ++t) {
    seq.push_back(Event{static_cast<std::int64_t>(rng() % 10),
                        static_cast<std::int64_t>(rng() % 10),
                        static_cast<std::int64_t>(rng() % 10),
                        tau > 1 ? static_cast<double>(t) / (tau - 1) : 0.0, 0});
  }
  seq.back().label = 1;
  return seq;
}

}  // namespace

TEST_CASE("paper-scale dimensions: head MLP is 2n x 4n then 4n x 1") {
  auto rng = make_engine(30);
  TbsmConfig cfg;
  cfg.tau = 20;
  cfg.n = 15;
  cfg.d = 16;
  cfg.num_users = 30;
  cfg.num_items = 30;
  cfg.num_cats = 10;
  cfg.k = 8;
  TbsmParams p = make_tbsm(cfg, rng);
  REQUIRE(p.head_mlps.size() == 8);
  CHECK(p.head_mlps[0].layers[0].in_dim() == 30);
  CHECK(p.head_mlps[0].layers[0].out_dim() == 60);
  CHECK(p.head_mlps[0].layers[1].in_dim() == 60);
  CHECK(p.head_mlps[0].layers[1].out_dim() == 1);
  CHECK(p.final_mlp.in_dim() == 8);
  CHECK(p.final_mlp.out_dim() == 1);
  CHECK(p.tsl_heads.size() == 8);
  CHECK(p.tsl_heads[0].history_len == 19);

  auto seq = toy_sequence(20, rng);
  for (auto& ev : seq) {
    ev.user %= 30;
    ev.item %= 30;
  }
  Prediction pred = forward(p, seq);
  CHECK(pred.per_head.size() == 8);
  CHECK(pred.p.value() >= 0.0);
  CHECK(pred.p.value() <= 1.0);
  for (const auto& ph : pred.per_head) {
    CHECK(ph.value() >= 0.0);
    CHECK(ph.value() <= 1.0);
  }
}

TEST_CASE("zero head MLPs predict 0.5 per head") {
  auto rng = make_engine(31);
  TbsmConfig cfg = toy_config(HeadKind::Tsl, SimilarityVariant::DotSim, TslArrangement::Inner, 3);
  TbsmParams p = make_tbsm(cfg, rng);
  for (auto& mlp : p.head_mlps) {
    for (auto& layer : mlp.layers) {
      for (auto& v : layer.weight.values()) v = 0;
      for (auto& v : layer.bias.values()) v = 0;
    }
  }
  Prediction pred = forward(p, toy_sequence(5, rng));
  REQUIRE(pred.per_head.size() == 3);
  for (const auto& ph : pred.per_head) CHECK(ph.value() == 0.5);
}

TEST_CASE("k=1 final layer composes exactly") {
  auto rng = make_engine(32);
  TbsmConfig cfg = toy_config(HeadKind::Tsl, SimilarityVariant::CosSim, TslArrangement::Inner, 1);
  TbsmParams p = make_tbsm(cfg, rng);
  p.final_mlp.weight.values() = {2.5};
  p.final_mlp.bias.values() = {0.0};

  Prediction pred = forward(p, toy_sequence(5, rng));
  double p1 = pred.per_head[0].value();
  double expected = sigmoid(Tensor::scalar(2.5 * p1)).value();
  CHECK(pred.p.value() == expected);
}

TEST_CASE("bce_loss matches analytic values") {
  CHECK(bce_loss(Tensor::scalar(0.5), 1).value() ==
        doctest::Approx(0.6931471805599453).epsilon(1e-15));
  CHECK(bce_loss(Tensor::scalar(0.5), 0).value() ==
        doctest::Approx(0.6931471805599453).epsilon(1e-15));
  CHECK(bce_loss(Tensor::scalar(0.9), 0).value() ==
        doctest::Approx(2.302585092994046).epsilon(1e-12));
  CHECK(bce_loss(Tensor::scalar(0.9), 1).value() ==
        doctest::Approx(-std::log(0.9)).epsilon(1e-12));

  // Perfect predictions cost only the clamp.
  CHECK(bce_loss(Tensor::scalar(1.0), 1).value() == doctest::Approx(-std::log1p(-1e-7)));
  CHECK(bce_loss(Tensor::scalar(0.0), 0).value() == doctest::Approx(-std::log1p(-1e-7)));
  CHECK(bce_loss(Tensor::scalar(1.0), 1).value() >= 0.0);

  for (double p = 0.0; p <= 1.0; p += 0.125) {
    CHECK(bce_loss(Tensor::scalar(p), 0).value() >= 0.0);
    CHECK(bce_loss(Tensor::scalar(p), 1).value() >= 0.0);
  }
  CHECK_THROWS_AS(bce_loss(Tensor::scalar(0.5), 2), ContractError);
}

TEST_CASE("bce_loss gradient matches finite differences") {
  for (int y : {0, 1}) {
    auto rep = grad_check([&](const Tensor& x) { return bce_loss(sigmoid(sum(x)), y); },
                          Tensor::vector({0.3, -0.8, 0.2}));
    CHECK(rep.max_rel_error <= 1e-6);
  }
}

TEST_CASE("mha_forward structure") {
  auto rng = make_engine(33);
  int n = 5;
  MhaParams mha = make_mha(n, 3, 2, rng);

  SUBCASE("single history column gets weight 1") {
    Tensor z1 = random_vec(n, rng);
    Tensor Z = stack_cols(std::vector<Tensor>{z1});
    Tensor z_last = random_vec(n, rng);
    Tensor c = mha_forward(mha, Z, z_last);

    std::vector<Tensor> parts;
    for (int h = 0; h < 3; ++h) parts.push_back(matmul(mha.V[h], z1));
    Tensor expected = matmul(mha.out_proj, concat(parts));
    REQUIRE(c.size() == n);
    for (int i = 0; i < n; ++i) {
      CHECK(c.values()[i] == doctest::Approx(expected.values()[i]).epsilon(1e-12));
    }
  }

  SUBCASE("identical columns reduce to a single-column context") {
    Tensor z = random_vec(n, rng);
    Tensor Z = stack_cols(std::vector<Tensor>{z, z, z, z});
    Tensor z_last = random_vec(n, rng);
    Tensor c4 = mha_forward(mha, Z, z_last);
    Tensor c1 = mha_forward(mha, stack_cols(std::vector<Tensor>{z}), z_last);
    for (int i = 0; i < n; ++i) {
      CHECK(c4.values()[i] == doctest::Approx(c1.values()[i]).epsilon(1e-12));
    }
  }

  SUBCASE("dimension mismatch is rejected") {
    Tensor Z = random_matrix(n + 1, 3, rng);
    CHECK_THROWS_AS(mha_forward(mha, Z, random_vec(n, rng)), ContractError);
  }
}

TEST_CASE("lstm_forward structure") {
  auto rng = make_engine(34);
  int n = 4;

  SUBCASE("all-zero parameters and inputs give a zero context") {
    LstmParams lstm = make_lstm(n, 5, rng);
    std::vector<Tensor> params;
    collect_params(lstm, params);
    for (auto& t : params) {
      for (auto& v : t.values()) v = 0;
    }
    Tensor c = lstm_forward(lstm, Tensor::zeros({n, 3}));
    for (double v : c.values()) CHECK(v == 0.0);
  }

  SUBCASE("reversing the history changes the context") {
    LstmParams lstm = make_lstm(n, 5, rng);
    Tensor Z = random_matrix(n, 6, rng);
    Tensor rev = Tensor::zeros({n, 6});
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < 6; ++t) {
        rev.values()[static_cast<std::size_t>(i) * 6 + t] = Z.at(i, 5 - t);
      }
    }
    Tensor c1 = lstm_forward(lstm, Z);
    Tensor c2 = lstm_forward(lstm, rev);
    double diff = 0;
    for (int i = 0; i < n; ++i) diff += std::abs(c1.values()[i] - c2.values()[i]);
    CHECK(diff > 1e-9);
  }

  SUBCASE("single step matches a hand-rolled cell stack") {
    LstmParams lstm = make_lstm(n, 5, rng);
    Tensor z1 = random_vec(n, rng);
    Tensor c = lstm_forward(lstm, stack_cols(std::vector<Tensor>{z1}));

    auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    std::vector<double> x(z1.values());
    for (int l = 0; l < 5; ++l) {
      std::vector<double> pre(4 * n, 0.0);
      for (int r = 0; r < 4 * n; ++r) {
        double acc = lstm.b[l].values()[r];
        for (int j = 0; j < n; ++j) acc += lstm.W[l].at(r, j) * x[j];
        pre[r] = acc;  // h_prev = 0, U contributes nothing
      }
      std::vector<double> h(n);
      for (int j = 0; j < n; ++j) {
        double i_g = sig(pre[j]);
        double g_g = std::tanh(pre[2 * n + j]);
        double o_g = sig(pre[3 * n + j]);
        double cell = i_g * g_g;  // c_prev = 0: forget term drops out
        h[j] = o_g * std::tanh(cell);
      }
      x = h;
    }
    REQUIRE(c.size() == n);
    for (int i = 0; i < n; ++i) CHECK(c.values()[i] == doctest::Approx(x[i]).epsilon(1e-12));
  }
}

TEST_CASE("full-model gradients match finite differences on the toy config") {
  struct Case {
    const char* name;
    TbsmConfig cfg;
  };
  std::vector<Case> cases{
      {"tsl-gen-2inner",
       toy_config(HeadKind::Tsl, SimilarityVariant::GenSim, TslArrangement::Inner, 2)},
      {"tsl-dot-seq",
       toy_config(HeadKind::Tsl, SimilarityVariant::DotSim, TslArrangement::Seq, 0)},
      {"mha", toy_config(HeadKind::Mha, SimilarityVariant::GenSim, TslArrangement::Inner, 1)},
      {"lstm", toy_config(HeadKind::Lstm, SimilarityVariant::GenSim, TslArrangement::Inner, 1)},
  };
  auto rng = make_engine(35);
  for (const auto& tc : cases) {
    CAPTURE(tc.name);
    TbsmParams p = make_tbsm(tc.cfg, rng);
    jitter_params(p, rng);
    auto seq = toy_sequence(5, rng);
    std::vector<Tensor> params;
    collect_params(p, params);
    auto rep = grad_check_params([&]() { return bce_loss(forward(p, seq).p, 1); }, params);
    INFO("head ", tc.name, " worst param ", rep.worst_param, " index ", rep.worst_index,
         " err ", rep.max_rel_error);
    CHECK_FALSE(rep.nan_detected);
    CHECK(rep.max_rel_error <= 1e-5);
  }
}

TEST_CASE("forward is deterministic for a fixed seed") {
  auto build_and_run = [](std::uint64_t seed) {
    auto rng = make_engine(seed);
    TbsmConfig cfg =
        toy_config(HeadKind::Tsl, SimilarityVariant::IndSim, TslArrangement::Inner, 2);
    TbsmParams p = make_tbsm(cfg, rng);
    auto seq = toy_sequence(5, rng);

    Tape tape;
    double loss_val, grad0;
    {
      TapeScope scope(tape);
      Tensor loss = bce_loss(forward(p, seq).p, 0);
      tape.backward(loss);
      loss_val = loss.value();
      grad0 = tape.grad(p.dlrm.user_table)[0];
    }
    return std::pair<double, double>(loss_val, grad0);
  };
  auto [l1, g1] = build_and_run(99);
  auto [l2, g2] = build_and_run(99);
  CHECK(l1 == l2);
  CHECK(g1 == g2);
  auto [l3, g3] = build_and_run(100);
  CHECK(l1 != l3);
}
