#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "tbsm/embedding.hpp"
#include "tbsm/errors.hpp"
#include "tbsm/ops.hpp"
#include "tbsm/rng.hpp"

using namespace tbsm;

namespace {

DlrmParams hand_params() {
  // d=2, n=2, two rows per table; everything set so the forward pass is exact
  // integer-ish arithmetic.
  DlrmParams p;
  p.d = 2;
  p.n = 2;
  p.user_table = Tensor::matrix(2, 2, {0, 0, 1, 2});
  p.item_table = Tensor::matrix(2, 2, {0, 0, 3, -1});
  p.cat_table = Tensor::matrix(2, 2, {0, 0, 0, 1});
  p.bottom.weight = Tensor::matrix(2, 1, {1, -1});
  p.bottom.bias = Tensor::vector({0.5, 0.25});
  p.top.weight = Tensor::matrix(2, 8, {1, 0, 0, 0, 0, 0, 0, 0,   //
                                       0, 0, 1, 0, 0, 0, 0, 0});
  p.top.bias = Tensor::vector({0.1, -0.2});
  return p;
}

}  // namespace

TEST_CASE("interaction vector length is d + 6") {
  auto rng = make_engine(1);
  DlrmParams p = make_dlrm(10, 10, 10, 16, 15, rng);
  CHECK(p.mu() == 22);
  CHECK(p.top.in_dim() == 22);
  CHECK(p.top.out_dim() == 15);

  Tensor z = embed_event(p, Event{3, 7, 2, 0.25, 0});
  CHECK(z.size() == 15);
  for (double v : z.values()) CHECK(std::isfinite(v));
}

TEST_CASE("zero tables and zero bottom layer reduce to the top bias") {
  auto rng = make_engine(2);
  DlrmParams p = make_dlrm(4, 4, 4, 3, 5, rng);
  for (auto& v : p.user_table.values()) v = 0;
  for (auto& v : p.item_table.values()) v = 0;
  for (auto& v : p.cat_table.values()) v = 0;
  for (auto& v : p.bottom.weight.values()) v = 0;
  for (auto& v : p.bottom.bias.values()) v = 0;
  for (auto& v : p.top.bias.values()) v = 1.5;

  Tensor z = embed_event(p, Event{1, 2, 3, 0.7, 0});
  REQUIRE(z.size() == 5);
  for (double v : z.values()) CHECK(v == 1.5);
}

TEST_CASE("hand-computed d=2 forward pass matches exactly") {
  DlrmParams p = hand_params();
  // x = relu([1*0.5+0.5, -1*0.5+0.25]) = [1, 0]
  // dots over [x,u,i,c]: (x,u)=1 (x,i)=3 (x,c)=0 (u,i)=1 (u,c)=2 (i,c)=-1
  // interactions = [1, 0, 1, 3, 0, 1, 2, -1]
  Tensor z = embed_event(p, Event{1, 1, 1, 0.5, 0});
  REQUIRE(z.size() == 2);
  CHECK(z.values()[0] == 1.1);
  CHECK(z.values()[1] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("out-of-range ids name the offending table") {
  auto rng = make_engine(3);
  DlrmParams p = make_dlrm(4, 4, 4, 2, 2, rng);
  CHECK_THROWS_WITH_AS(embed_event(p, Event{9, 0, 0, 0.0, 0}), doctest::Contains("user_table"),
                       LookupError);
  CHECK_THROWS_WITH_AS(embed_event(p, Event{0, 9, 0, 0.0, 0}), doctest::Contains("item_table"),
                       LookupError);
  CHECK_THROWS_WITH_AS(embed_event(p, Event{0, 0, 9, 0.0, 0}), doctest::Contains("cat_table"),
                       LookupError);
}

TEST_CASE("embed_event is a pure function of params and event") {
  auto rng = make_engine(4);
  DlrmParams p = make_dlrm(6, 6, 6, 4, 3, rng);
  Event ev{2, 5, 1, 0.625, 1};
  Tensor z1 = embed_event(p, ev);
  Tensor z2 = embed_event(p, ev);
  CHECK(std::equal(z1.values().begin(), z1.values().end(), z2.values().begin()));
}

TEST_CASE("embed_sequence shapes and per-position independence") {
  auto rng = make_engine(5);
  DlrmParams p = make_dlrm(8, 8, 8, 4, 3, rng);
  std::vector<Event> seq{{1, 2, 3, 0.0, 0}, {4, 5, 6, 0.5, 0}, {7, 1, 2, 1.0, 1}};

  auto emb = embed_sequence(p, seq, 3);
  CHECK(emb.Z.rows() == 3);
  CHECK(emb.Z.cols() == 2);
  CHECK(emb.z_last.size() == 3);

  for (std::size_t t = 0; t < 2; ++t) {
    Tensor zt = embed_event(p, seq[t]);
    for (int r = 0; r < 3; ++r) CHECK(emb.Z.at(r, static_cast<int>(t)) == zt.values()[r]);
  }
  Tensor zl = embed_event(p, seq.back());
  CHECK(std::equal(zl.values().begin(), zl.values().end(), emb.z_last.values().begin()));

  // Permuting the history permutes the columns.
  std::vector<Event> swapped{seq[1], seq[0], seq[2]};
  auto emb2 = embed_sequence(p, swapped, 3);
  for (int r = 0; r < 3; ++r) {
    CHECK(emb2.Z.at(r, 0) == emb.Z.at(r, 1));
    CHECK(emb2.Z.at(r, 1) == emb.Z.at(r, 0));
  }
}

TEST_CASE("embed_sequence validates the sequence length") {
  auto rng = make_engine(6);
  DlrmParams p = make_dlrm(4, 4, 4, 2, 2, rng);
  std::vector<Event> seq{{1, 1, 1, 0.0, 0}, {1, 1, 1, 1.0, 0}};
  CHECK_THROWS_AS(embed_sequence(p, seq, 3), ContractError);
  CHECK_THROWS_AS(embed_sequence(p, seq, 1), ContractError);

  auto emb = embed_sequence(p, seq, 2);
  CHECK(emb.Z.cols() == 1);
}

TEST_CASE("full-size sequence embedding has the documented shape") {
  auto rng = make_engine(7);
  DlrmParams p = make_dlrm(50, 50, 10, 16, 15, rng);
  std::vector<Event> seq;
  for (int t = 0; t < 20; ++t) {
    seq.push_back(Event{t % 50, (3 * t) % 50, t % 10, t / 19.0, 0});
  }
  auto emb = embed_sequence(p, seq, 20);
  CHECK(emb.Z.rows() == 15);
  CHECK(emb.Z.cols() == 19);
}

TEST_CASE("gradients accumulate across positions sharing an embedding row") {
  auto rng = make_engine(8);
  DlrmParams p = make_dlrm(4, 4, 4, 3, 2, rng);
  // Zero-initialized biases put the relu input exactly on its kink where the
  // subgradient and central differences disagree; nudge them off it.
  for (auto& v : p.bottom.bias.values()) v = 0.05;
  // User 1 appears at every position, item 2 twice.
  std::vector<Event> seq{{1, 2, 0, 0.25, 0}, {1, 3, 1, 0.5, 0}, {1, 2, 2, 1.0, 1}};

  std::vector<Tensor> params;
  collect_params(p, params);
  auto rep = grad_check_params(
      [&]() {
        auto emb = embed_sequence(p, seq, 3);
        return add(sum(emb.Z), sum(emb.z_last));
      },
      params);
  INFO("worst param ", rep.worst_param, " index ", rep.worst_index);
  CHECK_FALSE(rep.nan_detected);
  CHECK(rep.max_rel_error <= 1e-5);
}
