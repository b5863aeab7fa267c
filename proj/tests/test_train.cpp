#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "tbsm/errors.hpp"
#include "tbsm/model.hpp"
#include "tbsm/ops.hpp"
#include "tbsm/rng.hpp"
#include "tbsm/synthetic.hpp"
#include "tbsm/training.hpp"

using namespace tbsm;

namespace {

TbsmParams toy_model(std::uint64_t seed, SimilarityVariant sim = SimilarityVariant::DotSim,
                     int n = 4, int tau = 5) {
  TbsmConfig cfg;
  cfg.tau = tau;
  cfg.n = n;
  cfg.use_embedding = false;
  cfg.head_kind = HeadKind::Tsl;
  cfg.similarity = sim;
  cfg.k = 1;
  auto rng = make_engine(seed);
  return make_tbsm(cfg, rng);
}

std::vector<SynthPoint> toy_points(int n, int tau, std::int64_t count,
                                   std::uint64_t seed, int delta = 0) {
  SynthConfig cfg;
  cfg.n = n;
  cfg.tau = tau;
  cfg.delta = delta;
  cfg.count = count;
  cfg.seed = seed;
  return gen_dataset(cfg).points;
}

std::vector<double> snapshot(const std::vector<Tensor>& params) {
  std::vector<double> flat;
  for (const Tensor& p : params) {
    for (int i = 0; i < p.size(); ++i) flat.push_back(p[i]);
  }
  return flat;
}

}  // namespace

TEST_CASE("adagrad matches the closed-form updates") {
  AdagradState state;
  state.lr = 0.1;
  state.eps = 1e-10;
  std::vector<Tensor> params{Tensor::zeros({2})};

  // First step with unit gradient: acc = 1, delta = -lr / (1 + eps).
  adagrad_step(state, params, {{1.0, 1.0}});
  const double first = -0.1 / (1.0 + 1e-10);
  CHECK(std::abs(params[0][0] - first) <= 1e-12);
  CHECK(std::abs(params[0][1] - first) <= 1e-12);
  CHECK(state.acc[0][0] == 1.0);

  // Zero gradient: parameters and accumulators bit-unchanged.
  const double before0 = params[0][0];
  adagrad_step(state, params, {{0.0, 0.0}});
  CHECK(params[0][0] == before0);
  CHECK(state.acc[0][0] == 1.0);

  // Second unit gradient: acc = 2, delta = -lr / (sqrt(2) + eps).
  adagrad_step(state, params, {{1.0, 1.0}});
  const double second = first - 0.1 / (std::sqrt(2.0) + 1e-10);
  CHECK(std::abs(params[0][0] - second) <= 1e-12);
  CHECK(state.acc[0][0] == 2.0);
}

TEST_CASE("adagrad accumulators are nonnegative and nondecreasing") {
  AdagradState state;
  std::vector<Tensor> params{Tensor::zeros({3}), Tensor::zeros({2})};
  auto rng = make_engine(7);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<std::vector<double>> prev;
  for (int step = 0; step < 50; ++step) {
    std::vector<std::vector<double>> grads{{dist(rng), dist(rng), dist(rng)},
                                           {dist(rng), dist(rng)}};
    adagrad_step(state, params, grads);
    REQUIRE(state.acc.size() == 2);
    for (std::size_t i = 0; i < state.acc.size(); ++i) {
      for (std::size_t j = 0; j < state.acc[i].size(); ++j) {
        CHECK(state.acc[i][j] >= 0.0);
        if (!prev.empty()) CHECK(state.acc[i][j] >= prev[i][j]);
      }
    }
    prev = state.acc;
  }
}

TEST_CASE("adagrad rejects misaligned gradients") {
  AdagradState state;
  std::vector<Tensor> params{Tensor::zeros({3})};
  CHECK_THROWS_AS(adagrad_step(state, params, {}), ContractError);
  CHECK_THROWS_AS(adagrad_step(state, params, {{1.0, 2.0}}), ContractError);
  adagrad_step(state, params, {{1.0, 2.0, 3.0}});
  std::vector<Tensor> other{Tensor::zeros({3}), Tensor::zeros({1})};
  CHECK_THROWS_AS(adagrad_step(state, other, {{1.0, 2.0, 3.0}, {4.0}}),
                  ContractError);
}

TEST_CASE("auc handles perfect ranking, ties and degenerate input") {
  CHECK(auc({0.9, 0.1}, {1, 0}) == 1.0);
  CHECK(auc({0.1, 0.9}, {1, 0}) == 0.0);
  CHECK(auc({0.4, 0.4, 0.4, 0.4}, {1, 0, 1, 0}) == 0.5);
  CHECK_THROWS_AS(auc({0.1, 0.2}, {1, 1}), MetricError);
  CHECK_THROWS_AS(auc({0.1, 0.2}, {0, 0}), MetricError);
  CHECK_THROWS_AS(auc({0.1}, {0}), MetricError);
  CHECK_THROWS_AS(auc({0.1, 0.2}, {0, 2}), ContractError);
  CHECK_THROWS_AS(auc({0.1, 0.2}, {0}), ContractError);
}

TEST_CASE("sort-based auc equals brute-force pair counting exactly") {
  auto rng = make_engine(101);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SUBCASE("continuous scores") {
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 1000; ++i) {
      scores.push_back(unif(rng));
      labels.push_back(static_cast<int>(rng() % 2));
    }
    CHECK(auc(scores, labels) == auc_brute_force(scores, labels));
  }

  SUBCASE("heavily tied scores") {
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 400; ++i) {
      scores.push_back(0.25 * static_cast<double>(rng() % 5));
      labels.push_back(static_cast<int>(rng() % 2));
    }
    CHECK(auc(scores, labels) == auc_brute_force(scores, labels));
  }
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
  auto rng = make_engine(55);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 300; ++i) {
    scores.push_back(0.1 * static_cast<double>(rng() % 40) - 2.0);
    labels.push_back(static_cast<int>(rng() % 2));
  }
  const double base = auc(scores, labels);

  std::vector<double> affine(scores), expo(scores);
  for (double& s : affine) s = 2.0 * s + 3.0;
  for (double& s : expo) s = std::exp(s);
  CHECK(auc(affine, labels) == base);
  CHECK(auc(expo, labels) == base);
}

TEST_CASE("zero learning rate leaves the model bit-identical") {
  TbsmParams model = toy_model(3);
  const std::vector<SynthPoint> points = toy_points(4, 5, 96, 11);
  std::vector<Tensor> params;
  collect_params(model, params);
  const std::vector<double> before = snapshot(params);

  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.batch_size = 16;
  cfg.seed = 5;
  EpochReport report = train_one_epoch(model, points.size(),
                                       synth_examples(model, points), cfg);
  CHECK(report.batches == 6);  // 91 train points in batches of 16

  const std::vector<double> after = snapshot(params);
  REQUIRE(after.size() == before.size());
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i] == before[i]);
}

TEST_CASE("training separates the delta=0 synthetic task") {
  TbsmParams model = toy_model(17, SimilarityVariant::DotSim, 15, 20);
  const std::vector<SynthPoint> points = toy_points(15, 20, 2000, 23);

  TrainConfig cfg;
  cfg.seed = 29;
  EpochReport report = train_one_epoch(model, points.size(),
                                       synth_examples(model, points), cfg);

  Metrics final = evaluate(points.size(), synth_examples(model, points));
  CHECK(final.accuracy > 0.85);
  CHECK(report.train.loss < 0.69);  // better than chance over the epoch
  CHECK(report.val.accuracy > 0.7);
}

TEST_CASE("same seed and data replay an identical loss trajectory") {
  const std::vector<SynthPoint> points = toy_points(4, 5, 300, 41);
  TrainConfig cfg;
  cfg.seed = 43;
  cfg.log_interval = 1;

  TbsmParams a = toy_model(47);
  TbsmParams b = toy_model(47);
  EpochReport ra = train_one_epoch(a, points.size(), synth_examples(a, points), cfg);
  EpochReport rb = train_one_epoch(b, points.size(), synth_examples(b, points), cfg);

  REQUIRE(ra.rows.size() == rb.rows.size());
  for (std::size_t i = 0; i < ra.rows.size(); ++i) {
    CHECK(ra.rows[i].step == rb.rows[i].step);
    CHECK(ra.rows[i].split == rb.rows[i].split);
    CHECK(ra.rows[i].loss == rb.rows[i].loss);
    CHECK(ra.rows[i].accuracy == rb.rows[i].accuracy);
  }
  CHECK(ra.train.loss == rb.train.loss);
  CHECK(ra.val.loss == rb.val.loss);
}

TEST_CASE("train_one_epoch validates its inputs") {
  TbsmParams model = toy_model(3);
  const std::vector<SynthPoint> points = toy_points(4, 5, 8, 13);
  TrainConfig cfg;
  CHECK_THROWS_AS(train_one_epoch(model, 0, synth_examples(model, points), cfg),
                  ContractError);
  TrainConfig bad = cfg;
  bad.batch_size = 0;
  CHECK_THROWS_AS(
      train_one_epoch(model, points.size(), synth_examples(model, points), bad),
      ContractError);
  bad = cfg;
  bad.validation_fraction = 1.0;
  CHECK_THROWS_AS(
      train_one_epoch(model, points.size(), synth_examples(model, points), bad),
      ContractError);
}

TEST_CASE("collect_scores echoes labels and sigmoid-range scores") {
  TbsmParams model = toy_model(3);
  const std::vector<SynthPoint> points = toy_points(4, 5, 32, 19);
  std::vector<double> scores;
  std::vector<int> labels;
  collect_scores(points.size(), synth_examples(model, points), scores, labels);
  REQUIRE(scores.size() == points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    CHECK(labels[i] == points[i].label);
    CHECK(scores[i] > 0.0);
    CHECK(scores[i] < 1.0);
  }
}

TEST_CASE("shuffled_indices is a deterministic permutation") {
  const std::vector<std::size_t> a = shuffled_indices(100, 9);
  const std::vector<std::size_t> b = shuffled_indices(100, 9);
  CHECK(a == b);
  CHECK(shuffled_indices(100, 10) != a);
  std::vector<std::size_t> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) REQUIRE(sorted[i] == i);
}

TEST_CASE("run_experiment aggregates per-seed AUCs order-free") {
  auto run_one = [](std::uint64_t seed) {
    RunResult r;
    r.seed = seed;
    r.test_auc = 0.5 + 0.01 * static_cast<double>(seed % 7);
    return r;
  };

  SUBCASE("identical seeds give zero spread") {
    ExperimentSummary s =
        run_experiment(std::vector<std::uint64_t>(10, 4), run_one);
    CHECK(s.auc_std == 0.0);
    CHECK(s.auc_range == 0.0);
    CHECK(s.auc_mean == run_one(4).test_auc);
  }

  SUBCASE("permuting the seed list preserves the summary bytes") {
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6};
    std::vector<std::uint64_t> swapped{6, 3, 1, 5, 2, 4};
    ExperimentSummary s1 = run_experiment(seeds, run_one);
    ExperimentSummary s2 = run_experiment(swapped, run_one);
    CHECK(s1.auc_mean == s2.auc_mean);
    CHECK(s1.auc_std == s2.auc_std);
    CHECK(s1.auc_range == s2.auc_range);
    CHECK(s1.per_seed_auc == s2.per_seed_auc);
  }

  CHECK_THROWS_AS(run_experiment({}, run_one), ContractError);
}

TEST_CASE("run_experiment trains real models deterministically") {
  const std::vector<SynthPoint> points = toy_points(4, 5, 120, 61);
  const std::vector<SynthPoint> train(points.begin(), points.begin() + 100);
  const std::vector<SynthPoint> test(points.begin() + 100, points.end());

  auto run_one = [&](std::uint64_t seed) {
    TbsmParams model = toy_model(derive_seed(seed, 1));
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.batch_size = 32;
    RunResult r;
    r.seed = seed;
    r.epoch = train_one_epoch(model, train.size(), synth_examples(model, train), cfg);
    std::vector<double> scores;
    std::vector<int> labels;
    collect_scores(test.size(), synth_examples(model, test), scores, labels);
    r.test_auc = auc(scores, labels);
    r.test_accuracy = accuracy(scores, labels);
    return r;
  };

  ExperimentSummary same = run_experiment({3, 3, 3}, run_one);
  CHECK(same.auc_std == 0.0);
  CHECK(same.auc_range == 0.0);

  ExperimentSummary mixed = run_experiment({3, 4, 5}, run_one);
  ExperimentSummary replay = run_experiment({3, 4, 5}, run_one);
  CHECK(mixed.auc_mean == replay.auc_mean);
  CHECK(mixed.auc_std == replay.auc_std);
  for (const RunResult& r : mixed.runs) {
    CHECK(r.test_auc >= 0.0);
    CHECK(r.test_auc <= 1.0);
    CHECK(r.test_accuracy >= 0.0);
    CHECK(r.test_accuracy <= 1.0);
  }
}
