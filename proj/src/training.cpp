#include "tbsm/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "tbsm/errors.hpp"
#include "tbsm/ops.hpp"
#include "tbsm/rng.hpp"

namespace tbsm {

void adagrad_step(AdagradState& state, std::vector<Tensor>& params,
                  const std::vector<std::vector<double>>& grads) {
  if (grads.size() != params.size()) {
    throw ContractError("adagrad_step: " + std::to_string(grads.size()) +
                        " gradients for " + std::to_string(params.size()) +
                        " parameters");
  }
  if (state.acc.empty()) {
    state.acc.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.acc[i].assign(static_cast<std::size_t>(params[i].size()), 0.0);
    }
  }
  if (state.acc.size() != params.size()) {
    throw ContractError("adagrad_step: optimizer state tracks " +
                        std::to_string(state.acc.size()) +
                        " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::vector<double>& g = grads[i];
    std::vector<double>& acc = state.acc[i];
    std::vector<double>& theta = params[i].values();
    if (g.size() != theta.size() || acc.size() != theta.size()) {
      throw ContractError("adagrad_step: parameter " + std::to_string(i) +
                          " has " + std::to_string(theta.size()) +
                          " elements, gradient has " + std::to_string(g.size()));
    }
    for (std::size_t j = 0; j < theta.size(); ++j) {
      acc[j] += g[j] * g[j];
      theta[j] -= state.lr * g[j] / (std::sqrt(acc[j]) + state.eps);
    }
  }
}

void adagrad_step(AdagradState& state, std::vector<Tensor>& params, Tape& tape) {
  std::vector<std::vector<double>> grads;
  grads.reserve(params.size());
  for (const Tensor& p : params) {
    if (tape.has_grad(p)) {
      grads.push_back(tape.grad_buf(p));
    } else {
      grads.emplace_back(static_cast<std::size_t>(p.size()), 0.0);
    }
  }
  adagrad_step(state, params, grads);
}

double accuracy(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw ContractError("accuracy: " + std::to_string(scores.size()) +
                        " scores vs " + std::to_string(labels.size()) + " labels");
  }
  if (scores.empty()) throw ContractError("accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int predicted = scores[i] > 0.5 ? 1 : 0;
    if (predicted == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

namespace {

void check_auc_input(const std::vector<double>& scores,
                     const std::vector<int>& labels, std::size_t& positives) {
  if (scores.size() != labels.size()) {
    throw ContractError("auc: " + std::to_string(scores.size()) +
                        " scores vs " + std::to_string(labels.size()) + " labels");
  }
  positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw ContractError("auc: label must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  if (positives == 0 || positives == scores.size()) {
    throw MetricError("auc undefined: inputs contain a single class");
  }
}

}  // namespace

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::size_t positives = 0;
  check_auc_input(scores, labels, positives);
  const std::size_t n = scores.size();
  const std::size_t negatives = n - positives;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Rank-sum with tie groups sharing their average rank. Ranks are
  // half-integers, so the arithmetic below is exact in doubles.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) positive_rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) /
         (p * static_cast<double>(negatives));
}

double auc_brute_force(const std::vector<double>& scores,
                       const std::vector<int>& labels) {
  std::size_t positives = 0;
  check_auc_input(scores, labels, positives);
  double wins = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(positives) *
                 static_cast<double>(scores.size() - positives));
}

ExampleFn synth_examples(const TbsmParams& model,
                         const std::vector<SynthPoint>& points) {
  const TbsmParams* m = &model;
  const std::vector<SynthPoint>* pts = &points;
  return [m, pts](std::size_t i) {
    const SynthPoint& pt = (*pts)[i];
    return Example{forward_embedded(*m, pt.Z, pt.z_last).p, pt.label};
  };
}

ExampleFn event_examples(const TbsmParams& model,
                         const std::vector<std::vector<Event>>& records) {
  const TbsmParams* m = &model;
  const std::vector<std::vector<Event>>* recs = &records;
  return [m, recs](std::size_t i) {
    const std::vector<Event>& seq = (*recs)[i];
    return Example{forward(*m, seq).p, seq.back().label};
  };
}

Metrics evaluate(std::size_t count, const ExampleFn& example) {
  if (count == 0) throw ContractError("evaluate: empty dataset");
  TapePause pause;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < count; ++i) {
    Example ex = example(i);
    loss_sum += bce_value(ex.p[0], ex.label);
    const int predicted = ex.p[0] > 0.5 ? 1 : 0;
    if (predicted == ex.label) ++correct;
  }
  return {loss_sum / static_cast<double>(count),
          static_cast<double>(correct) / static_cast<double>(count)};
}

void collect_scores(std::size_t count, const ExampleFn& example,
                    std::vector<double>& scores, std::vector<int>& labels) {
  TapePause pause;
  for (std::size_t i = 0; i < count; ++i) {
    Example ex = example(i);
    scores.push_back(ex.p[0]);
    labels.push_back(ex.label);
  }
}

std::vector<std::size_t> shuffled_indices(std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = make_engine(seed);
  for (std::size_t i = count; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

EpochReport train_one_epoch(TbsmParams& model, std::size_t count,
                            const ExampleFn& example, const TrainConfig& cfg) {
  if (count == 0) throw ContractError("train_one_epoch: empty dataset");
  if (cfg.batch_size <= 0) throw ContractError("train_one_epoch: batch_size must be positive");
  if (cfg.validation_fraction < 0.0 || cfg.validation_fraction >= 1.0) {
    throw ContractError("train_one_epoch: validation_fraction must be in [0, 1)");
  }

  const std::vector<std::size_t> order = shuffled_indices(count, cfg.seed);
  const auto val_count =
      static_cast<std::size_t>(static_cast<double>(count) * cfg.validation_fraction);
  const std::size_t train_count = count - val_count;

  std::vector<Tensor> params;
  collect_params(model, params);
  AdagradState opt;
  opt.lr = cfg.lr;
  opt.eps = cfg.adagrad_eps;

  EpochReport report;
  double epoch_loss = 0.0;
  std::size_t epoch_correct = 0;
  double interval_loss = 0.0;
  std::size_t interval_correct = 0;
  std::size_t interval_seen = 0;

  std::size_t start = 0;
  while (start < train_count) {
    const std::size_t m = std::min<std::size_t>(
        static_cast<std::size_t>(cfg.batch_size), train_count - start);
    Tape tape;
    TapeScope scope(tape);
    Tensor total;
    for (std::size_t b = 0; b < m; ++b) {
      Example ex = example(order[start + b]);
      Tensor loss = bce_loss(ex.p, ex.label);
      epoch_loss += loss[0];
      interval_loss += loss[0];
      const int predicted = ex.p[0] > 0.5 ? 1 : 0;
      if (predicted == ex.label) {
        ++epoch_correct;
        ++interval_correct;
      }
      total = total.defined() ? add(total, loss) : loss;
    }
    interval_seen += m;
    Tensor mean = scale(total, 1.0 / static_cast<double>(m));
    tape.backward(mean);
    adagrad_step(opt, params, tape);

    ++report.batches;
    if (cfg.log_interval > 0 &&
        report.batches % cfg.log_interval == 0 && interval_seen > 0) {
      report.rows.push_back(
          {cfg.seed, report.batches, "train",
           interval_loss / static_cast<double>(interval_seen),
           static_cast<double>(interval_correct) / static_cast<double>(interval_seen)});
      interval_loss = 0.0;
      interval_correct = 0;
      interval_seen = 0;
    }
    start += m;
  }
  if (interval_seen > 0) {
    report.rows.push_back(
        {cfg.seed, report.batches, "train",
         interval_loss / static_cast<double>(interval_seen),
         static_cast<double>(interval_correct) / static_cast<double>(interval_seen)});
  }

  report.train.loss = epoch_loss / static_cast<double>(train_count);
  report.train.accuracy =
      static_cast<double>(epoch_correct) / static_cast<double>(train_count);

  if (val_count > 0) {
    TapePause pause;
    double val_loss = 0.0;
    std::size_t val_correct = 0;
    for (std::size_t i = train_count; i < count; ++i) {
      Example ex = example(order[i]);
      val_loss += bce_value(ex.p[0], ex.label);
      const int predicted = ex.p[0] > 0.5 ? 1 : 0;
      if (predicted == ex.label) ++val_correct;
    }
    report.val.loss = val_loss / static_cast<double>(val_count);
    report.val.accuracy =
        static_cast<double>(val_correct) / static_cast<double>(val_count);
    report.rows.push_back(
        {cfg.seed, report.batches, "val", report.val.loss, report.val.accuracy});
  }
  return report;
}

ExperimentSummary run_experiment(
    const std::vector<std::uint64_t>& seeds,
    const std::function<RunResult(std::uint64_t seed)>& run_one) {
  if (seeds.empty()) throw ContractError("run_experiment: empty seed list");
  ExperimentSummary summary;
  summary.runs.reserve(seeds.size());
  for (std::uint64_t seed : seeds) {
    summary.runs.push_back(run_one(seed));
    summary.per_seed_auc.push_back(summary.runs.back().test_auc);
  }
  // Sorting first makes the statistics a function of the seed *set*:
  // permuting the seed list cannot change a single output bit.
  std::sort(summary.per_seed_auc.begin(), summary.per_seed_auc.end());
  const auto n = static_cast<double>(summary.per_seed_auc.size());
  double sum = 0.0;
  for (double a : summary.per_seed_auc) sum += a;
  summary.auc_mean = sum / n;
  double sq = 0.0;
  for (double a : summary.per_seed_auc) {
    sq += (a - summary.auc_mean) * (a - summary.auc_mean);
  }
  summary.auc_std = std::sqrt(sq / n);
  summary.auc_range = summary.per_seed_auc.back() - summary.per_seed_auc.front();
  return summary;
}

}  // namespace tbsm
