#pragma once

// Adagrad optimizer, classification metrics (accuracy, AUC) and the
// one-epoch training loop plus the multi-seed experiment runner.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tbsm/model.hpp"
#include "tbsm/synthetic.hpp"

namespace tbsm {

// Per-parameter accumulated squared gradients. Accumulators are sized
// lazily on the first step and are nonnegative and nondecreasing.
struct AdagradState {
  double lr = 0.05;
  double eps = 1e-10;
  std::vector<std::vector<double>> acc;  // aligned with the parameter list
};

// acc += g^2; theta -= lr * g / (sqrt(acc) + eps), elementwise.
// Throws ContractError when grads are not aligned with params.
void adagrad_step(AdagradState& state, std::vector<Tensor>& params,
                  const std::vector<std::vector<double>>& grads);

// Convenience wrapper: pulls each parameter's gradient off the tape
// (zero vector when the parameter was not touched by the loss).
void adagrad_step(AdagradState& state, std::vector<Tensor>& params, Tape& tape);

// Fraction of points where (score > 0.5) matches the label.
double accuracy(const std::vector<double>& scores, const std::vector<int>& labels);

// Probability that a uniformly random positive outranks a uniformly random
// negative, ties counted 1/2. Sort-based rank statistic, O(N log N).
// Throws MetricError when only one class is present.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// O(N^2) pair-counting definition of the same statistic; agreement with
// auc() is exact, which the tests rely on.
double auc_brute_force(const std::vector<double>& scores,
                       const std::vector<int>& labels);

// One labeled example after a model forward pass: predicted click
// probability (recorded on the active tape, if any) and the 0/1 label.
struct Example {
  Tensor p;
  int label = 0;
};

// Maps a dataset index to a forward pass; lets the loop run unchanged over
// synthetic points (pre-embedded) and event sequences.
using ExampleFn = std::function<Example(std::size_t index)>;

ExampleFn synth_examples(const TbsmParams& model,
                         const std::vector<SynthPoint>& points);
ExampleFn event_examples(const TbsmParams& model,
                         const std::vector<std::vector<Event>>& records);

struct TrainConfig {
  double lr = 0.05;
  int batch_size = 128;
  double adagrad_eps = 1e-10;
  double validation_fraction = 0.05;
  int log_interval = 20;   // batches between train metric rows
  std::uint64_t seed = 0;  // shuffle order; echoed into metric rows
};

// One metrics-log line: (run_seed, step, split, loss, accuracy).
struct MetricsRow {
  std::uint64_t run_seed = 0;
  std::int64_t step = 0;  // batches completed when the row was logged
  std::string split;      // "train" or "val"
  double loss = 0.0;
  double accuracy = 0.0;
};

struct Metrics {
  double loss = 0.0;
  double accuracy = 0.0;
};

struct EpochReport {
  std::vector<MetricsRow> rows;
  Metrics train;  // mean over the whole epoch
  Metrics val;    // zero-count split leaves these at 0
  std::int64_t batches = 0;
};

// Average loss/accuracy without recording gradients.
Metrics evaluate(std::size_t count, const ExampleFn& example);

// Forward passes only; appends to scores/labels in index order.
void collect_scores(std::size_t count, const ExampleFn& example,
                    std::vector<double>& scores, std::vector<int>& labels);

// Single shuffled pass over the data: the last validation_fraction of the
// shuffled order is held out, the rest is consumed in fixed-size batches
// (one tape per batch, mean loss). Throws ContractError on an empty dataset.
EpochReport train_one_epoch(TbsmParams& model, std::size_t count,
                            const ExampleFn& example, const TrainConfig& cfg);

struct RunResult {
  std::uint64_t seed = 0;
  EpochReport epoch;
  double test_auc = 0.0;
  double test_accuracy = 0.0;
  double wall_seconds = 0.0;
};

struct ExperimentSummary {
  std::vector<RunResult> runs;      // in seed-list order
  std::vector<double> per_seed_auc; // sorted ascending
  double auc_mean = 0.0;
  double auc_std = 0.0;    // population standard deviation
  double auc_range = 0.0;  // max - min
};

// Trains one independent model per seed and aggregates their test AUCs.
// Statistics are computed over the sorted AUC list, so two seed lists with
// the same members produce identical summaries.
ExperimentSummary run_experiment(
    const std::vector<std::uint64_t>& seeds,
    const std::function<RunResult(std::uint64_t seed)>& run_one);

// Fisher-Yates permutation of [0, count) driven by make_engine(seed).
std::vector<std::size_t> shuffled_indices(std::size_t count, std::uint64_t seed);

}  // namespace tbsm
