#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "tbsm/tensor.hpp"

namespace tbsm {

struct SynthConfig {
  int n = 15;
  int tau = 20;
  int delta = 0;             // permutation summands in z_tilde
  std::int64_t count = 0;    // total points (train + test)
  std::uint64_t seed = 0;
  double test_fraction = 0;  // trailing fraction held out as the test set
};

// One already-embedded datapoint: tau-1 history columns plus the last item.
// The permutations behind z_tilde are stored so the labeling rule can be
// recomputed independently.
struct SynthPoint {
  Tensor Z;       // [n x (tau-1)]
  Tensor z_last;  // [n]
  int label = 0;
  std::vector<std::vector<std::int32_t>> perms;  // delta permutations of [0, n)
};

struct SynthDataset {
  SynthConfig cfg;
  std::vector<SynthPoint> points;  // train block first, then test block
  std::int64_t train_count = 0;

  std::int64_t test_count() const { return static_cast<std::int64_t>(points.size()) - train_count; }
};

// All tau vectors have i.i.d. standard-normal coordinates. z_tilde is the
// sum of delta coordinate permutations of z_last (zero when delta=0), the
// score is f = sum_i [<z_i, z_last> + <z_i, z_tilde>] over the history, and
// label = 1 iff f > 0.
SynthPoint gen_point(const SynthConfig& cfg, std::mt19937_64& rng);

// Recomputes f for a point from its stored data with straight loops.
double synth_score(const SynthPoint& point);

// Generates cfg.count points, each from a sub-seed derived from (cfg.seed,
// point index), so the result is independent of evaluation order. The last
// round(count * test_fraction) points form the test block.
SynthDataset gen_dataset(const SynthConfig& cfg);

}  // namespace tbsm
