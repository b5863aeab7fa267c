#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "tbsm/mlp.hpp"
#include "tbsm/tensor.hpp"

namespace tbsm {

// One interaction event. `time` is normalized to [0,1]; id 0 is the padding
// id and owns a real (trainable) embedding row. `label` is only meaningful on
// the last event of a sequence.
struct Event {
  std::int64_t user = 0;
  std::int64_t item = 0;
  std::int64_t category = 0;
  double time = 0.0;
  int label = 0;
};

// DLRM-style embedding parameters: three categorical tables, a bottom layer
// for the single dense feature (time), and a top layer over the interaction
// vector of length mu = d + 6 (the dense vector plus the 6 pairwise dot
// products among the 4 d-vectors).
struct DlrmParams {
  Tensor user_table;  // |U| x d
  Tensor item_table;  // |I| x d
  Tensor cat_table;   // |C| x d
  LinearLayer bottom;  // d x 1
  LinearLayer top;     // n x mu
  int d = 0;
  int n = 0;

  static constexpr int kSparseFeatures = 3;
  int mu() const { return d + kSparseFeatures * (kSparseFeatures + 1) / 2; }
};

// Tables ~ N(0, 1/sqrt(d)) per row entry; layers via make_linear.
DlrmParams make_dlrm(int num_users, int num_items, int num_cats, int d, int n,
                     std::mt19937_64& rng);

// Embeds one event into z in R^n. The interaction vector is
//   [relu(bottom(time)), <x,u>, <x,i>, <x,c>, <u,i>, <u,c>, <i,c>]
// with x the dense vector, followed by the (linear) top layer.
Tensor embed_event(const DlrmParams& params, const Event& ev);

// Embeds a sequence of exactly tau events. Z holds the tau-1 history
// embeddings as columns [n x (tau-1)]; z_last is the embedding of the final
// event. All positions share the same parameters.
struct SequenceEmbedding {
  Tensor Z;
  Tensor z_last;
};
SequenceEmbedding embed_sequence(const DlrmParams& params, const std::vector<Event>& seq,
                                 int tau);

void collect_params(const DlrmParams& params, std::vector<Tensor>& out);

}  // namespace tbsm
