#pragma once

#include <random>
#include <string>
#include <vector>

#include "tbsm/embedding.hpp"
#include "tbsm/tsl.hpp"

namespace tbsm {

// Clamp applied to probabilities before taking logs in the loss.
inline constexpr double kProbEpsilon = 1e-7;

enum class HeadKind { Tsl, Mha, Lstm };
enum class TslArrangement { Inner, Seq };

const char* head_kind_name(HeadKind k);
HeadKind head_kind_from_name(const std::string& name);
const char* arrangement_name(TslArrangement a);
TslArrangement arrangement_from_name(const std::string& name);

// Multi-head attention over the history: per head, scores (F z_t).(G z_last)
// softmax-normalized over t, context = sum_t w_t (V z_t); head contexts are
// concatenated and projected back to R^n. No score scaling, no projection
// biases.
struct MhaParams {
  int num_heads = 8;
  int head_dim = 8;
  std::vector<Tensor> F, G, V;  // per head, [head_dim x n]
  Tensor out_proj;              // [n x num_heads*head_dim]
};

// Stacked LSTM over the history columns, gate order [i, f, g, o]; the context
// is the top layer's final hidden state.
struct LstmParams {
  int n = 0;
  int layers = 5;
  std::vector<Tensor> W;  // per layer, [4n x n] input weights
  std::vector<Tensor> U;  // per layer, [4n x n] recurrent weights
  std::vector<Tensor> b;  // per layer, [4n]; forget-gate block initialized to 1
};

struct TbsmConfig {
  int tau = 20;
  int n = 15;
  int d = 16;
  // Synthetic data arrives already embedded; such models skip the DLRM
  // layer entirely and must be driven through forward_embedded.
  bool use_embedding = true;
  int num_users = 1;
  int num_items = 1;
  int num_cats = 1;
  HeadKind head_kind = HeadKind::Tsl;
  SimilarityVariant similarity = SimilarityVariant::GenSim;
  TslArrangement arrangement = TslArrangement::Inner;
  int k = 1;                          // TSL head count for the inner arrangement
  std::vector<int> seq_lengths;       // subsequence lengths for the seq arrangement
  int mha_heads = 8;
  int mha_dim = 8;
  int lstm_layers = 5;
};

struct TbsmParams {
  TbsmConfig config;
  DlrmParams dlrm;
  std::vector<TslParams> tsl_heads;
  MhaParams mha;
  LstmParams lstm;
  std::vector<Mlp> head_mlps;  // per context, dims {2n, 4n, 1}
  LinearLayer final_mlp;       // [1 x k]
};

struct Prediction {
  Tensor p;                     // scalar in [0,1]
  std::vector<Tensor> per_head; // scalars in [0,1]
};

MhaParams make_mha(int n, int num_heads, int head_dim, std::mt19937_64& rng);
LstmParams make_lstm(int n, int layers, std::mt19937_64& rng);
TbsmParams make_tbsm(const TbsmConfig& config, std::mt19937_64& rng);

// Number of contexts the configured head produces (k for TSL, 1 for the
// baselines).
int context_count(const TbsmConfig& config);

Tensor mha_forward(const MhaParams& params, const Tensor& Z, const Tensor& z_last);
Tensor lstm_forward(const LstmParams& params, const Tensor& Z);

Prediction forward(const TbsmParams& params, const std::vector<Event>& seq);

// Runs the heads directly on an embedded sequence (Z: [n x tau-1], z_last:
// [n]), bypassing the DLRM layer.
Prediction forward_embedded(const TbsmParams& params, const Tensor& Z, const Tensor& z_last);

// -[y log p + (1-y) log(1-p)] with p clamped to [kProbEpsilon, 1-kProbEpsilon].
Tensor bce_loss(const Tensor& p, int y);

// Same loss on plain doubles; agrees with bce_loss exactly.
double bce_value(double p, int y);

void collect_params(const MhaParams& params, std::vector<Tensor>& out);
void collect_params(const LstmParams& params, std::vector<Tensor>& out);
void collect_params(const TbsmParams& params, std::vector<Tensor>& out);

}  // namespace tbsm
