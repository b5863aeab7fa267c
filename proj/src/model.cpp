#include "tbsm/model.hpp"

#include <algorithm>
#include <cmath>

#include "tbsm/errors.hpp"
#include "tbsm/ops.hpp"

namespace tbsm {

const char* head_kind_name(HeadKind k) {
  switch (k) {
    case HeadKind::Tsl: return "tsl";
    case HeadKind::Mha: return "mha";
    case HeadKind::Lstm: return "lstm";
  }
  throw ContractError("unknown head kind");
}

HeadKind head_kind_from_name(const std::string& name) {
  if (name == "tsl") return HeadKind::Tsl;
  if (name == "mha") return HeadKind::Mha;
  if (name == "lstm") return HeadKind::Lstm;
  throw ConfigError("unknown head kind '" + name + "' (expected tsl, mha or lstm)");
}

const char* arrangement_name(TslArrangement a) {
  switch (a) {
    case TslArrangement::Inner: return "inner";
    case TslArrangement::Seq: return "seq";
  }
  throw ContractError("unknown arrangement");
}

TslArrangement arrangement_from_name(const std::string& name) {
  if (name == "inner") return TslArrangement::Inner;
  if (name == "seq") return TslArrangement::Seq;
  throw ConfigError("unknown arrangement '" + name + "' (expected inner or seq)");
}

namespace {

Tensor random_projection(int rows, int cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-std::sqrt(1.0 / cols), std::sqrt(1.0 / cols));
  Tensor m = Tensor::zeros({rows, cols});
  for (auto& v : m.values()) v = dist(rng);
  m.set_requires_grad(true);
  return m;
}

}  // namespace

MhaParams make_mha(int n, int num_heads, int head_dim, std::mt19937_64& rng) {
  if (num_heads < 1 || head_dim < 1) {
    throw ContractError("MHA needs at least one head and a positive head dim");
  }
  MhaParams p;
  p.num_heads = num_heads;
  p.head_dim = head_dim;
  for (int h = 0; h < num_heads; ++h) {
    p.F.push_back(random_projection(head_dim, n, rng));
    p.G.push_back(random_projection(head_dim, n, rng));
    p.V.push_back(random_projection(head_dim, n, rng));
  }
  p.out_proj = random_projection(n, num_heads * head_dim, rng);
  return p;
}

LstmParams make_lstm(int n, int layers, std::mt19937_64& rng) {
  if (layers < 1) {
    throw ContractError("LSTM needs at least one layer");
  }
  LstmParams p;
  p.n = n;
  p.layers = layers;
  for (int l = 0; l < layers; ++l) {
    p.W.push_back(random_projection(4 * n, n, rng));
    p.U.push_back(random_projection(4 * n, n, rng));
    Tensor bias = Tensor::zeros({4 * n});
    for (int i = n; i < 2 * n; ++i) bias.values()[i] = 1.0;  // forget gate
    bias.set_requires_grad(true);
    p.b.push_back(bias);
  }
  return p;
}

int context_count(const TbsmConfig& config) {
  switch (config.head_kind) {
    case HeadKind::Tsl:
      return config.arrangement == TslArrangement::Inner
                 ? config.k
                 : static_cast<int>(config.seq_lengths.size());
    case HeadKind::Mha:
    case HeadKind::Lstm:
      return 1;
  }
  throw ContractError("unknown head kind");
}

TbsmParams make_tbsm(const TbsmConfig& config, std::mt19937_64& rng) {
  if (config.tau < 2) {
    throw ContractError("tau must be at least 2");
  }
  TbsmParams p;
  p.config = config;
  if (config.use_embedding) {
    p.dlrm = make_dlrm(config.num_users, config.num_items, config.num_cats, config.d, config.n,
                       rng);
  }
  if (config.head_kind == HeadKind::Tsl) {
    if (config.arrangement == TslArrangement::Inner) {
      if (config.k < 1) throw ContractError("k must be at least 1");
      for (int i = 0; i < config.k; ++i) {
        p.tsl_heads.push_back(make_tsl(config.similarity, config.n, config.tau - 1, rng));
      }
    } else {
      if (config.seq_lengths.empty()) throw ContractError("seq arrangement needs lengths");
      p.tsl_heads =
          make_seq_heads(config.similarity, config.n, config.tau, config.seq_lengths, rng);
    }
  } else if (config.head_kind == HeadKind::Mha) {
    p.mha = make_mha(config.n, config.mha_heads, config.mha_dim, rng);
  } else {
    p.lstm = make_lstm(config.n, config.lstm_layers, rng);
  }
  int k = context_count(config);
  for (int i = 0; i < k; ++i) {
    p.head_mlps.push_back(make_mlp({2 * config.n, 4 * config.n, 1}, rng));
  }
  p.final_mlp = make_linear(1, k, rng);
  return p;
}

Tensor mha_forward(const MhaParams& params, const Tensor& Z, const Tensor& z_last) {
  if (Z.rows() != z_last.size()) {
    throw ContractError("MHA expects Z rows to match z_last length");
  }
  std::vector<Tensor> head_contexts;
  head_contexts.reserve(params.F.size());
  for (std::size_t h = 0; h < params.F.size(); ++h) {
    Tensor q = matmul(params.G[h], z_last);
    std::vector<Tensor> scores;
    scores.reserve(Z.cols());
    for (int t = 0; t < Z.cols(); ++t) {
      scores.push_back(dot(matmul(params.F[h], col(Z, t)), q));
    }
    Tensor weights = softmax(concat(scores));
    Tensor values = matmul(params.V[h], Z);  // [head_dim x L]
    head_contexts.push_back(matmul(values, weights));
  }
  return matmul(params.out_proj, concat(head_contexts));
}

Tensor lstm_forward(const LstmParams& params, const Tensor& Z) {
  if (Z.rows() != params.n) {
    throw ContractError("LSTM sized for n=" + std::to_string(params.n) + ", got Z with " +
                        std::to_string(Z.rows()) + " rows");
  }
  int n = params.n;
  std::vector<Tensor> h(params.layers, Tensor::zeros({n}));
  std::vector<Tensor> c(params.layers, Tensor::zeros({n}));
  for (int t = 0; t < Z.cols(); ++t) {
    Tensor x = col(Z, t);
    for (int l = 0; l < params.layers; ++l) {
      Tensor pre = add(add(matmul(params.W[l], x), matmul(params.U[l], h[l])), params.b[l]);
      Tensor i = sigmoid(slice(pre, 0, n));
      Tensor f = sigmoid(slice(pre, n, n));
      Tensor g = tanh_op(slice(pre, 2 * n, n));
      Tensor o = sigmoid(slice(pre, 3 * n, n));
      c[l] = add(mul(f, c[l]), mul(i, g));
      h[l] = mul(o, tanh_op(c[l]));
      x = h[l];
    }
  }
  return h.back();
}

Prediction forward_embedded(const TbsmParams& params, const Tensor& Z, const Tensor& z_last) {
  std::vector<Tensor> contexts;
  switch (params.config.head_kind) {
    case HeadKind::Tsl:
      contexts = params.config.arrangement == TslArrangement::Inner
                     ? multi_tsl_inner(params.tsl_heads, Z, z_last)
                     : multi_tsl_seq(params.tsl_heads, Z, z_last);
      break;
    case HeadKind::Mha:
      contexts.push_back(mha_forward(params.mha, Z, z_last));
      break;
    case HeadKind::Lstm:
      contexts.push_back(lstm_forward(params.lstm, Z));
      break;
  }
  if (contexts.size() != params.head_mlps.size()) {
    throw ContractError("head MLP count does not match context count");
  }

  Prediction pred;
  pred.per_head.reserve(contexts.size());
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    Tensor input = concat(std::vector<Tensor>{z_last, contexts[i]});
    pred.per_head.push_back(sigmoid(mlp_forward(params.head_mlps[i], input)));
  }
  pred.p = sigmoid(linear_forward(params.final_mlp, concat(pred.per_head)));
  return pred;
}

Prediction forward(const TbsmParams& params, const std::vector<Event>& seq) {
  if (!params.config.use_embedding) {
    throw ContractError("model configured without an embedding layer; use forward_embedded");
  }
  auto emb = embed_sequence(params.dlrm, seq, params.config.tau);
  return forward_embedded(params, emb.Z, emb.z_last);
}

Tensor bce_loss(const Tensor& p, int y) {
  if (y != 0 && y != 1) {
    throw ContractError("label must be 0 or 1");
  }
  Tensor pc = clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
  if (y == 1) {
    return neg(log_op(pc));
  }
  return neg(log_op(sub(Tensor::scalar(1.0), pc)));
}

double bce_value(double p, int y) {
  if (y != 0 && y != 1) {
    throw ContractError("label must be 0 or 1");
  }
  const double pc = std::min(std::max(p, kProbEpsilon), 1.0 - kProbEpsilon);
  return y == 1 ? -std::log(pc) : -std::log(1.0 - pc);
}

void collect_params(const MhaParams& params, std::vector<Tensor>& out) {
  for (std::size_t h = 0; h < params.F.size(); ++h) {
    out.push_back(params.F[h]);
    out.push_back(params.G[h]);
    out.push_back(params.V[h]);
  }
  out.push_back(params.out_proj);
}

void collect_params(const LstmParams& params, std::vector<Tensor>& out) {
  for (int l = 0; l < params.layers; ++l) {
    out.push_back(params.W[l]);
    out.push_back(params.U[l]);
    out.push_back(params.b[l]);
  }
}

void collect_params(const TbsmParams& params, std::vector<Tensor>& out) {
  if (params.config.use_embedding) collect_params(params.dlrm, out);
  for (const auto& head : params.tsl_heads) collect_params(head, out);
  if (params.config.head_kind == HeadKind::Mha) collect_params(params.mha, out);
  if (params.config.head_kind == HeadKind::Lstm) collect_params(params.lstm, out);
  for (const auto& mlp : params.head_mlps) collect_params(mlp, out);
  collect_params(params.final_mlp, out);
}

}  // namespace tbsm
