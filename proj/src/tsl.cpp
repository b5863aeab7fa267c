#include "tbsm/tsl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tbsm/errors.hpp"
#include "tbsm/ops.hpp"

namespace tbsm {

const char* similarity_name(SimilarityVariant v) {
  switch (v) {
    case SimilarityVariant::DotSim: return "dot";
    case SimilarityVariant::CosSim: return "cos";
    case SimilarityVariant::GenSim: return "gen";
    case SimilarityVariant::IndSim: return "ind";
  }
  throw ContractError("unknown similarity variant");
}

SimilarityVariant similarity_from_name(const std::string& name) {
  if (name == "dot") return SimilarityVariant::DotSim;
  if (name == "cos") return SimilarityVariant::CosSim;
  if (name == "gen") return SimilarityVariant::GenSim;
  if (name == "ind") return SimilarityVariant::IndSim;
  throw ConfigError("unknown similarity '" + name + "' (expected dot, cos, gen or ind)");
}

SimilarityKind make_similarity(SimilarityVariant variant, int n, std::mt19937_64& rng) {
  SimilarityKind kind;
  kind.variant = variant;
  if (variant == SimilarityVariant::GenSim || variant == SimilarityVariant::IndSim) {
    std::normal_distribution<double> noise(0.0, 0.01);
    kind.A = Tensor::zeros({n, n});
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        kind.A.values()[static_cast<std::size_t>(i) * n + j] =
            (i == j ? 1.0 : 0.0) + noise(rng);
      }
    }
    kind.A.set_requires_grad(true);
  }
  return kind;
}

TslParams make_tsl(SimilarityVariant variant, int n, int history_len, std::mt19937_64& rng) {
  if (history_len < 1) {
    throw ContractError("TSL history length must be at least 1");
  }
  TslParams p;
  p.kind = make_similarity(variant, n, rng);
  p.mlp = make_mlp({history_len, n, n, history_len}, rng);
  p.history_len = history_len;
  return p;
}

Tensor similarity(const SimilarityKind& kind, const Tensor& u, const Tensor& v) {
  if (kind.variant == SimilarityVariant::DotSim) {
    return dot(u, v);
  }
  Tensor uh = l2_normalize_or_e1(u);
  Tensor vh = l2_normalize_or_e1(v);
  switch (kind.variant) {
    case SimilarityVariant::CosSim:
      return dot(uh, vh);
    case SimilarityVariant::GenSim:
      return dot(matmul(kind.A, uh), matmul(kind.A, vh));
    case SimilarityVariant::IndSim:
      return dot(uh, matmul(kind.A, vh));
    default:
      throw ContractError("unknown similarity variant");
  }
}

double sphere_distance(const Tensor& w, const Tensor& v) {
  if (w.size() != v.size()) {
    throw ShapeError("sphere_distance: " + w.shape_str() + " vs " + v.shape_str());
  }
  double ip = 0.0;
  for (int i = 0; i < w.size(); ++i) ip += w.values()[i] * v.values()[i];
  ip = std::clamp(ip, -1.0, 1.0);
  return std::acos(ip) / std::numbers::pi;
}

Tensor tsl_forward(const TslParams& params, const Tensor& Z, const Tensor& z_last) {
  if (Z.cols() != params.history_len) {
    throw ContractError("TSL sized for " + std::to_string(params.history_len) +
                        " history columns, got " + std::to_string(Z.cols()));
  }
  std::vector<Tensor> sims;
  sims.reserve(Z.cols());
  for (int t = 0; t < Z.cols(); ++t) {
    sims.push_back(similarity(params.kind, col(Z, t), z_last));
  }
  Tensor s = concat(sims);
  Tensor a = mlp_forward(params.mlp, s);
  return matmul(Z, a);
}

std::vector<Tensor> multi_tsl_inner(const std::vector<TslParams>& heads, const Tensor& Z,
                                    const Tensor& z_last) {
  if (heads.empty()) {
    throw ContractError("multi_tsl_inner needs at least one head");
  }
  for (const auto& h : heads) {
    if (h.history_len != Z.cols()) {
      throw ContractError("inner TSL heads must all cover the full history");
    }
  }
  std::vector<Tensor> contexts;
  contexts.reserve(heads.size());
  for (const auto& h : heads) contexts.push_back(tsl_forward(h, Z, z_last));
  return contexts;
}

std::vector<Tensor> multi_tsl_seq(const std::vector<TslParams>& heads, const Tensor& Z,
                                  const Tensor& z_last) {
  if (heads.empty()) {
    throw ContractError("multi_tsl_seq needs at least one head");
  }
  std::vector<Tensor> contexts;
  contexts.reserve(heads.size());
  for (const auto& h : heads) {
    if (h.history_len > Z.cols()) {
      throw ContractError("seq TSL head wants " + std::to_string(h.history_len) +
                          " history columns, only " + std::to_string(Z.cols()) + " available");
    }
    Tensor suffix = h.history_len == Z.cols()
                        ? Z
                        : slice_cols(Z, Z.cols() - h.history_len, h.history_len);
    contexts.push_back(tsl_forward(h, suffix, z_last));
  }
  return contexts;
}

std::vector<TslParams> make_seq_heads(SimilarityVariant variant, int n, int tau,
                                      const std::vector<int>& lengths, std::mt19937_64& rng) {
  std::vector<TslParams> heads;
  heads.reserve(lengths.size());
  for (int len : lengths) {
    if (len < 2 || len > tau) {
      throw ContractError("seq subsequence length " + std::to_string(len) +
                          " out of range [2, " + std::to_string(tau) + "]");
    }
    heads.push_back(make_tsl(variant, n, len - 1, rng));
  }
  return heads;
}

void collect_params(const TslParams& params, std::vector<Tensor>& out) {
  if (params.kind.A.defined()) {
    out.push_back(params.kind.A);
  }
  collect_params(params.mlp, out);
}

}  // namespace tbsm
