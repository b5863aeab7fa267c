#pragma once

#include <random>
#include <vector>

#include "tbsm/mlp.hpp"
#include "tbsm/tensor.hpp"

namespace tbsm {

enum class SimilarityVariant { DotSim, CosSim, GenSim, IndSim };

const char* similarity_name(SimilarityVariant v);
SimilarityVariant similarity_from_name(const std::string& name);

// A is only used by GenSim / IndSim. The sphere variants (CosSim, GenSim,
// IndSim) project both arguments onto the unit sphere before comparing;
// DotSim uses the raw vectors.
struct SimilarityKind {
  SimilarityVariant variant = SimilarityVariant::DotSim;
  Tensor A;  // n x n
};

// One time series layer: similarities of each history column against the
// last item, an MLP L -> n -> n -> L producing coefficients a, and the
// context c = Z a built from the raw (un-projected) columns.
struct TslParams {
  SimilarityKind kind;
  Mlp mlp;
  int history_len = 0;  // L = number of history columns this head consumes
};

// A = I + N(0, 0.01) for the variants that use it.
SimilarityKind make_similarity(SimilarityVariant variant, int n, std::mt19937_64& rng);
TslParams make_tsl(SimilarityVariant variant, int n, int history_len, std::mt19937_64& rng);

// DotSim -> u.v; CosSim -> u_hat.v_hat; GenSim -> (A u_hat).(A v_hat);
// IndSim -> u_hat.(A v_hat). Degenerate inputs fall back to e1 (counted).
Tensor similarity(const SimilarityKind& kind, const Tensor& u, const Tensor& v);

// Geodesic distance on the unit sphere, acos(<w,v>)/pi with the inner
// product clamped to [-1, 1]. Plain arithmetic, no gradient.
double sphere_distance(const Tensor& w, const Tensor& v);

Tensor tsl_forward(const TslParams& params, const Tensor& Z, const Tensor& z_last);

// k independent heads over the full history. All heads must share
// history_len == Z.cols().
std::vector<Tensor> multi_tsl_inner(const std::vector<TslParams>& heads, const Tensor& Z,
                                    const Tensor& z_last);

// Each head consumes the most recent history_len columns of Z (suffix), so
// heads may have distinct lengths. history_len must not exceed Z.cols().
std::vector<Tensor> multi_tsl_seq(const std::vector<TslParams>& heads, const Tensor& Z,
                                  const Tensor& z_last);

// Heads over the most recent subsequences; lengths count events including
// the last item, so a head for length 5 sees 4 history columns.
std::vector<TslParams> make_seq_heads(SimilarityVariant variant, int n, int tau,
                                      const std::vector<int>& lengths, std::mt19937_64& rng);

void collect_params(const TslParams& params, std::vector<Tensor>& out);

}  // namespace tbsm
