#include "tbsm/synthetic.hpp"

#include <cmath>
#include <numeric>

#include "tbsm/errors.hpp"
#include "tbsm/rng.hpp"

namespace tbsm {

namespace {

void validate(const SynthConfig& cfg) {
  if (cfg.n < 2) throw ContractError("synthetic n must be at least 2");
  if (cfg.tau < 2) throw ContractError("synthetic tau must be at least 2");
  if (cfg.delta < 0) throw ContractError("delta must be nonnegative");
  if (cfg.count < 0) throw ContractError("count must be nonnegative");
  if (cfg.test_fraction < 0.0 || cfg.test_fraction > 1.0) {
    throw ContractError("test_fraction must lie in [0, 1]");
  }
}

// Fisher-Yates with explicit draws, so the sequence of rng calls is pinned
// by this code rather than by the standard library's shuffle.
std::vector<std::int32_t> draw_permutation(int n, std::mt19937_64& rng) {
  std::vector<std::int32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

}  // namespace

SynthPoint gen_point(const SynthConfig& cfg, std::mt19937_64& rng) {
  validate(cfg);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = cfg.n;
  const int L = cfg.tau - 1;

  SynthPoint pt;
  pt.Z = Tensor::zeros({n, L});
  // Drawn column by column: history first, then the last item.
  for (int t = 0; t < L; ++t) {
    for (int i = 0; i < n; ++i) {
      pt.Z.values()[static_cast<std::size_t>(i) * L + t] = normal(rng);
    }
  }
  pt.z_last = Tensor::zeros({n});
  for (int i = 0; i < n; ++i) pt.z_last.values()[i] = normal(rng);

  pt.perms.reserve(cfg.delta);
  for (int j = 0; j < cfg.delta; ++j) pt.perms.push_back(draw_permutation(n, rng));

  pt.label = synth_score(pt) > 0.0 ? 1 : 0;
  return pt;
}

double synth_score(const SynthPoint& point) {
  const int n = point.z_last.size();
  const int L = point.Z.cols();

  // z_tilde[i] = sum_j z_last[perm_j[i]]
  std::vector<double> z_tilde(n, 0.0);
  for (const auto& perm : point.perms) {
    for (int i = 0; i < n; ++i) z_tilde[i] += point.z_last.values()[perm[i]];
  }

  double f = 0.0;
  for (int t = 0; t < L; ++t) {
    for (int i = 0; i < n; ++i) {
      const double zit = point.Z.at(i, t);
      f += zit * point.z_last.values()[i] + zit * z_tilde[i];
    }
  }
  return f;
}

SynthDataset gen_dataset(const SynthConfig& cfg) {
  validate(cfg);
  SynthDataset ds;
  ds.cfg = cfg;
  const std::int64_t test_count = std::llround(static_cast<double>(cfg.count) * cfg.test_fraction);
  ds.train_count = cfg.count - test_count;
  ds.points.reserve(cfg.count);
  for (std::int64_t i = 0; i < cfg.count; ++i) {
    auto rng = make_engine(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    ds.points.push_back(gen_point(cfg, rng));
  }
  return ds;
}

}  // namespace tbsm
