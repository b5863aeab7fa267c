#include "tbsm/embedding.hpp"

#include <array>

#include "tbsm/errors.hpp"
#include "tbsm/ops.hpp"

namespace tbsm {

DlrmParams make_dlrm(int num_users, int num_items, int num_cats, int d, int n,
                     std::mt19937_64& rng) {
  if (d <= 0 || n <= 0) {
    throw ContractError("embedding dims must be positive");
  }
  DlrmParams p;
  p.d = d;
  p.n = n;
  std::normal_distribution<double> row_dist(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
  auto make_table = [&](int rows) {
    Tensor t = Tensor::zeros({rows, d});
    for (auto& v : t.values()) v = row_dist(rng);
    t.set_requires_grad(true);
    return t;
  };
  p.user_table = make_table(num_users);
  p.item_table = make_table(num_items);
  p.cat_table = make_table(num_cats);
  p.bottom = make_linear(d, 1, rng);
  p.top = make_linear(n, p.mu(), rng);
  return p;
}

Tensor embed_event(const DlrmParams& params, const Event& ev) {
  Tensor u = lookup(params.user_table, ev.user, "user_table");
  Tensor i = lookup(params.item_table, ev.item, "item_table");
  Tensor c = lookup(params.cat_table, ev.category, "cat_table");
  Tensor x = relu(linear_forward(params.bottom, Tensor::vector({ev.time})));

  std::array<Tensor, 4> feats{x, u, i, c};
  std::vector<Tensor> parts;
  parts.reserve(7);
  parts.push_back(x);
  for (std::size_t a = 0; a < feats.size(); ++a) {
    for (std::size_t b = a + 1; b < feats.size(); ++b) {
      parts.push_back(dot(feats[a], feats[b]));
    }
  }
  Tensor interactions = concat(parts);
  return linear_forward(params.top, interactions);
}

SequenceEmbedding embed_sequence(const DlrmParams& params, const std::vector<Event>& seq,
                                 int tau) {
  if (tau < 2) {
    throw ContractError("sequence length tau must be at least 2");
  }
  if (seq.size() != static_cast<std::size_t>(tau)) {
    throw ContractError("expected " + std::to_string(tau) + " events, got " +
                        std::to_string(seq.size()));
  }
  std::vector<Tensor> cols;
  cols.reserve(seq.size() - 1);
  for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
    cols.push_back(embed_event(params, seq[t]));
  }
  SequenceEmbedding out;
  out.Z = stack_cols(cols);
  out.z_last = embed_event(params, seq.back());
  return out;
}

void collect_params(const DlrmParams& params, std::vector<Tensor>& out) {
  out.push_back(params.user_table);
  out.push_back(params.item_table);
  out.push_back(params.cat_table);
  collect_params(params.bottom, out);
  collect_params(params.top, out);
}

}  // namespace tbsm
