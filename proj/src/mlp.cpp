#include "tbsm/mlp.hpp"

#include <cmath>

namespace tbsm {

LinearLayer make_linear(int out_dim, int in_dim, std::mt19937_64& rng) {
  const double bound = std::sqrt(1.0 / in_dim);
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> w(static_cast<size_t>(out_dim) * in_dim);
  for (auto& v : w) v = dist(rng);
  LinearLayer layer{Tensor::matrix(out_dim, in_dim, std::move(w)), Tensor::zeros({out_dim})};
  layer.weight.set_requires_grad(true);
  layer.bias.set_requires_grad(true);
  return layer;
}

Tensor linear_forward(const LinearLayer& layer, const Tensor& x) {
  return add(matmul(layer.weight, x), layer.bias);
}

Mlp make_mlp(const std::vector<int>& dims, std::mt19937_64& rng) {
  if (dims.size() < 2) throw ContractError("make_mlp: need at least input and output dims");
  Mlp mlp;
  for (size_t i = 0; i + 1 < dims.size(); ++i) {
    mlp.layers.push_back(make_linear(dims[i + 1], dims[i], rng));
  }
  return mlp;
}

Tensor mlp_forward(const Mlp& mlp, const Tensor& x) {
  Tensor h = x;
  for (size_t i = 0; i < mlp.layers.size(); ++i) {
    h = linear_forward(mlp.layers[i], h);
    if (i + 1 < mlp.layers.size()) h = relu(h);
  }
  return h;
}

void collect_params(const LinearLayer& layer, std::vector<Tensor>& out) {
  out.push_back(layer.weight);
  out.push_back(layer.bias);
}

void collect_params(const Mlp& mlp, std::vector<Tensor>& out) {
  for (const auto& layer : mlp.layers) collect_params(layer, out);
}

}  // namespace tbsm
