#pragma once

#include <random>
#include <vector>

#include "tbsm/ops.hpp"
#include "tbsm/tensor.hpp"

namespace tbsm {

// y = W x + b, with W stored [out x in].
struct LinearLayer {
  Tensor weight;
  Tensor bias;

  int in_dim() const { return weight.cols(); }
  int out_dim() const { return weight.rows(); }
};

// Weights uniform in (-sqrt(1/fan_in), +sqrt(1/fan_in)), biases zero.
LinearLayer make_linear(int out_dim, int in_dim, std::mt19937_64& rng);

Tensor linear_forward(const LinearLayer& layer, const Tensor& x);

// Plain MLP: ReLU after every layer except the last, which is linear.
struct Mlp {
  std::vector<LinearLayer> layers;
};

Mlp make_mlp(const std::vector<int>& dims, std::mt19937_64& rng);  // dims = {in, h1, ..., out}

Tensor mlp_forward(const Mlp& mlp, const Tensor& x);

// Appends every weight/bias tensor, in layer order.
void collect_params(const LinearLayer& layer, std::vector<Tensor>& out);
void collect_params(const Mlp& mlp, std::vector<Tensor>& out);

}  // namespace tbsm
