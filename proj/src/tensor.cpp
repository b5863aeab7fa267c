#include "tbsm/tensor.hpp"

#include <cmath>
#include <string>

namespace tbsm {

namespace {

int checked_size(const std::vector<int>& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one extent");
  long long n = 1;
  for (int e : shape) {
    if (e <= 0) throw ShapeError("tensor extents must be positive, got " + std::to_string(e));
    n *= e;
  }
  return static_cast<int>(n);
}

}  // namespace

Tensor::Tensor(std::vector<int> shape, std::vector<double> values)
    : impl_(std::make_shared<detail::TensorImpl>()) {
  const int n = checked_size(shape);
  if (static_cast<size_t>(n) != values.size()) {
    throw ShapeError("value count " + std::to_string(values.size()) +
                     " does not match shape product " + std::to_string(n));
  }
  impl_->shape = std::move(shape);
  impl_->values = std::move(values);
}

Tensor Tensor::zeros(const std::vector<int>& shape) { return full(shape, 0.0); }

Tensor Tensor::full(const std::vector<int>& shape, double v) {
  const int n = checked_size(shape);
  return Tensor(shape, std::vector<double>(static_cast<size_t>(n), v));
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::vector(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return Tensor({n}, std::move(v));
}

Tensor Tensor::matrix(int rows, int cols, std::vector<double> v) {
  return Tensor({rows, cols}, std::move(v));
}

int Tensor::rows() const {
  if (rank() != 2) throw ShapeError("rows() on tensor of shape " + shape_str());
  return impl_->shape[0];
}

int Tensor::cols() const {
  if (rank() != 2) throw ShapeError("cols() on tensor of shape " + shape_str());
  return impl_->shape[1];
}

double Tensor::at(int r, int c) const {
  return impl_->values[static_cast<size_t>(r) * cols() + c];
}

double Tensor::value() const {
  if (!is_scalar()) throw ContractError("value() requires a scalar tensor, shape is " + shape_str());
  return impl_->values[0];
}

Tensor Tensor::detached_copy() const {
  return Tensor(impl_->shape, impl_->values);
}

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (size_t i = 0; i < impl_->shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(impl_->shape[i]);
  }
  return s + "]";
}

std::vector<double>& Tape::grad_buf(const Tensor& t) {
  auto it = grads_.find(t.impl());
  if (it == grads_.end()) {
    it = grads_.emplace(t.impl(), std::vector<double>(t.values().size(), 0.0)).first;
  }
  return it->second;
}

bool Tape::has_grad(const Tensor& t) const { return grads_.count(t.impl()) != 0; }

Tensor Tape::grad(const Tensor& t) const {
  auto it = grads_.find(t.impl());
  if (it == grads_.end()) return Tensor::zeros(t.shape());
  return Tensor(t.shape(), it->second);
}

void Tape::backward(const Tensor& loss) {
  if (!loss.is_scalar()) {
    throw ContractError("backward() requires a scalar loss, shape is " + loss.shape_str());
  }
  if (backward_done_) throw ContractError("backward() already run on this tape");
  backward_done_ = true;
  grad_buf(loss)[0] = 1.0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) (*it)(*this);
}

void Tape::reset() {
  records_.clear();
  grads_.clear();
  backward_done_ = false;
}

namespace {
thread_local Tape* g_active_tape = nullptr;
}

Tape* active_tape() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : prev_(g_active_tape) { g_active_tape = &tape; }

TapeScope::~TapeScope() { g_active_tape = prev_; }

TapePause::TapePause() : prev_(g_active_tape) { g_active_tape = nullptr; }

TapePause::~TapePause() { g_active_tape = prev_; }

}  // namespace tbsm
