#pragma once

#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "tbsm/errors.hpp"

namespace tbsm {

class Tape;

namespace detail {
struct TensorImpl {
  std::vector<int> shape;
  std::vector<double> values;
  bool requires_grad = false;
};
}  // namespace detail

// Dense double-precision tensor, row-major. A Tensor is a shared handle;
// copies alias the same storage. Scalars are shape {1}.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::vector<int> shape, std::vector<double> values);

  static Tensor zeros(const std::vector<int>& shape);
  static Tensor full(const std::vector<int>& shape, double v);
  static Tensor scalar(double v);
  static Tensor vector(std::vector<double> v);
  static Tensor matrix(int rows, int cols, std::vector<double> v);

  bool defined() const { return impl_ != nullptr; }
  const std::vector<int>& shape() const { return impl_->shape; }
  int rank() const { return static_cast<int>(impl_->shape.size()); }
  int size() const { return static_cast<int>(impl_->values.size()); }
  bool is_scalar() const { return size() == 1; }

  // 2-D accessors; throw ShapeError on rank mismatch.
  int rows() const;
  int cols() const;
  double at(int r, int c) const;

  double value() const;  // scalar only
  double operator[](int i) const { return impl_->values[static_cast<size_t>(i)]; }

  std::vector<double>& values() { return impl_->values; }
  const std::vector<double>& values() const { return impl_->values; }

  bool requires_grad() const { return impl_ && impl_->requires_grad; }
  Tensor& set_requires_grad(bool v) {
    impl_->requires_grad = v;
    return *this;
  }

  // Deep copy with requires_grad cleared; detached from any tape history.
  Tensor detached_copy() const;

  std::string shape_str() const;

  detail::TensorImpl* impl() const { return impl_.get(); }
  const std::shared_ptr<detail::TensorImpl>& impl_ptr() const { return impl_; }

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

using BackwardFn = std::function<void(Tape&)>;

// Linear record of executed operations plus gradient accumulators keyed by
// tensor identity. backward() replays records in exact reverse execution
// order, so repeated use of a tensor accumulates gradients additively and
// deterministically. Single-writer: one tape per forward pass per thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(BackwardFn fn) { records_.push_back(std::move(fn)); }

  // Accumulator for t, zero-initialized at t's shape on first access.
  std::vector<double>& grad_buf(const Tensor& t);

  bool has_grad(const Tensor& t) const;

  // Gradient of the last backward() w.r.t. t; zeros if t never received one.
  Tensor grad(const Tensor& t) const;

  // Seeds dLoss/dLoss = 1 and replays the tape backwards. The loss must be a
  // scalar recorded on this tape (or a requires_grad leaf).
  void backward(const Tensor& loss);

  std::size_t num_records() const { return records_.size(); }
  void reset();

 private:
  std::vector<BackwardFn> records_;
  std::unordered_map<const detail::TensorImpl*, std::vector<double>> grads_;
  bool backward_done_ = false;
};

// Thread-local active tape. Operations record themselves onto the active tape
// when at least one input requires gradients; with no active tape they run
// as plain (untracked) numerics.
Tape* active_tape();

// RAII activation of a tape on the current thread. Scopes nest.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* prev_;
};

// RAII suspension of recording: active_tape() is null within the scope.
class TapePause {
 public:
  TapePause();
  ~TapePause();
  TapePause(const TapePause&) = delete;
  TapePause& operator=(const TapePause&) = delete;

 private:
  Tape* prev_;
};

}  // namespace tbsm
