#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "tbsm/tensor.hpp"

namespace tbsm {

// Threshold below which a vector norm is considered degenerate for
// l2 normalization.
inline constexpr double kNormEpsilon = 1e-12;

// Elementwise binary ops; operand shapes must agree exactly.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

// Elementwise unary ops.
Tensor neg(const Tensor& x);
Tensor scale(const Tensor& x, double c);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);  // 1 / (1 + e^-x)
Tensor tanh_op(const Tensor& x);
Tensor log_op(const Tensor& x);  // requires strictly positive input
Tensor clamp(const Tensor& x, double lo, double hi);

// matmul: [m x k] * [k x p] -> [m x p], or [m x k] * [k] -> [m].
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor dot(const Tensor& u, const Tensor& v);  // 1-D, 1-D -> scalar
Tensor sum(const Tensor& x);                   // -> scalar

// Concatenation along axis: rank-1 tensors along axis 0, or rank-2 tensors
// along axis 0/1. All off-axis extents must agree. The list must be non-empty.
Tensor concat(std::span<const Tensor> tensors, int axis = 0);

// Stacks L n-vectors as the columns of an [n x L] matrix.
Tensor stack_cols(std::span<const Tensor> columns);

Tensor col(const Tensor& m, int j);                         // [n x L] -> [n]
Tensor slice_cols(const Tensor& m, int start, int count);   // [n x L] -> [n x count]
Tensor slice(const Tensor& v, int start, int count);        // 1-D range

// Projects v onto the unit sphere. Throws DegenerateVectorError when
// ||v|| <= kNormEpsilon.
Tensor l2_normalize(const Tensor& v);

// Like l2_normalize, but a degenerate input is replaced by the constant unit
// vector e1 (no gradient flows) and the process-wide counter is incremented.
Tensor l2_normalize_or_e1(const Tensor& v);

std::int64_t degenerate_normalize_count();
void reset_degenerate_normalize_count();

// Embedding row lookup: [R x d] table, row index -> [d]. table_name is used
// in the out-of-bounds error message.
Tensor lookup(const Tensor& table, std::int64_t row, const char* table_name);

Tensor softmax(const Tensor& v);  // 1-D, max-shifted

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;  // index into the parameter list (0 for single-input checks)
  std::size_t worst_index = 0;  // flat coordinate within that tensor
  bool nan_detected = false;
};

// Central-difference gradient check of a scalar-valued tensor function.
// Coordinate errors |analytic - cd| are scaled by the largest gradient
// magnitude in the call, max(|analytic|, |cd|, 1e-12) over all coordinates,
// so that coordinates below the finite-difference noise floor cannot raise
// false alarms while genuine backward bugs (errors on the scale of the
// gradient) stay visible.
GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                           double h = 1e-6);

// Same, for a nullary function reading a list of parameter tensors (perturbed
// in place for the numeric passes).
GradCheckReport grad_check_params(const std::function<Tensor()>& f, std::span<const Tensor> params,
                                  double h = 1e-6);

}  // namespace tbsm
