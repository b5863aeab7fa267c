#include "tbsm/ops.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace tbsm {

namespace {

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": operand shapes do not agree: " + a.shape_str() +
                     " vs " + b.shape_str());
  }
}

bool should_track(const Tensor& a) { return active_tape() && a.requires_grad(); }
bool should_track(const Tensor& a, const Tensor& b) {
  return active_tape() && (a.requires_grad() || b.requires_grad());
}

Tensor make_result(std::vector<int> shape, std::vector<double> vals, bool track) {
  Tensor y(std::move(shape), std::move(vals));
  if (track) y.set_requires_grad(true);
  return y;
}

std::atomic<std::int64_t> g_degenerate_count{0};

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape("add", a, b);
  const int n = a.size();
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = a[i] + b[i];
  const bool track = should_track(a, b);
  Tensor y = make_result(a.shape(), std::move(out), track);
  if (track) {
    active_tape()->record([a, b, y, n](Tape& t) {
      const auto& g = t.grad_buf(y);
      if (a.requires_grad()) {
        auto& da = t.grad_buf(a);
        for (int i = 0; i < n; ++i) da[i] += g[i];
      }
      if (b.requires_grad()) {
        auto& db = t.grad_buf(b);
        for (int i = 0; i < n; ++i) db[i] += g[i];
      }
    });
  }
  return y;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape("sub", a, b);
  const int n = a.size();
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = a[i] - b[i];
  const bool track = should_track(a, b);
  Tensor y = make_result(a.shape(), std::move(out), track);
  if (track) {
    active_tape()->record([a, b, y, n](Tape& t) {
      const auto& g = t.grad_buf(y);
      if (a.requires_grad()) {
        auto& da = t.grad_buf(a);
        for (int i = 0; i < n; ++i) da[i] += g[i];
      }
      if (b.requires_grad()) {
        auto& db = t.grad_buf(b);
        for (int i = 0; i < n; ++i) db[i] -= g[i];
      }
    });
  }
  return y;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape("mul", a, b);
  const int n = a.size();
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = a[i] * b[i];
  const bool track = should_track(a, b);
  Tensor y = make_result(a.shape(), std::move(out), track);
  if (track) {
    active_tape()->record([a, b, y, n](Tape& t) {
      const auto& g = t.grad_buf(y);
      if (a.requires_grad()) {
        auto& da = t.grad_buf(a);
        for (int i = 0; i < n; ++i) da[i] += g[i] * b[i];
      }
      if (b.requires_grad()) {
        auto& db = t.grad_buf(b);
        for (int i = 0; i < n; ++i) db[i] += g[i] * a[i];
      }
    });
  }
  return y;
}

Tensor neg(const Tensor& x) { return scale(x, -1.0); }

Tensor scale(const Tensor& x, double c) {
  const int n = x.size();
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = c * x[i];
  const bool track = should_track(x);
  Tensor y = make_result(x.shape(), std::move(out), track);
  if (track) {
    active_tape()->record([x, y, c, n](Tape& t) {
      const auto& g = t.grad_buf(y);
      auto& dx = t.grad_buf(x);
      for (int i = 0; i < n; ++i) dx[i] += c * g[i];
    });
  }
  return y;
}

Tensor relu(const Tensor& x) {
  const int n = x.size();
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  const bool track = should_track(x);
  Tensor y = make_result(x.shape(), std::move(out), track);
  if (track) {
    active_tape()->record([x, y, n](Tape& t) {
      const auto& g = t.grad_buf(y);
      auto& dx = t.grad_buf(x);
      for (int i = 0; i < n; ++i) {
        if (x[i] > 0.0) dx[i] += g[i];
      }
    });
  }
  return y;
}

Tensor sigmoid(const Tensor& x) {
  const int n = x.size();
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double v = x[i];
    if (v >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out[i] = e / (1.0 + e);
    }
  }
  const bool track = should_track(x);
  Tensor y = make_result(x.shape(), std::move(out), track);
  if (track) {
    active_tape()->record([x, y, n](Tape& t) {
      const auto& g = t.grad_buf(y);
      auto& dx = t.grad_buf(x);
      for (int i = 0; i < n; ++i) dx[i] += g[i] * y[i] * (1.0 - y[i]);
    });
  }
  return y;
}

Tensor tanh_op(const Tensor& x) {
  const int n = x.size();
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = std::tanh(x[i]);
  const bool track = should_track(x);
  Tensor y = make_result(x.shape(), std::move(out), track);
  if (track) {
    active_tape()->record([x, y, n](Tape& t) {
      const auto& g = t.grad_buf(y);
      auto& dx = t.grad_buf(x);
      for (int i = 0; i < n; ++i) dx[i] += g[i] * (1.0 - y[i] * y[i]);
    });
  }
  return y;
}

Tensor log_op(const Tensor& x) {
  const int n = x.size();
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (!(x[i] > 0.0)) {
      throw DomainError("log: input must be strictly positive, got " + std::to_string(x[i]) +
                        " at index " + std::to_string(i));
    }
    out[i] = std::log(x[i]);
  }
  const bool track = should_track(x);
  Tensor y = make_result(x.shape(), std::move(out), track);
  if (track) {
    active_tape()->record([x, y, n](Tape& t) {
      const auto& g = t.grad_buf(y);
      auto& dx = t.grad_buf(x);
      for (int i = 0; i < n; ++i) dx[i] += g[i] / x[i];
    });
  }
  return y;
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  if (lo > hi) throw ContractError("clamp: lo > hi");
  const int n = x.size();
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = std::min(std::max(x[i], lo), hi);
  const bool track = should_track(x);
  Tensor y = make_result(x.shape(), std::move(out), track);
  if (track) {
    // Zero subgradient at and beyond the clamp boundary.
    active_tape()->record([x, y, lo, hi, n](Tape& t) {
      const auto& g = t.grad_buf(y);
      auto& dx = t.grad_buf(x);
      for (int i = 0; i < n; ++i) {
        if (x[i] > lo && x[i] < hi) dx[i] += g[i];
      }
    });
  }
  return y;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || (b.rank() != 2 && b.rank() != 1)) {
    throw ShapeError("matmul: expects [m x k] by [k x p] or [k], got " + a.shape_str() + " and " +
                     b.shape_str());
  }
  const int m = a.shape()[0];
  const int k = a.shape()[1];
  const bool vec = b.rank() == 1;
  const int kb = b.shape()[0];
  const int p = vec ? 1 : b.shape()[1];
  if (k != kb) {
    throw ShapeError("matmul: inner dimensions do not agree: " + a.shape_str() + " vs " +
                     b.shape_str());
  }
  std::vector<double> out(static_cast<size_t>(m) * p, 0.0);
  const auto& av = a.values();
  const auto& bv = b.values();
  for (int i = 0; i < m; ++i) {
    for (int l = 0; l < k; ++l) {
      const double ail = av[static_cast<size_t>(i) * k + l];
      if (ail == 0.0) continue;
      const double* brow = &bv[static_cast<size_t>(l) * p];
      double* orow = &out[static_cast<size_t>(i) * p];
      for (int j = 0; j < p; ++j) orow[j] += ail * brow[j];
    }
  }
  const bool track = should_track(a, b);
  Tensor y = make_result(vec ? std::vector<int>{m} : std::vector<int>{m, p}, std::move(out), track);
  if (track) {
    active_tape()->record([a, b, y, m, k, p](Tape& t) {
      const auto& g = t.grad_buf(y);
      const auto& av = a.values();
      const auto& bv = b.values();
      if (a.requires_grad()) {
        auto& da = t.grad_buf(a);  // dA = g * B^T
        for (int i = 0; i < m; ++i) {
          for (int l = 0; l < k; ++l) {
            double s = 0.0;
            for (int j = 0; j < p; ++j) {
              s += g[static_cast<size_t>(i) * p + j] * bv[static_cast<size_t>(l) * p + j];
            }
            da[static_cast<size_t>(i) * k + l] += s;
          }
        }
      }
      if (b.requires_grad()) {
        auto& db = t.grad_buf(b);  // dB = A^T * g
        for (int l = 0; l < k; ++l) {
          for (int j = 0; j < p; ++j) {
            double s = 0.0;
            for (int i = 0; i < m; ++i) {
              s += av[static_cast<size_t>(i) * k + l] * g[static_cast<size_t>(i) * p + j];
            }
            db[static_cast<size_t>(l) * p + j] += s;
          }
        }
      }
    });
  }
  return y;
}

Tensor dot(const Tensor& u, const Tensor& v) {
  if (u.rank() != 1 || v.rank() != 1) {
    throw ShapeError("dot: expects two 1-D tensors, got " + u.shape_str() + " and " + v.shape_str());
  }
  check_same_shape("dot", u, v);
  const int n = u.size();
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += u[i] * v[i];
  const bool track = should_track(u, v);
  Tensor y = make_result({1}, {s}, track);
  if (track) {
    active_tape()->record([u, v, y, n](Tape& t) {
      const double g = t.grad_buf(y)[0];
      if (u.requires_grad()) {
        auto& du = t.grad_buf(u);
        for (int i = 0; i < n; ++i) du[i] += g * v[i];
      }
      if (v.requires_grad()) {
        auto& dv = t.grad_buf(v);
        for (int i = 0; i < n; ++i) dv[i] += g * u[i];
      }
    });
  }
  return y;
}

Tensor sum(const Tensor& x) {
  const int n = x.size();
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += x[i];
  const bool track = should_track(x);
  Tensor y = make_result({1}, {s}, track);
  if (track) {
    active_tape()->record([x, y, n](Tape& t) {
      const double g = t.grad_buf(y)[0];
      auto& dx = t.grad_buf(x);
      for (int i = 0; i < n; ++i) dx[i] += g;
    });
  }
  return y;
}

Tensor concat(std::span<const Tensor> tensors, int axis) {
  if (tensors.empty()) throw ContractError("concat: empty tensor list");
  const int rank = tensors[0].rank();
  if (rank == 1) {
    if (axis != 0) throw ShapeError("concat: axis must be 0 for 1-D tensors");
    int total = 0;
    for (const auto& t : tensors) {
      if (t.rank() != 1) {
        throw ShapeError("concat: mixed ranks: " + tensors[0].shape_str() + " vs " + t.shape_str());
      }
      total += t.size();
    }
    std::vector<double> out;
    out.reserve(static_cast<size_t>(total));
    bool track = false;
    for (const auto& t : tensors) {
      out.insert(out.end(), t.values().begin(), t.values().end());
      track = track || t.requires_grad();
    }
    track = track && active_tape();
    Tensor y = make_result({total}, std::move(out), track);
    if (track) {
      std::vector<Tensor> parts(tensors.begin(), tensors.end());
      active_tape()->record([parts, y](Tape& t) {
        const auto& g = t.grad_buf(y);
        size_t off = 0;
        for (const auto& p : parts) {
          if (p.requires_grad()) {
            auto& dp = t.grad_buf(p);
            for (int i = 0; i < p.size(); ++i) dp[i] += g[off + i];
          }
          off += static_cast<size_t>(p.size());
        }
      });
    }
    return y;
  }
  if (rank != 2 || (axis != 0 && axis != 1)) {
    throw ShapeError("concat: only 1-D (axis 0) and 2-D (axis 0/1) are supported");
  }
  const int off_axis = 1 - axis;
  const int off_extent = tensors[0].shape()[off_axis];
  int total = 0;
  bool track = false;
  for (const auto& t : tensors) {
    if (t.rank() != 2 || t.shape()[off_axis] != off_extent) {
      throw ShapeError("concat: off-axis extents do not agree: " + tensors[0].shape_str() + " vs " +
                       t.shape_str());
    }
    total += t.shape()[axis];
    track = track || t.requires_grad();
  }
  track = track && active_tape();
  const int rows = axis == 0 ? total : off_extent;
  const int cols = axis == 0 ? off_extent : total;
  std::vector<double> out(static_cast<size_t>(rows) * cols);
  int pos = 0;
  for (const auto& t : tensors) {
    const int tr = t.shape()[0], tc = t.shape()[1];
    for (int i = 0; i < tr; ++i) {
      for (int j = 0; j < tc; ++j) {
        const int r = axis == 0 ? pos + i : i;
        const int c = axis == 0 ? j : pos + j;
        out[static_cast<size_t>(r) * cols + c] = t.at(i, j);
      }
    }
    pos += t.shape()[axis];
  }
  Tensor y = make_result({rows, cols}, std::move(out), track);
  if (track) {
    std::vector<Tensor> parts(tensors.begin(), tensors.end());
    active_tape()->record([parts, y, axis, cols](Tape& t) {
      const auto& g = t.grad_buf(y);
      int pos = 0;
      for (const auto& p : parts) {
        const int tr = p.shape()[0], tc = p.shape()[1];
        if (p.requires_grad()) {
          auto& dp = t.grad_buf(p);
          for (int i = 0; i < tr; ++i) {
            for (int j = 0; j < tc; ++j) {
              const int r = axis == 0 ? pos + i : i;
              const int c = axis == 0 ? j : pos + j;
              dp[static_cast<size_t>(i) * tc + j] += g[static_cast<size_t>(r) * cols + c];
            }
          }
        }
        pos += p.shape()[axis];
      }
    });
  }
  return y;
}

Tensor stack_cols(std::span<const Tensor> columns) {
  if (columns.empty()) throw ContractError("stack_cols: empty column list");
  const int n = columns[0].size();
  const int L = static_cast<int>(columns.size());
  bool track = false;
  for (const auto& c : columns) {
    if (c.rank() != 1 || c.size() != n) {
      throw ShapeError("stack_cols: column shapes do not agree: " + columns[0].shape_str() +
                       " vs " + c.shape_str());
    }
    track = track || c.requires_grad();
  }
  track = track && active_tape();
  std::vector<double> out(static_cast<size_t>(n) * L);
  for (int j = 0; j < L; ++j) {
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i) * L + j] = columns[j][i];
  }
  Tensor y = make_result({n, L}, std::move(out), track);
  if (track) {
    std::vector<Tensor> parts(columns.begin(), columns.end());
    active_tape()->record([parts, y, n, L](Tape& t) {
      const auto& g = t.grad_buf(y);
      for (int j = 0; j < L; ++j) {
        if (!parts[j].requires_grad()) continue;
        auto& dc = t.grad_buf(parts[j]);
        for (int i = 0; i < n; ++i) dc[i] += g[static_cast<size_t>(i) * L + j];
      }
    });
  }
  return y;
}

Tensor col(const Tensor& m, int j) {
  const int rows = m.rows(), cols = m.cols();
  if (j < 0 || j >= cols) {
    throw ShapeError("col: index " + std::to_string(j) + " out of range for " + m.shape_str());
  }
  std::vector<double> out(static_cast<size_t>(rows));
  for (int i = 0; i < rows; ++i) out[i] = m.at(i, j);
  const bool track = should_track(m);
  Tensor y = make_result({rows}, std::move(out), track);
  if (track) {
    active_tape()->record([m, y, j, rows, cols](Tape& t) {
      const auto& g = t.grad_buf(y);
      auto& dm = t.grad_buf(m);
      for (int i = 0; i < rows; ++i) dm[static_cast<size_t>(i) * cols + j] += g[i];
    });
  }
  return y;
}

Tensor slice_cols(const Tensor& m, int start, int count) {
  const int rows = m.rows(), cols = m.cols();
  if (start < 0 || count <= 0 || start + count > cols) {
    throw ShapeError("slice_cols: range [" + std::to_string(start) + ", " +
                     std::to_string(start + count) + ") out of bounds for " + m.shape_str());
  }
  std::vector<double> out(static_cast<size_t>(rows) * count);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < count; ++j) out[static_cast<size_t>(i) * count + j] = m.at(i, start + j);
  }
  const bool track = should_track(m);
  Tensor y = make_result({rows, count}, std::move(out), track);
  if (track) {
    active_tape()->record([m, y, start, count, rows, cols](Tape& t) {
      const auto& g = t.grad_buf(y);
      auto& dm = t.grad_buf(m);
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < count; ++j) {
          dm[static_cast<size_t>(i) * cols + start + j] += g[static_cast<size_t>(i) * count + j];
        }
      }
    });
  }
  return y;
}

Tensor slice(const Tensor& v, int start, int count) {
  if (v.rank() != 1) throw ShapeError("slice: expects a 1-D tensor, got " + v.shape_str());
  if (start < 0 || count <= 0 || start + count > v.size()) {
    throw ShapeError("slice: range [" + std::to_string(start) + ", " +
                     std::to_string(start + count) + ") out of bounds for " + v.shape_str());
  }
  std::vector<double> out(v.values().begin() + start, v.values().begin() + start + count);
  const bool track = should_track(v);
  Tensor y = make_result({count}, std::move(out), track);
  if (track) {
    active_tape()->record([v, y, start, count](Tape& t) {
      const auto& g = t.grad_buf(y);
      auto& dv = t.grad_buf(v);
      for (int i = 0; i < count; ++i) dv[start + i] += g[i];
    });
  }
  return y;
}

namespace {

double norm2(const Tensor& v) {
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

}  // namespace

Tensor l2_normalize(const Tensor& v) {
  if (v.rank() != 1) throw ShapeError("l2_normalize: expects a 1-D tensor, got " + v.shape_str());
  const double r = norm2(v);
  if (!(r > kNormEpsilon)) {
    throw DegenerateVectorError("l2_normalize: vector norm " + std::to_string(r) +
                                " is at or below threshold");
  }
  const int n = v.size();
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = v[i] / r;
  const bool track = should_track(v);
  Tensor y = make_result({n}, std::move(out), track);
  if (track) {
    // d(v/r)/dv applied to g:  (g - y (g . y)) / r
    active_tape()->record([v, y, r, n](Tape& t) {
      const auto& g = t.grad_buf(y);
      auto& dv = t.grad_buf(v);
      double gy = 0.0;
      for (int i = 0; i < n; ++i) gy += g[i] * y[i];
      for (int i = 0; i < n; ++i) dv[i] += (g[i] - y[i] * gy) / r;
    });
  }
  return y;
}

Tensor l2_normalize_or_e1(const Tensor& v) {
  if (v.rank() != 1) throw ShapeError("l2_normalize: expects a 1-D tensor, got " + v.shape_str());
  if (!(norm2(v) > kNormEpsilon)) {
    g_degenerate_count.fetch_add(1, std::memory_order_relaxed);
    Tensor e1 = Tensor::zeros(v.shape());
    e1.values()[0] = 1.0;
    return e1;
  }
  return l2_normalize(v);
}

std::int64_t degenerate_normalize_count() {
  return g_degenerate_count.load(std::memory_order_relaxed);
}

void reset_degenerate_normalize_count() { g_degenerate_count.store(0, std::memory_order_relaxed); }

Tensor lookup(const Tensor& table, std::int64_t row, const char* table_name) {
  const int rows = table.rows(), d = table.cols();
  if (row < 0 || row >= rows) {
    throw LookupError(std::string(table_name) + ": index " + std::to_string(row) +
                      " out of bounds for table of " + std::to_string(rows) + " rows");
  }
  std::vector<double> out(table.values().begin() + row * d, table.values().begin() + (row + 1) * d);
  const bool track = should_track(table);
  Tensor y = make_result({d}, std::move(out), track);
  if (track) {
    active_tape()->record([table, y, row, d](Tape& t) {
      const auto& g = t.grad_buf(y);
      auto& dt = t.grad_buf(table);
      for (int i = 0; i < d; ++i) dt[static_cast<size_t>(row) * d + i] += g[i];
    });
  }
  return y;
}

Tensor softmax(const Tensor& v) {
  if (v.rank() != 1) throw ShapeError("softmax: expects a 1-D tensor, got " + v.shape_str());
  const int n = v.size();
  double mx = v[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, v[i]);
  std::vector<double> out(static_cast<size_t>(n));
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    out[i] = std::exp(v[i] - mx);
    z += out[i];
  }
  for (int i = 0; i < n; ++i) out[i] /= z;
  const bool track = should_track(v);
  Tensor y = make_result({n}, std::move(out), track);
  if (track) {
    active_tape()->record([v, y, n](Tape& t) {
      const auto& g = t.grad_buf(y);
      auto& dv = t.grad_buf(v);
      double gy = 0.0;
      for (int i = 0; i < n; ++i) gy += g[i] * y[i];
      for (int i = 0; i < n; ++i) dv[i] += y[i] * (g[i] - gy);
    });
  }
  return y;
}

namespace {

constexpr double kRelFloor = 1e-12;

bool bad(double x) { return std::isnan(x) || std::isinf(x); }

// Coordinate differences are scaled by the largest gradient magnitude seen
// anywhere in the call (floored at kRelFloor). Per-coordinate denominators
// would flag coordinates whose true gradient sits below the central-difference
// noise floor (about |f|*eps/h), where no finite-difference scheme in double
// precision can confirm agreement; scaling by the call-wide magnitude keeps
// genuine backward bugs visible (their error is on the scale of the gradient
// itself) without those false alarms.
GradCheckReport compare_grads(const std::vector<std::vector<double>>& analytic,
                              const std::vector<std::vector<double>>& central) {
  GradCheckReport rep;
  double scale = kRelFloor;
  for (size_t p = 0; p < analytic.size(); ++p) {
    for (size_t i = 0; i < analytic[p].size(); ++i) {
      const double a = analytic[p][i];
      const double cd = central[p][i];
      if (bad(a) || bad(cd)) {
        rep.nan_detected = true;
        rep.max_rel_error = std::numeric_limits<double>::infinity();
        rep.worst_param = p;
        rep.worst_index = i;
        return rep;
      }
      scale = std::max({scale, std::abs(a), std::abs(cd)});
    }
  }
  for (size_t p = 0; p < analytic.size(); ++p) {
    for (size_t i = 0; i < analytic[p].size(); ++i) {
      const double rel = std::abs(analytic[p][i] - central[p][i]) / scale;
      if (rel > rep.max_rel_error) {
        rep.max_rel_error = rel;
        rep.worst_param = p;
        rep.worst_index = i;
      }
    }
  }
  return rep;
}

}  // namespace

GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                           double h) {
  Tensor xv = x.detached_copy();
  xv.set_requires_grad(true);
  Tape tape;
  std::vector<double> analytic;
  {
    TapeScope scope(tape);
    Tensor y = f(xv);
    if (!y.is_scalar()) throw ContractError("grad_check: f must return a scalar");
    tape.backward(y);
    analytic = tape.grad_buf(xv);
  }
  Tensor xn = x.detached_copy();
  TapePause pause;
  std::vector<double> central(x.size());
  for (int i = 0; i < x.size(); ++i) {
    const double orig = xn.values()[i];
    xn.values()[i] = orig + h;
    const double fp = f(xn).value();
    xn.values()[i] = orig - h;
    const double fm = f(xn).value();
    xn.values()[i] = orig;
    central[i] = (fp - fm) / (2.0 * h);
  }
  return compare_grads({analytic}, {central});
}

GradCheckReport grad_check_params(const std::function<Tensor()>& f, std::span<const Tensor> params,
                                  double h) {
  std::vector<std::vector<double>> analytic(params.size());
  {
    Tape tape;
    TapeScope scope(tape);
    Tensor y = f();
    if (!y.is_scalar()) throw ContractError("grad_check_params: f must return a scalar");
    tape.backward(y);
    for (size_t p = 0; p < params.size(); ++p) analytic[p] = tape.grad_buf(params[p]);
  }
  TapePause pause;
  std::vector<std::vector<double>> central(params.size());
  for (size_t p = 0; p < params.size(); ++p) {
    Tensor param = params[p];
    central[p].resize(param.size());
    for (int i = 0; i < param.size(); ++i) {
      const double orig = param.values()[i];
      param.values()[i] = orig + h;
      const double fp = f().value();
      param.values()[i] = orig - h;
      const double fm = f().value();
      param.values()[i] = orig;
      central[p][i] = (fp - fm) / (2.0 * h);
    }
  }
  return compare_grads(analytic, central);
}

}  // namespace tbsm
