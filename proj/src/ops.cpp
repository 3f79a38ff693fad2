// Differentiable tensor operations.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Core>

#include "equiset/tensor.hpp"

namespace equiset {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

namespace {

Tape* tape_of(std::initializer_list<const Tensor*> inputs) {
  Tape* tape = nullptr;
  for (const Tensor* t : inputs) {
    if (!t->tracked()) continue;
    if (tape != nullptr && tape != t->tape()) {
      throw DimensionError("operands are recorded on different tapes");
    }
    tape = t->tape();
  }
  return tape;
}

Tensor finish(Tape* tape, Shape shape, std::vector<double> data, Tape::Backward backward) {
  if (tape == nullptr) return Tensor(std::move(shape), std::move(data));
  return tape->record(std::move(shape), std::move(data), std::move(backward));
}

std::vector<std::size_t> contiguous_strides(const Shape& s) {
  std::vector<std::size_t> strides(s.size());
  std::size_t acc = 1;
  for (std::size_t i = s.size(); i-- > 0;) {
    strides[i] = acc;
    acc *= s[i];
  }
  return strides;
}

struct BroadcastPlan {
  Shape out;
  std::vector<std::size_t> stride_a;
  std::vector<std::size_t> stride_b;
  bool same = false;
};

BroadcastPlan plan_broadcast(const Shape& a, const Shape& b) {
  BroadcastPlan p;
  p.same = a == b;
  const std::size_t rank = std::max(a.size(), b.size());
  p.out.assign(rank, 1);
  p.stride_a.assign(rank, 0);
  p.stride_b.assign(rank, 0);
  const auto sa = contiguous_strides(a);
  const auto sb = contiguous_strides(b);
  for (std::size_t k = 0; k < rank; ++k) {
    const std::size_t axis = rank - 1 - k;
    const bool has_a = k < a.size();
    const bool has_b = k < b.size();
    const std::size_t ea = has_a ? a[a.size() - 1 - k] : 1;
    const std::size_t eb = has_b ? b[b.size() - 1 - k] : 1;
    if (ea != eb && ea != 1 && eb != 1) {
      throw DimensionError("shapes " + shape_str(a) + " and " + shape_str(b) +
                           " are not broadcastable");
    }
    p.out[axis] = std::max(ea, eb);
    if (has_a && ea != 1) p.stride_a[axis] = sa[a.size() - 1 - k];
    if (has_b && eb != 1) p.stride_b[axis] = sb[b.size() - 1 - k];
  }
  return p;
}

// Calls f(out_index, a_index, b_index) for every output element.
template <class F>
void for_each_broadcast(const BroadcastPlan& p, F&& f) {
  const std::size_t n = numel(p.out);
  if (p.same) {
    for (std::size_t i = 0; i < n; ++i) f(i, i, i);
    return;
  }
  const std::size_t rank = p.out.size();
  std::vector<std::size_t> idx(rank, 0);
  std::size_t ia = 0;
  std::size_t ib = 0;
  const std::size_t inner = rank ? p.out[rank - 1] : 1;
  const std::size_t ia_step = rank ? p.stride_a[rank - 1] : 0;
  const std::size_t ib_step = rank ? p.stride_b[rank - 1] : 0;
  for (std::size_t o = 0; o < n; o += inner) {
    for (std::size_t t = 0; t < inner; ++t) f(o + t, ia + t * ia_step, ib + t * ib_step);
    for (std::size_t d = rank - 1; d-- > 0;) {
      ++idx[d];
      ia += p.stride_a[d];
      ib += p.stride_b[d];
      if (idx[d] < p.out[d]) break;
      ia -= p.stride_a[d] * p.out[d];
      ib -= p.stride_b[d] * p.out[d];
      idx[d] = 0;
    }
  }
}

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t len = 1;
  std::size_t inner = 1;
};

AxisSplit split_at(const Shape& s, std::size_t axis) {
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(s));
  }
  AxisSplit a;
  for (std::size_t i = 0; i < axis; ++i) a.outer *= s[i];
  a.len = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) a.inner *= s[i];
  return a;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  const BroadcastPlan p = plan_broadcast(a.shape(), b.shape());
  std::vector<double> out(numel(p.out));
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  for_each_broadcast(p, [&](std::size_t o, std::size_t i, std::size_t j) { out[o] = pa[i] + pb[j]; });
  return finish(tape_of({&a, &b}), p.out, std::move(out),
                [a, b, p](Tape& tape, std::span<const double> g) {
                  if (a.tracked()) {
                    auto& ga = tape.grad_buffer(a.node());
                    for_each_broadcast(p, [&](std::size_t o, std::size_t i, std::size_t) { ga[i] += g[o]; });
                  }
                  if (b.tracked()) {
                    auto& gb = tape.grad_buffer(b.node());
                    for_each_broadcast(p, [&](std::size_t o, std::size_t, std::size_t j) { gb[j] += g[o]; });
                  }
                });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  const BroadcastPlan p = plan_broadcast(a.shape(), b.shape());
  std::vector<double> out(numel(p.out));
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  for_each_broadcast(p, [&](std::size_t o, std::size_t i, std::size_t j) { out[o] = pa[i] - pb[j]; });
  return finish(tape_of({&a, &b}), p.out, std::move(out),
                [a, b, p](Tape& tape, std::span<const double> g) {
                  if (a.tracked()) {
                    auto& ga = tape.grad_buffer(a.node());
                    for_each_broadcast(p, [&](std::size_t o, std::size_t i, std::size_t) { ga[i] += g[o]; });
                  }
                  if (b.tracked()) {
                    auto& gb = tape.grad_buffer(b.node());
                    for_each_broadcast(p, [&](std::size_t o, std::size_t, std::size_t j) { gb[j] -= g[o]; });
                  }
                });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const BroadcastPlan p = plan_broadcast(a.shape(), b.shape());
  std::vector<double> out(numel(p.out));
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  for_each_broadcast(p, [&](std::size_t o, std::size_t i, std::size_t j) { out[o] = pa[i] * pb[j]; });
  return finish(tape_of({&a, &b}), p.out, std::move(out),
                [a, b, p](Tape& tape, std::span<const double> g) {
                  const double* pa = a.data().data();
                  const double* pb = b.data().data();
                  if (a.tracked()) {
                    auto& ga = tape.grad_buffer(a.node());
                    for_each_broadcast(p, [&](std::size_t o, std::size_t i, std::size_t j) {
                      ga[i] += g[o] * pb[j];
                    });
                  }
                  if (b.tracked()) {
                    auto& gb = tape.grad_buffer(b.node());
                    for_each_broadcast(p, [&](std::size_t o, std::size_t i, std::size_t j) {
                      gb[j] += g[o] * pa[i];
                    });
                  }
                });
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.values());
  for (double& v : out) v *= s;
  return finish(tape_of({&a}), a.shape(), std::move(out), [a, s](Tape& tape, std::span<const double> g) {
    auto& ga = tape.grad_buffer(a.node());
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  });
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.values());
  for (double& v : out) v = v <= 0.0 ? 0.0 : v;  // NaN passes through
  return finish(tape_of({&a}), a.shape(), std::move(out), [a](Tape& tape, std::span<const double> g) {
    auto& ga = tape.grad_buffer(a.node());
    const auto x = a.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[i] > 0.0) ga[i] += g[i];
    }
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  const auto m = static_cast<Eigen::Index>(a.dim(0));
  const auto k = static_cast<Eigen::Index>(a.dim(1));
  const auto n = static_cast<Eigen::Index>(b.dim(1));
  std::vector<double> out(static_cast<std::size_t>(m * n));
  RowMap(out.data(), m, n).noalias() = ConstRowMap(a.data().data(), m, k) * ConstRowMap(b.data().data(), k, n);
  return finish(tape_of({&a, &b}), {a.dim(0), b.dim(1)}, std::move(out),
                [a, b, m, k, n](Tape& tape, std::span<const double> g) {
                  const ConstRowMap gm(g.data(), m, n);
                  if (a.tracked()) {
                    RowMap(tape.grad_buffer(a.node()).data(), m, k).noalias() +=
                        gm * ConstRowMap(b.data().data(), k, n).transpose();
                  }
                  if (b.tracked()) {
                    RowMap(tape.grad_buffer(b.node()).data(), k, n).noalias() +=
                        ConstRowMap(a.data().data(), m, k).transpose() * gm;
                  }
                });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (numel(shape) != a.size()) {
    throw DimensionError("reshape " + shape_str(a.shape()) + " -> " + shape_str(shape));
  }
  return finish(tape_of({&a}), std::move(shape), a.values(), [a](Tape& tape, std::span<const double> g) {
    auto& ga = tape.grad_buffer(a.node());
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis) {
  if (a.rank() != b.rank() || axis >= a.rank()) {
    throw DimensionError("concat: " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
  }
  for (std::size_t i = 0; i < a.rank(); ++i) {
    if (i != axis && a.dim(i) != b.dim(i)) {
      throw DimensionError("concat: " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
    }
  }
  const AxisSplit sa = split_at(a.shape(), axis);
  const AxisSplit sb = split_at(b.shape(), axis);
  Shape out_shape = a.shape();
  out_shape[axis] += b.dim(axis);
  const std::size_t block_a = sa.len * sa.inner;
  const std::size_t block_b = sb.len * sb.inner;
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  for (std::size_t o = 0; o < sa.outer; ++o) {
    out.insert(out.end(), a.data().begin() + static_cast<std::ptrdiff_t>(o * block_a),
               a.data().begin() + static_cast<std::ptrdiff_t>((o + 1) * block_a));
    out.insert(out.end(), b.data().begin() + static_cast<std::ptrdiff_t>(o * block_b),
               b.data().begin() + static_cast<std::ptrdiff_t>((o + 1) * block_b));
  }
  return finish(tape_of({&a, &b}), std::move(out_shape), std::move(out),
                [a, b, outer = sa.outer, block_a, block_b](Tape& tape, std::span<const double> g) {
                  for (std::size_t o = 0; o < outer; ++o) {
                    const double* src = g.data() + o * (block_a + block_b);
                    if (a.tracked()) {
                      auto& ga = tape.grad_buffer(a.node());
                      for (std::size_t i = 0; i < block_a; ++i) ga[o * block_a + i] += src[i];
                    }
                    if (b.tracked()) {
                      auto& gb = tape.grad_buffer(b.node());
                      for (std::size_t i = 0; i < block_b; ++i) gb[o * block_b + i] += src[block_a + i];
                    }
                  }
                });
}

Tensor reduce(ReduceOp op, const Tensor& x, std::size_t axis, bool keepdims) {
  const AxisSplit s = split_at(x.shape(), axis);
  Shape out_shape = x.shape();
  if (keepdims) {
    out_shape[axis] = 1;
  } else {
    out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  }
  const double* px = x.data().data();
  std::vector<double> out(s.outer * s.inner, 0.0);
  std::vector<std::size_t> argmax;
  if (op == ReduceOp::kMax) {
    argmax.assign(out.size(), 0);
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_a = 0;
        for (std::size_t a = 0; a < s.len; ++a) {
          const double v = px[(o * s.len + a) * s.inner + i];
          if (v > best || (std::isnan(v) && !std::isnan(best))) {
            best = v;
            best_a = a;
          }
        }
        out[o * s.inner + i] = best;
        argmax[o * s.inner + i] = best_a;
      }
    }
  } else {
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t a = 0; a < s.len; ++a) {
        const double* src = px + (o * s.len + a) * s.inner;
        double* dst = out.data() + o * s.inner;
        for (std::size_t i = 0; i < s.inner; ++i) dst[i] += src[i];
      }
    }
    if (op == ReduceOp::kMean) {
      for (double& v : out) v /= static_cast<double>(s.len);
    }
  }
  return finish(tape_of({&x}), std::move(out_shape), std::move(out),
                [x, s, op, argmax = std::move(argmax)](Tape& tape, std::span<const double> g) {
                  auto& gx = tape.grad_buffer(x.node());
                  if (op == ReduceOp::kMax) {
                    for (std::size_t o = 0; o < s.outer; ++o)
                      for (std::size_t i = 0; i < s.inner; ++i)
                        gx[(o * s.len + argmax[o * s.inner + i]) * s.inner + i] += g[o * s.inner + i];
                    return;
                  }
                  const double w = op == ReduceOp::kMean ? 1.0 / static_cast<double>(s.len) : 1.0;
                  for (std::size_t o = 0; o < s.outer; ++o)
                    for (std::size_t a = 0; a < s.len; ++a)
                      for (std::size_t i = 0; i < s.inner; ++i)
                        gx[(o * s.len + a) * s.inner + i] += w * g[o * s.inner + i];
                });
}

Tensor reduce_sum(const Tensor& x, std::size_t axis, bool keepdims) {
  return reduce(ReduceOp::kSum, x, axis, keepdims);
}
Tensor reduce_max(const Tensor& x, std::size_t axis, bool keepdims) {
  return reduce(ReduceOp::kMax, x, axis, keepdims);
}
Tensor reduce_mean(const Tensor& x, std::size_t axis, bool keepdims) {
  return reduce(ReduceOp::kMean, x, axis, keepdims);
}

Tensor sum_all(const Tensor& x) { return reduce_sum(reshape(x, {x.size()}), 0); }

namespace {

// Calls fn(first_row, rows, col) for consecutive chunks of the m rows of a
// [m, f, d] signal, col being the [f k, rows d] circular im2col matrix.
template <typename Fn>
void for_conv_chunks(const double* px, std::size_t m, std::size_t f, std::size_t k, std::size_t d,
                     const std::vector<std::size_t>& off, Fn&& fn) {
  const std::size_t chunk = std::max<std::size_t>(1, 4096 / d);
  RowMatrix col;
  for (std::size_t b0 = 0; b0 < m; b0 += chunk) {
    const std::size_t rows = std::min(chunk, m - b0);
    col.resize(static_cast<Eigen::Index>(f * k), static_cast<Eigen::Index>(rows * d));
    for (std::size_t c = 0; c < f; ++c) {
      for (std::size_t j = 0; j < k; ++j) {
        const std::size_t o = off[j];
        const std::size_t split = d - o;
        double* dst = col.data() + (c * k + j) * rows * d;
        for (std::size_t r = 0; r < rows; ++r, dst += d) {
          const double* src = px + ((b0 + r) * f + c) * d;
          std::copy_n(src + o, split, dst);
          std::copy_n(src, o, dst + split);
        }
      }
    }
    fn(b0, rows, col);
  }
}

}  // namespace

Tensor circ_conv1d(const Tensor& x, const Tensor& kernel) {
  if (x.rank() < 2 || kernel.rank() != 3 || kernel.dim(1) != x.dim(x.rank() - 2)) {
    throw DimensionError("circ_conv1d: input " + shape_str(x.shape()) + ", kernel " +
                         shape_str(kernel.shape()));
  }
  const std::size_t d = x.dim(x.rank() - 1);
  const std::size_t f = x.dim(x.rank() - 2);
  const std::size_t fo = kernel.dim(0);
  const std::size_t k = kernel.dim(2);
  if (k > d) {
    throw DimensionError("circ_conv1d: kernel width " + std::to_string(k) +
                         " exceeds signal length " + std::to_string(d));
  }
  const std::size_t m = x.size() / (f * d);
  Shape out_shape = x.shape();
  out_shape[out_shape.size() - 2] = fo;

  // Offset of tap j: out[t] reads x[(t + off[j]) mod d].
  std::vector<std::size_t> off(k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto shift = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(k / 2);
    const auto dd = static_cast<std::ptrdiff_t>(d);
    off[j] = static_cast<std::size_t>(((shift % dd) + dd) % dd);
  }

  // im2col over chunks of rows: col[(c k + j), r d + t] = x[r, c, (t + off[j]) mod d],
  // then one GEMM per chunk against the kernel viewed as [fo, f k].
  std::vector<double> out(m * fo * d);
  const ConstRowMap w(kernel.data().data(), static_cast<Eigen::Index>(fo), static_cast<Eigen::Index>(f * k));
  for_conv_chunks(x.data().data(), m, f, k, d, off, [&](std::size_t b0, std::size_t rows, const RowMatrix& col) {
    const RowMatrix y = w * col;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t co = 0; co < fo; ++co)
        std::copy_n(y.data() + co * rows * d + r * d, d, out.data() + ((b0 + r) * fo + co) * d);
  });
  return finish(tape_of({&x, &kernel}), std::move(out_shape), std::move(out),
                [x, kernel, m, f, fo, k, d, off](Tape& tape, std::span<const double> g) {
                  const auto efo = static_cast<Eigen::Index>(fo);
                  const auto efk = static_cast<Eigen::Index>(f * k);
                  const ConstRowMap w(kernel.data().data(), efo, efk);
                  std::vector<double>* gx = x.tracked() ? &tape.grad_buffer(x.node()) : nullptr;
                  RowMatrix gw = RowMatrix::Zero(efo, efk);
                  for_conv_chunks(x.data().data(), m, f, k, d, off,
                                  [&](std::size_t b0, std::size_t rows, const RowMatrix& col) {
                    RowMatrix gy(efo, static_cast<Eigen::Index>(rows * d));
                    for (std::size_t r = 0; r < rows; ++r)
                      for (std::size_t co = 0; co < fo; ++co)
                        std::copy_n(g.data() + ((b0 + r) * fo + co) * d, d, gy.data() + co * rows * d + r * d);
                    if (kernel.tracked()) gw.noalias() += gy * col.transpose();
                    if (gx) {
                      const RowMatrix gcol = w.transpose() * gy;
                      for (std::size_t r = 0; r < rows; ++r) {
                        for (std::size_t c = 0; c < f; ++c) {
                          double* dst = gx->data() + ((b0 + r) * f + c) * d;
                          for (std::size_t j = 0; j < k; ++j) {
                            const double* src = gcol.data() + (c * k + j) * rows * d + r * d;
                            const std::size_t o = off[j];
                            const std::size_t split = d - o;
                            for (std::size_t t = 0; t < split; ++t) dst[t + o] += src[t];
                            for (std::size_t t = split; t < d; ++t) dst[t + o - d] += src[t];
                          }
                        }
                      }
                    }
                  });
                  if (kernel.tracked()) {
                    auto& gk = tape.grad_buffer(kernel.node());
                    for (std::size_t i = 0; i < gk.size(); ++i) gk[i] += gw.data()[i];
                  }
                });
}

Tensor avg_pool_last(const Tensor& x, std::size_t factor) {
  if (x.rank() == 0 || factor == 0 || x.dim(x.rank() - 1) % factor != 0) {
    throw DimensionError("avg_pool_last: last extent of " + shape_str(x.shape()) +
                         " not divisible by " + std::to_string(factor));
  }
  const std::size_t d = x.dim(x.rank() - 1);
  const std::size_t rows = x.size() / d;
  const std::size_t dout = d / factor;
  Shape out_shape = x.shape();
  out_shape.back() = dout;
  std::vector<double> out(rows * dout, 0.0);
  const double inv = 1.0 / static_cast<double>(factor);
  const double* px = x.data().data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t t = 0; t < d; ++t) out[r * dout + t / factor] += inv * px[r * d + t];
  return finish(tape_of({&x}), std::move(out_shape), std::move(out),
                [x, rows, d, dout, factor, inv](Tape& tape, std::span<const double> g) {
                  auto& gx = tape.grad_buffer(x.node());
                  for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t t = 0; t < d; ++t) gx[r * d + t] += inv * g[r * dout + t / factor];
                });
}

Tensor tied_weights(const Tensor& coeffs, std::shared_ptr<const std::vector<int>> orbit,
                    std::size_t d) {
  if (coeffs.rank() != 3 || !orbit || orbit->size() != d * d) {
    throw DimensionError("tied_weights: coefficients " + shape_str(coeffs.shape()) +
                         " with orbit map of size " + std::to_string(orbit ? orbit->size() : 0));
  }
  const std::size_t fo = coeffs.dim(0);
  const std::size_t f = coeffs.dim(1);
  const std::size_t kk = coeffs.dim(2);
  for (int id : *orbit) {
    if (id < 0 || static_cast<std::size_t>(id) >= kk) {
      throw DimensionError("tied_weights: orbit id out of range");
    }
  }
  const std::size_t cols = fo * d;
  std::vector<double> out(f * d * cols);
  const double* pc = coeffs.data().data();
  const int* po = orbit->data();
  for (std::size_t c = 0; c < f; ++c)
    for (std::size_t s = 0; s < d; ++s)
      for (std::size_t co = 0; co < fo; ++co)
        for (std::size_t t = 0; t < d; ++t)
          out[(c * d + s) * cols + co * d + t] =
              pc[(co * f + c) * kk + static_cast<std::size_t>(po[t * d + s])];
  return finish(tape_of({&coeffs}), {f * d, cols}, std::move(out),
                [coeffs, orbit, f, fo, kk, d, cols](Tape& tape, std::span<const double> g) {
                  auto& gc = tape.grad_buffer(coeffs.node());
                  const int* po = orbit->data();
                  for (std::size_t c = 0; c < f; ++c)
                    for (std::size_t s = 0; s < d; ++s)
                      for (std::size_t co = 0; co < fo; ++co)
                        for (std::size_t t = 0; t < d; ++t)
                          gc[(co * f + c) * kk + static_cast<std::size_t>(po[t * d + s])] +=
                              g[(c * d + s) * cols + co * d + t];
                });
}

Tensor batch_standardize(const Tensor& x, std::size_t channel_axis, double eps, BatchStats* stats) {
  const AxisSplit s = split_at(x.shape(), channel_axis);
  const std::size_t count = s.outer * s.inner;
  const double* px = x.data().data();
  std::vector<double> mean(s.len, 0.0);
  std::vector<double> var(s.len, 0.0);
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t c = 0; c < s.len; ++c)
      for (std::size_t i = 0; i < s.inner; ++i) mean[c] += px[(o * s.len + c) * s.inner + i];
  for (double& m : mean) m /= static_cast<double>(count);
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t c = 0; c < s.len; ++c)
      for (std::size_t i = 0; i < s.inner; ++i) {
        const double dv = px[(o * s.len + c) * s.inner + i] - mean[c];
        var[c] += dv * dv;
      }
  for (double& v : var) v /= static_cast<double>(count);

  std::vector<double> inv_std(s.len);
  for (std::size_t c = 0; c < s.len; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + eps);
  std::vector<double> out(x.size());
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t c = 0; c < s.len; ++c)
      for (std::size_t i = 0; i < s.inner; ++i) {
        const std::size_t idx = (o * s.len + c) * s.inner + i;
        out[idx] = (px[idx] - mean[c]) * inv_std[c];
      }
  if (stats) *stats = BatchStats{mean, var};

  Tape* tape = tape_of({&x});
  if (tape == nullptr) return Tensor(x.shape(), std::move(out));
  auto y = std::make_shared<const std::vector<double>>(out);
  return tape->record(x.shape(), std::move(out),
                      [x, s, count, y, inv_std](Tape& tape, std::span<const double> g) {
                        auto& gx = tape.grad_buffer(x.node());
                        std::vector<double> sum_g(s.len, 0.0);
                        std::vector<double> sum_gy(s.len, 0.0);
                        for (std::size_t o = 0; o < s.outer; ++o)
                          for (std::size_t c = 0; c < s.len; ++c)
                            for (std::size_t i = 0; i < s.inner; ++i) {
                              const std::size_t idx = (o * s.len + c) * s.inner + i;
                              sum_g[c] += g[idx];
                              sum_gy[c] += g[idx] * (*y)[idx];
                            }
                        const double n = static_cast<double>(count);
                        for (std::size_t o = 0; o < s.outer; ++o)
                          for (std::size_t c = 0; c < s.len; ++c)
                            for (std::size_t i = 0; i < s.inner; ++i) {
                              const std::size_t idx = (o * s.len + c) * s.inner + i;
                              gx[idx] += inv_std[c] / n *
                                         (n * g[idx] - sum_g[c] - (*y)[idx] * sum_gy[c]);
                            }
                      });
}

Tensor softmax_xent(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw DimensionError("softmax_xent: logits " + shape_str(logits.shape()) + " with " +
                         std::to_string(labels.size()) + " labels");
  }
  const std::size_t b = logits.dim(0);
  const std::size_t c = logits.dim(1);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= c) {
      throw DimensionError("softmax_xent: label " + std::to_string(y) + " outside [0, " +
                           std::to_string(c) + ")");
    }
  }
  const double* pl = logits.data().data();
  std::vector<double> probs(b * c);
  double loss = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const double* row = pl + i * c;
    const double mx = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(row[j] - mx);
    for (std::size_t j = 0; j < c; ++j) probs[i * c + j] = std::exp(row[j] - mx) / z;
    loss += -(row[labels[i]] - mx - std::log(z));
  }
  loss /= static_cast<double>(b);
  std::vector<int> ys(labels.begin(), labels.end());
  return finish(tape_of({&logits}), Shape{}, {loss},
                [logits, probs = std::move(probs), ys = std::move(ys), b, c](
                    Tape& tape, std::span<const double> g) {
                  auto& gl = tape.grad_buffer(logits.node());
                  const double w = g[0] / static_cast<double>(b);
                  for (std::size_t i = 0; i < b; ++i)
                    for (std::size_t j = 0; j < c; ++j)
                      gl[i * c + j] +=
                          w * (probs[i * c + j] - (static_cast<std::size_t>(ys[i]) == j ? 1.0 : 0.0));
                });
}

}  // namespace equiset
