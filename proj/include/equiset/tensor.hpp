#pragma once

// Dense float64 tensors with a reverse-mode tape.
//
// A Tensor is an immutable value: a shape and a shared row-major buffer.
// Tensors produced from tracked inputs are recorded on the inputs' Tape;
// Tape::backward walks the recorded nodes once in reverse creation order,
// which is a topological order by construction. Untracked tensors are plain
// values and can be shared freely between threads; a Tape belongs to one
// thread.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "equiset/error.hpp"

namespace equiset {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tape;

class Tensor {
 public:
  Tensor() : Tensor(Shape{}, std::vector<double>{0.0}) {}
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value) { return Tensor(Shape{}, {value}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_->size(); }
  std::span<const double> data() const { return *data_; }
  const std::vector<double>& values() const& { return *data_; }
  std::vector<double> values() && { return *data_; }  // safe in range-for over a temporary
  double operator[](std::size_t i) const { return (*data_)[i]; }
  double item() const;

  bool tracked() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  std::size_t node() const { return node_; }

  // Same values, no tape.
  Tensor detach() const;

 private:
  friend class Tape;

  Shape shape_;
  std::shared_ptr<const std::vector<double>> data_;
  Tape* tape_ = nullptr;
  std::size_t node_ = 0;
};

// ---------------------------------------------------------------------------
// Parameters

class ParamStore {
 public:
  struct Entry {
    Tensor value;
    std::vector<double> grad;  // empty until gradients are accumulated
  };

  explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

  // Throws ConfigError on a duplicate name.
  void add(const std::string& name, Tensor value);
  // Uniform(-sqrt(1/fan_in), sqrt(1/fan_in)) drawn from `rng`.
  void add_uniform(const std::string& name, Shape shape, std::size_t fan_in,
                   std::mt19937_64& rng);

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  const Tensor& value(const std::string& name) const;
  void set_value(const std::string& name, Tensor value);
  std::vector<double>& grad(const std::string& name);
  const std::vector<double>& grad(const std::string& name) const;

  std::vector<std::string> names() const;
  const std::map<std::string, Entry>& entries() const { return entries_; }
  std::size_t total_size() const;
  std::size_t size() const { return entries_.size(); }

  bool has_all_grads() const;
  void zero_grads();

  std::uint64_t seed() const { return seed_; }

  // Binary: "EQPS", u32 version, u64 seed, u32 count, then per entry
  // u32 name length, name bytes, u32 rank, u64 extents, little-endian f64 data.
  void save(const std::string& path) const;
  static ParamStore load(const std::string& path);

 private:
  std::uint64_t seed_;
  std::map<std::string, Entry> entries_;
};

// Named view of parameter tensors used by forward passes; tracked when
// created through Tape::watch.
class Bindings {
 public:
  static Bindings frozen(const ParamStore& store);

  const Tensor& operator[](const std::string& name) const;
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }

 private:
  friend class Tape;
  std::map<std::string, Tensor> tensors_;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, std::span<const double> grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor leaf(const Tensor& value);
  Bindings watch(const ParamStore& store);

  // Appends a node whose gradient is pushed to its parents by `backward`.
  Tensor record(Shape shape, std::vector<double> data, Backward backward);

  // Zero-initialised gradient buffer of a node, allocated on first use.
  std::vector<double>& grad_buffer(std::size_t node);

  // Seeds d(root)/d(root) = 1 and sweeps every node once in reverse order.
  // Throws DimensionError unless root is a tracked single-element tensor.
  void backward(const Tensor& root);

  // Gradient of a tracked tensor after backward (zeros if unreached).
  Tensor grad(const Tensor& t) const;

  // Adds the gradients of watched parameters into `store`.
  void accumulate_into(const Bindings& bindings, ParamStore& store) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::size_t size = 0;
    Backward backward;
    std::vector<double> grad;
  };
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Differentiable operations. Binary elementwise ops broadcast numpy-style
// (shapes aligned on trailing axes, extent-1 axes stretched).

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
// Subgradient 0 at 0.
Tensor relu(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor reshape(const Tensor& a, Shape shape);
Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis);

enum class ReduceOp { kSum, kMax, kMean };
// Max routes the adjoint to the first maximal entry along the axis.
Tensor reduce(ReduceOp op, const Tensor& x, std::size_t axis, bool keepdims = false);
Tensor reduce_sum(const Tensor& x, std::size_t axis, bool keepdims = false);
Tensor reduce_max(const Tensor& x, std::size_t axis, bool keepdims = false);
Tensor reduce_mean(const Tensor& x, std::size_t axis, bool keepdims = false);
Tensor sum_all(const Tensor& x);

// x: [..., f, d], kernel: [f', f, k] -> [..., f', d] with
// out[c', t] = sum_{c, j} kernel[c', c, j] * x[c, (t + j - k/2) mod d].
Tensor circ_conv1d(const Tensor& x, const Tensor& kernel);

// Mean over non-overlapping windows of the last axis.
Tensor avg_pool_last(const Tensor& x, std::size_t factor);

// Expands tied coefficients [f', f, K] into a dense [f*d, f'*d] weight with
// W[(c, s), (c', t)] = coeffs[c', c, orbit[t*d + s]]; `orbit` holds d*d ids < K.
Tensor tied_weights(const Tensor& coeffs, std::shared_ptr<const std::vector<int>> orbit,
                    std::size_t d);

struct BatchStats {
  std::vector<double> mean;
  std::vector<double> var;  // biased
};
// Standardizes each index of `channel_axis` over all other axes.
Tensor batch_standardize(const Tensor& x, std::size_t channel_axis, double eps,
                         BatchStats* stats = nullptr);

// Mean of -log softmax(logits[b])[labels[b]]; logits [b, c].
Tensor softmax_xent(const Tensor& logits, std::span<const int> labels);

// ---------------------------------------------------------------------------
// Finite-difference gradient checking.

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
};

using ScalarObjective = std::function<Tensor(const Bindings&)>;

// Compares the tape gradient with (f(p + eps e) - f(p - eps e)) / (2 eps) on
// `samples` coordinates drawn uniformly (all coordinates if samples == 0).
// Relative error uses max(|a|, |b|, 1e-8) as denominator. Objectives with
// ReLU or max should keep their inputs away from kinks; the caller owns that.
GradCheckReport grad_check(const ScalarObjective& f, ParamStore& params, double eps,
                           std::size_t samples = 64, std::uint64_t seed = 0);

}  // namespace equiset
