#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "equiset/tensor.hpp"

namespace equiset {

static_assert(std::endian::native == std::endian::little,
              "parameter files are written as raw little-endian doubles");

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::make_shared<const std::vector<double>>(std::move(data))) {
  for (std::size_t e : shape_) {
    if (e == 0) throw DimensionError("tensor extents must be positive: " + shape_str(shape_));
  }
  if (numel(shape_) != data_->size()) {
    throw DimensionError("tensor of shape " + shape_str(shape_) + " given " +
                         std::to_string(data_->size()) + " values");
  }
}

Tensor Tensor::zeros(Shape shape) {
  const std::size_t n = numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(Shape shape, double value) {
  const std::size_t n = numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape_));
  return (*data_)[0];
}

Tensor Tensor::detach() const {
  Tensor t = *this;
  t.tape_ = nullptr;
  t.node_ = 0;
  return t;
}

// ---------------------------------------------------------------------------
// Tape

Tensor Tape::leaf(const Tensor& value) {
  Tensor t = value.detach();
  t.tape_ = this;
  t.node_ = nodes_.size();
  nodes_.push_back(Node{value.size(), nullptr, {}});
  return t;
}

Bindings Tape::watch(const ParamStore& store) {
  Bindings b;
  for (const auto& [name, entry] : store.entries()) b.tensors_.emplace(name, leaf(entry.value));
  return b;
}

Tensor Tape::record(Shape shape, std::vector<double> data, Backward backward) {
  Tensor t(std::move(shape), std::move(data));
  t.tape_ = this;
  t.node_ = nodes_.size();
  nodes_.push_back(Node{t.size(), std::move(backward), {}});
  return t;
}

std::vector<double>& Tape::grad_buffer(std::size_t node) {
  Node& n = nodes_.at(node);
  if (n.grad.empty()) n.grad.assign(n.size, 0.0);
  return n.grad;
}

void Tape::backward(const Tensor& root) {
  if (root.tape() != this) throw DimensionError("backward: root is not recorded on this tape");
  if (root.size() != 1) {
    throw DimensionError("backward: root must be a scalar, got " + shape_str(root.shape()));
  }
  grad_buffer(root.node())[0] += 1.0;
  for (std::size_t i = root.node() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.grad.empty() && n.backward) n.backward(*this, n.grad);
  }
}

Tensor Tape::grad(const Tensor& t) const {
  if (t.tape() != this) throw DimensionError("grad: tensor is not recorded on this tape");
  const Node& n = nodes_.at(t.node());
  if (n.grad.empty()) return Tensor::zeros(t.shape());
  return Tensor(t.shape(), n.grad);
}

void Tape::accumulate_into(const Bindings& bindings, ParamStore& store) const {
  for (const auto& [name, t] : bindings.tensors_) {
    if (t.tape() != this) continue;
    std::vector<double>& g = store.grad(name);
    if (g.empty()) g.assign(t.size(), 0.0);
    const Node& n = nodes_.at(t.node());
    if (n.grad.empty()) continue;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
  }
}

// ---------------------------------------------------------------------------
// Bindings / ParamStore

Bindings Bindings::frozen(const ParamStore& store) {
  Bindings b;
  for (const auto& [name, entry] : store.entries()) b.tensors_.emplace(name, entry.value);
  return b;
}

const Tensor& Bindings::operator[](const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

void ParamStore::add(const std::string& name, Tensor value) {
  if (!entries_.emplace(name, Entry{value.detach(), {}}).second) {
    throw ConfigError("duplicate parameter name '" + name + "'");
  }
}

void ParamStore::add_uniform(const std::string& name, Shape shape, std::size_t fan_in,
                             std::mt19937_64& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> data(numel(shape));
  for (double& v : data) v = dist(rng);
  add(name, Tensor(std::move(shape), std::move(data)));
}

const Tensor& ParamStore::value(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second.value;
}

void ParamStore::set_value(const std::string& name, Tensor value) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("unknown parameter '" + name + "'");
  if (it->second.value.shape() != value.shape()) {
    throw DimensionError("set_value: shape mismatch for '" + name + "'");
  }
  it->second.value = value.detach();
}

std::vector<double>& ParamStore::grad(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second.grad;
}

const std::vector<double>& ParamStore::grad(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second.grad;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& kv : entries_) out.push_back(kv.first);
  return out;
}

std::size_t ParamStore::total_size() const {
  std::size_t n = 0;
  for (const auto& kv : entries_) n += kv.second.value.size();
  return n;
}

bool ParamStore::has_all_grads() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const auto& kv) {
    return kv.second.grad.size() == kv.second.value.size();
  });
}

void ParamStore::zero_grads() {
  for (auto& kv : entries_) kv.second.grad.clear();
}

namespace {

constexpr char kParamMagic[4] = {'E', 'Q', 'P', 'S'};
constexpr std::uint32_t kParamVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw ConfigError("parameter file truncated");
  }
  return v;
}

}  // namespace

void ParamStore::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write(kParamMagic, 4);
  put<std::uint32_t>(os, kParamVersion);
  put<std::uint64_t>(os, seed_);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [name, entry] : entries_) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(entry.value.rank()));
    for (std::size_t e : entry.value.shape()) put<std::uint64_t>(os, e);
    os.write(reinterpret_cast<const char*>(entry.value.data().data()),
             static_cast<std::streamsize>(entry.value.size() * sizeof(double)));
  }
}

ParamStore ParamStore::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kParamMagic, 4) != 0) {
    throw ConfigError(path + ": not a parameter file");
  }
  if (get<std::uint32_t>(is) != kParamVersion) throw ConfigError(path + ": unsupported version");
  ParamStore store(get<std::uint64_t>(is));
  const auto count = get<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(get<std::uint32_t>(is), '\0');
    if (!is.read(name.data(), static_cast<std::streamsize>(name.size()))) {
      throw ConfigError("parameter file truncated");
    }
    Shape shape(get<std::uint32_t>(is));
    for (auto& e : shape) e = static_cast<std::size_t>(get<std::uint64_t>(is));
    std::vector<double> data(numel(shape));
    if (!is.read(reinterpret_cast<char*>(data.data()),
                 static_cast<std::streamsize>(data.size() * sizeof(double)))) {
      throw ConfigError("parameter file truncated");
    }
    store.add(name, Tensor(std::move(shape), std::move(data)));
  }
  return store;
}

// ---------------------------------------------------------------------------
// Gradient check

GradCheckReport grad_check(const ScalarObjective& f, ParamStore& params, double eps,
                           std::size_t samples, std::uint64_t seed) {
  if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be positive");

  Tape tape;
  const Bindings watched = tape.watch(params);
  const Tensor loss = f(watched);
  tape.backward(loss);
  std::map<std::string, std::vector<double>> analytic;
  for (const std::string& name : params.names()) analytic[name] = tape.grad(watched[name]).values();

  std::vector<std::pair<std::string, std::size_t>> coords;
  for (const auto& [name, entry] : params.entries()) {
    for (std::size_t i = 0; i < entry.value.size(); ++i) coords.emplace_back(name, i);
  }
  if (samples != 0 && samples < coords.size()) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<std::string, std::size_t>> picked;
    std::sample(coords.begin(), coords.end(), std::back_inserter(picked), samples, rng);
    coords = std::move(picked);
  }

  auto eval_at = [&](const std::string& name, std::size_t idx, double value) {
    const Tensor original = params.value(name);
    std::vector<double> data = original.values();
    data[idx] = value;
    params.set_value(name, Tensor(original.shape(), std::move(data)));
    const double out = f(Bindings::frozen(params)).item();
    params.set_value(name, original);
    return out;
  };

  GradCheckReport report;
  for (const auto& [name, idx] : coords) {
    const double x0 = params.value(name)[idx];
    const double numeric = (eval_at(name, idx, x0 + eps) - eval_at(name, idx, x0 - eps)) / (2 * eps);
    const double a = analytic[name][idx];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    ++report.coordinates;
    if (report.worst_param.empty() || rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_param = name;
      report.worst_index = idx;
    }
  }
  return report;
}

}  // namespace equiset
