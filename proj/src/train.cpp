#include "equiset/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

namespace equiset {

// ---------------------------------------------------------------------------
// Data

Tensor SignalSet::batch(const std::vector<std::size_t>& indices) const {
  const std::size_t per = static_cast<std::size_t>(n) * static_cast<std::size_t>(T);
  std::vector<double> out(indices.size() * per);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    if (indices[b] >= size()) throw DimensionError("batch index out of range");
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(indices[b] * per), per,
                out.begin() + static_cast<std::ptrdiff_t>(b * per));
  }
  return Tensor({indices.size(), static_cast<std::size_t>(n), 1, static_cast<std::size_t>(T)}, std::move(out));
}

SignalSet SignalSet::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw DimensionError("slice out of range");
  const std::size_t per = static_cast<std::size_t>(n) * static_cast<std::size_t>(T);
  SignalSet s{n, T, {}, {}, {}};
  s.values.assign(values.begin() + static_cast<std::ptrdiff_t>(begin * per),
                  values.begin() + static_cast<std::ptrdiff_t>(end * per));
  s.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(begin),
                  labels.begin() + static_cast<std::ptrdiff_t>(end));
  if (!ids.empty()) {
    s.ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(begin), ids.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return s;
}

double waveform(int label, double arg) {
  switch (label) {
    case kSine:
      return std::sin(arg);
    case kRectangular: {
      const double s = std::sin(arg);
      return (s > 0) - (s < 0);
    }
    case kSawtooth: {
      const double u = arg / (2 * std::numbers::pi);
      return 2 * (u - std::floor(u)) - 1;
    }
    default:
      throw std::invalid_argument("unknown signal class " + std::to_string(label));
  }
}

SignalSplits gen_signal_dataset(const DatasetSpec& spec) {
  if (spec.n < 1 || spec.T < 1 || spec.classes < 1 || spec.classes > 3 || spec.sigma_mult < 0) {
    throw ConfigError("invalid dataset spec");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> label_dist(0, spec.classes - 1);
  std::uniform_real_distribution<double> freq_dist(1.0, 10.0), amp_dist(1.0, 10.0);
  std::uniform_real_distribution<double> phase_dist(0.0, 2 * std::numbers::pi), shift_dist(-5.0, 5.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  const auto n = static_cast<std::size_t>(spec.n), T = static_cast<std::size_t>(spec.T);
  std::uint64_t next_id = 0;
  auto fill = [&](std::size_t count) {
    SignalSet s{spec.n, spec.T, std::vector<double>(count * n * T), std::vector<int>(count), {}};
    s.ids.resize(count);
    std::iota(s.ids.begin(), s.ids.end(), next_id);
    next_id += count;
    std::vector<double> clean(T);
    for (std::size_t i = 0; i < count; ++i) {
      const int label = label_dist(rng);
      const double f = freq_dist(rng), a = amp_dist(rng), phase = phase_dist(rng), v = shift_dist(rng);
      for (std::size_t k = 0; k < T; ++k) {
        const double t = 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(T);
        clean[k] = a * waveform(label, f * t + phase) + v;
      }
      const double sigma = spec.sigma_mult * a;
      double* out = s.values.data() + i * n * T;
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = 0; k < T; ++k) out[r * T + k] = clean[k] + (sigma > 0 ? sigma * noise(rng) : 0.0);
      s.labels[i] = label;
    }
    return s;
  };
  SignalSplits out;
  out.train = fill(spec.train_count);
  out.val = fill(spec.val_count);
  out.test = fill(spec.test_count);
  return out;
}

namespace {

constexpr char kDataMagic[4] = {'E', 'Q', 'S', 'D'};
constexpr std::uint32_t kDataVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ConfigError(path + ": truncated dataset file");
  return v;
}

}  // namespace

void save_dataset(const SignalSplits& splits, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write(kDataMagic, 4);
  put<std::uint32_t>(os, kDataVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(splits.train.n));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(splits.train.T));
  for (const SignalSet* s : {&splits.train, &splits.val, &splits.test}) put<std::uint64_t>(os, s->size());
  for (const SignalSet* s : {&splits.train, &splits.val, &splits.test}) {
    os.write(reinterpret_cast<const char*>(s->values.data()),
             static_cast<std::streamsize>(s->values.size() * sizeof(double)));
    for (int label : s->labels) put<std::int32_t>(os, label);
  }
  if (!os) throw std::runtime_error("write to " + path + " failed");
}

SignalSplits load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kDataMagic, 4) != 0) {
    throw ConfigError(path + ": not a dataset file");
  }
  if (get<std::uint32_t>(is, path) != kDataVersion) throw ConfigError(path + ": unsupported version");
  const auto n = static_cast<int>(get<std::uint32_t>(is, path));
  const auto T = static_cast<int>(get<std::uint32_t>(is, path));
  std::uint64_t counts[3];
  for (auto& c : counts) c = get<std::uint64_t>(is, path);
  SignalSplits out;
  SignalSet* sets[3] = {&out.train, &out.val, &out.test};
  std::uint64_t next_id = 0;
  for (int k = 0; k < 3; ++k) {
    SignalSet& s = *sets[k];
    s.n = n;
    s.T = T;
    s.values.resize(counts[k] * static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(T));
    if (!is.read(reinterpret_cast<char*>(s.values.data()),
                 static_cast<std::streamsize>(s.values.size() * sizeof(double)))) {
      throw ConfigError(path + ": truncated dataset file");
    }
    s.labels.resize(counts[k]);
    for (int& label : s.labels) label = get<std::int32_t>(is, path);
    s.ids.resize(counts[k]);
    std::iota(s.ids.begin(), s.ids.end(), next_id);
    next_id += counts[k];
  }
  return out;
}

void check_disjoint(const SignalSplits& splits) {
  std::vector<std::uint64_t> all;
  for (const SignalSet* s : {&splits.train, &splits.val, &splits.test}) {
    if (s->ids.size() != s->size()) throw std::logic_error("split without sample ids");
    all.insert(all.end(), s->ids.begin(), s->ids.end());
  }
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
    throw std::logic_error("a sample appears in more than one split");
  }
}

// ---------------------------------------------------------------------------
// Adam

void Adam::step(ParamStore& params) {
  if (!params.has_all_grads()) throw std::logic_error("adam step without gradients for every parameter");
  ++steps_;
  const double c1 = 1 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (const std::string& name : params.names()) {
    const Tensor& value = params.value(name);
    std::vector<double>& g = params.grad(name);
    Moments& mo = moments_[name];
    if (mo.m.empty()) {
      mo.m.assign(value.size(), 0.0);
      mo.v.assign(value.size(), 0.0);
    }
    std::vector<double> next = value.values();
    for (std::size_t i = 0; i < next.size(); ++i) {
      mo.m[i] = config_.beta1 * mo.m[i] + (1 - config_.beta1) * g[i];
      mo.v[i] = config_.beta2 * mo.v[i] + (1 - config_.beta2) * g[i] * g[i];
      next[i] -= config_.lr * (mo.m[i] / c1) / (std::sqrt(mo.v[i] / c2) + config_.eps);
    }
    params.set_value(name, Tensor(value.shape(), std::move(next)));
  }
  params.zero_grads();
}

// ---------------------------------------------------------------------------
// Training

double evaluate(const LogitsFn& logits, const SignalSet& data, std::size_t batch) {
  if (data.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < data.size(); start += batch) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(data.size(), start + batch); ++i) idx.push_back(i);
    const Tensor z = logits(data.batch(idx));
    if (z.rank() != 2 || z.dim(0) != idx.size()) {
      throw DimensionError("evaluate: logits of shape " + shape_str(z.shape()));
    }
    const std::size_t c = z.dim(1);
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const auto row = z.data().subspan(b * c, c);
      const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
      correct += best == data.labels[idx[b]];
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

double evaluate(Model& model, const ParamStore& params, const SignalSet& data, std::size_t batch) {
  const Bindings w = Bindings::frozen(params);
  return evaluate([&](const Tensor& x) { return model.forward(w, x, false); }, data, batch);
}

Metrics train_model(const ModelConfig& config, const SignalSplits& data, const TrainOptions& options,
                    TrainedModel* out) {
  if (options.batch == 0) throw ConfigError("batch size must be positive");
  if (options.epochs < 0) throw ConfigError("epochs must be non-negative");
  const auto start = std::chrono::steady_clock::now();
  Model model(config);
  ParamStore params = model.init_params(options.seed);
  Adam adam(AdamConfig{options.lr});
  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);

  Metrics m;
  m.seed = options.seed;
  m.best_val_accuracy = evaluate(model, params, data.val);
  m.val_accuracy.push_back(m.best_val_accuracy);
  ParamStore best_params = params;
  auto best_stats = model.running_stats();

  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);
  int stale = 0;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += options.batch) {
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(b0),
                                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), b0 + options.batch)));
      std::vector<int> labels;
      for (std::size_t i : idx) labels.push_back(data.train.labels[i]);
      Tape tape;
      const Bindings w = tape.watch(params);
      const Tensor loss = softmax_xent(model.forward(w, data.train.batch(idx), true), labels);
      if (!std::isfinite(loss.item())) {
        throw TrainingDiverged(epoch, "training diverged in epoch " + std::to_string(epoch) + " (loss " +
                                          std::to_string(loss.item()) + ")");
      }
      tape.backward(loss);
      tape.accumulate_into(w, params);
      adam.step(params);
      loss_sum += loss.item() * static_cast<double>(idx.size());
    }
    m.train_loss.push_back(order.empty() ? 0.0 : loss_sum / static_cast<double>(order.size()));
    const double val = evaluate(model, params, data.val);
    m.val_accuracy.push_back(val);
    m.epochs_ran = epoch;
    if (options.log) {
      *options.log << "epoch " << epoch << " loss " << m.train_loss.back() << " val " << val << "\n";
    }
    if (val > m.best_val_accuracy) {
      m.best_val_accuracy = val;
      m.best_epoch = epoch;
      best_params = params;
      best_stats = model.running_stats();
      stale = 0;
    } else if (++stale >= options.patience) {
      break;
    }
  }
  model.set_running_stats(best_stats);
  m.test_accuracy = evaluate(model, best_params, data.test);
  m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (out) *out = TrainedModel{std::move(model), std::move(best_params)};
  return m;
}

// ---------------------------------------------------------------------------
// Methods

const std::vector<std::string>& signal_methods() {
  static const std::vector<std::string> methods{"deepsets",    "siamese",     "siamese_ds", "dss_sum",
                                                "dss_max",     "dss_aittala", "dss_sridhar"};
  return methods;
}

namespace {

LayerConfig make_layer(LayerKind kind, int out, int kernel, int pool) {
  LayerConfig l;
  l.kind = kind;
  l.h = HStructure::conv(kernel);
  l.out_features = out;
  l.use_norm = true;
  l.pool = pool;
  return l;
}

}  // namespace

ModelConfig method_config(const std::string& method, int n, int T, int classes) {
  constexpr int kKernel = 5;
  ModelConfig c;
  c.n = n;
  c.d = T;
  c.in_features = 1;
  c.head = InvariantHead{{}, classes};
  const int pool = T % 4 == 0 ? 2 : 1;
  auto conv_stack = [&](LayerKind kind, std::vector<int> widths) {
    for (std::size_t i = 0; i < widths.size(); ++i)
      c.layers.push_back(make_layer(kind, widths[i], kKernel, i + 1 < widths.size() ? pool : 1));
  };
  if (method == "deepsets") {
    for (int w : {64, 64, 32}) c.layers.push_back(make_layer(LayerKind::kDeepSets, w, 1, 1));
  } else if (method == "siamese") {
    conv_stack(LayerKind::kSiamese, {10, 10, 8});
  } else if (method == "siamese_ds") {
    c.layers.push_back(make_layer(LayerKind::kSiamese, 10, kKernel, pool));
    c.layers.push_back(make_layer(LayerKind::kSiamese, 10, kKernel, pool));
    c.layers.push_back(make_layer(LayerKind::kDeepSets, 32, 1, 1));
  } else if (method == "dss_sum") {
    conv_stack(LayerKind::kDssSum, {8, 8, 8});
  } else if (method == "dss_max") {
    conv_stack(LayerKind::kDssMax, {8, 8, 8});
  } else if (method == "dss_aittala") {
    conv_stack(LayerKind::kDssAittala, {6, 6, 6});
  } else if (method == "dss_sridhar") {
    conv_stack(LayerKind::kDssSridhar, {10, 10, 8});
  } else {
    throw ConfigError("unknown method '" + method + "'");
  }
  validate(c);
  return c;
}

double method_default_lr(const std::string& method) {
  if (std::find(signal_methods().begin(), signal_methods().end(), method) == signal_methods().end()) {
    throw ConfigError("unknown method '" + method + "'");
  }
  return 3e-3;
}

}  // namespace equiset
