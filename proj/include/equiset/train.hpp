#pragma once

// Synthetic signal-classification data, Adam, training loops with early
// stopping, and the method comparison harness.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "equiset/dss.hpp"
#include "equiset/tensor.hpp"

namespace equiset {

// ---------------------------------------------------------------------------
// Data

enum SignalClass { kSine = 0, kRectangular = 1, kSawtooth = 2 };

struct DatasetSpec {
  std::size_t train_count = 1000;
  std::size_t val_count = 300;
  std::size_t test_count = 1000;
  int n = 25;
  int T = 100;
  double sigma_mult = 3.0;
  int classes = 3;  // 2 drops the saw-tooth class
  std::uint64_t seed = 0;
};

// Samples stored back to back as [count, n, T] plus one label each.
struct SignalSet {
  int n = 0;
  int T = 0;
  std::vector<double> values;
  std::vector<int> labels;
  std::vector<std::uint64_t> ids;  // position in the generating stream

  std::size_t size() const { return labels.size(); }
  // [indices.size(), n, 1, T]
  Tensor batch(const std::vector<std::size_t>& indices) const;
  SignalSet slice(std::size_t begin, std::size_t end) const;
};

struct SignalSplits {
  SignalSet train, val, test;
};

// Clean waveform value for class `label` at phase argument `arg`:
// sine sin(arg), rectangular sign(sin(arg)), saw-tooth 2 frac(arg / 2pi) - 1.
double waveform(int label, double arg);

// A pure function of the spec: one RNG stream produces train, val and test
// in that order.
SignalSplits gen_signal_dataset(const DatasetSpec& spec);

// "EQSD", u32 version, u32 n, u32 T, u64 counts (train, val, test), then per
// split the little-endian f64 values followed by i32 labels.
void save_dataset(const SignalSplits& splits, const std::string& path);
SignalSplits load_dataset(const std::string& path);

// Throws std::logic_error if any sample id occurs in two splits (or twice).
void check_disjoint(const SignalSplits& splits);

// ---------------------------------------------------------------------------
// Optimization

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Bias-corrected update from the accumulated gradients, which are then
  // cleared. Throws std::logic_error if any parameter lacks a gradient.
  void step(ParamStore& params);

  std::int64_t steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }

 private:
  struct Moments {
    std::vector<double> m, v;
  };
  AdamConfig config_;
  std::int64_t steps_ = 0;
  std::map<std::string, Moments> moments_;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, const std::string& what) : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

struct TrainOptions {
  int epochs = 40;
  double lr = 1e-3;
  std::size_t batch = 64;
  int patience = 8;  // epochs without validation improvement before stopping
  std::uint64_t seed = 0;
  std::ostream* log = nullptr;
};

struct Metrics {
  std::vector<double> train_loss;    // per epoch
  std::vector<double> val_accuracy;  // index 0 is the untrained model
  double best_val_accuracy = 0;
  int best_epoch = 0;
  int epochs_ran = 0;
  double test_accuracy = 0;
  double seconds = 0;
  std::uint64_t seed = 0;
};

struct TrainedModel {
  Model model;
  ParamStore params;
};

// Mini-batch Adam with validation-based early stopping; the returned test
// accuracy is that of the best validation checkpoint. Throws
// TrainingDiverged on a non-finite loss.
Metrics train_model(const ModelConfig& config, const SignalSplits& data, const TrainOptions& options,
                    TrainedModel* out = nullptr);

using LogitsFn = std::function<Tensor(const Tensor& batch)>;

// Argmax accuracy; ties go to the lowest class index.
double evaluate(const LogitsFn& logits, const SignalSet& data, std::size_t batch = 256);
double evaluate(Model& model, const ParamStore& params, const SignalSet& data, std::size_t batch = 256);

// ---------------------------------------------------------------------------
// Methods and comparison

// Desk-scale architectures for the signal task: deepsets, siamese,
// siamese_ds, dss_sum, dss_max, dss_aittala, dss_sridhar.
const std::vector<std::string>& signal_methods();
ModelConfig method_config(const std::string& method, int n, int T, int classes = 3);
double method_default_lr(const std::string& method);

struct ComparisonSpec {
  std::vector<std::size_t> sizes{250, 500, 1000, 2000, 4000};
  std::vector<std::string> methods{"dss_sum", "siamese_ds", "deepsets"};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::size_t val_count = 300;
  std::size_t test_count = 1000;
  int n = 25;
  int T = 100;
  double sigma_mult = 3.0;
  TrainOptions train;
  double lr = 0;         // 0: per-method default
  unsigned threads = 0;  // 0: EQUISET_THREADS or 1
};

struct ComparisonRow {
  std::string method;
  std::size_t train_size = 0;
  std::uint64_t seed = 0;
  double test_accuracy = 0;
  int epochs_ran = 0;
  double seconds = 0;
};

// Rows ordered by (method order, size order, seed order) regardless of how
// many workers ran the cells.
std::vector<ComparisonRow> run_comparison(const ComparisonSpec& spec);

unsigned worker_count(unsigned requested);

std::string comparison_csv(const std::vector<ComparisonRow>& rows);
// Throws ConfigError on a malformed table.
std::vector<ComparisonRow> parse_comparison_csv(const std::string& text);

struct SeriesPoint {
  std::size_t train_size;
  double mean;
  double stddev;  // sample standard deviation, 0 for one seed
  double median;
  std::size_t count;
};
// Per method, points sorted by train size; methods in first-appearance order.
std::vector<std::pair<std::string, std::vector<SeriesPoint>>> summarize(const std::vector<ComparisonRow>& rows);

// Accuracy against train size, one mean line and one shaded band per method.
std::string comparison_svg(const std::vector<ComparisonRow>& rows);

}  // namespace equiset
