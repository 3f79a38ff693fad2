#pragma once

// Set layers for elements with their own symmetry group H: Siamese,
// DeepSets and the DSS variants, stacked into models with invariant or
// equivariant heads.
//
// Activations are laid out [B, n, f, d]: batch, set element, feature
// channel, position in the element (the axis H acts on).

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "equiset/permgroup.hpp"
#include "equiset/tensor.hpp"

namespace equiset {

enum class LayerKind { kSiamese, kDeepSets, kDssSum, kDssMax, kDssAittala, kDssSridhar };

std::string layer_kind_name(LayerKind kind);
LayerKind parse_layer_kind(const std::string& name);  // ConfigError on unknown

// How a single H-equivariant map R^{f x d} -> R^{f' x d} is parameterized.
struct HStructure {
  enum class Type { kFullDense, kCircConv, kSharedBasis };
  Type type = Type::kFullDense;
  int kernel = 0;    // kCircConv
  GroupSpec group;   // kSharedBasis; degree must equal d

  static HStructure dense() { return {}; }
  static HStructure conv(int k) { return {Type::kCircConv, k, {}}; }
  static HStructure shared(GroupSpec g) { return {Type::kSharedBasis, 0, std::move(g)}; }
};

struct LayerConfig {
  LayerKind kind = LayerKind::kDssSum;
  HStructure h;
  int in_features = 0;  // 0: take the width produced by the previous layer
  int out_features = 1;
  bool use_norm = false;
  bool relu = true;
  int pool = 1;  // mean-pool factor on the d axis after the activation
};

struct InvariantHead {
  std::vector<int> hidden;
  int outputs = 1;
};
struct HeadToN {};
struct HeadToD {
  HStructure h;
};
struct HeadToND {
  HStructure h;
};
using HeadConfig = std::variant<InvariantHead, HeadToN, HeadToD, HeadToND>;

struct ModelConfig {
  static constexpr int kVersion = 1;

  int n = 1;
  int d = 1;
  int in_features = 1;
  std::vector<LayerConfig> layers;
  HeadConfig head = InvariantHead{};
  int head_in_features = 0;  // 0: infer
};

// Width and length of the activations after each layer, checking that
// declared widths chain and that each H-structure fits its d. Throws
// ConfigError.
struct LayerShape {
  int features;
  int d;
};
std::vector<LayerShape> validate(const ModelConfig& config);

// JSON schema (version 1):
// {"version":1, "n":25, "d":100, "in_features":1,
//  "layers":[{"kind":"dss_sum", "h":{"type":"conv","kernel":5}, "out":8,
//             "in":1?, "norm":false?, "relu":true?, "pool":1?}, ...],
//  "head":{"type":"invariant","hidden":[16],"outputs":3} | {"type":"to_n"} |
//         {"type":"to_d","h":{...}} | {"type":"to_nd","h":{...}},
//  "head_in":0?}
// "h" is {"type":"dense"} | {"type":"conv","kernel":k} | {"type":"shared","group":"<groupspec>"}.
ModelConfig parse_model_config(const std::string& json_text);
ModelConfig load_model_config(const std::string& path);
std::string model_config_json(const ModelConfig& config);

class Model {
 public:
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  const std::vector<LayerShape>& shapes() const { return shapes_; }

  // Fresh parameters, uniform(+-sqrt(1/fan_in)), normalization gain 1 and
  // shift 0.
  ParamStore init_params(std::uint64_t seed) const;

  // x: [B, n, f, d]. Training mode normalizes with batch statistics and
  // updates the running ones; evaluation uses the running statistics.
  Tensor forward(const Bindings& w, const Tensor& x, bool training = false);
  // The layer stack without the head.
  Tensor features(const Bindings& w, const Tensor& x, bool training = false);
  Tensor head(const Bindings& w, const Tensor& h) const;

  struct RunningStats {
    std::vector<double> mean;
    std::vector<double> var;
  };
  const std::map<std::string, RunningStats>& running_stats() const { return running_; }
  void set_running_stats(std::map<std::string, RunningStats> stats) { running_ = std::move(stats); }

  static constexpr double kNormMomentum = 0.9;
  static constexpr double kNormEps = 1e-5;

 private:
  Tensor layer(std::size_t i, const Bindings& w, const Tensor& x, bool training);
  Tensor h_map(const HStructure& h, const std::string& name, const Bindings& w,
               const Tensor& x, std::size_t d) const;

  ModelConfig config_;
  std::vector<LayerShape> shapes_;
  std::map<std::string, std::shared_ptr<const std::vector<int>>> orbits_;
  std::map<std::string, RunningStats> running_;
};

// (q, h) . X with X[b, i, c, t] -> X[b, q^-1(i), c, h^-1(t)].
Tensor act(const Perm& q, const Perm& h, const Tensor& x);
// Wreath action: element i becomes h_i . x_{q^-1(i)}.
Tensor act_wreath(const Perm& q, const std::vector<Perm>& hs, const Tensor& x);

// ---------------------------------------------------------------------------
// Expressivity separation: two 2x2 inputs (n = 2, H = C_2 on d = 2) in one
// wreath orbit but different S_2 x C_2 orbits.

struct SeparationPair {
  Tensor x;  // [1, 2, 1, 2]
  Tensor y;
  double witness_x = 0;  // sum_i <x_i, sum_j x_j>^2 through a DSS layer
  double witness_y = 0;
};
SeparationPair separation_pair();

// Sum_i <z_i, sum_j z_j>^2 computed with a DSS_sum layer (L1 = 0, L2 = I).
double dss_witness(const Tensor& z);

bool in_product_orbit(const Tensor& x, const Tensor& y);  // S_2 x C_2, by enumeration
bool in_wreath_orbit(const Tensor& x, const Tensor& y);   // C_2 wr S_2, by enumeration

// Largest |out(X) - out(Y)| over `seeds` random Siamese + sum-pool models,
// initialized from first_seed, first_seed + 1, ...
double siamese_separation_gap(int seeds, std::uint64_t first_seed = 0);

}  // namespace equiset
