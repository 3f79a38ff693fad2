#include "equiset/dss.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace equiset {

namespace {

const std::pair<LayerKind, const char*> kKindNames[] = {
    {LayerKind::kSiamese, "siamese"},       {LayerKind::kDeepSets, "deepsets"},
    {LayerKind::kDssSum, "dss_sum"},        {LayerKind::kDssMax, "dss_max"},
    {LayerKind::kDssAittala, "dss_aittala"}, {LayerKind::kDssSridhar, "dss_sridhar"},
};

bool has_l2(LayerKind k) {
  return k == LayerKind::kDssSum || k == LayerKind::kDssMax || k == LayerKind::kDeepSets;
}

std::string layer_prefix(std::size_t i) { return "layer" + std::to_string(i); }

void check_h(const HStructure& h, int d, const std::string& where) {
  switch (h.type) {
    case HStructure::Type::kFullDense:
      return;
    case HStructure::Type::kCircConv:
      if (h.kernel < 1 || h.kernel > d) {
        throw ConfigError(where + ": conv kernel " + std::to_string(h.kernel) +
                          " does not fit element length " + std::to_string(d));
      }
      return;
    case HStructure::Type::kSharedBasis:
      if (h.group.degree() != d) {
        throw ConfigError(where + ": group " + h.group.to_string() + " has degree " +
                          std::to_string(h.group.degree()) + ", elements have length " +
                          std::to_string(d));
      }
      return;
  }
}

}  // namespace

std::string layer_kind_name(LayerKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "?";
}

LayerKind parse_layer_kind(const std::string& name) {
  for (const auto& [k, s] : kKindNames)
    if (name == s) return k;
  throw ConfigError("unknown layer kind '" + name +
                    "' (expected siamese, deepsets, dss_sum, dss_max, dss_aittala, dss_sridhar)");
}

std::vector<LayerShape> validate(const ModelConfig& config) {
  if (config.n < 1 || config.d < 1 || config.in_features < 1) {
    throw ConfigError("n, d and in_features must be positive");
  }
  std::vector<LayerShape> shapes;
  LayerShape cur{config.in_features, config.d};
  for (std::size_t i = 0; i < config.layers.size(); ++i) {
    const LayerConfig& l = config.layers[i];
    const std::string where = layer_prefix(i) + " (" + layer_kind_name(l.kind) + ")";
    if (l.in_features != 0 && l.in_features != cur.features) {
      throw ConfigError(where + " expects " + std::to_string(l.in_features) +
                        " input features but receives " + std::to_string(cur.features));
    }
    if (l.out_features < 1) throw ConfigError(where + ": out_features must be positive");
    if (l.pool < 1) throw ConfigError(where + ": pool must be positive");
    if (l.kind != LayerKind::kDeepSets) check_h(l.h, cur.d, where);
    LayerShape next{l.kind == LayerKind::kDssAittala ? 2 * l.out_features : l.out_features,
                    l.kind == LayerKind::kDeepSets ? 1 : cur.d};
    if (next.d % l.pool != 0) {
      throw ConfigError(where + ": pool " + std::to_string(l.pool) + " does not divide length " +
                        std::to_string(next.d));
    }
    next.d /= l.pool;
    shapes.push_back(next);
    cur = next;
  }
  if (config.head_in_features != 0 && config.head_in_features != cur.features) {
    throw ConfigError("head expects " + std::to_string(config.head_in_features) +
                      " input features but the last layer produces " + std::to_string(cur.features));
  }
  if (const auto* inv = std::get_if<InvariantHead>(&config.head)) {
    if (inv->outputs < 1) throw ConfigError("head: outputs must be positive");
    for (int w : inv->hidden)
      if (w < 1) throw ConfigError("head: hidden widths must be positive");
  } else if (const auto* td = std::get_if<HeadToD>(&config.head)) {
    check_h(td->h, cur.d, "head");
  } else if (const auto* tnd = std::get_if<HeadToND>(&config.head)) {
    check_h(tnd->h, cur.d, "head");
  }
  return shapes;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;

HStructure h_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "dense") return HStructure::dense();
  if (type == "conv") return HStructure::conv(j.at("kernel").get<int>());
  if (type == "shared") return HStructure::shared(parse_groupspec(j.at("group").get<std::string>()));
  throw ConfigError("unknown h structure '" + type + "' (expected dense, conv, shared)");
}

json h_to_json(const HStructure& h) {
  switch (h.type) {
    case HStructure::Type::kFullDense:
      return {{"type", "dense"}};
    case HStructure::Type::kCircConv:
      return {{"type", "conv"}, {"kernel", h.kernel}};
    case HStructure::Type::kSharedBasis:
      return {{"type", "shared"}, {"group", h.group.to_string()}};
  }
  return {};
}

}  // namespace

ModelConfig parse_model_config(const std::string& json_text) {
  try {
    const json doc = json::parse(json_text);
    const int version = doc.value("version", 0);
    if (version != ModelConfig::kVersion) {
      throw ConfigError("model config version " + std::to_string(version) + " is not supported");
    }
    ModelConfig c;
    c.n = doc.at("n").get<int>();
    c.d = doc.at("d").get<int>();
    c.in_features = doc.value("in_features", 1);
    c.head_in_features = doc.value("head_in", 0);
    for (const json& lj : doc.at("layers")) {
      LayerConfig l;
      l.kind = parse_layer_kind(lj.at("kind").get<std::string>());
      if (lj.contains("h")) l.h = h_from_json(lj.at("h"));
      l.in_features = lj.value("in", 0);
      l.out_features = lj.at("out").get<int>();
      l.use_norm = lj.value("norm", false);
      l.relu = lj.value("relu", true);
      l.pool = lj.value("pool", 1);
      c.layers.push_back(l);
    }
    const json& hj = doc.at("head");
    const std::string type = hj.at("type").get<std::string>();
    if (type == "invariant") {
      c.head = InvariantHead{hj.value("hidden", std::vector<int>{}), hj.value("outputs", 1)};
    } else if (type == "to_n") {
      c.head = HeadToN{};
    } else if (type == "to_d") {
      c.head = HeadToD{h_from_json(hj.at("h"))};
    } else if (type == "to_nd") {
      c.head = HeadToND{h_from_json(hj.at("h"))};
    } else {
      throw ConfigError("unknown head type '" + type + "' (expected invariant, to_n, to_d, to_nd)");
    }
    validate(c);
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
}

ModelConfig load_model_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_model_config(ss.str());
}

std::string model_config_json(const ModelConfig& c) {
  json doc;
  doc["version"] = ModelConfig::kVersion;
  doc["n"] = c.n;
  doc["d"] = c.d;
  doc["in_features"] = c.in_features;
  if (c.head_in_features) doc["head_in"] = c.head_in_features;
  doc["layers"] = json::array();
  for (const LayerConfig& l : c.layers) {
    json lj{{"kind", layer_kind_name(l.kind)}, {"out", l.out_features}};
    if (l.kind != LayerKind::kDeepSets) lj["h"] = h_to_json(l.h);
    if (l.in_features) lj["in"] = l.in_features;
    if (l.use_norm) lj["norm"] = true;
    if (!l.relu) lj["relu"] = false;
    if (l.pool != 1) lj["pool"] = l.pool;
    doc["layers"].push_back(lj);
  }
  std::visit(
      [&](const auto& h) {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, InvariantHead>) {
          doc["head"] = {{"type", "invariant"}, {"hidden", h.hidden}, {"outputs", h.outputs}};
        } else if constexpr (std::is_same_v<T, HeadToN>) {
          doc["head"] = {{"type", "to_n"}};
        } else if constexpr (std::is_same_v<T, HeadToD>) {
          doc["head"] = {{"type", "to_d"}, {"h", h_to_json(h.h)}};
        } else {
          doc["head"] = {{"type", "to_nd"}, {"h", h_to_json(h.h)}};
        }
      },
      c.head);
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Model

Model::Model(ModelConfig config) : config_(std::move(config)), shapes_(validate(config_)) {
  auto cache = [&](const HStructure& h) {
    if (h.type != HStructure::Type::kSharedBasis) return;
    const std::string key = h.group.to_string();
    if (orbits_.count(key)) return;
    orbits_[key] = std::make_shared<const std::vector<int>>(pair_orbits(h.group.lower()).orbit_id);
  };
  for (std::size_t i = 0; i < config_.layers.size(); ++i) {
    const LayerConfig& l = config_.layers[i];
    if (l.kind != LayerKind::kDeepSets) cache(l.h);
    if (l.use_norm) {
      const auto w = static_cast<std::size_t>(shapes_[i].features);
      running_[layer_prefix(i) + ".norm"] = {std::vector<double>(w, 0.0), std::vector<double>(w, 1.0)};
    }
  }
  if (const auto* td = std::get_if<HeadToD>(&config_.head)) cache(td->h);
  if (const auto* tnd = std::get_if<HeadToND>(&config_.head)) cache(tnd->h);
}

namespace {

// Parameter shape and fan-in of one H map from f to f' channels on length d.
std::pair<Shape, std::size_t> h_weight_shape(const HStructure& h, std::size_t f, std::size_t fo,
                                             std::size_t d) {
  switch (h.type) {
    case HStructure::Type::kFullDense:
      return {{f * d, fo * d}, f * d};
    case HStructure::Type::kCircConv:
      return {{fo, f, static_cast<std::size_t>(h.kernel)}, f * static_cast<std::size_t>(h.kernel)};
    case HStructure::Type::kSharedBasis:
      return {{fo, f, static_cast<std::size_t>(pair_orbits(h.group.lower()).orbit_count)}, f * d};
  }
  return {};
}

Shape bias_shape(const HStructure& h, std::size_t fo, std::size_t d) {
  return h.type == HStructure::Type::kFullDense ? Shape{fo, d} : Shape{fo, 1};
}

}  // namespace

ParamStore Model::init_params(std::uint64_t seed) const {
  ParamStore p(seed);
  std::mt19937_64 rng(seed);
  auto uniform_bias = [&](const std::string& name, Shape shape, std::size_t fan_in) {
    p.add_uniform(name, std::move(shape), fan_in, rng);
  };
  LayerShape cur{config_.in_features, config_.d};
  for (std::size_t i = 0; i < config_.layers.size(); ++i) {
    const LayerConfig& l = config_.layers[i];
    const std::string pre = layer_prefix(i);
    const auto f = static_cast<std::size_t>(cur.features);
    const auto fo = static_cast<std::size_t>(l.out_features);
    const auto d = static_cast<std::size_t>(cur.d);
    if (l.kind == LayerKind::kDeepSets) {
      p.add_uniform(pre + ".l1.weight", {f * d, fo}, f * d, rng);
      p.add_uniform(pre + ".l2.weight", {f * d, fo}, f * d, rng);
      if (!l.use_norm) uniform_bias(pre + ".bias", {fo, 1}, f * d);
    } else {
      const auto [shape, fan] = h_weight_shape(l.h, f, fo, d);
      p.add_uniform(pre + ".l1.weight", shape, fan, rng);
      if (has_l2(l.kind)) p.add_uniform(pre + ".l2.weight", shape, fan, rng);
      if (!l.use_norm) uniform_bias(pre + ".bias", bias_shape(l.h, fo, d), fan);
    }
    if (l.use_norm) {
      const auto w = static_cast<std::size_t>(shapes_[i].features);
      p.add(pre + ".norm.gamma", Tensor::full({w, 1}, 1.0));
      p.add(pre + ".norm.beta", Tensor::zeros({w, 1}));
    }
    cur = shapes_[i];
  }
  const auto f = static_cast<std::size_t>(cur.features);
  const auto d = static_cast<std::size_t>(cur.d);
  std::visit(
      [&](const auto& h) {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, InvariantHead>) {
          std::size_t in = f;
          // The first layer sees sums of n * d entries per feature.
          std::size_t fan = f * static_cast<std::size_t>(config_.n) * d;
          std::vector<int> widths = h.hidden;
          widths.push_back(h.outputs);
          for (std::size_t j = 0; j < widths.size(); ++j) {
            const auto out = static_cast<std::size_t>(widths[j]);
            const std::string pre = "head.fc" + std::to_string(j);
            p.add_uniform(pre + ".weight", {in, out}, fan, rng);
            p.add_uniform(pre + ".bias", {out}, fan, rng);
            in = fan = out;
          }
        } else if constexpr (std::is_same_v<T, HeadToN>) {
          p.add_uniform("head.a", {f, 1}, f * d, rng);
          p.add_uniform("head.b", {f, 1}, f * d, rng);
          p.add_uniform("head.bias", {1}, f * d, rng);
        } else if constexpr (std::is_same_v<T, HeadToD>) {
          const auto [shape, fan] = h_weight_shape(h.h, f, 1, d);
          p.add_uniform("head.l.weight", shape, fan, rng);
          p.add_uniform("head.bias", bias_shape(h.h, 1, d), fan, rng);
        } else {
          const auto [shape, fan] = h_weight_shape(h.h, f, 1, d);
          p.add_uniform("head.l1.weight", shape, fan, rng);
          p.add_uniform("head.l2.weight", shape, fan, rng);
          p.add_uniform("head.bias", bias_shape(h.h, 1, d), fan, rng);
        }
      },
      config_.head);
  return p;
}

Tensor Model::h_map(const HStructure& h, const std::string& name, const Bindings& w,
                    const Tensor& x, std::size_t d) const {
  const Tensor& weight = w[name];
  if (h.type == HStructure::Type::kCircConv) return circ_conv1d(x, weight);
  const std::size_t f = x.dim(x.rank() - 2);
  const Tensor dense =
      h.type == HStructure::Type::kFullDense
          ? weight
          : tied_weights(weight, orbits_.at(h.group.to_string()), d);
  const std::size_t fo = dense.dim(1) / d;
  if (dense.dim(0) != f * d) {
    throw DimensionError(name + ": weight " + shape_str(dense.shape()) + " for input " +
                         shape_str(x.shape()));
  }
  Shape out = x.shape();
  out[out.size() - 2] = fo;
  return reshape(matmul(reshape(x, {x.size() / (f * d), f * d}), dense), out);
}

Tensor Model::layer(std::size_t i, const Bindings& w, const Tensor& x, bool training) {
  const LayerConfig& l = config_.layers[i];
  const std::string pre = layer_prefix(i);
  const std::size_t b = x.dim(0), n = x.dim(1), f = x.dim(2), d = x.dim(3);
  // Normalized layers take their shift from the norm's beta instead.
  const auto biased = [&](const Tensor& t) { return l.use_norm ? t : add(t, w[pre + ".bias"]); };
  Tensor y;
  switch (l.kind) {
    case LayerKind::kSiamese:
      y = biased(h_map(l.h, pre + ".l1.weight", w, x, d));
      break;
    case LayerKind::kDssSum:
    case LayerKind::kDssMax: {
      const Tensor pooled = l.kind == LayerKind::kDssSum ? reduce_sum(x, 1, true) : reduce_max(x, 1, true);
      y = biased(add(h_map(l.h, pre + ".l1.weight", w, x, d), h_map(l.h, pre + ".l2.weight", w, pooled, d)));
      break;
    }
    case LayerKind::kDssAittala: {
      const Tensor z = biased(h_map(l.h, pre + ".l1.weight", w, x, d));
      const Tensor m = add(reduce_max(z, 1, true), Tensor::zeros(z.shape()));
      y = concat(z, m, 2);
      break;
    }
    case LayerKind::kDssSridhar: {
      const Tensor z = h_map(l.h, pre + ".l1.weight", w, x, d);
      y = biased(sub(z, reduce_mean(z, 1, true)));
      break;
    }
    case LayerKind::kDeepSets: {
      const std::size_t width = f * d;
      const Tensor flat = reshape(x, {b, n, width});
      const Tensor rest = sub(reduce_sum(flat, 1, true), flat);
      const Tensor own = matmul(reshape(flat, {b * n, width}), w[pre + ".l1.weight"]);
      const Tensor others = matmul(reshape(rest, {b * n, width}), w[pre + ".l2.weight"]);
      const std::size_t fo = static_cast<std::size_t>(l.out_features);
      y = biased(reshape(add(own, others), {b, n, fo, 1}));
      break;
    }
  }
  if (l.use_norm) {
    const std::string key = pre + ".norm";
    RunningStats& r = running_.at(key);
    if (training) {
      BatchStats stats;
      y = batch_standardize(y, 2, kNormEps, &stats);
      for (std::size_t c = 0; c < r.mean.size(); ++c) {
        r.mean[c] = kNormMomentum * r.mean[c] + (1 - kNormMomentum) * stats.mean[c];
        r.var[c] = kNormMomentum * r.var[c] + (1 - kNormMomentum) * stats.var[c];
      }
    } else {
      std::vector<double> inv(r.var.size());
      for (std::size_t c = 0; c < inv.size(); ++c) inv[c] = 1.0 / std::sqrt(r.var[c] + kNormEps);
      const std::size_t width = r.mean.size();
      y = mul(sub(y, Tensor({width, 1}, r.mean)), Tensor({width, 1}, inv));
    }
    y = add(mul(y, w[key + ".gamma"]), w[key + ".beta"]);
  }
  if (l.relu) y = relu(y);
  if (l.pool > 1) y = avg_pool_last(y, static_cast<std::size_t>(l.pool));
  return y;
}

Tensor Model::features(const Bindings& w, const Tensor& x, bool training) {
  if (x.rank() != 4 || x.dim(1) != static_cast<std::size_t>(config_.n) ||
      x.dim(2) != static_cast<std::size_t>(config_.in_features) ||
      x.dim(3) != static_cast<std::size_t>(config_.d)) {
    throw DimensionError("model input " + shape_str(x.shape()) + ", expected [B, " +
                         std::to_string(config_.n) + ", " + std::to_string(config_.in_features) +
                         ", " + std::to_string(config_.d) + "]");
  }
  Tensor h = x;
  for (std::size_t i = 0; i < config_.layers.size(); ++i) h = layer(i, w, h, training);
  return h;
}

Tensor Model::head(const Bindings& w, const Tensor& h) const {
  const std::size_t b = h.dim(0), n = h.dim(1), f = h.dim(2), d = h.dim(3);
  return std::visit(
      [&](const auto& hd) -> Tensor {
        using T = std::decay_t<decltype(hd)>;
        if constexpr (std::is_same_v<T, InvariantHead>) {
          Tensor z = reduce_sum(reduce_sum(h, 3), 1);
          const std::size_t layers = hd.hidden.size() + 1;
          for (std::size_t j = 0; j < layers; ++j) {
            const std::string pre = "head.fc" + std::to_string(j);
            z = add(matmul(z, w[pre + ".weight"]), w[pre + ".bias"]);
            if (j + 1 < layers) z = relu(z);
          }
          return z;
        } else if constexpr (std::is_same_v<T, HeadToN>) {
          const Tensor own = reduce_sum(h, 3);
          const Tensor rest = sub(reduce_sum(own, 1, true), own);
          const Tensor s = add(matmul(reshape(own, {b * n, f}), w["head.a"]),
                               matmul(reshape(rest, {b * n, f}), w["head.b"]));
          return reshape(add(s, w["head.bias"]), {b, n});
        } else if constexpr (std::is_same_v<T, HeadToD>) {
          const Tensor y = add(h_map(hd.h, "head.l.weight", w, reduce_sum(h, 1), d), w["head.bias"]);
          return reshape(y, {b, d});
        } else {
          const Tensor y = add(add(h_map(hd.h, "head.l1.weight", w, h, d),
                                   h_map(hd.h, "head.l2.weight", w, reduce_sum(h, 1, true), d)),
                               w["head.bias"]);
          return reshape(y, {b, n, d});
        }
      },
      config_.head);
}

Tensor Model::forward(const Bindings& w, const Tensor& x, bool training) {
  return head(w, features(w, x, training));
}

// ---------------------------------------------------------------------------
// Group actions on [B, n, f, d]

Tensor act_wreath(const Perm& q, const std::vector<Perm>& hs, const Tensor& x) {
  if (x.rank() != 4) throw DimensionError("act: expected [B, n, f, d], got " + shape_str(x.shape()));
  const std::size_t b = x.dim(0), n = x.dim(1), f = x.dim(2), d = x.dim(3);
  if (static_cast<std::size_t>(q.degree()) != n || hs.size() != n) {
    throw DimensionError("act: set permutation of degree " + std::to_string(q.degree()) +
                         " on " + std::to_string(n) + " elements");
  }
  for (const Perm& h : hs) {
    if (static_cast<std::size_t>(h.degree()) != d) {
      throw DimensionError("act: element permutation of degree " + std::to_string(h.degree()) +
                           " on length " + std::to_string(d));
    }
  }
  std::vector<double> out(x.size());
  const auto data = x.data();
  for (std::size_t bi = 0; bi < b; ++bi)
    for (std::size_t i = 0; i < n; ++i) {
      const auto src = static_cast<std::size_t>(q.preimage(static_cast<int>(i)));
      const Perm& h = hs[i];
      for (std::size_t c = 0; c < f; ++c)
        for (std::size_t t = 0; t < d; ++t)
          out[((bi * n + i) * f + c) * d + t] =
              data[((bi * n + src) * f + c) * d + static_cast<std::size_t>(h.preimage(static_cast<int>(t)))];
    }
  return Tensor(x.shape(), std::move(out));
}

Tensor act(const Perm& q, const Perm& h, const Tensor& x) {
  return act_wreath(q, std::vector<Perm>(static_cast<std::size_t>(q.degree()), h), x);
}

// ---------------------------------------------------------------------------
// Separation

double dss_witness(const Tensor& z) {
  if (z.rank() != 4 || z.dim(2) != 1) {
    throw DimensionError("dss_witness: expected [B, n, 1, d], got " + shape_str(z.shape()));
  }
  const int d = static_cast<int>(z.dim(3));
  ModelConfig c;
  c.n = static_cast<int>(z.dim(1));
  c.d = d;
  LayerConfig l;
  l.kind = LayerKind::kDssSum;
  l.h = HStructure::shared(GroupSpec::cyclic(d));
  l.relu = false;
  c.layers = {l};
  Model model(c);
  ParamStore p = model.init_params(0);
  // L1 = 0; L2 = identity, i.e. weight 1 on the diagonal orbit only.
  const OrbitPartition orbits = pair_orbits(GroupSpec::cyclic(d).lower());
  std::vector<double> l2(static_cast<std::size_t>(orbits.orbit_count), 0.0);
  l2[static_cast<std::size_t>(orbits.at(0, 0))] = 1.0;
  p.set_value("layer0.l1.weight", Tensor::zeros(p.value("layer0.l1.weight").shape()));
  p.set_value("layer0.l2.weight", Tensor(p.value("layer0.l2.weight").shape(), l2));
  p.set_value("layer0.bias", Tensor::zeros(p.value("layer0.bias").shape()));
  const Tensor total = model.features(Bindings::frozen(p), z);  // every row is sum_j z_j
  const Tensor inner = reduce_sum(mul(z, total), 3);
  return sum_all(mul(inner, inner)).item();
}

SeparationPair separation_pair() {
  SeparationPair s;
  s.x = Tensor({1, 2, 1, 2}, {1, 2, 3, 4});
  s.y = Tensor({1, 2, 1, 2}, {1, 2, 4, 3});
  s.witness_x = dss_witness(s.x);
  s.witness_y = dss_witness(s.y);
  return s;
}

namespace {

bool in_orbit(const GeneratorSet& gens, const Tensor& x, const Tensor& y) {
  if (x.shape() != y.shape() || x.dim(0) != 1 || x.dim(2) != 1) {
    throw DimensionError("orbit test: expected two [1, n, 1, d] tensors");
  }
  for (const Perm& g : closure(gens)) {
    if (apply_perm(g, x.data()) == y.values()) return true;
  }
  return false;
}

}  // namespace

bool in_product_orbit(const Tensor& x, const Tensor& y) {
  const int n = static_cast<int>(x.dim(1)), d = static_cast<int>(x.dim(3));
  return in_orbit(product_group(GroupSpec::symmetric(n).lower(), GroupSpec::cyclic(d).lower()), x, y);
}

bool in_wreath_orbit(const Tensor& x, const Tensor& y) {
  const int n = static_cast<int>(x.dim(1)), d = static_cast<int>(x.dim(3));
  return in_orbit(wreath_group(GroupSpec::cyclic(d).lower(), n), x, y);
}

double siamese_separation_gap(int seeds, std::uint64_t first_seed) {
  const SeparationPair s = separation_pair();
  ModelConfig c;
  c.n = 2;
  c.d = 2;
  LayerConfig l;
  l.kind = LayerKind::kSiamese;
  l.h = HStructure::shared(GroupSpec::cyclic(2));
  l.out_features = 4;
  c.layers = {l, l};
  c.head = InvariantHead{{4}, 1};
  Model model(c);
  double gap = 0;
  for (int seed = 0; seed < seeds; ++seed) {
    const ParamStore p = model.init_params(first_seed + static_cast<std::uint64_t>(seed));
    const Bindings w = Bindings::frozen(p);
    gap = std::max(gap, std::abs(model.forward(w, s.x).item() - model.forward(w, s.y).item()));
  }
  return gap;
}

}  // namespace equiset
