#include "equiset/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "equiset/dss.hpp"
#include "equiset/equimap.hpp"
#include "equiset/error.hpp"
#include "equiset/permgroup.hpp"
#include "equiset/train.hpp"

namespace equiset {
namespace {

constexpr double kResidualTol = 1e-10;
constexpr double kGradTol = 1e-4;
constexpr double kSeparationTol = 1e-9;

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write to " + path + " failed");
}

std::string sci(double v) {
  std::ostringstream ss;
  ss << std::setprecision(3) << std::scientific << v;
  return ss.str();
}

// A group element: uniform over the closure when it is small enough,
// otherwise a random word of generators.
class ElementSampler {
 public:
  ElementSampler(const GeneratorSet& gens, std::mt19937_64& rng) : gens_(gens), rng_(rng) {
    try {
      elements_ = closure(gens, 5000);
    } catch (const GroupTooLarge&) {
      elements_.clear();
    }
  }

  Perm operator()() {
    if (!elements_.empty()) return elements_[rng_() % elements_.size()];
    std::vector<int> id(static_cast<std::size_t>(gens_.degree()));
    std::iota(id.begin(), id.end(), 0);
    Perm g(id);
    for (int k = 0; k < 40; ++k) g = compose(gens_.generators()[rng_() % gens_.generators().size()], g);
    return g;
  }

 private:
  const GeneratorSet& gens_;
  std::mt19937_64& rng_;
  std::vector<Perm> elements_;
};

Tensor gaussian(Shape shape, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<double> v(numel(shape));
  for (double& x : v) x = nd(rng);
  return Tensor(std::move(shape), std::move(v));
}

// ---------------------------------------------------------------------------

int cmd_dim(const std::string& spec, std::size_t cap, std::ostream& out, std::ostream& err) {
  const GeneratorSet gens = parse_groupspec(spec).lower();
  const int orbits = pair_orbits(gens).orbit_count;
  out << "E = " << orbits << "\n";
  out << "orbits: " << orbits << "\n";
  try {
    const std::vector<Perm> elements = closure(gens, cap);
    const std::int64_t trace = dim_trace(elements);
    out << "trace:  " << trace << " (|G| = " << elements.size() << ")\n";
    if (trace != orbits) {
      err << "orbit count and trace average disagree\n";
      return kExitCheckFailed;
    }
  } catch (const GroupTooLarge&) {
    out << "trace:  skipped (|G| > " << cap << ")\n";
  }
  return kExitOk;
}

int cmd_scheme(const std::string& spec, const std::string& path, int scale, std::ostream& out) {
  const GeneratorSet gens = parse_groupspec(spec).lower();
  const OrbitPartition p = pair_orbits(gens);
  if (scale <= 0) scale = std::max(1, 256 / p.degree);
  const SchemeImage image = render_scheme(p, scale);
  write_ppm(image, path);
  out << "wrote " << path << ": " << image.width << "x" << image.height << ", " << distinct_colors(image)
      << " colors, E = " << p.orbit_count << "\n";
  return kExitOk;
}

int cmd_basis(const std::string& spec, const std::string& path, std::ostream& out) {
  const EquivariantBasis b = basis_from_partition(pair_orbits(parse_groupspec(spec).lower()));
  const std::string json = basis_json(b);
  if (path.empty()) {
    out << json << "\n";
  } else {
    write_file(path, json + "\n");
    out << "wrote " << path << ": " << b.size() << " matrices of size " << b.degree << "x" << b.degree << "\n";
  }
  return kExitOk;
}

int cmd_verify(const std::string& spec_text, int trials, std::uint64_t seed, std::ostream& out) {
  const GroupSpec spec = parse_groupspec(spec_text);
  const GeneratorSet gens = spec.lower();
  const EquivariantBasis basis = basis_from_partition(pair_orbits(gens));
  out << "degree " << gens.degree() << ", " << gens.generators().size() << " generators, E = " << basis.size()
      << "\n";
  double worst = 0;

  std::size_t failures = 0;
  for (const BasisMatrix& m : basis.matrices)
    for (const Perm& g : gens.generators()) failures += !commutes_exactly(m.matrix, g);
  out << "exact commutation: " << failures << " failures\n";
  if (failures) worst = std::max(worst, 1.0);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd layer = Eigen::MatrixXd::Zero(gens.degree(), gens.degree());
  for (const BasisMatrix& m : basis.matrices) layer += nd(rng) * m.matrix;
  const double random_layer = check_equivariance(layer, gens, trials, seed);
  out << "random layer residual: " << sci(random_layer) << "\n";
  worst = std::max(worst, random_layer);

  if (const auto* prod = std::get_if<GroupSpec::Product>(&spec.node)) {
    const EquivariantBasis a = basis_from_partition(pair_orbits(prod->left->lower()));
    const EquivariantBasis b = basis_from_partition(pair_orbits(prod->right->lower()));
    const double r = mutual_projection_residual(kron_basis(a, b), basis);
    out << "kron vs orbit residual: " << sci(r) << "\n";
    worst = std::max(worst, r);
  }
  if (const auto* wr = std::get_if<GroupSpec::Wreath>(&spec.node)) {
    const EquivariantBasis h = basis_from_partition(pair_orbits(wr->base->lower()));
    if (basis_is_transitive(h)) {
      const double r = mutual_projection_residual(wreath_basis(h, wr->copies), basis);
      out << "wreath vs orbit residual: " << sci(r) << "\n";
      worst = std::max(worst, r);
    } else {
      out << "wreath vs orbit residual: skipped (base group not transitive)\n";
    }
  }

  // A DSS layer on sets of three elements with this group acting on each.
  ModelConfig c;
  c.n = 3;
  c.d = gens.degree();
  c.in_features = 2;
  LayerConfig l;
  l.kind = LayerKind::kDssSum;
  l.h = HStructure::shared(spec);
  l.out_features = 2;
  l.relu = true;
  c.layers = {l};
  Model model(c);
  const ParamStore params = model.init_params(seed);
  const Bindings w = Bindings::frozen(params);
  ElementSampler sample(gens, rng);
  double dss = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<int> q(3);
    std::iota(q.begin(), q.end(), 0);
    std::shuffle(q.begin(), q.end(), rng);
    const Perm qp(q), h = sample();
    const Tensor x = gaussian({2, 3, 2, static_cast<std::size_t>(gens.degree())}, rng);
    const Tensor a = model.features(w, act(qp, h, x));
    const Tensor b = act(qp, h, model.features(w, x));
    for (std::size_t i = 0; i < a.size(); ++i) dss = std::max(dss, std::abs(a[i] - b[i]));
  }
  out << "dss layer residual (n = 3): " << sci(dss) << "\n";
  worst = std::max(worst, dss);

  out << "max residual = " << sci(worst) << " (threshold " << sci(kResidualTol) << ")\n";
  return worst <= kResidualTol ? kExitOk : kExitCheckFailed;
}

int cmd_gradcheck(const std::string& path, std::uint64_t seed, double eps, std::size_t samples, std::size_t batch,
                  std::ostream& out) {
  Model model(load_model_config(path));
  const ModelConfig& c = model.config();
  ParamStore params = model.init_params(seed);
  std::mt19937_64 rng(seed + 1);
  const Tensor x = gaussian({batch, static_cast<std::size_t>(c.n), static_cast<std::size_t>(c.in_features),
                             static_cast<std::size_t>(c.d)},
                            rng);
  ScalarObjective f;
  const auto* inv = std::get_if<InvariantHead>(&c.head);
  if (inv && inv->outputs > 1) {
    std::vector<int> labels(batch);
    for (int& y : labels) y = static_cast<int>(rng() % static_cast<std::uint64_t>(inv->outputs));
    f = [&model, x, labels](const Bindings& w) { return softmax_xent(model.forward(w, x, true), labels); };
  } else {
    const Tensor probe = gaussian(model.forward(Bindings::frozen(params), x, true).shape(), rng);
    f = [&model, x, probe](const Bindings& w) { return sum_all(mul(model.forward(w, x, true), probe)); };
  }
  const GradCheckReport r = grad_check(f, params, eps, samples, seed);
  out << "max relative error = " << sci(r.max_rel_error) << " over " << r.coordinates << " coordinates (worst "
      << r.worst_param << "[" << r.worst_index << "])\n";
  return r.max_rel_error <= kGradTol ? kExitOk : kExitCheckFailed;
}

int cmd_separation(int inits, std::uint64_t seed, std::ostream& out) {
  const SeparationPair s = separation_pair();
  auto show = [](const Tensor& t) {
    std::ostringstream ss;
    ss << "[[" << t[0] << ", " << t[1] << "], [" << t[2] << ", " << t[3] << "]]";
    return ss.str();
  };
  const bool wreath = in_wreath_orbit(s.x, s.y), product = in_product_orbit(s.x, s.y);
  out << "X = " << show(s.x) << ", Y = " << show(s.y) << "\n";
  out << "same wreath orbit: " << (wreath ? "yes" : "no") << "\n";
  out << "same S_2 x C_2 orbit: " << (product ? "yes" : "no") << "\n";
  out << "DSS witness: " << s.witness_x << " vs " << s.witness_y << "\n";
  const double gap = siamese_separation_gap(inits, seed);
  out << "Siamese max |Δ| " << (gap < kSeparationTol ? "<" : ">=") << " 1e-9 (observed " << sci(gap) << " over "
      << inits << " initializations)\n";
  const bool ok = wreath && !product && gap < kSeparationTol && std::abs(s.witness_x - s.witness_y) >= 1;
  return ok ? kExitOk : kExitCheckFailed;
}

struct DataOptions {
  std::string cache;
  std::size_t train = 1000, val = 300, test = 1000;
  int n = 25, T = 100, classes = 3;
  double sigma = 3.0;
};

void add_data_options(CLI::App* sub, DataOptions& d, bool with_cache) {
  if (with_cache) sub->add_option("--data", d.cache, "dataset file written by signal-gen");
  sub->add_option("--train-size", d.train, "training samples")->capture_default_str();
  sub->add_option("--val", d.val, "validation samples")->capture_default_str();
  sub->add_option("--test", d.test, "test samples")->capture_default_str();
  sub->add_option("--n", d.n, "set size")->capture_default_str();
  sub->add_option("--T", d.T, "time steps")->capture_default_str();
  sub->add_option("--sigma", d.sigma, "noise standard deviation in amplitudes")->capture_default_str();
  sub->add_option("--classes", d.classes, "2 or 3 signal types")->capture_default_str();
}

DatasetSpec dataset_spec(const DataOptions& d, std::uint64_t seed) {
  DatasetSpec s;
  s.train_count = d.train;
  s.val_count = d.val;
  s.test_count = d.test;
  s.n = d.n;
  s.T = d.T;
  s.sigma_mult = d.sigma;
  s.classes = d.classes;
  s.seed = seed;
  return s;
}

struct TrainFlags {
  int epochs = 40;
  double lr = 0;
  std::size_t batch = 64;
  int patience = 8;
};

void add_train_options(CLI::App* sub, TrainFlags& t) {
  sub->add_option("--epochs", t.epochs, "maximum epochs")->capture_default_str();
  sub->add_option("--lr", t.lr, "Adam learning rate (0: method default)")->capture_default_str();
  sub->add_option("--batch", t.batch, "mini-batch size")->capture_default_str();
  sub->add_option("--patience", t.patience, "epochs without improvement before stopping")->capture_default_str();
}

int cmd_train(const std::string& method, const std::string& config_path, const DataOptions& d, const TrainFlags& t,
              std::uint64_t seed, const std::string& out_path, bool quiet, std::ostream& out) {
  const SignalSplits data = d.cache.empty() ? gen_signal_dataset(dataset_spec(d, seed)) : load_dataset(d.cache);
  int classes = 0;
  for (int y : data.train.labels) classes = std::max(classes, y + 1);
  classes = std::max(classes, d.classes);
  const ModelConfig config =
      config_path.empty() ? method_config(method, data.train.n, data.train.T, classes) : load_model_config(config_path);
  TrainOptions opt;
  opt.epochs = t.epochs;
  opt.lr = t.lr > 0 ? t.lr : (config_path.empty() ? method_default_lr(method) : 1e-3);
  opt.batch = t.batch;
  opt.patience = t.patience;
  opt.seed = seed;
  opt.log = quiet ? nullptr : &out;
  TrainedModel trained{Model(config), ParamStore()};
  const Metrics m = train_model(config, data, opt, &trained);
  out << "best validation accuracy = " << m.best_val_accuracy << " (epoch " << m.best_epoch << " of "
      << m.epochs_ran << ")\n";
  out << "test accuracy = " << m.test_accuracy << "\n";
  out << "seconds = " << std::fixed << std::setprecision(1) << m.seconds << std::defaultfloat << "\n";
  if (!out_path.empty()) {
    ParamStore saved = trained.params;
    for (const auto& [key, stats] : trained.model.running_stats()) {
      saved.add(key + ".running_mean", Tensor({stats.mean.size()}, stats.mean));
      saved.add(key + ".running_var", Tensor({stats.var.size()}, stats.var));
    }
    saved.save(out_path);
    out << "wrote " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_compare(const std::vector<std::size_t>& sizes, const std::vector<std::string>& methods, std::uint64_t seed,
                int runs, const DataOptions& d, const TrainFlags& t, unsigned threads, const std::string& prefix,
                std::ostream& out) {
  ComparisonSpec spec;
  spec.sizes = sizes;
  spec.methods = methods;
  spec.seeds.clear();
  for (int k = 0; k < runs; ++k) spec.seeds.push_back(seed + static_cast<std::uint64_t>(k));
  spec.val_count = d.val;
  spec.test_count = d.test;
  spec.n = d.n;
  spec.T = d.T;
  spec.sigma_mult = d.sigma;
  spec.train.epochs = t.epochs;
  spec.train.batch = t.batch;
  spec.train.patience = t.patience;
  spec.train.log = &out;
  spec.lr = t.lr;
  spec.threads = threads;
  const auto rows = run_comparison(spec);
  write_file(prefix + ".csv", comparison_csv(rows));
  write_file(prefix + ".svg", comparison_svg(rows));
  out << "method,train_size,mean,std,median\n";
  for (const auto& [method, points] : summarize(rows))
    for (const SeriesPoint& p : points)
      out << method << "," << p.train_size << "," << p.mean << "," << p.stddev << "," << p.median << "\n";
  out << "wrote " << prefix << ".csv and " << prefix << ".svg\n";
  return kExitOk;
}

int cmd_plot(const std::string& csv_path, const std::string& svg_path, std::ostream& out) {
  const auto rows = parse_comparison_csv(read_file(csv_path));
  write_file(svg_path, comparison_svg(rows));
  out << "wrote " << svg_path << " (" << summarize(rows).size() << " series)\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Equivariant layers for sets of symmetric elements", "equiset"};
  app.require_subcommand(1);
  app.footer(std::string("Group specifications:\n") + kGroupSpecGrammar);

  std::string spec, path, method = "dss_sum", config_path;
  std::uint64_t seed = 0;
  std::size_t cap = kDefaultClosureCap;
  int scale = 0, trials = 20, inits = 20, runs = 3;
  double eps = 1e-5;
  std::size_t samples = 64, batch = 4;
  bool quiet = false;
  unsigned threads = 0;
  DataOptions data;
  TrainFlags train_flags;
  std::vector<std::size_t> sizes{250, 500, 1000, 2000, 4000};
  std::vector<std::string> methods{"dss_sum", "siamese_ds", "deepsets"};

  auto* dim = app.add_subcommand("dim", "dimension of the equivariant layer space");
  dim->add_option("groupspec", spec, "group")->required();
  dim->add_option("--cap", cap, "largest group enumerated for the trace formula")->capture_default_str();

  auto* scheme = app.add_subcommand("scheme", "write the parameter-sharing image (PPM)");
  scheme->add_option("groupspec", spec, "group")->required();
  scheme->add_option("-o,--out", path, "output .ppm")->required();
  scheme->add_option("--scale", scale, "pixels per entry (0: fit about 256 px)");

  auto* basis = app.add_subcommand("basis", "export orbit basis matrices (JSON)");
  basis->add_option("groupspec", spec, "group")->required();
  basis->add_option("-o,--out", path, "output .json (default stdout)");

  auto* verify = app.add_subcommand("verify", "equivariance residual checks");
  verify->add_option("groupspec", spec, "group")->required();
  verify->add_option("--trials", trials, "random inputs per check")->capture_default_str();
  verify->add_option("--seed", seed, "random seed")->capture_default_str();

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of a model's gradients");
  gradcheck->add_option("model", path, "model configuration (.json)")->required()->check(CLI::ExistingFile);
  gradcheck->add_option("--seed", seed, "random seed")->capture_default_str();
  gradcheck->add_option("--eps", eps, "central difference step")->capture_default_str();
  gradcheck->add_option("--samples", samples, "coordinates checked (0: all)")->capture_default_str();
  gradcheck->add_option("--batch", batch, "input batch size")->capture_default_str();

  auto* signal_gen = app.add_subcommand("signal-gen", "generate and cache the signal dataset");
  signal_gen->add_option("-o,--out", path, "output file")->required();
  signal_gen->add_option("--seed", seed, "random seed")->capture_default_str();
  add_data_options(signal_gen, data, false);

  auto* train = app.add_subcommand("train", "train one model on the signal task");
  train->add_option("--method", method, "preset: " + [] {
    std::string s;
    for (const std::string& m : signal_methods()) s += (s.empty() ? "" : ", ") + m;
    return s;
  }())->capture_default_str();
  train->add_option("--config", config_path, "model configuration (.json) instead of a preset")
      ->check(CLI::ExistingFile);
  train->add_option("--seed", seed, "random seed (data and initialization)")->capture_default_str();
  train->add_option("-o,--out", path, "write trained parameters");
  train->add_flag("-q,--quiet", quiet, "no per-epoch log");
  add_data_options(train, data, true);
  add_train_options(train, train_flags);

  auto* compare = app.add_subcommand("compare", "train several methods over sizes and seeds");
  compare->add_option("--sizes", sizes, "training set sizes")->delimiter(',')->capture_default_str();
  compare->add_option("--methods", methods, "method presets")->delimiter(',')->capture_default_str();
  compare->add_option("--seed", seed, "first seed")->capture_default_str();
  compare->add_option("--runs", runs, "seeds per cell")->capture_default_str()->check(CLI::PositiveNumber);
  compare->add_option("--threads", threads, "workers (0: EQUISET_THREADS or 1)")->capture_default_str();
  std::string prefix = "comparison";
  compare->add_option("-o,--out", prefix, "output prefix for .csv and .svg")->capture_default_str();
  add_data_options(compare, data, false);
  add_train_options(compare, train_flags);

  auto* separation = app.add_subcommand("separation", "Siamese vs DSS expressivity demo");
  separation->add_option("--inits", inits, "random Siamese models")->capture_default_str();
  separation->add_option("--seed", seed, "first seed")->capture_default_str();

  auto* plot = app.add_subcommand("plot", "chart a comparison table");
  plot->add_option("csv", path, "comparison .csv")->required()->check(CLI::ExistingFile);
  std::string svg_path;
  plot->add_option("-o,--out", svg_path, "output .svg")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (dim->parsed()) return cmd_dim(spec, cap, out, err);
    if (scheme->parsed()) return cmd_scheme(spec, path, scale, out);
    if (basis->parsed()) return cmd_basis(spec, path, out);
    if (verify->parsed()) return cmd_verify(spec, trials, seed, out);
    if (gradcheck->parsed()) return cmd_gradcheck(path, seed, eps, samples, batch, out);
    if (signal_gen->parsed()) {
      const SignalSplits d = gen_signal_dataset(dataset_spec(data, seed));
      save_dataset(d, path);
      out << "wrote " << path << ": " << d.train.size() << " train, " << d.val.size() << " val, " << d.test.size()
          << " test samples of " << data.n << "x" << data.T << "\n";
      return kExitOk;
    }
    if (train->parsed()) return cmd_train(method, config_path, data, train_flags, seed, path, quiet, out);
    if (compare->parsed()) return cmd_compare(sizes, methods, seed, runs, data, train_flags, threads, prefix, out);
    if (separation->parsed()) return cmd_separation(inits, seed, out);
    if (plot->parsed()) return cmd_plot(path, svg_path, out);
  } catch (const TrainingDiverged& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace equiset
