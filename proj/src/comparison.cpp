#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "equiset/train.hpp"

namespace equiset {

unsigned worker_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("EQUISET_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

std::vector<ComparisonRow> run_comparison(const ComparisonSpec& spec) {
  if (spec.sizes.empty() || spec.methods.empty() || spec.seeds.empty()) {
    throw ConfigError("comparison needs at least one size, method and seed");
  }
  for (const std::string& m : spec.methods) method_config(m, spec.n, spec.T);  // validates names
  const std::size_t max_size = *std::max_element(spec.sizes.begin(), spec.sizes.end());

  // One pool per seed; every size trains on a prefix of the same train split,
  // so validation and test samples never enter training.
  std::vector<SignalSplits> pools;
  for (std::uint64_t seed : spec.seeds) {
    DatasetSpec ds;
    ds.train_count = max_size;
    ds.val_count = spec.val_count;
    ds.test_count = spec.test_count;
    ds.n = spec.n;
    ds.T = spec.T;
    ds.sigma_mult = spec.sigma_mult;
    ds.seed = seed;
    pools.push_back(gen_signal_dataset(ds));
  }

  struct Cell {
    std::size_t method, size, seed;
  };
  std::vector<Cell> cells;
  for (std::size_t m = 0; m < spec.methods.size(); ++m)
    for (std::size_t s = 0; s < spec.sizes.size(); ++s)
      for (std::size_t k = 0; k < spec.seeds.size(); ++k) cells.push_back({m, s, k});

  std::vector<ComparisonRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      const std::string& method = spec.methods[c.method];
      const std::size_t size = spec.sizes[c.size];
      const SignalSplits& pool = pools[c.seed];
      SignalSplits data{pool.train.slice(0, size), pool.val, pool.test};
      check_disjoint(data);
      TrainOptions opt = spec.train;
      opt.seed = spec.seeds[c.seed];
      opt.lr = spec.lr > 0 ? spec.lr : method_default_lr(method);
      opt.log = nullptr;
      try {
        const Metrics m = train_model(method_config(method, spec.n, spec.T), data, opt);
        rows[i] = {method, size, opt.seed, m.test_accuracy, m.epochs_ran, m.seconds};
        if (spec.train.log) {
          std::lock_guard<std::mutex> lock(log_mutex);
          *spec.train.log << method << " size " << size << " seed " << opt.seed << ": test "
                          << m.test_accuracy << " after " << m.epochs_ran << " epochs (" << std::fixed
                          << std::setprecision(1) << m.seconds << " s)" << std::defaultfloat << std::endl;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(log_mutex);
        if (!failure) failure = std::current_exception();
        next = cells.size();
      }
    }
  };
  const unsigned workers = std::min<unsigned>(worker_count(spec.threads), static_cast<unsigned>(cells.size()));
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < workers; ++t) threads.emplace_back(work);
  work();
  for (std::thread& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

constexpr const char* kCsvHeader = "method,train_size,seed,test_accuracy,epochs_ran,seconds";

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const ComparisonRow& r : rows) {
    out += r.method + "," + std::to_string(r.train_size) + "," + std::to_string(r.seed) + "," +
           fmt(r.test_accuracy, 6) + "," + std::to_string(r.epochs_ran) + "," + fmt(r.seconds, 3) + "\n";
  }
  return out;
}

std::vector<ComparisonRow> parse_comparison_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) {
    throw ConfigError(std::string("comparison table must start with '") + kCsvHeader + "'");
  }
  std::vector<ComparisonRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    const std::string where = "line " + std::to_string(lineno);
    if (f.size() != 6 || f[0].empty()) throw ConfigError(where + ": expected 6 fields");
    try {
      std::size_t used = 0;
      ComparisonRow r;
      r.method = f[0];
      auto whole = [&](const std::string& s, auto v) {
        if (used != s.size()) throw ConfigError(where + ": bad number '" + s + "'");
        return v;
      };
      r.train_size = whole(f[1], std::stoull(f[1], &used));
      r.seed = whole(f[2], std::stoull(f[2], &used));
      r.test_accuracy = whole(f[3], std::stod(f[3], &used));
      r.epochs_ran = whole(f[4], std::stoi(f[4], &used));
      r.seconds = whole(f[5], std::stod(f[5], &used));
      if (r.test_accuracy < 0 || r.test_accuracy > 1) throw ConfigError(where + ": accuracy outside [0, 1]");
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ConfigError(where + ": bad number");
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Summary and chart

std::vector<std::pair<std::string, std::vector<SeriesPoint>>> summarize(const std::vector<ComparisonRow>& rows) {
  std::vector<std::pair<std::string, std::vector<SeriesPoint>>> out;
  for (const ComparisonRow& r : rows) {
    if (std::none_of(out.begin(), out.end(), [&](const auto& s) { return s.first == r.method; })) {
      out.emplace_back(r.method, std::vector<SeriesPoint>{});
    }
  }
  for (auto& [method, points] : out) {
    std::vector<std::size_t> sizes;
    for (const ComparisonRow& r : rows)
      if (r.method == method) sizes.push_back(r.train_size);
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    for (std::size_t size : sizes) {
      std::vector<double> acc;
      for (const ComparisonRow& r : rows)
        if (r.method == method && r.train_size == size) acc.push_back(r.test_accuracy);
      double mean = 0;
      for (double a : acc) mean += a;
      mean /= static_cast<double>(acc.size());
      double var = 0;
      for (double a : acc) var += (a - mean) * (a - mean);
      const double sd = acc.size() > 1 ? std::sqrt(var / static_cast<double>(acc.size() - 1)) : 0.0;
      std::sort(acc.begin(), acc.end());
      const std::size_t k = acc.size();
      const double median = k % 2 ? acc[k / 2] : 0.5 * (acc[k / 2 - 1] + acc[k / 2]);
      points.push_back({size, mean, sd, median, k});
    }
  }
  return out;
}

std::string comparison_svg(const std::vector<ComparisonRow>& rows) {
  static const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                        "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 170, kTop = 30, kBottom = 60;
  const auto series = summarize(rows);

  double xmin = 0, xmax = 0, ymin = 1, ymax = 0;
  bool first = true;
  for (const auto& [method, pts] : series)
    for (const SeriesPoint& p : pts) {
      const double lx = std::log10(static_cast<double>(std::max<std::size_t>(p.train_size, 1)));
      xmin = first ? lx : std::min(xmin, lx);
      xmax = first ? lx : std::max(xmax, lx);
      ymin = std::min(ymin, p.mean - p.stddev);
      ymax = std::max(ymax, p.mean + p.stddev);
      first = false;
    }
  if (first) ymin = 0, ymax = 1;
  if (xmax - xmin < 1e-9) xmin -= 0.5, xmax += 0.5;
  ymin = std::max(0.0, std::floor(ymin * 10) / 10);
  ymax = std::min(1.0, std::ceil(ymax * 10) / 10);
  if (ymax - ymin < 0.1) ymax = std::min(1.0, ymin + 0.1), ymin = ymax - 0.1;

  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](std::size_t size) {
    const double lx = std::log10(static_cast<double>(std::max<std::size_t>(size, 1)));
    return kLeft + (lx - xmin) / (xmax - xmin) * pw;
  };
  auto py = [&](double acc) { return kTop + (1 - (acc - ymin) / (ymax - ymin)) * ph; };
  auto f2 = [](double v) { return fmt(v, 2); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f2(kW) + "\" height=\"" + f2(kH) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<rect x=\"" + f2(kLeft) + "\" y=\"" + f2(kTop) + "\" width=\"" + f2(pw) + "\" height=\"" + f2(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double acc = ymin + (ymax - ymin) * i / 4.0;
    s += "<text x=\"" + f2(kLeft - 8) + "\" y=\"" + f2(py(acc) + 4) + "\" text-anchor=\"end\">" + fmt(acc, 2) +
         "</text>\n";
  }
  std::vector<std::size_t> ticks;
  for (const auto& [method, pts] : series)
    for (const SeriesPoint& p : pts) ticks.push_back(p.train_size);
  std::sort(ticks.begin(), ticks.end());
  ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
  for (std::size_t t : ticks) {
    s += "<text x=\"" + f2(px(t)) + "\" y=\"" + f2(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
         std::to_string(t) + "</text>\n";
  }
  s += "<text x=\"" + f2(kLeft + pw / 2) + "\" y=\"" + f2(kH - 15) +
       "\" text-anchor=\"middle\">training set size</text>\n";
  s += "<text transform=\"translate(18," + f2(kTop + ph / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">test accuracy</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& [method, pts] = series[k];
    const std::string color = kColors[k % std::size(kColors)];
    std::string band, line;
    for (const SeriesPoint& p : pts) band += f2(px(p.train_size)) + "," + f2(py(p.mean + p.stddev)) + " ";
    for (auto it = pts.rbegin(); it != pts.rend(); ++it)
      band += f2(px(it->train_size)) + "," + f2(py(it->mean - it->stddev)) + " ";
    for (const SeriesPoint& p : pts) line += f2(px(p.train_size)) + "," + f2(py(p.mean)) + " ";
    band.pop_back();
    line.pop_back();
    s += "<g class=\"series\" data-method=\"" + method + "\">\n";
    s += "<polygon class=\"band\" points=\"" + band + "\" fill=\"" + color +
         "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    s += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    for (const SeriesPoint& p : pts) {
      s += "<circle cx=\"" + f2(px(p.train_size)) + "\" cy=\"" + f2(py(p.mean)) + "\" r=\"3\" fill=\"" + color +
           "\"/>\n";
    }
    const double ly = kTop + 10 + 20.0 * static_cast<double>(k);
    s += "<line x1=\"" + f2(kLeft + pw + 15) + "\" y1=\"" + f2(ly) + "\" x2=\"" + f2(kLeft + pw + 35) +
         "\" y2=\"" + f2(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + f2(kLeft + pw + 40) + "\" y=\"" + f2(ly + 4) + "\">" + method + "</text>\n";
    s += "</g>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace equiset
