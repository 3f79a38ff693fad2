#include "equiset/permgroup.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <string>
#include <unordered_set>

namespace equiset {

namespace {

struct ImageHash {
  std::size_t operator()(const std::vector<int>& v) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (int x : v) {
      h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

}  // namespace

Perm::Perm(std::vector<int> images) : map_(std::move(images)), inverse_(map_.size(), -1) {
  if (map_.empty()) {
    throw DimensionError("permutation degree must be positive");
  }
  const int n = static_cast<int>(map_.size());
  for (int i = 0; i < n; ++i) {
    const int gi = map_[static_cast<std::size_t>(i)];
    if (gi < 0 || gi >= n || inverse_[static_cast<std::size_t>(gi)] != -1) {
      throw DimensionError("not a bijection on {0.." + std::to_string(n - 1) + "}");
    }
    inverse_[static_cast<std::size_t>(gi)] = i;
  }
}

Perm Perm::identity(int degree) {
  if (degree <= 0) {
    throw DimensionError("permutation degree must be positive");
  }
  std::vector<int> id(static_cast<std::size_t>(degree));
  std::iota(id.begin(), id.end(), 0);
  return Perm(id, id);
}

Perm Perm::inverse() const { return Perm(inverse_, map_); }

bool Perm::is_identity() const { return fixed_points() == degree(); }

int Perm::fixed_points() const {
  int count = 0;
  for (std::size_t i = 0; i < map_.size(); ++i) {
    count += map_[i] == static_cast<int>(i);
  }
  return count;
}

std::vector<double> apply_perm(const Perm& g, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(g.degree())) {
    throw DimensionError("apply_perm: vector length " + std::to_string(x.size()) +
                         " != degree " + std::to_string(g.degree()));
  }
  std::vector<double> out(x.size());
  for (int i = 0; i < g.degree(); ++i) {
    out[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(g.preimage(i))];
  }
  return out;
}

Perm compose(const Perm& g, const Perm& h) {
  if (g.degree() != h.degree()) {
    throw DimensionError("compose: degree mismatch");
  }
  std::vector<int> out(static_cast<std::size_t>(g.degree()));
  for (int i = 0; i < g.degree(); ++i) {
    out[static_cast<std::size_t>(i)] = g(h(i));
  }
  return Perm(std::move(out));
}

GeneratorSet::GeneratorSet(int degree, std::vector<Perm> generators)
    : degree_(degree), generators_(std::move(generators)) {
  if (degree_ <= 0) {
    throw DimensionError("generator set degree must be positive");
  }
  if (generators_.empty()) {
    throw DimensionError("generator set must be nonempty");
  }
  for (const Perm& g : generators_) {
    if (g.degree() != degree_) {
      throw DimensionError("generator of degree " + std::to_string(g.degree()) +
                           " in a set of degree " + std::to_string(degree_));
    }
  }
}

std::vector<Perm> closure(const GeneratorSet& gens, std::size_t cap) {
  if (cap == 0) {
    throw std::invalid_argument("closure: cap must be positive");
  }
  std::vector<Perm> elements{Perm::identity(gens.degree())};
  std::unordered_set<std::vector<int>, ImageHash> seen{elements.front().images()};
  for (std::size_t next = 0; next < elements.size(); ++next) {
    for (const Perm& g : gens.generators()) {
      Perm candidate = compose(g, elements[next]);
      if (seen.insert(candidate.images()).second) {
        if (elements.size() == cap) {
          throw GroupTooLarge("group too large (more than " + std::to_string(cap) +
                              " elements), use orbit method");
        }
        elements.push_back(std::move(candidate));
      }
    }
  }
  return elements;
}

OrbitPartition pair_orbits(const GeneratorSet& gens) {
  const std::size_t l = static_cast<std::size_t>(gens.degree());
  OrbitPartition part;
  part.degree = gens.degree();
  part.orbit_id.assign(l * l, -1);

  std::vector<std::size_t> frontier;
  for (std::size_t start = 0; start < l * l; ++start) {
    if (part.orbit_id[start] != -1) continue;
    const int id = part.orbit_count++;
    part.orbit_id[start] = id;
    frontier.assign(1, start);
    while (!frontier.empty()) {
      const std::size_t cur = frontier.back();
      frontier.pop_back();
      const int s = static_cast<int>(cur / l);
      const int t = static_cast<int>(cur % l);
      for (const Perm& g : gens.generators()) {
        const std::size_t img =
            static_cast<std::size_t>(g(s)) * l + static_cast<std::size_t>(g(t));
        if (part.orbit_id[img] == -1) {
          part.orbit_id[img] = id;
          frontier.push_back(img);
        }
      }
    }
  }
  return part;
}

std::vector<int> point_orbits(const GeneratorSet& gens) {
  const int l = gens.degree();
  std::vector<int> id(static_cast<std::size_t>(l), -1);
  int count = 0;
  std::vector<int> frontier;
  for (int start = 0; start < l; ++start) {
    if (id[static_cast<std::size_t>(start)] != -1) continue;
    id[static_cast<std::size_t>(start)] = count;
    frontier.assign(1, start);
    while (!frontier.empty()) {
      const int cur = frontier.back();
      frontier.pop_back();
      for (const Perm& g : gens.generators()) {
        if (id[static_cast<std::size_t>(g(cur))] == -1) {
          id[static_cast<std::size_t>(g(cur))] = count;
          frontier.push_back(g(cur));
        }
      }
    }
    ++count;
  }
  return id;
}

bool is_transitive(const GeneratorSet& gens) {
  const auto ids = point_orbits(gens);
  return std::all_of(ids.begin(), ids.end(), [](int v) { return v == 0; });
}

std::int64_t dim_trace(std::span<const Perm> elements) {
  if (elements.empty()) {
    throw NotAGroup("dim_trace: empty element list");
  }
  std::int64_t total = 0;
  for (const Perm& g : elements) {
    const std::int64_t fix = g.fixed_points();
    total += fix * fix;
  }
  const auto order = static_cast<std::int64_t>(elements.size());
  if (total % order != 0) {
    throw NotAGroup("input not a group: sum of squared traces " + std::to_string(total) +
                    " is not divisible by " + std::to_string(order));
  }
  return total / order;
}

GeneratorSet product_group(const GeneratorSet& a, const GeneratorSet& b) {
  const int la = a.degree();
  const int lb = b.degree();
  std::vector<Perm> gens;
  gens.reserve(a.generators().size() + b.generators().size());
  for (const Perm& ga : a.generators()) {
    std::vector<int> img(static_cast<std::size_t>(la * lb));
    for (int i = 0; i < la; ++i)
      for (int j = 0; j < lb; ++j) img[static_cast<std::size_t>(i * lb + j)] = ga(i) * lb + j;
    gens.emplace_back(std::move(img));
  }
  for (const Perm& gb : b.generators()) {
    std::vector<int> img(static_cast<std::size_t>(la * lb));
    for (int i = 0; i < la; ++i)
      for (int j = 0; j < lb; ++j) img[static_cast<std::size_t>(i * lb + j)] = i * lb + gb(j);
    gens.emplace_back(std::move(img));
  }
  return GeneratorSet(la * lb, std::move(gens));
}

namespace {

// Generators of S_n: the transposition (0 1) and the n-cycle.
std::vector<Perm> symmetric_generators(int n) {
  if (n == 1) return {Perm::identity(1)};
  std::vector<int> swap(static_cast<std::size_t>(n));
  std::iota(swap.begin(), swap.end(), 0);
  std::swap(swap[0], swap[1]);
  std::vector<int> cycle(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) cycle[static_cast<std::size_t>(i)] = (i + 1) % n;
  if (n == 2) return {Perm(swap)};
  return {Perm(swap), Perm(cycle)};
}

}  // namespace

GeneratorSet wreath_group(const GeneratorSet& h, int copies) {
  if (copies <= 0) {
    throw DimensionError("wreath_group: copies must be positive");
  }
  const int d = h.degree();
  const int l = d * copies;
  std::vector<Perm> gens;
  for (int block = 0; block < copies; ++block) {
    for (const Perm& g : h.generators()) {
      std::vector<int> img(static_cast<std::size_t>(l));
      std::iota(img.begin(), img.end(), 0);
      for (int j = 0; j < d; ++j) img[static_cast<std::size_t>(block * d + j)] = block * d + g(j);
      gens.emplace_back(std::move(img));
    }
  }
  for (const Perm& q : symmetric_generators(copies)) {
    std::vector<int> img(static_cast<std::size_t>(l));
    for (int i = 0; i < copies; ++i)
      for (int j = 0; j < d; ++j) img[static_cast<std::size_t>(i * d + j)] = q(i) * d + j;
    gens.emplace_back(std::move(img));
  }
  return GeneratorSet(l, std::move(gens));
}

std::vector<double> permutation_matrix(const Perm& g) {
  const std::size_t l = static_cast<std::size_t>(g.degree());
  std::vector<double> p(l * l, 0.0);
  for (int j = 0; j < g.degree(); ++j) {
    p[static_cast<std::size_t>(g(j)) * l + static_cast<std::size_t>(j)] = 1.0;
  }
  return p;
}

// ---------------------------------------------------------------------------
// GroupSpec

GroupSpec GroupSpec::product(GroupSpec a, GroupSpec b) {
  return {Product{std::make_shared<const GroupSpec>(std::move(a)),
                  std::make_shared<const GroupSpec>(std::move(b))}};
}

GroupSpec GroupSpec::wreath(GroupSpec base, int copies) {
  return {Wreath{std::make_shared<const GroupSpec>(std::move(base)), copies}};
}

GroupSpec GroupSpec::explicit_generators(GeneratorSet gens) {
  return {Explicit{std::make_shared<const GeneratorSet>(std::move(gens))}};
}

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void require_positive(int v, const char* what) {
  if (v <= 0) throw ConfigError(std::string(what) + " must be positive");
}

}  // namespace

int GroupSpec::degree() const {
  return std::visit(
      Overloaded{
          [](const Trivial& s) { return s.degree; },
          [](const Cyclic& s) { return s.degree; },
          [](const Symmetric& s) { return s.n; },
          [](const Translations2D& s) { return s.h * s.w; },
          [](const GraphConjugation& s) { return s.k * s.k; },
          [](const Product& s) { return s.left->degree() * s.right->degree(); },
          [](const Wreath& s) { return s.base->degree() * s.copies; },
          [](const Explicit& s) { return s.gens->degree(); },
      },
      node);
}

GeneratorSet GroupSpec::lower() const {
  return std::visit(
      Overloaded{
          [](const Trivial& s) {
            require_positive(s.degree, "trivial degree");
            return GeneratorSet(s.degree, {Perm::identity(s.degree)});
          },
          [](const Cyclic& s) {
            require_positive(s.degree, "cyclic degree");
            std::vector<int> shift(static_cast<std::size_t>(s.degree));
            for (int i = 0; i < s.degree; ++i)
              shift[static_cast<std::size_t>(i)] = (i + 1) % s.degree;
            return GeneratorSet(s.degree, {Perm(shift)});
          },
          [](const Symmetric& s) {
            require_positive(s.n, "symmetric degree");
            return GeneratorSet(s.n, symmetric_generators(s.n));
          },
          [](const Translations2D& s) {
            require_positive(s.h, "trans2d height");
            require_positive(s.w, "trans2d width");
            const int l = s.h * s.w;
            std::vector<int> rows(static_cast<std::size_t>(l));
            std::vector<int> cols(static_cast<std::size_t>(l));
            for (int r = 0; r < s.h; ++r) {
              for (int c = 0; c < s.w; ++c) {
                rows[static_cast<std::size_t>(r * s.w + c)] = ((r + 1) % s.h) * s.w + c;
                cols[static_cast<std::size_t>(r * s.w + c)] = r * s.w + (c + 1) % s.w;
              }
            }
            return GeneratorSet(l, {Perm(rows), Perm(cols)});
          },
          [](const GraphConjugation& s) {
            require_positive(s.k, "graph size");
            std::vector<Perm> gens;
            for (const Perm& q : symmetric_generators(s.k)) {
              std::vector<int> img(static_cast<std::size_t>(s.k * s.k));
              for (int r = 0; r < s.k; ++r)
                for (int c = 0; c < s.k; ++c)
                  img[static_cast<std::size_t>(r * s.k + c)] = q(r) * s.k + q(c);
              gens.emplace_back(std::move(img));
            }
            return GeneratorSet(s.k * s.k, std::move(gens));
          },
          [](const Product& s) { return product_group(s.left->lower(), s.right->lower()); },
          [](const Wreath& s) {
            require_positive(s.copies, "wreath copies");
            return wreath_group(s.base->lower(), s.copies);
          },
          [](const Explicit& s) { return *s.gens; },
      },
      node);
}

std::string GroupSpec::to_string() const {
  return std::visit(
      Overloaded{
          [](const Trivial& s) { return "trivial:" + std::to_string(s.degree); },
          [](const Cyclic& s) { return "cyclic:" + std::to_string(s.degree); },
          [](const Symmetric& s) { return "sym:" + std::to_string(s.n); },
          [](const Translations2D& s) {
            return "trans2d:" + std::to_string(s.h) + "," + std::to_string(s.w);
          },
          [](const GraphConjugation& s) { return "graph:" + std::to_string(s.k); },
          [](const Product& s) {
            return "prod(" + s.left->to_string() + "," + s.right->to_string() + ")";
          },
          [](const Wreath& s) {
            return "wreath(" + s.base->to_string() + "," + std::to_string(s.copies) + ")";
          },
          [](const Explicit& s) { return generator_json(*s.gens); },
      },
      node);
}

}  // namespace equiset
