#pragma once

// Permutation groups given by generators: actions on vectors, closure,
// pair-orbit (parameter-sharing) computation and the trace dimension formula.
//
// Conventions: a permutation g of {0..l-1} is stored in image form,
// map[i] = g(i). It acts on vectors by (g.x)_i = x_{g^-1(i)}, so applying g
// moves the entry at position i to position g(i). Matrices X in R^{n x d} are
// flattened row-major, index i*d + j.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "equiset/error.hpp"

namespace equiset {

class Perm {
 public:
  // Throws DimensionError unless `images` is a bijection on {0..size-1}.
  explicit Perm(std::vector<int> images);

  static Perm identity(int degree);

  int degree() const { return static_cast<int>(map_.size()); }
  int operator()(int i) const { return map_[static_cast<std::size_t>(i)]; }
  int preimage(int i) const { return inverse_[static_cast<std::size_t>(i)]; }

  const std::vector<int>& images() const { return map_; }
  Perm inverse() const;
  bool is_identity() const;
  int fixed_points() const;

  friend bool operator==(const Perm& a, const Perm& b) { return a.map_ == b.map_; }
  friend bool operator<(const Perm& a, const Perm& b) { return a.map_ < b.map_; }

 private:
  Perm(std::vector<int> images, std::vector<int> inverse)
      : map_(std::move(images)), inverse_(std::move(inverse)) {}

  std::vector<int> map_;
  std::vector<int> inverse_;
};

// result[i] = x[g^-1(i)].
std::vector<double> apply_perm(const Perm& g, std::span<const double> x);

// (g o h)(i) = g(h(i)).
Perm compose(const Perm& g, const Perm& h);

class GeneratorSet {
 public:
  // Throws DimensionError on an empty list or mixed degrees.
  GeneratorSet(int degree, std::vector<Perm> generators);

  int degree() const { return degree_; }
  const std::vector<Perm>& generators() const { return generators_; }

 private:
  int degree_;
  std::vector<Perm> generators_;
};

struct OrbitPartition {
  int degree = 0;
  std::vector<int> orbit_id;  // degree*degree entries, row-major (s, t)
  int orbit_count = 0;

  int at(int s, int t) const {
    return orbit_id[static_cast<std::size_t>(s) * static_cast<std::size_t>(degree) +
                    static_cast<std::size_t>(t)];
  }
};

inline constexpr std::size_t kDefaultClosureCap = 100000;

// All group elements, identity first, in BFS order over left multiplication
// by generators. Throws GroupTooLarge if more than `cap` elements exist.
std::vector<Perm> closure(const GeneratorSet& gens, std::size_t cap = kDefaultClosureCap);

// Orbits of G acting diagonally on index pairs (s, t) -> (g(s), g(t)).
// Uses only the generators; ids are assigned in order of first appearance
// in a row-major scan.
OrbitPartition pair_orbits(const GeneratorSet& gens);

// Orbits of G on points; ids in order of first appearance.
std::vector<int> point_orbits(const GeneratorSet& gens);
bool is_transitive(const GeneratorSet& gens);

// E(G) = (1/|G|) sum_g fix(g)^2. Throws NotAGroup if the average is not an
// integer.
std::int64_t dim_trace(std::span<const Perm> elements);

// Generators {g_a x id} and {id x g_b} on row-major pairs (i, j) -> i*l_b + j.
GeneratorSet product_group(const GeneratorSet& a, const GeneratorSet& b);

// Restricted wreath product: one copy of H per block of size d (acting on that
// block only) plus block permutations of S_n, on l = n*d.
GeneratorSet wreath_group(const GeneratorSet& h, int copies);

// Permutation matrix P(g) with (P x)_i = x_{g^-1(i)}, i.e. P[g(j), j] = 1.
std::vector<double> permutation_matrix(const Perm& g);

// ---------------------------------------------------------------------------
// Group specifications and their text form.
//
//   trivial:d | cyclic:d | sym:n | trans2d:h,w | graph:k
//   prod(A,B) | wreath(A,n)
//
// or an explicit JSON generator list
//   {"degree": l, "generators": [[...], ...]}

struct GroupSpec;
using GroupSpecPtr = std::shared_ptr<const GroupSpec>;

struct GroupSpec {
  struct Trivial { int degree; };
  struct Cyclic { int degree; };
  struct Symmetric { int n; };
  struct Translations2D { int h; int w; };
  struct GraphConjugation { int k; };
  struct Product { GroupSpecPtr left; GroupSpecPtr right; };
  struct Wreath { GroupSpecPtr base; int copies; };
  struct Explicit { std::shared_ptr<const GeneratorSet> gens; };

  std::variant<Trivial, Cyclic, Symmetric, Translations2D, GraphConjugation, Product, Wreath,
               Explicit>
      node;

  static GroupSpec trivial(int d) { return {Trivial{d}}; }
  static GroupSpec cyclic(int d) { return {Cyclic{d}}; }
  static GroupSpec symmetric(int n) { return {Symmetric{n}}; }
  static GroupSpec translations2d(int h, int w) { return {Translations2D{h, w}}; }
  static GroupSpec graph(int k) { return {GraphConjugation{k}}; }
  static GroupSpec product(GroupSpec a, GroupSpec b);
  static GroupSpec wreath(GroupSpec base, int copies);
  static GroupSpec explicit_generators(GeneratorSet gens);

  int degree() const;
  GeneratorSet lower() const;
  std::string to_string() const;
};

// Throws ConfigError with the grammar in the message on bad input.
GroupSpec parse_groupspec(const std::string& text);
GeneratorSet parse_generator_json(const std::string& json_text);
std::string generator_json(const GeneratorSet& gens);

extern const char* const kGroupSpecGrammar;

}  // namespace equiset
