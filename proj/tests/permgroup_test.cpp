#include "equiset/permgroup.hpp"

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "oracles.hpp"

namespace equiset {
namespace {

Perm shift(int d, int r) {
  std::vector<int> img(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) img[static_cast<std::size_t>(i)] = (i + r) % d;
  return Perm(img);
}

Perm random_perm(int n, std::mt19937_64& rng) {
  std::vector<int> img(static_cast<std::size_t>(n));
  std::iota(img.begin(), img.end(), 0);
  std::shuffle(img.begin(), img.end(), rng);
  return Perm(img);
}

TEST(PermTest, RejectsNonBijection) {
  EXPECT_THROW(Perm({0, 0, 1}), DimensionError);
  EXPECT_THROW(Perm({0, 3}), DimensionError);
  EXPECT_THROW(Perm(std::vector<int>{}), DimensionError);
}

TEST(PermTest, InverseIsComputedAlongside) {
  const Perm g({2, 0, 1});
  EXPECT_EQ(g.preimage(2), 0);
  EXPECT_TRUE(compose(g, g.inverse()).is_identity());
}

TEST(ApplyPermTest, Identity) {
  const std::vector<double> x{5, 7, 9};
  EXPECT_EQ(apply_perm(Perm::identity(3), x), x);
}

TEST(ApplyPermTest, Transposition) {
  const std::vector<double> x{1.5, -2.0};
  EXPECT_EQ(apply_perm(Perm({1, 0}), x), (std::vector<double>{-2.0, 1.5}));
}

TEST(ApplyPermTest, MovesEntryAtIToGofI) {
  // (g.x)_i = x_{g^-1(i)}: shift-by-1 moves x_0 to position 1.
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_EQ(apply_perm(shift(4, 1), x), (std::vector<double>{4, 1, 2, 3}));
}

TEST(ApplyPermTest, ShiftTwiceEqualsShiftByTwo) {
  const std::vector<double> x{1, 2, 3, 4};
  for (int r = 0; r < 4; ++r) {
    const auto once = apply_perm(shift(4, r), x);
    const auto twice = apply_perm(shift(4, r), once);
    EXPECT_EQ(twice, apply_perm(shift(4, (2 * r) % 4), x)) << "rotation " << r;
    EXPECT_EQ(twice, apply_perm(compose(shift(4, r), shift(4, r)), x));
  }
}

TEST(ApplyPermTest, LengthMismatch) {
  const std::vector<double> x{1, 2};
  EXPECT_THROW(apply_perm(Perm::identity(3), x), DimensionError);
}

TEST(ComposeTest, IdentityAndInvolution) {
  const Perm g({2, 0, 1});
  EXPECT_EQ(compose(Perm::identity(3), g), g);
  const Perm t({1, 0, 2});
  EXPECT_TRUE(compose(t, t).is_identity());
}

TEST(ComposeTest, CyclicFourTable) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(compose(shift(4, i), shift(4, j)), shift(4, (i + j) % 4));
}

TEST(ComposeTest, DegreeMismatch) {
  EXPECT_THROW(compose(Perm::identity(2), Perm::identity(3)), DimensionError);
}

TEST(ComposeTest, ActionIsHomomorphismOnRandomInputs) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const Perm g = random_perm(n, rng);
    const Perm h = random_perm(n, rng);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (double& v : x) v = normal(rng);
    EXPECT_EQ(apply_perm(compose(g, h), x), apply_perm(g, apply_perm(h, x)));
  }
}

TEST(GeneratorSetTest, Validation) {
  EXPECT_THROW(GeneratorSet(3, {}), DimensionError);
  EXPECT_THROW(GeneratorSet(3, {Perm::identity(2)}), DimensionError);
}

TEST(ClosureTest, Sizes) {
  EXPECT_EQ(closure(GeneratorSet(2, {Perm({1, 0})})).size(), 2u);
  EXPECT_EQ(closure(GroupSpec::cyclic(4).lower()).size(), 4u);
  const GeneratorSet s4(4, {Perm({1, 0, 2, 3}), Perm({1, 2, 3, 0})});
  EXPECT_EQ(closure(s4).size(), 24u);  // 4!
  EXPECT_EQ(closure(GroupSpec::translations2d(3, 4).lower()).size(), 12u);
}

TEST(ClosureTest, ElementsAreDistinctAndStartWithIdentity) {
  const auto elems = closure(GroupSpec::symmetric(4).lower());
  EXPECT_TRUE(elems.front().is_identity());
  std::set<std::vector<int>> seen;
  for (const Perm& g : elems) EXPECT_TRUE(seen.insert(g.images()).second);
}

TEST(ClosureTest, CapExceeded) {
  EXPECT_THROW(closure(GroupSpec::symmetric(9).lower(), 1000), GroupTooLarge);
  EXPECT_NO_THROW(closure(GroupSpec::symmetric(4).lower(), 24));
  EXPECT_THROW(closure(GroupSpec::symmetric(4).lower(), 23), GroupTooLarge);
}

TEST(PairOrbitsTest, SymmetricTwoIsDiagonalAndOffDiagonal) {
  const OrbitPartition p = pair_orbits(GroupSpec::symmetric(2).lower());
  EXPECT_EQ(p.orbit_count, 2);
  EXPECT_EQ(p.at(0, 0), p.at(1, 1));
  EXPECT_EQ(p.at(0, 1), p.at(1, 0));
  EXPECT_NE(p.at(0, 0), p.at(0, 1));
}

TEST(PairOrbitsTest, TrivialHasNoSharing) {
  EXPECT_EQ(pair_orbits(GroupSpec::trivial(3).lower()).orbit_count, 9);
}

TEST(PairOrbitsTest, CyclicFourIsCirculant) {
  const OrbitPartition p = pair_orbits(GroupSpec::cyclic(4).lower());
  EXPECT_EQ(p.orbit_count, 4);
  // Trace oracle: fixed points (4, 0, 0, 0) -> (16 + 0 + 0 + 0) / 4.
  EXPECT_EQ((16 + 0 + 0 + 0) / 4, 4);
  for (int s = 0; s < 4; ++s)
    for (int t = 0; t < 4; ++t) EXPECT_EQ(p.at(s, t), p.at(0, (t - s + 4) % 4));
}

TEST(PairOrbitsTest, GraphConjugationFourMatchesBruteForce) {
  const OrbitPartition p = pair_orbits(GroupSpec::graph(4).lower());
  const auto brute = oracle::brute_pair_orbit_ids(oracle::graph_conjugation(4));
  EXPECT_EQ(p.orbit_count, 15);
  EXPECT_EQ(oracle::canonical_labels(p.orbit_id), oracle::canonical_labels(brute));
}

TEST(PairOrbitsTest, ContiguousIds) {
  const OrbitPartition p = pair_orbits(GroupSpec::translations2d(3, 4).lower());
  std::set<int> ids(p.orbit_id.begin(), p.orbit_id.end());
  EXPECT_EQ(static_cast<int>(ids.size()), p.orbit_count);
  EXPECT_EQ(*ids.begin(), 0);
  EXPECT_EQ(*ids.rbegin(), p.orbit_count - 1);
}

TEST(PairOrbitsTest, PresentationIndependence) {
  const GeneratorSet coxeter(4, {Perm({1, 0, 2, 3}), Perm({0, 2, 1, 3}), Perm({0, 1, 3, 2})});
  const GeneratorSet cycle(4, {Perm({1, 0, 2, 3}), Perm({1, 2, 3, 0})});
  const GeneratorSet redundant(4, {Perm({3, 2, 1, 0}), Perm({1, 2, 3, 0}), Perm({0, 1, 3, 2}),
                                   Perm::identity(4)});
  const auto a = oracle::canonical_labels(pair_orbits(coxeter).orbit_id);
  EXPECT_EQ(a, oracle::canonical_labels(pair_orbits(cycle).orbit_id));
  EXPECT_EQ(a, oracle::canonical_labels(pair_orbits(redundant).orbit_id));
}

TEST(PairOrbitsTest, LargeSymmetricWithoutEnumeration) {
  // 25! elements; only generators are touched.
  EXPECT_EQ(pair_orbits(GroupSpec::symmetric(25).lower()).orbit_count, 2);
}

TEST(DimTraceTest, KnownValues) {
  EXPECT_EQ(dim_trace(closure(GroupSpec::symmetric(3).lower())), 2);
  for (int d = 1; d <= 5; ++d) EXPECT_EQ(dim_trace(closure(GroupSpec::trivial(d).lower())), d * d);
  EXPECT_EQ(dim_trace(closure(GroupSpec::cyclic(4).lower())), 4);
}

TEST(DimTraceTest, RejectsNonGroup) {
  // {id, (0 1), (0 1 2)}: 9 + 1 + 0 = 10 is not divisible by 3.
  const std::vector<Perm> bogus{Perm::identity(3), Perm({1, 0, 2}), Perm({1, 2, 0})};
  EXPECT_THROW(dim_trace(bogus), NotAGroup);
}

TEST(ProductGroupTest, Dimensions) {
  const auto e = [](const GroupSpec& a, const GroupSpec& b) {
    return pair_orbits(product_group(a.lower(), b.lower())).orbit_count;
  };
  EXPECT_EQ(e(GroupSpec::symmetric(5), GroupSpec::cyclic(4)), 8);
  EXPECT_EQ(e(GroupSpec::trivial(2), GroupSpec::trivial(3)), 36);
  EXPECT_EQ(e(GroupSpec::symmetric(3), GroupSpec::symmetric(4)), 4);
}

TEST(ProductGroupTest, MatchesBruteForceProduct) {
  const auto gens = product_group(GroupSpec::symmetric(3).lower(), GroupSpec::cyclic(4).lower());
  const auto brute = oracle::brute_pair_orbit_ids(
      oracle::direct_product(oracle::all_permutations(3), oracle::rotations(4)));
  EXPECT_EQ(oracle::canonical_labels(pair_orbits(gens).orbit_id), oracle::canonical_labels(brute));
}

TEST(ProductGroupTest, RowMajorIndexMap) {
  // (q, h) . X moves X[i][j] to X[q(i)][h(j)].
  const auto gens = product_group(GroupSpec::symmetric(2).lower(), GroupSpec::cyclic(3).lower());
  const Perm& q = gens.generators()[0];
  const Perm& h = gens.generators()[1];
  EXPECT_EQ(q(0 * 3 + 2), 1 * 3 + 2);
  EXPECT_EQ(h(1 * 3 + 2), 1 * 3 + 0);
}

class TraceVsOrbitTest : public ::testing::TestWithParam<std::string> {};

TEST_P(TraceVsOrbitTest, TraceFormulaEqualsOrbitCount) {
  const GeneratorSet gens = parse_groupspec(GetParam()).lower();
  EXPECT_EQ(dim_trace(closure(gens, 10000)), pair_orbits(gens).orbit_count);
}

INSTANTIATE_TEST_SUITE_P(
    Groups, TraceVsOrbitTest,
    ::testing::Values("sym:2", "sym:3", "sym:4", "sym:5", "sym:6", "cyclic:2", "cyclic:3",
                      "cyclic:4", "cyclic:5", "cyclic:6", "cyclic:7", "cyclic:8", "trans2d:3,4",
                      "prod(sym:3,cyclic:4)", "prod(cyclic:3,cyclic:5)",
                      "prod(sym:4,trans2d:3,4)", "graph:4", "wreath(cyclic:4,3)",
                      "wreath(sym:3,2)"));

TEST(SymmetricTest, AlwaysTwo) {
  for (int n = 2; n <= 8; ++n) {
    EXPECT_EQ(pair_orbits(GroupSpec::symmetric(n).lower()).orbit_count, 2) << "n=" << n;
  }
}

TEST(WreathGroupTest, OrbitCountIsEHPlusOne) {
  EXPECT_EQ(pair_orbits(wreath_group(GroupSpec::cyclic(4).lower(), 5)).orbit_count, 4 + 1);
  EXPECT_EQ(pair_orbits(wreath_group(GroupSpec::symmetric(3).lower(), 2)).orbit_count, 2 + 1);
}

TEST(WreathGroupTest, MatchesBruteForceWreath) {
  const auto gens = wreath_group(GroupSpec::cyclic(3).lower(), 2);
  const auto brute = oracle::brute_pair_orbit_ids(oracle::wreath_elements(oracle::rotations(3), 2));
  EXPECT_EQ(oracle::canonical_labels(pair_orbits(gens).orbit_id), oracle::canonical_labels(brute));
}

TEST(TransitivityTest, Examples) {
  EXPECT_TRUE(is_transitive(GroupSpec::cyclic(5).lower()));
  EXPECT_TRUE(is_transitive(GroupSpec::translations2d(2, 3).lower()));
  EXPECT_FALSE(is_transitive(GroupSpec::trivial(2).lower()));
  EXPECT_FALSE(is_transitive(GroupSpec::graph(3).lower()));  // diagonal vs off-diagonal
}

TEST(GroupSpecTest, ParseAndPrint) {
  for (const std::string s : {"trivial:3", "cyclic:4", "sym:5", "trans2d:3,4", "graph:4",
                              "prod(sym:5,cyclic:4)", "prod(trans2d:2,3,sym:2)",
                              "wreath(cyclic:4,5)"}) {
    EXPECT_EQ(parse_groupspec(s).to_string(), s);
  }
  EXPECT_EQ(parse_groupspec(" prod( sym:5 , cyclic:4 ) ").degree(), 20);
  EXPECT_EQ(parse_groupspec("trans2d:3,4").lower().generators().size(), 2u);
}

TEST(GroupSpecTest, ParseErrorsMentionGrammar) {
  for (const std::string s : {"", "foo:3", "sym", "sym:0", "sym:-2", "prod(sym:2)", "cyclic:3x",
                              "trans2d:3"}) {
    try {
      parse_groupspec(s);
      ADD_FAILURE() << "accepted '" << s << "'";
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find("groupspec :="), std::string::npos);
    }
  }
}

TEST(GroupSpecTest, ExplicitJsonGenerators) {
  const GroupSpec spec = parse_groupspec(R"({"degree": 4, "generators": [[1,2,3,0]]})");
  EXPECT_EQ(spec.degree(), 4);
  EXPECT_EQ(pair_orbits(spec.lower()).orbit_count, 4);
  const GeneratorSet round = parse_generator_json(generator_json(spec.lower()));
  EXPECT_EQ(round.generators().front(), Perm({1, 2, 3, 0}));
  EXPECT_THROW(parse_groupspec(R"({"degree": 3, "generators": [[0,0,1]]})"), ConfigError);
  EXPECT_THROW(parse_groupspec(R"({"degree": 3})"), ConfigError);
}

TEST(PermutationMatrixTest, ActsLikeApplyPerm) {
  const Perm g({2, 0, 1});
  const auto p = permutation_matrix(g);
  const std::vector<double> x{1, 2, 3};
  const auto gx = apply_perm(g, x);
  for (int i = 0; i < 3; ++i) {
    double acc = 0;
    for (int j = 0; j < 3; ++j) acc += p[static_cast<std::size_t>(i * 3 + j)] * x[static_cast<std::size_t>(j)];
    EXPECT_EQ(acc, gx[static_cast<std::size_t>(i)]);
  }
}

}  // namespace
}  // namespace equiset
