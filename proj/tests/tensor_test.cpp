#include "equiset/tensor.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <cstdio>
#include <filesystem>
#include <random>

#include "oracles.hpp"

namespace equiset {
namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(numel(shape));
  for (double& x : v) x = dist(rng);
  return Tensor(std::move(shape), std::move(v));
}

// Values bounded away from 0 so relu never sits on its kink.
Tensor off_kink(Shape shape, std::uint64_t seed) {
  Tensor t = random_tensor(shape, seed, 0.1, 1.0);
  std::vector<double> v = t.values();
  for (std::size_t i = 0; i < v.size(); i += 2) v[i] = -v[i];
  return Tensor(std::move(shape), std::move(v));
}

// Weighted sum with fixed pseudo-random weights so every output coordinate
// carries a distinct adjoint.
Tensor probe(const Tensor& y) {
  return sum_all(mul(y, random_tensor(y.shape(), 999, 0.5, 1.5)));
}

TEST(TensorTest, ShapeValidation) {
  EXPECT_THROW(Tensor({2, 2}, {1, 2, 3}), DimensionError);
  EXPECT_THROW(Tensor({0}, {}), DimensionError);
  EXPECT_EQ(Tensor::scalar(4).item(), 4.0);
  EXPECT_EQ(Tensor::zeros({2, 3}).size(), 6u);
  EXPECT_THROW(Tensor::zeros({2}).item(), DimensionError);
}

TEST(ElementwiseTest, Relu) {
  const Tensor y = relu(Tensor({3}, {-1, 0, 2}));
  EXPECT_EQ(y.values(), (std::vector<double>{0, 0, 2}));
}

TEST(ElementwiseTest, ReluSubgradientZeroAtZero) {
  Tape tape;
  const Tensor x = tape.leaf(Tensor({3}, {-1, 0, 2}));
  tape.backward(sum_all(relu(x)));
  EXPECT_EQ(tape.grad(x).values(), (std::vector<double>{0, 0, 1}));
}

TEST(ElementwiseTest, AddZeroIsIdentity) {
  const Tensor x = random_tensor({3, 4}, 1);
  EXPECT_EQ(add(x, Tensor::zeros({3, 4})).values(), x.values());
  EXPECT_EQ(add(x, Tensor::zeros({4})).values(), x.values());
}

TEST(ElementwiseTest, Broadcasting) {
  const Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(add(a, Tensor({3}, {10, 20, 30})).values(), (std::vector<double>{11, 22, 33, 14, 25, 36}));
  EXPECT_EQ(mul(a, Tensor({2, 1}, {2, -1})).values(), (std::vector<double>{2, 4, 6, -4, -5, -6}));
  EXPECT_EQ(sub(a, Tensor::scalar(1)).values(), (std::vector<double>{0, 1, 2, 3, 4, 5}));
  EXPECT_THROW(add(a, Tensor::zeros({2})), DimensionError);
  EXPECT_THROW(mul(a, Tensor::zeros({3, 3})), DimensionError);
}

TEST(ElementwiseTest, MulGradientMatchesFiniteDifference) {
  Tape tape;
  const Tensor x = tape.leaf(Tensor::scalar(3));
  const Tensor y = tape.leaf(Tensor::scalar(4));
  tape.backward(mul(x, y));
  const double fd = oracle::central_diff([](double v) { return v * 4.0; }, 3.0, 1e-5);
  EXPECT_NEAR(tape.grad(x).item(), fd, 1e-9);
  EXPECT_EQ(tape.grad(x).item(), 4.0);
  EXPECT_EQ(tape.grad(y).item(), 3.0);
}

TEST(ElementwiseTest, BroadcastAdjointsReduce) {
  ParamStore p;
  p.add("a", random_tensor({3, 4}, 2));
  p.add("b", random_tensor({4}, 3));
  p.add("c", random_tensor({3, 1}, 4));
  const auto f = [](const Bindings& w) {
    return probe(relu(add(mul(sub(w["a"], w["b"]), w["c"]), scale(w["b"], 0.5))));
  };
  EXPECT_LE(grad_check(f, p, 1e-5, 0).max_rel_error, 1e-4);
}

TEST(MatmulTest, Examples) {
  const Tensor a({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(matmul(a, Tensor({2, 2}, {1, 0, 0, 1})).values(), a.values());
  const Tensor y = matmul(a, Tensor({2, 1}, {1, 1}));
  EXPECT_EQ(y.shape(), (Shape{2, 1}));
  EXPECT_EQ(y.values(), (std::vector<double>{3, 7}));
  EXPECT_THROW(matmul(a, Tensor::zeros({3, 1})), DimensionError);
  EXPECT_THROW(matmul(Tensor::zeros({2}), a), DimensionError);
}

TEST(MatmulTest, GradientOfSumMatchesFiniteDifferences) {
  ParamStore p;
  p.add("a", random_tensor({3, 3}, 5));
  p.add("b", random_tensor({3, 3}, 6));
  const auto f = [](const Bindings& w) { return sum_all(matmul(w["a"], w["b"])); };
  EXPECT_LE(grad_check(f, p, 1e-5, 0).max_rel_error, 1e-6);
  // Closed form: d sum(AB)/dA_ik = sum_j B_kj.
  Tape tape;
  const Bindings w = tape.watch(p);
  tape.backward(f(w));
  const Tensor ga = tape.grad(w["a"]);
  const Tensor& b = p.value("b");
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 3; ++k)
      EXPECT_NEAR(ga[i * 3 + k], b[k * 3] + b[k * 3 + 1] + b[k * 3 + 2], 1e-14);
}

TEST(MatmulTest, RectangularGradient) {
  ParamStore p;
  p.add("a", random_tensor({4, 3}, 7));
  p.add("b", random_tensor({3, 5}, 8));
  const auto f = [](const Bindings& w) { return probe(matmul(w["a"], w["b"])); };
  EXPECT_LE(grad_check(f, p, 1e-5, 0).max_rel_error, 1e-6);
}

Tensor shift_last(const Tensor& x, std::size_t r) {
  const std::size_t d = x.shape().back();
  std::vector<double> out(x.size());
  for (std::size_t o = 0; o < x.size() / d; ++o)
    for (std::size_t t = 0; t < d; ++t) out[o * d + (t + r) % d] = x[o * d + t];
  return Tensor(x.shape(), std::move(out));
}

TEST(CircConvTest, CenteredDeltaIsIdentity) {
  const Tensor x = random_tensor({2, 1, 9}, 9);
  const Tensor k({1, 1, 5}, {0, 0, 1, 0, 0});
  EXPECT_EQ(circ_conv1d(x, k).values(), x.values());
}

TEST(CircConvTest, ShiftedDeltaShifts) {
  const Tensor x = random_tensor({1, 8}, 10);
  // Delta at j = k/2 + 1 reads x[t + 1]: a shift by -1.
  const Tensor y = circ_conv1d(x, Tensor({1, 1, 3}, {0, 0, 1}));
  EXPECT_EQ(y.values(), shift_last(x, 7).values());
  const Tensor z = circ_conv1d(x, Tensor({1, 1, 3}, {1, 0, 0}));
  EXPECT_EQ(z.values(), shift_last(x, 1).values());
}

TEST(CircConvTest, MatchesDirectFormula) {
  const Tensor x = random_tensor({2, 3, 7}, 11);
  const Tensor k = random_tensor({4, 3, 4}, 12);
  const Tensor y = circ_conv1d(x, k);
  ASSERT_EQ(y.shape(), (Shape{2, 4, 7}));
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t co = 0; co < 4; ++co)
      for (std::size_t t = 0; t < 7; ++t) {
        double acc = 0;
        for (std::size_t c = 0; c < 3; ++c)
          for (std::size_t j = 0; j < 4; ++j) {
            const std::size_t src = (t + j + 7 - 2) % 7;
            acc += k[(co * 3 + c) * 4 + j] * x[(b * 3 + c) * 7 + src];
          }
        EXPECT_NEAR(y[(b * 4 + co) * 7 + t], acc, 1e-14);
      }
}

TEST(CircConvTest, ExactShiftEquivarianceAllShifts) {
  const Tensor x = random_tensor({3, 2, 16}, 13);
  const Tensor k = random_tensor({4, 2, 5}, 14);
  const Tensor y = circ_conv1d(x, k);
  for (std::size_t r = 0; r < 16; ++r) {
    const Tensor lhs = circ_conv1d(shift_last(x, r), k);
    const Tensor rhs = shift_last(y, r);
    double worst = 0;
    for (std::size_t i = 0; i < lhs.size(); ++i) worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
    EXPECT_LT(worst, 1e-12) << "shift " << r;
  }
}

TEST(CircConvTest, Errors) {
  EXPECT_THROW(circ_conv1d(Tensor::zeros({1, 4}), Tensor::zeros({1, 1, 5})), DimensionError);
  EXPECT_THROW(circ_conv1d(Tensor::zeros({2, 8}), Tensor::zeros({1, 3, 3})), DimensionError);
}

TEST(CircConvTest, Gradient) {
  ParamStore p;
  p.add("x", random_tensor({2, 3, 8}, 15));
  p.add("k", random_tensor({2, 3, 3}, 16));
  const auto f = [](const Bindings& w) { return probe(circ_conv1d(w["x"], w["k"])); };
  EXPECT_LE(grad_check(f, p, 1e-5, 0).max_rel_error, 1e-4);
}

TEST(ReduceTest, SingletonAxisSumIsCopy) {
  const Tensor x = random_tensor({3, 1, 4}, 17);
  const Tensor y = reduce_sum(x, 1);
  EXPECT_EQ(y.shape(), (Shape{3, 4}));
  EXPECT_EQ(y.values(), x.values());
  EXPECT_EQ(reduce_sum(x, 1, true).shape(), x.shape());
}

TEST(ReduceTest, MaxTieGoesToLowestIndex) {
  Tape tape;
  const Tensor x = tape.leaf(Tensor({3}, {1, 5, 5}));
  const Tensor m = reduce_max(x, 0);
  EXPECT_EQ(m.item(), 5.0);
  tape.backward(m);
  EXPECT_EQ(tape.grad(x).values(), (std::vector<double>{0, 1, 0}));
}

TEST(ReduceTest, Values) {
  const Tensor x({2, 3}, {1, -2, 3, 4, 5, -6});
  EXPECT_EQ(reduce_sum(x, 0).values(), (std::vector<double>{5, 3, -3}));
  EXPECT_EQ(reduce_sum(x, 1).values(), (std::vector<double>{2, 3}));
  EXPECT_EQ(reduce_max(x, 1).values(), (std::vector<double>{3, 5}));
  EXPECT_EQ(reduce_mean(x, 0).values(), (std::vector<double>{2.5, 1.5, -1.5}));
  EXPECT_EQ(sum_all(x).item(), 5.0);
  EXPECT_THROW(reduce_sum(x, 2), DimensionError);
}

TEST(ReduceTest, MeanGradientIsOneOverN) {
  Tape tape;
  const Tensor x = tape.leaf(random_tensor({5}, 18));
  tape.backward(reduce_mean(x, 0));
  const Tensor g = tape.grad(x);
  for (double v : g.values()) EXPECT_DOUBLE_EQ(v, 0.2);
  ParamStore p;
  p.add("x", random_tensor({5}, 18));
  EXPECT_LE(grad_check([](const Bindings& w) { return reduce_mean(w["x"], 0); }, p, 1e-5, 0).max_rel_error,
            1e-9);
}

TEST(ReduceTest, GradientsAllOps) {
  ParamStore p;
  p.add("x", random_tensor({2, 4, 3}, 19));
  for (std::size_t axis = 0; axis < 3; ++axis) {
    for (ReduceOp op : {ReduceOp::kSum, ReduceOp::kMax, ReduceOp::kMean}) {
      const auto f = [&](const Bindings& w) { return probe(reduce(op, w["x"], axis)); };
      EXPECT_LE(grad_check(f, p, 1e-5, 0).max_rel_error, 1e-4) << "axis " << axis;
    }
  }
}

TEST(ShapeOpsTest, ReshapeConcatPool) {
  const Tensor a({2, 2}, {1, 2, 3, 4});
  const Tensor b({2, 1}, {9, 8});
  EXPECT_EQ(concat(a, b, 1).values(), (std::vector<double>{1, 2, 9, 3, 4, 8}));
  EXPECT_EQ(concat(a, a, 0).shape(), (Shape{4, 2}));
  EXPECT_THROW(concat(a, b, 0), DimensionError);
  EXPECT_EQ(reshape(a, {4}).values(), a.values());
  EXPECT_THROW(reshape(a, {3}), DimensionError);
  EXPECT_EQ(avg_pool_last(Tensor({1, 4}, {1, 3, 5, 9}), 2).values(), (std::vector<double>{2, 7}));
  EXPECT_THROW(avg_pool_last(Tensor::zeros({5}), 2), DimensionError);

  ParamStore p;
  p.add("a", random_tensor({2, 3, 4}, 20));
  p.add("b", random_tensor({2, 2, 4}, 21));
  const auto f = [](const Bindings& w) {
    return probe(avg_pool_last(reshape(concat(w["a"], w["b"], 1), {2, 5, 4}), 2));
  };
  EXPECT_LE(grad_check(f, p, 1e-5, 0).max_rel_error, 1e-6);
}

TEST(TiedWeightsTest, LayoutAndGradient) {
  // Two orbits on d = 2: diagonal (0) and off-diagonal (1).
  auto orbit = std::make_shared<const std::vector<int>>(std::vector<int>{0, 1, 1, 0});
  const Tensor coeffs({1, 1, 2}, {3, 7});
  const Tensor w = tied_weights(coeffs, orbit, 2);
  EXPECT_EQ(w.shape(), (Shape{2, 2}));
  EXPECT_EQ(w.values(), (std::vector<double>{3, 7, 7, 3}));
  EXPECT_THROW(tied_weights(Tensor::zeros({1, 1, 1}), orbit, 2), DimensionError);

  auto orbit3 = std::make_shared<const std::vector<int>>(std::vector<int>{0, 1, 2, 2, 0, 1, 1, 2, 0});
  ParamStore p;
  p.add("c", random_tensor({2, 3, 3}, 22));
  p.add("x", random_tensor({4, 9}, 23));
  const auto f = [&](const Bindings& b) { return probe(matmul(b["x"], tied_weights(b["c"], orbit3, 3))); };
  EXPECT_LE(grad_check(f, p, 1e-5, 0).max_rel_error, 1e-6);
}

TEST(BatchStandardizeTest, ZeroMeanUnitVariance) {
  const Tensor x = random_tensor({6, 3, 4}, 24, -3, 5);
  BatchStats stats;
  const Tensor y = batch_standardize(x, 1, 0.0, &stats);
  ASSERT_EQ(stats.mean.size(), 3u);
  for (std::size_t c = 0; c < 3; ++c) {
    double s = 0, s2 = 0, ref = 0;
    for (std::size_t b = 0; b < 6; ++b)
      for (std::size_t t = 0; t < 4; ++t) {
        const double v = y[(b * 3 + c) * 4 + t];
        s += v;
        s2 += v * v;
        ref += x[(b * 3 + c) * 4 + t];
      }
    EXPECT_NEAR(s / 24, 0.0, 1e-12);
    EXPECT_NEAR(s2 / 24, 1.0, 1e-12);
    EXPECT_NEAR(stats.mean[c], ref / 24, 1e-12);
  }
}

TEST(BatchStandardizeTest, Gradient) {
  ParamStore p;
  p.add("x", random_tensor({5, 2, 3}, 25));
  const auto f = [](const Bindings& w) { return probe(batch_standardize(w["x"], 1, 1e-5)); };
  EXPECT_LE(grad_check(f, p, 1e-5, 0).max_rel_error, 1e-4);
}

TEST(SoftmaxXentTest, UniformLogitsGiveLogC) {
  const std::vector<int> labels{0, 2};
  EXPECT_NEAR(softmax_xent(Tensor::zeros({2, 3}), labels).item(), std::log(3.0), 1e-15);
  EXPECT_NEAR(softmax_xent(Tensor::zeros({2, 3}), labels).item(), 1.0986, 1e-4);
}

TEST(SoftmaxXentTest, HugeTrueLogitGivesZero) {
  const std::vector<int> labels{1};
  const double loss = softmax_xent(Tensor({1, 3}, {0, 1e4, 0}), labels).item();
  EXPECT_TRUE(std::isfinite(loss));
  EXPECT_LT(loss, 1e-12);
}

TEST(SoftmaxXentTest, LabelOutOfRange) {
  const std::vector<int> bad{3};
  EXPECT_THROW(softmax_xent(Tensor::zeros({1, 3}), bad), DimensionError);
  const std::vector<int> neg{-1};
  EXPECT_THROW(softmax_xent(Tensor::zeros({1, 3}), neg), DimensionError);
  const std::vector<int> two{0, 1};
  EXPECT_THROW(softmax_xent(Tensor::zeros({1, 3}), two), DimensionError);
}

TEST(SoftmaxXentTest, Gradient) {
  ParamStore p;
  p.add("z", random_tensor({4, 3}, 26, -2, 2));
  const std::vector<int> labels{0, 2, 1, 2};
  const auto f = [&](const Bindings& w) { return softmax_xent(w["z"], labels); };
  EXPECT_LE(grad_check(f, p, 1e-5, 0).max_rel_error, 1e-6);
}

TEST(BackwardTest, IdentityAndFanOut) {
  Tape tape;
  const Tensor x = tape.leaf(Tensor::scalar(2.5));
  tape.backward(x);
  EXPECT_EQ(tape.grad(x).item(), 1.0);

  Tape t2;
  const Tensor y = t2.leaf(Tensor::scalar(2.5));
  t2.backward(add(y, y));
  EXPECT_EQ(t2.grad(y).item(), 2.0);
}

TEST(BackwardTest, Errors) {
  Tape tape;
  const Tensor x = tape.leaf(Tensor::zeros({2}));
  EXPECT_THROW(tape.backward(x), DimensionError);
  EXPECT_THROW(tape.backward(Tensor::scalar(1)), DimensionError);
  Tape other;
  const Tensor y = other.leaf(Tensor::zeros({2}));
  EXPECT_THROW(add(x, y), DimensionError);
}

TEST(BackwardTest, UntrackedOperandsRecordNothing) {
  Tape tape;
  const Tensor x = tape.leaf(Tensor({2}, {1, 2}));
  const Tensor c({2}, {3, 4});
  tape.backward(sum_all(mul(x, c)));
  EXPECT_EQ(tape.grad(x).values(), (std::vector<double>{3, 4}));
  EXPECT_FALSE(mul(c, c).tracked());
}

TEST(BackwardTest, AccumulatesIntoStore) {
  ParamStore p;
  p.add("w", Tensor({2}, {1, 2}));
  for (int step = 0; step < 2; ++step) {
    Tape tape;
    const Bindings b = tape.watch(p);
    tape.backward(sum_all(scale(b["w"], 3)));
    tape.accumulate_into(b, p);
  }
  EXPECT_EQ(p.grad("w"), (std::vector<double>{6, 6}));
  EXPECT_TRUE(p.has_all_grads());
  p.zero_grads();
  EXPECT_FALSE(p.has_all_grads());
}

TEST(GradCheckTest, LinearIsExact) {
  ParamStore p;
  p.add("w", random_tensor({3, 4}, 27));
  const Tensor c = random_tensor({3, 4}, 28);
  const auto f = [&](const Bindings& b) { return sum_all(mul(b["w"], c)); };
  const GradCheckReport r = grad_check(f, p, 1e-5, 0);
  EXPECT_EQ(r.coordinates, 12u);
  EXPECT_LE(r.max_rel_error, 1e-9);
}

TEST(GradCheckTest, DetectsWrongGradient) {
  // relu at an exact kink: the tape reports 0, the central difference 0.5.
  ParamStore p;
  p.add("w", Tensor({1}, {0.0}));
  const auto f = [](const Bindings& b) { return sum_all(relu(b["w"])); };
  EXPECT_GT(grad_check(f, p, 1e-5, 0).max_rel_error, 0.5);
  // Nudged off the kink the check passes.
  p.set_value("w", Tensor({1}, {0.3}));
  EXPECT_LE(grad_check(f, p, 1e-5, 0).max_rel_error, 1e-9);
}

TEST(GradCheckTest, SamplesSubsetAndRejectsBadEps) {
  ParamStore p;
  p.add("a", off_kink({10, 10}, 29));
  const auto f = [](const Bindings& b) { return probe(relu(b["a"])); };
  const GradCheckReport r = grad_check(f, p, 1e-5, 64, 3);
  EXPECT_EQ(r.coordinates, 64u);
  EXPECT_LE(r.max_rel_error, 1e-4);
  EXPECT_THROW(grad_check(f, p, 0.0), std::invalid_argument);
}

TEST(ParamStoreTest, DuplicateAndUnknown) {
  ParamStore p;
  p.add("a", Tensor::zeros({2}));
  EXPECT_THROW(p.add("a", Tensor::zeros({2})), ConfigError);
  EXPECT_THROW(p.value("b"), ConfigError);
  EXPECT_THROW(p.set_value("a", Tensor::zeros({3})), DimensionError);
}

TEST(ParamStoreTest, UniformInitBounds) {
  std::mt19937_64 rng(1);
  ParamStore p;
  p.add_uniform("w", {50, 16}, 16, rng);
  for (double v : p.value("w").values()) EXPECT_LE(std::abs(v), 0.25);
  EXPECT_EQ(p.total_size(), 800u);
}

TEST(ParamStoreTest, SaveLoadRoundTrip) {
  std::mt19937_64 rng(2);
  ParamStore p(77);
  p.add_uniform("layer0.l1.weight", {3, 4, 5}, 20, rng);
  p.add("s", Tensor::scalar(-1.25));
  const std::string path = (std::filesystem::temp_directory_path() / "equiset_params_test.bin").string();
  p.save(path);
  const ParamStore q = ParamStore::load(path);
  EXPECT_EQ(q.seed(), 77u);
  EXPECT_EQ(q.names(), p.names());
  for (const std::string& n : p.names()) {
    EXPECT_EQ(q.value(n).shape(), p.value(n).shape());
    EXPECT_EQ(q.value(n).values(), p.value(n).values());
  }
  // 4 magic + 4 version + 8 seed + 4 count, then per entry.
  const std::size_t expect = 20 + (4 + 16 + 4 + 3 * 8 + 60 * 8) + (4 + 1 + 4 + 0 + 8);
  EXPECT_EQ(std::filesystem::file_size(path), expect);
  std::filesystem::resize_file(path, expect - 3);
  EXPECT_THROW(ParamStore::load(path), ConfigError);
  std::remove(path.c_str());
}

TEST(ParamStoreTest, RejectsForeignFile) {
  const std::string path = (std::filesystem::temp_directory_path() / "equiset_not_params.bin").string();
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("hello world", f);
    std::fclose(f);
  }
  EXPECT_THROW(ParamStore::load(path), ConfigError);
  std::remove(path.c_str());
}

TEST(DeterminismTest, SameSeedSameBits) {
  auto run = [](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ParamStore p(seed);
    p.add_uniform("k", {3, 2, 3}, 6, rng);
    p.add_uniform("x", {4, 2, 8}, 1, rng);
    Tape tape;
    const Bindings b = tape.watch(p);
    const Tensor loss = sum_all(relu(circ_conv1d(b["x"], b["k"])));
    tape.backward(loss);
    std::vector<double> out{loss.item()};
    for (double g : tape.grad(b["k"]).values()) out.push_back(g);
    return out;
  };
  EXPECT_EQ(run(9), run(9));
  EXPECT_NE(run(9), run(10));
}

}  // namespace
TEST(NanTest, ReluAndMaxPropagateNan) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const Tensor r = relu(Tensor({3}, {nan, -1.0, 2.0}));
  EXPECT_TRUE(std::isnan(r[0]));
  EXPECT_EQ(r[1], 0.0);
  EXPECT_EQ(r[2], 2.0);
  const Tensor m = reduce_max(Tensor({2, 3}, {1.0, nan, 0.5, 4.0, 3.0, 2.0}), 1);
  EXPECT_TRUE(std::isnan(m[0]));
  EXPECT_EQ(m[1], 4.0);
}

}  // namespace equiset
