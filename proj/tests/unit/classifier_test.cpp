#include <gtest/gtest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "radgest/classifier.hpp"
#include "radgest/error.hpp"
#include "radgest/lr_pipeline.hpp"
#include "radgest/random.hpp"

using namespace radgest;
using radgest::testing::random_tensor;

namespace {

ClassifierConfig small_config(std::size_t classes = 4) {
  ClassifierConfig c;
  c.num_classes = classes;
  c.cnn_channels = {4, 8};
  c.tcn_channels = 8;
  c.hidden = 16;
  return c;
}

ComplexCube random_cube(std::size_t k, std::size_t m, std::size_t n, std::uint64_t seed) {
  ComplexCube c(k, m, n);
  Rng rng = make_rng(seed);
  for (auto& z : c.data) z = {uniform(rng, -1, 1), uniform(rng, -1, 1)};
  return c;
}

}  // namespace

TEST(RangeDoppler, MatchesNaiveDft) {
  const ComplexCube cube = random_cube(3, 12, 7, 1);
  const Tensor rd = to_range_doppler(complex_to_channels(cube));
  ASSERT_EQ(rd.shape(), (Shape{3, 12, 7}));
  const auto ref = radgest::testing::naive_range_doppler(cube);
  for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_NEAR(rd.data()[i], ref[i], 1e-10);
}

TEST(RangeDoppler, StaticSceneHasOnlyZeroDoppler) {
  ComplexCube cube(2, 16, 5);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t m = 0; m < 16; ++m)
      for (std::size_t n = 0; n < 5; ++n) cube.at(k, m, n) = {0.1 * n + k, 0.3 - 0.05 * n};
  const Tensor rd = to_range_doppler(complex_to_channels(cube), 0.0);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t m = 1; m < 16; ++m)
      for (std::size_t n = 0; n < 5; ++n) ASSERT_NEAR(rd.data()[(k * 16 + m) * 5 + n], 0.0, 1e-12);
  EXPECT_NEAR(rd.data()[0], 16 * std::abs(cube.at(0, 0, 0)), 1e-12);
}

TEST(RangeDoppler, Parseval) {
  const ComplexCube cube = random_cube(2, 32, 9, 2);
  const Tensor rd = to_range_doppler(complex_to_channels(cube), 0.0);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t n = 0; n < 9; ++n) {
      double time = 0, freq = 0;
      for (std::size_t m = 0; m < 32; ++m) {
        time += std::norm(cube.at(k, m, n));
        freq += std::pow(rd.data()[(k * 32 + m) * 9 + n], 2);
      }
      ASSERT_NEAR(freq, 32 * time, 1e-9 * freq);
    }
}

TEST(ClassifierConfig, ValidationAndEffectiveDilations) {
  ClassifierConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.effective_dilations(5), (std::vector<std::size_t>{1, 2, 4}));
  EXPECT_EQ(c.effective_dilations(3), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(c.effective_dilations(1), (std::vector<std::size_t>{1}));
  c.dilations = {1, 3};
  EXPECT_THROW(c.validate(), ConfigError);
  c.dilations = {2, 1};
  EXPECT_THROW(c.validate(), ConfigError);
  c = ClassifierConfig{};
  c.num_classes = 1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(GestureClassifier, LogitShapes) {
  const GestureClassifier clf(small_config(5), 1);
  EXPECT_EQ(clf.forward(random_tensor({3, 5, 8, 16}, 1, 0, 1)).shape(), (Shape{3, 5}));
  EXPECT_EQ(clf.classify(random_tensor({5, 8, 16}, 2, 0, 1)).shape(), (Shape{5}));
  EXPECT_EQ(clf.forward(random_tensor({2, 1, 4, 4}, 3, 0, 1)).shape(), (Shape{2, 5}));
}

TEST(GestureClassifier, BatchRowsAreIndependent) {
  const GestureClassifier clf(small_config(), 1);
  const Tensor batch = random_tensor({2, 3, 8, 8}, 4, 0, 1);
  const Tensor both = clf.forward(batch);
  std::vector<double> second(batch.data().begin() + 3 * 64, batch.data().end());
  const Tensor alone = clf.classify(Tensor(Shape{3, 8, 8}, second));
  for (std::size_t c = 0; c < 4; ++c) ASSERT_NEAR(both.data()[4 + c], alone.data()[c], 1e-12);
}

TEST(GestureClassifier, HeadRowPermutationPermutesLogits) {
  GestureClassifier clf(small_config(3), 7);
  const Tensor maps = random_tensor({1, 5, 8, 8}, 8, 0, 1);
  const Tensor before = clf.forward(maps);
  const std::size_t perm[3] = {2, 0, 1};
  Tensor& w = clf.params().get("head.out.weight");
  Tensor& b = clf.params().get("head.out.bias");
  const std::size_t hidden = w.dim(1);
  const std::vector<double> w0(w.data().begin(), w.data().end()), b0(b.data().begin(), b.data().end());
  for (std::size_t r = 0; r < 3; ++r) {
    b.mutable_data()[r] = b0[perm[r]];
    for (std::size_t j = 0; j < hidden; ++j) w.mutable_data()[r * hidden + j] = w0[perm[r] * hidden + j];
  }
  const Tensor after = clf.forward(maps);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(after.data()[r], before.data()[perm[r]]);
}

TEST(GestureClassifier, EveryFrameReachesTheOutput) {
  const GestureClassifier clf(small_config(), 3);
  const Tensor maps = random_tensor({1, 5, 8, 8}, 9, 0, 1);
  const Tensor base = clf.forward(maps);
  for (std::size_t f = 0; f < 5; ++f) {
    Tensor changed = maps.detach();
    for (std::size_t i = 0; i < 64; ++i) changed.mutable_data()[f * 64 + i] += 0.5;
    const Tensor out = clf.forward(changed);
    double diff = 0;
    for (std::size_t c = 0; c < 4; ++c) diff += std::abs(out.data()[c] - base.data()[c]);
    EXPECT_GT(diff, 0.0) << "frame " << f;
  }
}

TEST(GestureClassifier, Errors) {
  const GestureClassifier clf(small_config(), 1);
  EXPECT_THROW(clf.forward(Tensor(Shape{1, 2, 3, 8})), ConfigError);
  EXPECT_THROW(clf.forward(Tensor(Shape{2, 8, 8})), DimensionError);
  ParamStore params = GestureClassifier::make_params(small_config(), 1);
  EXPECT_THROW(GestureClassifier(small_config(6), params), ConfigError);
  EXPECT_NO_THROW(GestureClassifier(small_config(), params));
}

TEST(GestureClassifier, SeededInitIsDeterministic) {
  EXPECT_TRUE(GestureClassifier::make_params(small_config(), 3).bitwise_equal(GestureClassifier::make_params(small_config(), 3)));
  EXPECT_FALSE(GestureClassifier::make_params(small_config(), 3).bitwise_equal(GestureClassifier::make_params(small_config(), 4)));
}

TEST(Predict, ArgmaxWithLowestIndexTieBreak) {
  const std::vector<double> a{0.1, 2.0, -1.0};
  EXPECT_EQ(predict(a), 1u);
  const std::vector<double> tie{3.0, 1.0, 3.0};
  EXPECT_EQ(predict(tie), 0u);
  std::vector<double> shifted = a;
  for (double& v : shifted) v += 100.0;
  EXPECT_EQ(predict(shifted), 1u);
  EXPECT_THROW(predict(std::vector<double>{}), ArgumentError);
}
