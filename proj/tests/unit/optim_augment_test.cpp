#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "gradcheck.hpp"
#include "radgest/augment.hpp"
#include "radgest/error.hpp"
#include "radgest/optim.hpp"

using namespace radgest;
using radgest::testing::random_tensor;

TEST(AdamStep, ZeroGradientLeavesParamsUnchanged) {
  std::vector<double> p{0.5, -1.25, 3.0};
  const std::vector<double> before = p;
  const std::vector<double> g(3, 0.0);
  AdamState state;
  for (int i = 0; i < 5; ++i) adam_step(p, g, state, {});
  EXPECT_EQ(p, before);
  EXPECT_EQ(state.step, 5u);
}

TEST(AdamStep, FirstStepMovesByLearningRateAgainstSign) {
  std::vector<double> p{1.0, 1.0, 1.0};
  const std::vector<double> g{3.0, -0.02, 150.0};
  AdamState state;
  AdamConfig cfg;
  cfg.learning_rate = 0.01;
  adam_step(p, g, state, cfg);
  EXPECT_NEAR(p[0], 0.99, 1e-8);
  EXPECT_NEAR(p[1], 1.01, 1e-8);
  EXPECT_NEAR(p[2], 0.99, 1e-8);
}

TEST(AdamStep, TwoStepHandTrace) {
  std::vector<double> p{1.0};
  AdamState state;
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  adam_step(p, std::vector<double>{0.5}, state, cfg);
  // m = 0.05, v = 0.00025; bias-corrected 0.5 and 0.25.
  const double p1 = 1.0 - 0.1 * 0.5 / (0.5 + 1e-8);
  EXPECT_NEAR(p[0], p1, 1e-15);
  adam_step(p, std::vector<double>{-0.2}, state, cfg);
  // m = 0.025, v = 0.00028975; corrections 0.19 and 0.001999.
  const double mhat = 0.025 / 0.19, vhat = 0.00028975 / 0.001999;
  EXPECT_NEAR(p[0], p1 - 0.1 * mhat / (std::sqrt(vhat) + 1e-8), 1e-12);
}

TEST(AdamStep, SizeMismatch) {
  std::vector<double> p(3);
  AdamState state;
  EXPECT_THROW(adam_step(p, std::vector<double>(2), state, {}), DimensionError);
}

TEST(Adam, UpdatesStoreAndRoundsToFloat) {
  ParamStore params;
  params.add("a", Tensor(Shape{2}, std::vector<double>{1.0, 2.0}));
  params.add("b", Tensor(Shape{1}, 0.5));
  Adam adam(params, {}, true);
  params.get("a").mutable_grad()[0] = 1.0;
  params.get("a").mutable_grad()[1] = -1.0;
  adam.step();
  EXPECT_EQ(adam.steps(), 1u);
  EXPECT_EQ(params.get("a").data()[0], static_cast<double>(static_cast<float>(1.0 - 1e-3 * 1.0 / (1.0 + 1e-8))));
  EXPECT_GT(params.get("a").data()[1], 2.0);
  EXPECT_EQ(params.get("b").data()[0], 0.5);
  adam.zero_grad();
  EXPECT_EQ(params.get("a").grad()[0], 0.0);
}

TEST(MaskedPatches, CountRule) {
  EXPECT_EQ(masked_patch_count(16, 50), 8u);
  EXPECT_EQ(masked_patch_count(16, 0), 0u);
  EXPECT_EQ(masked_patch_count(10, 25), 3u);  // 2.5 rounds away from zero
  EXPECT_EQ(masked_patch_count(9, 10), 1u);
  EXPECT_THROW(masked_patch_count(16, 100), ArgumentError);
  EXPECT_THROW(masked_patch_count(16, -1), ArgumentError);
}

TEST(PatchMask, ZeroPercentIsIdentity) {
  const Tensor x = random_tensor({2, 2, 6, 7}, 1);
  Rng rng = make_rng(1);
  const Tensor y = patch_mask_augment(x, 0.0, 2, rng);
  for (std::size_t i = 0; i < x.numel(); ++i) ASSERT_EQ(y.data()[i], x.data()[i]);
}

TEST(PatchMask, MasksExactPatchCountSharedAcrossChannels) {
  const Tensor x(Shape{3, 2, 8, 8}, 1.0);
  Rng rng = make_rng(2);
  const Tensor y = patch_mask_augment(x, 50.0, 2, rng);
  for (std::size_t b = 0; b < 3; ++b) {
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < 64; ++i) {
      const double c0 = y.data()[(b * 2) * 64 + i], c1 = y.data()[(b * 2 + 1) * 64 + i];
      ASSERT_EQ(c0, c1);
      zeros += c0 == 0.0;
    }
    EXPECT_EQ(zeros, 8u * 4);
    // Zeroed pixels form whole 2x2 patches.
    for (std::size_t pr = 0; pr < 4; ++pr)
      for (std::size_t pc = 0; pc < 4; ++pc) {
        const double* base = y.data().data() + b * 2 * 64;
        const double v = base[pr * 2 * 8 + pc * 2];
        EXPECT_EQ(base[pr * 2 * 8 + pc * 2 + 1], v);
        EXPECT_EQ(base[(pr * 2 + 1) * 8 + pc * 2], v);
        EXPECT_EQ(base[(pr * 2 + 1) * 8 + pc * 2 + 1], v);
      }
  }
}

TEST(PatchMask, EdgePatchesCount) {
  // 5x5 with 2x2 patches -> 3x3 = 9 patches; 90% masks 8 of them.
  const Tensor x(Shape{1, 1, 5, 5}, 1.0);
  Rng rng = make_rng(3);
  const Tensor y = patch_mask_augment(x, 90.0, 2, rng);
  std::size_t ones = 0;
  for (double v : y.data()) ones += v == 1.0;
  EXPECT_TRUE(ones == 4 || ones == 2 || ones == 1) << ones;
}

TEST(PatchMask, DeterministicAndDetached) {
  Tensor x = random_tensor({2, 2, 6, 6}, 4);
  x.set_requires_grad(true);
  Rng a = make_rng(5), b = make_rng(5);
  const Tensor ya = patch_mask_augment(x, 30.0, 2, a), yb = patch_mask_augment(x, 30.0, 2, b);
  for (std::size_t i = 0; i < ya.numel(); ++i) ASSERT_EQ(ya.data()[i], yb.data()[i]);
  EXPECT_FALSE(ya.requires_grad());
}

TEST(PatchMask, Errors) {
  Rng rng = make_rng(6);
  EXPECT_THROW(patch_mask_augment(Tensor(Shape{1, 1, 4, 4}), 10.0, 0, rng), ArgumentError);
  EXPECT_THROW(patch_mask_augment(Tensor(Shape{1, 4, 4}), 10.0, 2, rng), DimensionError);
  EXPECT_THROW(patch_mask_augment(Tensor(Shape{1, 1, 4, 4}), 100.0, 2, rng), ArgumentError);
}

TEST(MaskedPatches, SelectionIsUniform) {
  const std::size_t n = 16, draws = 10000;
  std::vector<double> counts(n, 0.0);
  Rng rng = make_rng(7);
  for (std::size_t d = 0; d < draws; ++d) {
    const auto picked = sample_masked_patches(n, 25.0, rng);
    ASSERT_EQ(picked.size(), 4u);
    for (std::size_t i = 1; i < picked.size(); ++i) ASSERT_LT(picked[i - 1], picked[i]);
    for (std::size_t p : picked) counts[p] += 1;
  }
  const double expected = draws * 4.0 / n;
  double chi2 = 0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  const boost::math::chi_squared dist(static_cast<double>(n - 1));
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.01) << chi2;
}
