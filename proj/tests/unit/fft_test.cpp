#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "radgest/fft.hpp"
#include "radgest/random.hpp"

using namespace radgest;

namespace {

std::vector<std::complex<double>> random_signal(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed, n);
  std::vector<std::complex<double>> x(n);
  for (auto& z : x) z = {uniform(rng, -1, 1), uniform(rng, -1, 1)};
  return x;
}

double rel_error(const std::vector<std::complex<double>>& a, const std::vector<std::complex<double>>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace

class FftLength : public ::testing::TestWithParam<std::size_t> {};

TEST_P(FftLength, MatchesNaiveDft) {
  const std::size_t n = GetParam();
  const auto x = random_signal(n, 1);
  std::vector<double> re(n), im(n);
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = x[i].real();
    im[i] = x[i].imag();
  }
  fft_inplace(re, im);
  std::vector<std::complex<double>> got(n);
  for (std::size_t i = 0; i < n; ++i) got[i] = {re[i], im[i]};
  EXPECT_LT(rel_error(got, radgest::testing::naive_dft(x)), 1e-9) << "length " << n;
}

TEST_P(FftLength, InverseWithoutScalingRoundTrips) {
  const std::size_t n = GetParam();
  const auto x = random_signal(n, 2);
  std::vector<double> re(n), im(n);
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = x[i].real();
    im[i] = x[i].imag();
  }
  fft_inplace(re, im, false);
  fft_inplace(re, im, true);
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_NEAR(re[i] / n, x[i].real(), 1e-12);
    EXPECT_NEAR(im[i] / n, x[i].imag(), 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Lengths1To64, FftLength, ::testing::Range<std::size_t>(1, 65));

TEST(Fft1d, TransformsSelectedAxisOnly) {
  // [3, 5, 4] along axis 1 (the slow-time axis of a frame stack).
  ComplexTensor x(Shape{3, 5, 4});
  Rng rng = make_rng(3);
  for (std::size_t i = 0; i < x.numel(); ++i) {
    x.re[i] = uniform(rng, -1, 1);
    x.im[i] = uniform(rng, -1, 1);
  }
  const ComplexTensor y = fft_1d(x, 1);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t c = 0; c < 4; ++c) {
      std::vector<std::complex<double>> col(5);
      for (std::size_t m = 0; m < 5; ++m) col[m] = {x.re[(a * 5 + m) * 4 + c], x.im[(a * 5 + m) * 4 + c]};
      const auto ref = radgest::testing::naive_dft(col);
      for (std::size_t k = 0; k < 5; ++k) {
        EXPECT_NEAR(y.re[(a * 5 + k) * 4 + c], ref[k].real(), 1e-12);
        EXPECT_NEAR(y.im[(a * 5 + k) * 4 + c], ref[k].imag(), 1e-12);
      }
    }
}

TEST(Fft1d, ConstantSignalHasOnlyDc) {
  std::vector<double> re(8, 2.0), im(8, 0.0);
  fft_inplace(re, im);
  EXPECT_NEAR(re[0], 16.0, 1e-12);
  for (std::size_t k = 1; k < 8; ++k) EXPECT_NEAR(std::hypot(re[k], im[k]), 0.0, 1e-12);
}

TEST(ComplexTensor, ConvertsThroughLeadingAxis) {
  ComplexTensor x(Shape{2, 2}, {1, 2, 3, 4}, {5, 6, 7, 8});
  const Tensor t = complex_to_tensor(x);
  ASSERT_EQ(t.shape(), (Shape{2, 2, 2}));
  EXPECT_EQ(t.data()[4], 5.0);
  const ComplexTensor back = tensor_to_complex(t);
  EXPECT_EQ(back.re, x.re);
  EXPECT_EQ(back.im, x.im);
}
