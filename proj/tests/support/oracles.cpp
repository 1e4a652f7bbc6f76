#include "oracles.hpp"

#include <cmath>
#include <numbers>

namespace radgest::testing {

std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    long double re = 0, im = 0;
    for (std::size_t m = 0; m < n; ++m) {
      // Reduce k*m mod n first so the angle stays small and exact.
      const long double ang = -2.0L * std::numbers::pi_v<long double> *
                              static_cast<long double>((k * m) % n) / static_cast<long double>(n);
      const long double c = std::cos(ang), s = std::sin(ang);
      re += x[m].real() * c - x[m].imag() * s;
      im += x[m].real() * s + x[m].imag() * c;
    }
    out[k] = {static_cast<double>(re), static_cast<double>(im)};
  }
  return out;
}

Tensor naive_conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, std::size_t stride,
                    std::size_t pad, std::size_t groups) {
  const std::size_t b = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t cout = w.dim(0), cg = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  const std::size_t ph = h + 2 * pad, pw = wd + 2 * pad;
  std::vector<double> padded(b * cin * ph * pw, 0.0);
  for (std::size_t n = 0; n < b; ++n)
    for (std::size_t c = 0; c < cin; ++c)
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < wd; ++j)
          padded[((n * cin + c) * ph + i + pad) * pw + j + pad] = x.data()[((n * cin + c) * h + i) * wd + j];
  const std::size_t oh = (ph - kh) / stride + 1, ow = (pw - kw) / stride + 1;
  const std::size_t out_per_group = cout / groups;
  Tensor out(Shape{b, cout, oh, ow});
  auto o = out.mutable_data();
  for (std::size_t n = 0; n < b; ++n)
    for (std::size_t co = 0; co < cout; ++co) {
      const std::size_t g = co / out_per_group;
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          long double acc = bias.defined() ? bias.data()[co] : 0.0;
          for (std::size_t ci = 0; ci < cg; ++ci)
            for (std::size_t u = 0; u < kh; ++u)
              for (std::size_t v = 0; v < kw; ++v)
                acc += static_cast<long double>(w.data()[((co * cg + ci) * kh + u) * kw + v]) *
                       padded[((n * cin + g * cg + ci) * ph + i * stride + u) * pw + j * stride + v];
          o[((n * cout + co) * oh + i) * ow + j] = static_cast<double>(acc);
        }
    }
  return out;
}

std::vector<double> naive_range_doppler(const ComplexCube& cube) {
  std::vector<double> out(cube.size());
  std::vector<std::complex<double>> col(cube.pulses);
  for (std::size_t k = 0; k < cube.frames; ++k)
    for (std::size_t n = 0; n < cube.samples; ++n) {
      for (std::size_t m = 0; m < cube.pulses; ++m) col[m] = cube.at(k, m, n);
      const auto spec = naive_dft(col);
      for (std::size_t m = 0; m < cube.pulses; ++m) out[cube.index(k, m, n)] = std::abs(spec[m]);
    }
  return out;
}

}  // namespace radgest::testing
