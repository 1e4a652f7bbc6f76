#include "radgest/fft.hpp"

#include <cmath>
#include <numbers>

#include "radgest/error.hpp"

namespace radgest {

namespace {

bool is_power_of_two(std::size_t n) { return n && !(n & (n - 1)); }

void radix2(std::span<double> re, std::span<double> im, bool inverse) {
  const std::size_t n = re.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    std::vector<double> wr(half), wi(half);
    for (std::size_t k = 0; k < half; ++k) {
      const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(len);
      wr[k] = std::cos(ang);
      wi[k] = std::sin(ang);
    }
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const std::size_t a = start + k;
        const std::size_t b = a + half;
        const double tr = re[b] * wr[k] - im[b] * wi[k];
        const double ti = re[b] * wi[k] + im[b] * wr[k];
        re[b] = re[a] - tr;
        im[b] = im[a] - ti;
        re[a] += tr;
        im[a] += ti;
      }
    }
  }
}

// Chirp-z evaluation for arbitrary lengths via a power-of-two convolution.
void bluestein(std::span<double> re, std::span<double> im, bool inverse) {
  const std::size_t n = re.size();
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;

  const double sign = inverse ? 1.0 : -1.0;
  // w[k] = exp(sign * i * pi * k^2 / n); k^2 reduced mod 2n to keep the angle small.
  std::vector<double> wr(n), wi(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t k2 = (k * k) % (2 * n);
    const double ang = sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    wr[k] = std::cos(ang);
    wi[k] = std::sin(ang);
  }

  std::vector<double> ar(m, 0.0), ai(m, 0.0), br(m, 0.0), bi(m, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    ar[k] = re[k] * wr[k] - im[k] * wi[k];
    ai[k] = re[k] * wi[k] + im[k] * wr[k];
  }
  br[0] = wr[0];
  bi[0] = -wi[0];
  for (std::size_t k = 1; k < n; ++k) {
    br[k] = br[m - k] = wr[k];
    bi[k] = bi[m - k] = -wi[k];
  }
  radix2(ar, ai, false);
  radix2(br, bi, false);
  for (std::size_t k = 0; k < m; ++k) {
    const double r = ar[k] * br[k] - ai[k] * bi[k];
    const double i = ar[k] * bi[k] + ai[k] * br[k];
    ar[k] = r;
    ai[k] = i;
  }
  radix2(ar, ai, true);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) {
    const double cr = ar[k] * inv_m;
    const double ci = ai[k] * inv_m;
    re[k] = cr * wr[k] - ci * wi[k];
    im[k] = cr * wi[k] + ci * wr[k];
  }
}

}  // namespace

ComplexTensor::ComplexTensor(Shape s)
    : shape(std::move(s)), re(shape_numel(shape), 0.0), im(shape_numel(shape), 0.0) {}

ComplexTensor::ComplexTensor(Shape s, std::vector<double> real, std::vector<double> imag)
    : shape(std::move(s)), re(std::move(real)), im(std::move(imag)) {
  if (re.size() != shape_numel(shape) || im.size() != re.size()) {
    throw DimensionError("complex tensor planes do not match shape " + shape_to_string(shape));
  }
}

void fft_inplace(std::span<double> re, std::span<double> im, bool inverse) {
  if (re.size() != im.size()) throw DimensionError("fft: re/im length mismatch");
  const std::size_t n = re.size();
  if (n <= 1) return;
  if (is_power_of_two(n)) {
    radix2(re, im, inverse);
  } else {
    bluestein(re, im, inverse);
  }
}

ComplexTensor fft_1d(const ComplexTensor& x, std::size_t axis) {
  if (axis >= x.shape.size()) {
    throw DimensionError("fft_1d: axis " + std::to_string(axis) + " out of range for rank " +
                         std::to_string(x.shape.size()));
  }
  const std::size_t len = x.shape[axis];
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < x.shape.size(); ++i) inner *= x.shape[i];
  std::size_t outer = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= x.shape[i];

  ComplexTensor out = x;
  std::vector<double> br(len), bi(len);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      for (std::size_t k = 0; k < len; ++k) {
        br[k] = x.re[base + k * inner];
        bi[k] = x.im[base + k * inner];
      }
      fft_inplace(br, bi, false);
      for (std::size_t k = 0; k < len; ++k) {
        out.re[base + k * inner] = br[k];
        out.im[base + k * inner] = bi[k];
      }
    }
  }
  return out;
}

Tensor complex_to_tensor(const ComplexTensor& x) {
  Shape shape{2};
  shape.insert(shape.end(), x.shape.begin(), x.shape.end());
  std::vector<double> data;
  data.reserve(2 * x.numel());
  data.insert(data.end(), x.re.begin(), x.re.end());
  data.insert(data.end(), x.im.begin(), x.im.end());
  return Tensor(std::move(shape), std::move(data));
}

ComplexTensor tensor_to_complex(const Tensor& t) {
  if (t.rank() < 1 || t.dim(0) != 2) {
    throw DimensionError("tensor_to_complex: axis 0 must have size 2, got shape " +
                         shape_to_string(t.shape()));
  }
  Shape shape(t.shape().begin() + 1, t.shape().end());
  const std::size_t n = shape_numel(shape);
  auto d = t.data();
  return ComplexTensor(std::move(shape), std::vector<double>(d.begin(), d.begin() + n),
                       std::vector<double>(d.begin() + n, d.end()));
}

}  // namespace radgest
