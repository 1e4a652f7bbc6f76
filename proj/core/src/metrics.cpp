#include "radgest/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "radgest/error.hpp"

namespace radgest {

namespace {

constexpr std::array<double, 5> kScaleWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

void check_pair(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) throw DimensionError(std::string(what) + ": size mismatch");
  if (a.empty()) throw ArgumentError(std::string(what) + ": empty input");
}

struct Image {
  std::size_t h = 0, w = 0;
  std::vector<double> px;
};

// Separable valid Gaussian filter.
Image filter_valid(const Image& in, const std::vector<double>& g) {
  const std::size_t k = g.size();
  const std::size_t ow = in.w - k + 1, oh = in.h - k + 1;
  std::vector<double> tmp(in.h * ow, 0.0);
  for (std::size_t r = 0; r < in.h; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) acc += g[j] * in.px[r * in.w + c + j];
      tmp[r * ow + c] = acc;
    }
  }
  Image out{oh, ow, std::vector<double>(oh * ow, 0.0)};
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) acc += g[j] * tmp[(r + j) * ow + c];
      out.px[r * ow + c] = acc;
    }
  }
  return out;
}

Image avg_pool2(const Image& in) {
  Image out{in.h / 2, in.w / 2, {}};
  out.px.resize(out.h * out.w);
  for (std::size_t r = 0; r < out.h; ++r) {
    for (std::size_t c = 0; c < out.w; ++c) {
      const std::size_t i = 2 * r * in.w + 2 * c;
      out.px[r * out.w + c] = 0.25 * (in.px[i] + in.px[i + 1] + in.px[i + in.w] + in.px[i + in.w + 1]);
    }
  }
  return out;
}

Image product(const Image& a, const Image& b) {
  Image out{a.h, a.w, std::vector<double>(a.px.size())};
  for (std::size_t i = 0; i < a.px.size(); ++i) out.px[i] = a.px[i] * b.px[i];
  return out;
}

// Mean SSIM map and mean contrast-structure map at one scale.
std::pair<double, double> ssim_terms(const Image& x, const Image& y, const std::vector<double>& g,
                                     double c1, double c2) {
  const Image mx = filter_valid(x, g), my = filter_valid(y, g);
  const Image sxx = filter_valid(product(x, x), g);
  const Image syy = filter_valid(product(y, y), g);
  const Image sxy = filter_valid(product(x, y), g);
  double full = 0.0, cs = 0.0;
  for (std::size_t i = 0; i < mx.px.size(); ++i) {
    const double ux = mx.px[i], uy = my.px[i];
    const double vx = sxx.px[i] - ux * ux, vy = syy.px[i] - uy * uy, cov = sxy.px[i] - ux * uy;
    const double l = (2.0 * ux * uy + c1) / (ux * ux + uy * uy + c1);
    const double c = (2.0 * cov + c2) / (vx + vy + c2);
    full += l * c;
    cs += c;
  }
  const double n = static_cast<double>(mx.px.size());
  return {full / n, cs / n};
}

}  // namespace

double psnr(std::span<const double> sr, std::span<const double> hr, double max_val) {
  check_pair(sr, hr, "psnr");
  double mse = 0.0;
  for (std::size_t i = 0; i < sr.size(); ++i) {
    const double d = sr[i] - hr[i];
    mse += d * d;
  }
  mse /= static_cast<double>(sr.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(max_val * max_val / mse);
}

double mean_absolute_error(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b, "mean_absolute_error");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

std::size_t ms_ssim_scales(std::size_t height, std::size_t width, const MsSsimOptions& opts) {
  std::size_t extent = std::min(height, width);
  std::size_t scales = 0;
  while (scales < opts.max_scales && extent >= opts.window) {
    ++scales;
    extent /= 2;
  }
  return scales;
}

double ms_ssim(std::span<const double> a, std::span<const double> b, std::size_t height,
               std::size_t width, const MsSsimOptions& opts) {
  check_pair(a, b, "ms_ssim");
  if (a.size() != height * width) throw DimensionError("ms_ssim: size does not match height*width");
  const std::size_t scales = ms_ssim_scales(height, width, opts);
  if (scales == 0) {
    throw ArgumentError("ms_ssim: image " + std::to_string(height) + "x" + std::to_string(width) +
                        " smaller than the " + std::to_string(opts.window) + "x" +
                        std::to_string(opts.window) + " window");
  }
  if (opts.max_scales > kScaleWeights.size()) throw ArgumentError("ms_ssim: at most 5 scales");

  std::vector<double> g(opts.window);
  const double centre = static_cast<double>(opts.window - 1) / 2.0;
  double gsum = 0.0;
  for (std::size_t i = 0; i < opts.window; ++i) {
    const double d = static_cast<double>(i) - centre;
    g[i] = std::exp(-d * d / (2.0 * opts.sigma * opts.sigma));
    gsum += g[i];
  }
  for (double& v : g) v /= gsum;

  double wsum = 0.0;
  for (std::size_t s = 0; s < scales; ++s) wsum += kScaleWeights[s];

  const double c1 = (opts.k1 * opts.data_range) * (opts.k1 * opts.data_range);
  const double c2 = (opts.k2 * opts.data_range) * (opts.k2 * opts.data_range);
  Image x{height, width, std::vector<double>(a.begin(), a.end())};
  Image y{height, width, std::vector<double>(b.begin(), b.end())};
  double result = 1.0;
  for (std::size_t s = 0; s < scales; ++s) {
    const auto [ssim, cs] = ssim_terms(x, y, g, c1, c2);
    const double weight = kScaleWeights[s] / wsum;
    const double term = s + 1 == scales ? ssim : cs;
    result *= std::pow(std::max(term, 0.0), weight);
    if (s + 1 < scales) {
      x = avg_pool2(x);
      y = avg_pool2(y);
    }
  }
  return result;
}

}  // namespace radgest
