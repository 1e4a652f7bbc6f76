#pragma once

// Image-quality metrics used to score super-resolved frames.

#include <cstddef>
#include <span>

namespace radgest {

// Peak signal-to-noise ratio in dB, 10 log10(max^2 / MSE). Returns +infinity
// when the inputs are identical.
double psnr(std::span<const double> sr, std::span<const double> hr, double max_val = 1.0);

double mean_absolute_error(std::span<const double> a, std::span<const double> b);

struct MsSsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double data_range = 1.0;
  double k1 = 0.01;
  double k2 = 0.03;
  std::size_t max_scales = 5;
};

// Number of scales used for an image of the given size: the largest
// s <= max_scales with min(h, w) / 2^(s-1) >= window.
std::size_t ms_ssim_scales(std::size_t height, std::size_t width, const MsSsimOptions& opts = {});

// Multi-scale SSIM of two row-major height x width images. Gaussian window,
// valid filtering, 2x2 average-pool between scales, canonical scale weights
// (0.0448, 0.2856, 0.3001, 0.2363, 0.1333) truncated and renormalized when
// fewer scales fit. Negative per-scale terms are clamped to 0, so the result
// lies in [0, 1]. Throws ArgumentError when the image is smaller than the window.
double ms_ssim(std::span<const double> a, std::span<const double> b, std::size_t height,
               std::size_t width, const MsSsimOptions& opts = {});

}  // namespace radgest
