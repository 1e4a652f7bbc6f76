#include "radgest/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "radgest/error.hpp"

namespace radgest {

std::size_t masked_patch_count(std::size_t num_patches, double percent) {
  if (!(percent >= 0.0 && percent < 100.0)) {
    throw ArgumentError("mask percentage must lie in [0, 100), got " + std::to_string(percent));
  }
  return static_cast<std::size_t>(std::llround(percent / 100.0 * static_cast<double>(num_patches)));
}

std::vector<std::size_t> sample_masked_patches(std::size_t num_patches, double percent, Rng& rng) {
  const std::size_t count = masked_patch_count(num_patches, percent);
  std::vector<std::size_t> pool(num_patches);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + uniform_index(rng, num_patches - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

Tensor patch_mask_augment(const Tensor& x, double percent, std::size_t patch, Rng& rng) {
  if (x.rank() != 4) throw DimensionError("patch_mask_augment: expected [B, C, H, W]");
  if (patch == 0) throw ArgumentError("patch_mask_augment: patch size must be >= 1");
  masked_patch_count(1, percent);  // validates percent
  const std::size_t batch = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t rows = (h + patch - 1) / patch, cols = (w + patch - 1) / patch;
  Tensor out = x.detach();
  if (percent == 0.0) return out;
  auto d = out.mutable_data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t idx : sample_masked_patches(rows * cols, percent, rng)) {
      const std::size_t r0 = (idx / cols) * patch, c0 = (idx % cols) * patch;
      const std::size_t r1 = std::min(h, r0 + patch), c1 = std::min(w, c0 + patch);
      for (std::size_t ch = 0; ch < c; ++ch) {
        double* plane = d.data() + (b * c + ch) * h * w;
        for (std::size_t r = r0; r < r1; ++r) std::fill(plane + r * w + c0, plane + r * w + c1, 0.0);
      }
    }
  }
  return out;
}

}  // namespace radgest
