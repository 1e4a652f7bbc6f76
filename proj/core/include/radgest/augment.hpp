#pragma once

#include <cstddef>
#include <vector>

#include "radgest/random.hpp"
#include "radgest/tensor.hpp"

namespace radgest {

// round(percent/100 * num_patches), halves rounded away from zero.
std::size_t masked_patch_count(std::size_t num_patches, double percent);

// Uniformly random subset of patch indices, drawn without replacement, sorted.
std::vector<std::size_t> sample_masked_patches(std::size_t num_patches, double percent, Rng& rng);

// Tiles every image of a [B, C, H, W] tensor with non-overlapping
// patch x patch squares (partial squares at the right/bottom edges count as
// patches) and zeroes a random masked_patch_count of them. The mask is drawn
// once per image b and shared by its C channels. Not differentiable; the
// result is a fresh leaf. Throws ArgumentError unless 0 <= percent < 100.
Tensor patch_mask_augment(const Tensor& x, double percent, std::size_t patch, Rng& rng);

}  // namespace radgest
