#pragma once

#include <cstddef>
#include <span>

#include "radgest/tensor.hpp"

namespace radgest {

// Mean over the batch of -log softmax(logits)[label]; logits [B, C] or [C].
Tensor cross_entropy_loss(const Tensor& logits, std::span<const std::size_t> labels);

// mean |sr - hr|; throws DimensionError on shape mismatch.
Tensor l1_loss(const Tensor& sr, const Tensor& hr);

// gamma * l1_loss(sr, hr) + cross_entropy(logits, labels).
Tensor combined_loss(const Tensor& sr, const Tensor& hr, const Tensor& logits,
                     std::span<const std::size_t> labels, double gamma);

}  // namespace radgest
