#include "radgest/losses.hpp"

#include <cmath>

#include "radgest/error.hpp"
#include "radgest/ops.hpp"

namespace radgest {

Tensor cross_entropy_loss(const Tensor& logits, std::span<const std::size_t> labels) {
  if (logits.rank() == 1) return cross_entropy(reshape(logits, Shape{1, logits.dim(0)}), labels);
  return cross_entropy(logits, labels);
}

Tensor l1_loss(const Tensor& sr, const Tensor& hr) {
  if (sr.shape() != hr.shape()) {
    throw DimensionError("l1_loss: shape mismatch " + shape_to_string(sr.shape()) + " vs " +
                         shape_to_string(hr.shape()));
  }
  return mean(abs(sub(sr, hr)));
}

Tensor combined_loss(const Tensor& sr, const Tensor& hr, const Tensor& logits,
                     std::span<const std::size_t> labels, double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ArgumentError("gamma must be finite and >= 0");
  return add(scale(l1_loss(sr, hr), gamma), cross_entropy_loss(logits, labels));
}

}  // namespace radgest
