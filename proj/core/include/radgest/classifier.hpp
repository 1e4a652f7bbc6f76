#pragma once

// Range-Doppler pre-processing and the 2D-CNN + dilated TCN gesture classifier.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "radgest/param_store.hpp"
#include "radgest/tensor.hpp"

namespace radgest {

struct ClassifierConfig {
  std::size_t num_classes = 12;
  std::vector<std::size_t> cnn_channels{8, 16};  // one {3x3 conv, GELU, 2x2 max pool} stage each
  std::size_t tcn_channels = 32;
  std::size_t tcn_kernel = 3;
  std::vector<std::size_t> dilations{1, 2, 4};
  std::size_t hidden = 64;

  void validate() const;  // throws ConfigError
  // Dilations actually used for a sequence of `frames` steps: entries larger
  // than frames - 1 are dropped (dilation 1 is always kept).
  std::vector<std::size_t> effective_dilations(std::size_t frames) const;
};

// [2, F, M, N] (re, im) -> [F, M, N]: per frame, DFT over the slow-time axis
// M followed by an eps-smoothed magnitude. Differentiable.
Tensor to_range_doppler(const Tensor& sr, double eps = 1e-12);

// Same on the frame-batch layout [B, 2, M, N] -> [B, M, N].
Tensor range_doppler_frames(const Tensor& frames, double eps = 1e-12);

class GestureClassifier {
 public:
  GestureClassifier(ClassifierConfig config, std::uint64_t seed);
  // Wraps existing parameters; throws ConfigError listing missing/extra names.
  GestureClassifier(ClassifierConfig config, ParamStore params);

  const ClassifierConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // maps: [B, F, M, N] -> logits [B, num_classes].
  Tensor forward(const Tensor& maps) const;
  // Single recording: [F, M, N] -> logits [num_classes].
  Tensor classify(const Tensor& maps) const;

  static ParamStore make_params(const ClassifierConfig& config, std::uint64_t seed);

 private:
  Tensor opt(const std::string& name) const;

  ClassifierConfig config_;
  ParamStore params_;
};

// argmax with lowest-index tie break; throws ArgumentError on empty input.
std::size_t predict(std::span<const double> logits);

}  // namespace radgest
