#pragma once

// Spatially-adaptive feature modulation network for radar-frame
// super-resolution. Every frame of a recording is an independent 2-channel
// (re, im) image; the network maps [B, 2, h, w] -> [B, 2, h*ds, w*df].

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

#include "radgest/param_store.hpp"
#include "radgest/tensor.hpp"

namespace radgest {

struct SafmnConfig {
  std::size_t channels = 36;  // divisible by 4: one group per SAFM scale level
  std::size_t blocks = 8;
  std::size_t ds = 2;
  std::size_t df = 2;
  std::size_t input_channels = 2;
  std::size_t ccm_expansion = 2;
  bool bias = true;
  double ln_eps = 1e-6;

  void validate() const;  // throws ConfigError
};

struct SafmWeights {
  std::array<Tensor, 4> dw_weight;  // [C/4, 1, 3, 3]
  std::array<Tensor, 4> dw_bias;    // [C/4] or undefined
  Tensor fuse_weight;               // [C, C, 1, 1]
  Tensor fuse_bias;
};

struct CcmWeights {
  Tensor expand_weight;  // [C*e, C, 3, 3]
  Tensor expand_bias;
  Tensor compress_weight;  // [C, C*e, 1, 1]
  Tensor compress_bias;
};

struct FmmWeights {
  Tensor ln1_gamma, ln1_beta;
  SafmWeights safm;
  Tensor ln2_gamma, ln2_beta;
  CcmWeights ccm;
};

// Split into four channel groups; group 0 gets a depthwise 3x3 conv, group i
// is max-pooled to (H/2^i, W/2^i) (at least 1x1), convolved, and
// nearest-interpolated back. The concatenation is fused by a 1x1 conv, passed
// through GELU and multiplies the layer input.
Tensor safm_layer(const Tensor& x, const SafmWeights& w);

// 3x3 conv C -> C*e, GELU, 1x1 conv back to C.
Tensor ccm_layer(const Tensor& x, const CcmWeights& w);

// y = SAFM(LN(x)) + x;  z = CCM(LN(y)) + y.
Tensor fmm_block(const Tensor& x, const FmmWeights& w, double ln_eps);

class SafmnModel {
 public:
  // Fresh model with seeded fan-in uniform initialization. Values are rounded
  // to binary32 so checkpoints reproduce them exactly.
  SafmnModel(SafmnConfig config, std::uint64_t seed);
  // Wraps existing parameters; throws ConfigError listing missing/extra names
  // or shape mismatches.
  SafmnModel(SafmnConfig config, ParamStore params);

  const SafmnConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // [B, 2, h, w] -> [B, 2, h*ds, w*df].
  Tensor forward_frames(const Tensor& x) const;

  SafmWeights safm_weights(std::size_t block) const;
  CcmWeights ccm_weights(std::size_t block) const;
  FmmWeights fmm_weights(std::size_t block) const;

  // Closed-form parameter count for a configuration.
  static std::size_t parameter_count(const SafmnConfig& config);
  // Names and shapes of every parameter, in registration order.
  static ParamStore make_params(const SafmnConfig& config, std::uint64_t seed);

 private:
  Tensor opt(const std::string& name) const;

  SafmnConfig config_;
  ParamStore params_;
};

// [2, F, h, w] <-> [F, 2, h, w].
Tensor channels_to_frames(const Tensor& x);
Tensor frames_to_channels(const Tensor& x);

// [2, F, h, w] -> [2, F, h*ds, w*df]; frames are processed as a batch.
Tensor safmn_forward(const Tensor& lr, const SafmnModel& model);

// Applies a x2 model `applications` times with shared weights. Input and
// output use the [2, F, h, w] layout.
Tensor recursive_forward(const Tensor& lr, const SafmnModel& model_x2, std::size_t applications);
// Same on the frame-batch layout [B, 2, h, w].
Tensor recursive_forward_frames(const Tensor& x, const SafmnModel& model_x2,
                                std::size_t applications);

}  // namespace radgest
