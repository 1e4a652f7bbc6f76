#pragma once

// Differentiable tensor operations. Image tensors use NCHW layout
// ([batch, channels, height, width]); sequence tensors use [batch, channels, time].

#include <cstddef>
#include <span>
#include <vector>

#include "radgest/tensor.hpp"

namespace radgest {

// Elementwise arithmetic (identical shapes).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor abs(const Tensor& x);  // subgradient 0 at x == 0
Tensor square(const Tensor& x);

// Reductions to a one-element tensor.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);
// out.shape[i] = x.shape[perm[i]].
Tensor permute(const Tensor& x, std::span<const std::size_t> perm);

struct Conv2dOptions {
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t groups = 1;
};

// Cross-correlation with zero padding. weight: [C_out, C_in/groups, kh, kw],
// bias: [C_out] or undefined.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              const Conv2dOptions& options = {});

// Window for output row i spans [floor(i*H/out_h), ceil((i+1)*H/out_h)).
// The gradient goes to the first maximum of each window.
Tensor adaptive_max_pool2d(const Tensor& x, std::size_t out_h, std::size_t out_w);

// Non-overlapping k x k max pooling, trailing rows/columns dropped.
Tensor max_pool2d(const Tensor& x, std::size_t kernel);

// out[i, j] = in[floor(i*H/out_h), floor(j*W/out_w)].
Tensor interpolate_nearest(const Tensor& x, std::size_t out_h, std::size_t out_w);

// [B, C*ds*df, H, W] -> [B, C, H*ds, W*df] with
// out[c, h*ds+i, w*df+j] = in[c*ds*df + i*df + j, h, w].
Tensor pixel_shuffle(const Tensor& x, std::size_t ds, std::size_t df);
Tensor pixel_unshuffle(const Tensor& x, std::size_t ds, std::size_t df);

// Normalizes the channel vector at every spatial position (axis 1 of a tensor
// of rank >= 2), then applies per-channel gamma/beta. Variance is biased.
Tensor layer_norm_channels(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                           double eps);

// Exact GELU: x * Phi(x).
Tensor gelu(const Tensor& x);

// Splits axis 1 into k equal contiguous groups; concat_channels is the inverse.
std::vector<Tensor> split_channels(const Tensor& x, std::size_t k);
Tensor concat_channels(std::span<const Tensor> parts);

// x: [B, C_in, T], weight: [C_out, C_in, k], bias: [C_out] or undefined.
// Causal mode left-pads by dilation*(k-1) so the output keeps length T;
// otherwise the output is the valid part of length T - dilation*(k-1).
Tensor dilated_conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
                      std::size_t dilation, bool causal);

// x: [B, in], weight: [out, in], bias: [out] or undefined.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

// [B, C, H, W] -> [B, C].
Tensor global_avg_pool2d(const Tensor& x);

// [B, C, T] -> [B, C] taking t = T - 1.
Tensor last_time_step(const Tensor& x);

// Mean over the batch of -log softmax(logits[b])[labels[b]]. logits: [B, C].
Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> labels);

// x: [B, 2, M, N] holding (re, im) of B complex M x N frames. Returns [B, M, N]
// with sqrt(|DFT_m(x)|^2 + eps), the unnormalized DFT taken along M.
Tensor doppler_magnitude(const Tensor& x, double eps = 1e-12);

}  // namespace radgest
