#include "radgest/safmn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "radgest/error.hpp"
#include "radgest/ops.hpp"
#include "radgest/random.hpp"

namespace radgest {

void SafmnConfig::validate() const {
  if (channels == 0 || channels % 4 != 0) {
    throw ConfigError("safmn channels must be a positive multiple of 4, got " +
                      std::to_string(channels));
  }
  if (ds == 0 || df == 0) throw ConfigError("safmn upscale factors must be >= 1");
  if (input_channels == 0) throw ConfigError("safmn input_channels must be >= 1");
  if (ccm_expansion == 0) throw ConfigError("safmn ccm_expansion must be >= 1");
  if (!(ln_eps > 0.0)) throw ConfigError("safmn ln_eps must be > 0");
}

Tensor safm_layer(const Tensor& x, const SafmWeights& w) {
  if (x.rank() != 4) throw DimensionError("safm_layer: expected [B, C, H, W] input");
  const std::size_t c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  if (c % 4 != 0) {
    throw ConfigError("safm_layer: channel count " + std::to_string(c) + " not divisible by 4");
  }
  const std::size_t cg = c / 4;
  auto groups = split_channels(x, 4);
  std::vector<Tensor> scaled;
  scaled.reserve(4);
  for (std::size_t i = 0; i < 4; ++i) {
    const Conv2dOptions dw{.stride = 1, .padding = 1, .groups = cg};
    if (i == 0) {
      scaled.push_back(conv2d(groups[0], w.dw_weight[0], w.dw_bias[0], dw));
      continue;
    }
    const std::size_t ph = std::max<std::size_t>(1, h >> i);
    const std::size_t pw = std::max<std::size_t>(1, wd >> i);
    Tensor pooled = adaptive_max_pool2d(groups[i], ph, pw);
    Tensor conv = conv2d(pooled, w.dw_weight[i], w.dw_bias[i], dw);
    scaled.push_back(interpolate_nearest(conv, h, wd));
  }
  Tensor fused = conv2d(concat_channels(scaled), w.fuse_weight, w.fuse_bias);
  return mul(gelu(fused), x);
}

Tensor ccm_layer(const Tensor& x, const CcmWeights& w) {
  Tensor hidden = gelu(conv2d(x, w.expand_weight, w.expand_bias, {.stride = 1, .padding = 1}));
  return conv2d(hidden, w.compress_weight, w.compress_bias);
}

Tensor fmm_block(const Tensor& x, const FmmWeights& w, double ln_eps) {
  Tensor y = add(safm_layer(layer_norm_channels(x, w.ln1_gamma, w.ln1_beta, ln_eps), w.safm), x);
  return add(ccm_layer(layer_norm_channels(y, w.ln2_gamma, w.ln2_beta, ln_eps), w.ccm), y);
}

namespace {

struct Initializer {
  Rng rng;
  bool bias;

  Tensor uniform_tensor(Shape shape, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor t(std::move(shape));
    for (double& v : t.mutable_data()) {
      v = static_cast<double>(static_cast<float>(uniform(rng, -bound, bound)));
    }
    return t;
  }

  void conv(ParamStore& store, const std::string& name, std::size_t cout, std::size_t cin_g,
            std::size_t k) {
    const std::size_t fan_in = cin_g * k * k;
    store.add(name + ".weight", uniform_tensor(Shape{cout, cin_g, k, k}, fan_in));
    if (bias) store.add(name + ".bias", uniform_tensor(Shape{cout}, fan_in));
  }

  void norm(ParamStore& store, const std::string& name, std::size_t c) {
    store.add(name + ".gamma", Tensor(Shape{c}, 1.0));
    store.add(name + ".beta", Tensor(Shape{c}, 0.0));
  }
};

std::string block_prefix(std::size_t i) { return "fmm." + std::to_string(i); }

}  // namespace

ParamStore SafmnModel::make_params(const SafmnConfig& config, std::uint64_t seed) {
  config.validate();
  ParamStore store;
  Initializer init{make_rng(seed, 0, 0x5af3), config.bias};
  const std::size_t c = config.channels, cg = c / 4, hidden = c * config.ccm_expansion;
  init.conv(store, "shallow", c, config.input_channels, 3);
  for (std::size_t b = 0; b < config.blocks; ++b) {
    const std::string p = block_prefix(b);
    init.norm(store, p + ".ln1", c);
    for (std::size_t i = 0; i < 4; ++i) init.conv(store, p + ".safm.dw" + std::to_string(i), cg, 1, 3);
    init.conv(store, p + ".safm.fuse", c, c, 1);
    init.norm(store, p + ".ln2", c);
    init.conv(store, p + ".ccm.expand", hidden, c, 3);
    init.conv(store, p + ".ccm.compress", c, hidden, 1);
  }
  init.conv(store, "upsampler", config.input_channels * config.ds * config.df, c, 3);
  return store;
}

std::size_t SafmnModel::parameter_count(const SafmnConfig& config) {
  config.validate();
  const std::size_t c = config.channels, in = config.input_channels;
  const std::size_t hidden = c * config.ccm_expansion;
  const std::size_t b = config.bias ? 1 : 0;
  const std::size_t up = in * config.ds * config.df;
  const std::size_t shallow = 9 * in * c + b * c;
  const std::size_t safm = (9 * c + b * c) + (c * c + b * c);
  const std::size_t ccm = (9 * c * hidden + b * hidden) + (hidden * c + b * c);
  const std::size_t norms = 4 * c;
  const std::size_t upsampler = 9 * c * up + b * up;
  return shallow + config.blocks * (norms + safm + ccm) + upsampler;
}

SafmnModel::SafmnModel(SafmnConfig config, std::uint64_t seed)
    : config_(config), params_(make_params(config, seed)) {}

SafmnModel::SafmnModel(SafmnConfig config, ParamStore params) : config_(config) {
  const ParamStore expected = make_params(config, 0);
  std::ostringstream missing, extra, shape;
  for (const auto& name : expected.names()) {
    if (!params.contains(name)) {
      missing << ' ' << name;
    } else if (params.get(name).shape() != expected.get(name).shape()) {
      shape << ' ' << name << shape_to_string(params.get(name).shape());
    }
  }
  for (const auto& name : params.names()) {
    if (!expected.contains(name)) extra << ' ' << name;
  }
  if (!missing.str().empty() || !extra.str().empty() || !shape.str().empty()) {
    std::string msg = "SAFMN parameters do not match configuration;";
    if (!missing.str().empty()) msg += " missing:" + missing.str() + ";";
    if (!extra.str().empty()) msg += " extra:" + extra.str() + ";";
    if (!shape.str().empty()) msg += " wrong shape:" + shape.str() + ";";
    throw ConfigError(msg);
  }
  // Re-register in canonical order.
  for (const auto& name : expected.names()) params_.add(name, params.get(name));
}

Tensor SafmnModel::opt(const std::string& name) const {
  return params_.contains(name) ? params_.get(name) : Tensor();
}

SafmWeights SafmnModel::safm_weights(std::size_t block) const {
  const std::string p = block_prefix(block) + ".safm.";
  SafmWeights w;
  for (std::size_t i = 0; i < 4; ++i) {
    w.dw_weight[i] = params_.get(p + "dw" + std::to_string(i) + ".weight");
    w.dw_bias[i] = opt(p + "dw" + std::to_string(i) + ".bias");
  }
  w.fuse_weight = params_.get(p + "fuse.weight");
  w.fuse_bias = opt(p + "fuse.bias");
  return w;
}

CcmWeights SafmnModel::ccm_weights(std::size_t block) const {
  const std::string p = block_prefix(block) + ".ccm.";
  return {params_.get(p + "expand.weight"), opt(p + "expand.bias"),
          params_.get(p + "compress.weight"), opt(p + "compress.bias")};
}

FmmWeights SafmnModel::fmm_weights(std::size_t block) const {
  const std::string p = block_prefix(block);
  return {params_.get(p + ".ln1.gamma"), params_.get(p + ".ln1.beta"), safm_weights(block),
          params_.get(p + ".ln2.gamma"), params_.get(p + ".ln2.beta"), ccm_weights(block)};
}

Tensor SafmnModel::forward_frames(const Tensor& x) const {
  if (x.rank() != 4) {
    throw ConfigError("SAFMN input must be [B, C, H, W], got " + shape_to_string(x.shape()));
  }
  if (x.dim(1) != config_.input_channels) {
    throw ConfigError("SAFMN input axis 1 has " + std::to_string(x.dim(1)) +
                      " channels, model expects " + std::to_string(config_.input_channels));
  }
  const Conv2dOptions same{.stride = 1, .padding = 1};
  Tensor shallow = conv2d(x, params_.get("shallow.weight"), opt("shallow.bias"), same);
  Tensor feat = shallow;
  for (std::size_t b = 0; b < config_.blocks; ++b) {
    feat = fmm_block(feat, fmm_weights(b), config_.ln_eps);
  }
  feat = add(feat, shallow);
  Tensor up = conv2d(feat, params_.get("upsampler.weight"), opt("upsampler.bias"), same);
  return pixel_shuffle(up, config_.ds, config_.df);
}

Tensor channels_to_frames(const Tensor& x) {
  if (x.rank() != 4) throw DimensionError("expected [C, F, H, W], got " + shape_to_string(x.shape()));
  static constexpr std::size_t kSwap[] = {1, 0, 2, 3};
  return permute(x, kSwap);
}

Tensor frames_to_channels(const Tensor& x) { return channels_to_frames(x); }

Tensor safmn_forward(const Tensor& lr, const SafmnModel& model) {
  return frames_to_channels(model.forward_frames(channels_to_frames(lr)));
}

Tensor recursive_forward_frames(const Tensor& x, const SafmnModel& model_x2,
                                std::size_t applications) {
  if (model_x2.config().ds != 2 || model_x2.config().df != 2) {
    throw ConfigError("recursive super-resolution requires a x2 model");
  }
  if (applications == 0) throw ArgumentError("recursive_forward: applications must be >= 1");
  Tensor out = x;
  for (std::size_t i = 0; i < applications; ++i) out = model_x2.forward_frames(out);
  return out;
}

Tensor recursive_forward(const Tensor& lr, const SafmnModel& model_x2, std::size_t applications) {
  return frames_to_channels(recursive_forward_frames(channels_to_frames(lr), model_x2, applications));
}

}  // namespace radgest
