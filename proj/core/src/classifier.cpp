#include "radgest/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "radgest/error.hpp"
#include "radgest/ops.hpp"
#include "radgest/random.hpp"
#include "radgest/safmn.hpp"

namespace radgest {

void ClassifierConfig::validate() const {
  if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
  if (cnn_channels.empty()) throw ConfigError("classifier needs at least one CNN stage");
  for (std::size_t c : cnn_channels) {
    if (c == 0) throw ConfigError("cnn_channels entries must be >= 1");
  }
  if (tcn_channels == 0 || tcn_kernel == 0 || hidden == 0) {
    throw ConfigError("tcn_channels, tcn_kernel and hidden must be >= 1");
  }
  if (dilations.empty()) throw ConfigError("at least one TCN dilation is required");
  for (std::size_t i = 0; i < dilations.size(); ++i) {
    const std::size_t d = dilations[i];
    if (d == 0 || (d & (d - 1)) != 0) throw ConfigError("dilations must be powers of 2");
    if (i > 0 && d <= dilations[i - 1]) throw ConfigError("dilations must be strictly increasing");
  }
}

std::vector<std::size_t> ClassifierConfig::effective_dilations(std::size_t frames) const {
  std::vector<std::size_t> out;
  for (std::size_t d : dilations) {
    if (d == 1 || d + 1 <= frames) out.push_back(d);
  }
  if (out.empty()) out.push_back(1);
  return out;
}

Tensor range_doppler_frames(const Tensor& frames, double eps) {
  return doppler_magnitude(frames, eps);
}

Tensor to_range_doppler(const Tensor& sr, double eps) {
  return doppler_magnitude(channels_to_frames(sr), eps);
}

namespace {

Tensor init_uniform(Rng& rng, Shape shape, std::size_t fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t(std::move(shape));
  for (double& v : t.mutable_data()) {
    v = static_cast<double>(static_cast<float>(uniform(rng, -bound, bound)));
  }
  return t;
}

}  // namespace

ParamStore GestureClassifier::make_params(const ClassifierConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng = make_rng(seed, 0, 0xc1a55);
  ParamStore store;
  std::size_t cin = 1;
  for (std::size_t s = 0; s < config.cnn_channels.size(); ++s) {
    const std::size_t cout = config.cnn_channels[s];
    const std::string p = "cnn." + std::to_string(s);
    store.add(p + ".weight", init_uniform(rng, Shape{cout, cin, 3, 3}, cin * 9));
    store.add(p + ".bias", init_uniform(rng, Shape{cout}, cin * 9));
    cin = cout;
  }
  for (std::size_t l = 0; l < config.dilations.size(); ++l) {
    const std::string p = "tcn." + std::to_string(l);
    const std::size_t in = l == 0 ? cin : config.tcn_channels;
    const std::size_t fan = in * config.tcn_kernel;
    store.add(p + ".weight", init_uniform(rng, Shape{config.tcn_channels, in, config.tcn_kernel}, fan));
    store.add(p + ".bias", init_uniform(rng, Shape{config.tcn_channels}, fan));
  }
  store.add("head.hidden.weight",
            init_uniform(rng, Shape{config.hidden, config.tcn_channels}, config.tcn_channels));
  store.add("head.hidden.bias", init_uniform(rng, Shape{config.hidden}, config.tcn_channels));
  store.add("head.out.weight",
            init_uniform(rng, Shape{config.num_classes, config.hidden}, config.hidden));
  store.add("head.out.bias", init_uniform(rng, Shape{config.num_classes}, config.hidden));
  return store;
}

GestureClassifier::GestureClassifier(ClassifierConfig config, std::uint64_t seed)
    : config_(std::move(config)), params_(make_params(config_, seed)) {}

GestureClassifier::GestureClassifier(ClassifierConfig config, ParamStore params)
    : config_(std::move(config)) {
  const ParamStore expected = make_params(config_, 0);
  std::ostringstream missing, extra;
  for (const auto& name : expected.names()) {
    if (!params.contains(name) || params.get(name).shape() != expected.get(name).shape()) {
      missing << ' ' << name;
    }
  }
  for (const auto& name : params.names()) {
    if (!expected.contains(name)) extra << ' ' << name;
  }
  if (!missing.str().empty() || !extra.str().empty()) {
    std::string msg = "classifier parameters do not match configuration;";
    if (!missing.str().empty()) msg += " missing or mis-shaped:" + missing.str() + ";";
    if (!extra.str().empty()) msg += " extra:" + extra.str() + ";";
    throw ConfigError(msg);
  }
  for (const auto& name : expected.names()) params_.add(name, params.get(name));
}

Tensor GestureClassifier::opt(const std::string& name) const {
  return params_.contains(name) ? params_.get(name) : Tensor();
}

Tensor GestureClassifier::forward(const Tensor& maps) const {
  if (maps.rank() != 4) {
    throw DimensionError("classifier input must be [B, F, M, N], got " +
                         shape_to_string(maps.shape()));
  }
  const std::size_t batch = maps.dim(0), frames = maps.dim(1);
  const std::size_t h = maps.dim(2), w = maps.dim(3);
  const std::size_t min_extent = std::size_t{1} << config_.cnn_channels.size();
  if (h < min_extent || w < min_extent) {
    throw ConfigError("range-Doppler map " + std::to_string(h) + "x" + std::to_string(w) +
                      " too small for " + std::to_string(config_.cnn_channels.size()) +
                      " pooling stages");
  }
  // Per-frame 2D CNN.
  Tensor x = reshape(maps, Shape{batch * frames, 1, h, w});
  for (std::size_t s = 0; s < config_.cnn_channels.size(); ++s) {
    const std::string p = "cnn." + std::to_string(s);
    x = conv2d(x, params_.get(p + ".weight"), params_.get(p + ".bias"), {.stride = 1, .padding = 1});
    x = max_pool2d(gelu(x), 2);
  }
  Tensor feat = global_avg_pool2d(x);  // [B*F, C]
  const std::size_t c = feat.dim(1);
  static constexpr std::size_t kToSequence[] = {0, 2, 1};
  Tensor seq = permute(reshape(feat, Shape{batch, frames, c}), kToSequence);  // [B, C, F]

  // Causal dilated TCN; layers after the first are residual.
  const auto active = config_.effective_dilations(frames);
  for (std::size_t l = 0; l < config_.dilations.size(); ++l) {
    const std::size_t d = config_.dilations[l];
    const bool used = std::find(active.begin(), active.end(), d) != active.end();
    if (!used && l > 0) continue;
    const std::string p = "tcn." + std::to_string(l);
    Tensor y = gelu(dilated_conv1d(seq, params_.get(p + ".weight"), params_.get(p + ".bias"),
                                   used ? d : 1, true));
    seq = l == 0 ? y : add(seq, y);
  }
  Tensor last = last_time_step(seq);
  Tensor hidden = gelu(linear(last, params_.get("head.hidden.weight"), params_.get("head.hidden.bias")));
  return linear(hidden, params_.get("head.out.weight"), params_.get("head.out.bias"));
}

Tensor GestureClassifier::classify(const Tensor& maps) const {
  if (maps.rank() != 3) {
    throw DimensionError("classify expects [F, M, N], got " + shape_to_string(maps.shape()));
  }
  Shape batched{1};
  batched.insert(batched.end(), maps.shape().begin(), maps.shape().end());
  Tensor logits = forward(reshape(maps, batched));
  return reshape(logits, Shape{config_.num_classes});
}

std::size_t predict(std::span<const double> logits) {
  if (logits.empty()) throw ArgumentError("predict: empty logits");
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

}  // namespace radgest
