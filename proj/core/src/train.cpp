#include "radgest/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "radgest/augment.hpp"
#include "radgest/error.hpp"
#include "radgest/losses.hpp"
#include "radgest/lr_pipeline.hpp"
#include "radgest/metrics.hpp"
#include "radgest/ops.hpp"

namespace radgest {

std::string regime_name(Regime regime) {
  switch (regime) {
    case Regime::cubic: return "C";
    case Regime::frozen: return "FM";
    case Regime::joint: return "M";
    case Regime::multi: return "SM";
    case Regime::recursive: return "RM";
  }
  return "?";
}

Regime parse_regime(const std::string& name) {
  if (name == "C") return Regime::cubic;
  if (name == "FM") return Regime::frozen;
  if (name == "M") return Regime::joint;
  if (name == "SM") return Regime::multi;
  if (name == "RM") return Regime::recursive;
  throw ConfigError("regime: unknown value '" + name + "' (expected C, FM, M, SM or RM)");
}

void TrainConfig::validate() const {
  if (ds == 0 || df == 0) throw ConfigError("ds/df must be >= 1");
  if (!std::isfinite(gamma) || gamma < 0.0) throw ConfigError("gamma must be finite and >= 0");
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(adam.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("beta1/beta2 must lie in [0, 1)");
  }
  if (!(adam.eps > 0.0)) throw ConfigError("eps must be > 0");
  if (!(noise_sigma_rel >= 0.0)) throw ConfigError("noise must be >= 0");
  if (!(mask_percent >= 0.0 && mask_percent < 100.0)) throw ConfigError("mask_percent must lie in [0, 100)");
  if (mask_patch == 0) throw ConfigError("mask_patch must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must lie in (0, 1)");
  safmn.validate();
  classifier.validate();
  training_factors(*this);
}

std::vector<std::pair<std::size_t, std::size_t>> training_factors(const TrainConfig& config) {
  auto factor_set = [&](std::initializer_list<std::size_t> allowed) {
    if (config.ds != config.df) {
      throw ConfigError("regime " + regime_name(config.regime) + " requires ds == df");
    }
    if (std::find(allowed.begin(), allowed.end(), config.ds) == allowed.end()) {
      std::ostringstream msg;
      msg << "regime " << regime_name(config.regime) << " does not support d=" << config.ds
          << " (allowed:";
      for (std::size_t f : allowed) msg << ' ' << f;
      msg << ')';
      throw ConfigError(msg.str());
    }
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t f : allowed) out.emplace_back(f, f);
    return out;
  };
  switch (config.regime) {
    case Regime::multi: return factor_set({2, 3, 4});
    case Regime::recursive: return factor_set({2, 4, 8});
    case Regime::frozen:
    case Regime::joint:
      if (config.ds * config.df == 1) {
        throw ConfigError("regime " + regime_name(config.regime) + " needs a factor > 1");
      }
      break;
    case Regime::cubic: break;
  }
  return {{config.ds, config.df}};
}

const SafmnModel* ModelBundle::sr_for(std::size_t factor) const {
  switch (regime) {
    case Regime::cubic: return nullptr;
    case Regime::frozen:
    case Regime::joint:
    case Regime::recursive: return &sr.at(0);
    case Regime::multi:
      for (std::size_t i = 0; i < sr_factors.size(); ++i) {
        if (sr_factors[i] == factor) return &sr[i];
      }
      throw ConfigError("no SR model for factor " + std::to_string(factor));
  }
  return nullptr;
}

std::size_t ModelBundle::applications_for(std::size_t factor) const {
  if (regime != Regime::recursive) return 1;
  std::size_t n = 0;
  for (std::size_t f = factor; f > 1; f /= 2) {
    if (f % 2 != 0) throw ConfigError("recursive SR needs a power-of-two factor");
    ++n;
  }
  return n;
}

namespace {

constexpr std::uint64_t kSrSalt = 0x5a;
constexpr std::uint64_t kClsSalt = 0xc1;
constexpr std::uint64_t kSplitSalt = 0x5b1;
constexpr std::uint64_t kNoiseSalt = 0x4e0;
constexpr std::uint64_t kOrderSalt = 0xba7c;
constexpr std::uint64_t kMixSalt = 0x313;
constexpr std::uint64_t kMaskSalt = 0xa46;

SafmnConfig sr_config(const TrainConfig& config, std::size_t ds, std::size_t df) {
  SafmnConfig c = config.safmn;
  c.ds = ds;
  c.df = df;
  return c;
}

struct SrLayout {
  std::vector<std::size_t> factors;
  std::vector<SafmnConfig> configs;
  std::vector<std::string> prefixes;
};

SrLayout sr_layout(const TrainConfig& config) {
  SrLayout out;
  switch (config.regime) {
    case Regime::cubic: break;
    case Regime::frozen:
    case Regime::joint:
      out.factors = {config.ds};
      out.configs = {sr_config(config, config.ds, config.df)};
      out.prefixes = {"sr."};
      break;
    case Regime::multi:
      for (std::size_t f : {2, 3, 4}) {
        out.factors.push_back(f);
        out.configs.push_back(sr_config(config, f, f));
        out.prefixes.push_back("sr.x" + std::to_string(f) + ".");
      }
      break;
    case Regime::recursive:
      out.factors = {2};
      out.configs = {sr_config(config, 2, 2)};
      out.prefixes = {"sr.x2."};
      break;
  }
  return out;
}

void append_prefixed(ParamStore& dst, const ParamStore& src, const std::string& prefix) {
  for (std::size_t i = 0; i < src.size(); ++i) {
    Tensor& t = dst.add(prefix + src.names()[i], src.tensors()[i]);
    t.set_requires_grad(src.tensors()[i].requires_grad());
  }
}

}  // namespace

ModelBundle make_bundle(const TrainConfig& config) {
  ModelBundle bundle;
  bundle.regime = config.regime;
  const SrLayout layout = sr_layout(config);
  bundle.sr_factors = layout.factors;
  for (std::size_t i = 0; i < layout.configs.size(); ++i) {
    bundle.sr.emplace_back(layout.configs[i], derive_seed(config.seed, i, kSrSalt));
  }
  bundle.classifier.emplace(config.classifier, derive_seed(config.seed, 0, kClsSalt));
  return bundle;
}

ParamStore bundle_params(const ModelBundle& bundle) {
  ParamStore out;
  for (std::size_t i = 0; i < bundle.sr.size(); ++i) {
    const std::string prefix = bundle.regime == Regime::multi || bundle.regime == Regime::recursive
                                   ? "sr.x" + std::to_string(bundle.sr_factors[i]) + "."
                                   : "sr.";
    append_prefixed(out, bundle.sr[i].params(), prefix);
  }
  if (bundle.classifier) append_prefixed(out, bundle.classifier->params(), "cls.");
  return out;
}

ModelBundle bundle_from_params(const TrainConfig& config, const ParamStore& params) {
  const ModelBundle reference = make_bundle(config);
  const ParamStore expected = bundle_params(reference);

  std::vector<std::string> missing, extra, mismatched;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const std::string& name = expected.names()[i];
    if (!params.contains(name)) {
      missing.push_back(name);
    } else if (params.get(name).shape() != expected.tensors()[i].shape()) {
      mismatched.push_back(name + " " + shape_to_string(params.get(name).shape()) + " != " +
                           shape_to_string(expected.tensors()[i].shape()));
    }
  }
  for (const std::string& name : params.names()) {
    if (!expected.contains(name)) extra.push_back(name);
  }
  if (!missing.empty() || !extra.empty() || !mismatched.empty()) {
    std::ostringstream msg;
    msg << "checkpoint does not match config";
    auto list = [&](const char* what, const std::vector<std::string>& names) {
      if (names.empty()) return;
      msg << "; " << what << ":";
      for (const auto& n : names) msg << ' ' << n;
    };
    list("missing", missing);
    list("extra", extra);
    list("wrong shape", mismatched);
    throw ConfigError(msg.str());
  }

  auto take = [&](const std::string& prefix) {
    ParamStore store;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const std::string& name = params.names()[i];
      if (name.compare(0, prefix.size(), prefix) == 0) {
        store.add(name.substr(prefix.size()), params.tensors()[i].detach());
      }
    }
    return store;
  };
  const SrLayout layout = sr_layout(config);
  ModelBundle bundle;
  bundle.regime = config.regime;
  bundle.sr_factors = layout.factors;
  for (std::size_t i = 0; i < layout.configs.size(); ++i) {
    bundle.sr.emplace_back(layout.configs[i], take(layout.prefixes[i]));
  }
  bundle.classifier.emplace(config.classifier, take("cls."));
  return bundle;
}

Split split_train_val(std::size_t n, double val_fraction, std::uint64_t seed) {
  if (n < 2) throw ArgumentError("need at least 2 records to split train/val");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, 0, kSplitSalt);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[uniform_index(rng, i + 1)]);
  }
  auto n_train = static_cast<std::size_t>(std::llround((1.0 - val_fraction) * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  Split split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return split;
}

std::vector<PreparedRecord> prepare_records(std::span<const LabeledCube> dataset,
                                            std::span<const std::size_t> indices, std::size_t ds,
                                            std::size_t df, double noise_sigma_rel,
                                            std::uint64_t seed) {
  NoGradScope no_grad;
  const DegradeSpec spec{ds, df, noise_sigma_rel};
  spec.validate();
  std::vector<PreparedRecord> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= dataset.size()) throw ArgumentError("record index out of range");
    Rng rng = make_rng(seed, i, kNoiseSalt + 1000 * ds + df);
    PreparedPair pair = prepare_pair(dataset[i].cube, spec, rng);
    out.push_back({channels_to_frames(pair.lr), channels_to_frames(pair.hr), dataset[i].label});
  }
  return out;
}

std::vector<PreparedRecord> prepare_records_from_lr(std::span<const LabeledCube> hr,
                                                    std::span<const LabeledCube> lr,
                                                    std::span<const std::size_t> indices,
                                                    std::size_t ds, std::size_t df) {
  NoGradScope no_grad;
  if (hr.size() != lr.size()) throw ConfigError("HR and LR datasets differ in record count");
  std::vector<PreparedRecord> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= hr.size()) throw ArgumentError("record index out of range");
    const ComplexCube& h = hr[i].cube;
    const ComplexCube& l = lr[i].cube;
    if (l.frames != h.frames || l.pulses != h.pulses / ds || l.samples != h.samples / df) {
      throw ConfigError("LR data dims (" + std::to_string(l.frames) + "," + std::to_string(l.pulses) +
                        "," + std::to_string(l.samples) + ") do not match HR dims / (ds, df)");
    }
    if (hr[i].label != lr[i].label) throw ConfigError("HR and LR labels differ at record " + std::to_string(i));
    auto [lr_norm, lr_t] = normalize01(l);
    auto [hr_norm, hr_t] = normalize01(h);
    const ComplexCube target = crop(hr_norm, l.pulses * ds, l.samples * df);
    out.push_back({channels_to_frames(complex_to_channels(lr_norm)),
                   channels_to_frames(complex_to_channels(target)), hr[i].label});
  }
  return out;
}

Tensor super_resolve(const ModelBundle& bundle, const Tensor& lr_frames, std::size_t ds,
                     std::size_t df) {
  if (bundle.regime == Regime::cubic) {
    if (ds == 1 && df == 1) return lr_frames.detach();
    NoGradScope no_grad;
    const ComplexCube up = cubic_upsample(channels_to_complex(frames_to_channels(lr_frames)), ds, df);
    return channels_to_frames(complex_to_channels(up)).detach();
  }
  const SafmnModel* model = bundle.sr_for(ds);
  if (bundle.regime == Regime::recursive) {
    return recursive_forward_frames(lr_frames, *model, bundle.applications_for(ds));
  }
  return model->forward_frames(lr_frames);
}

Tensor classify_frames(const ModelBundle& bundle, const Tensor& sr_frames, std::size_t frames) {
  if (!bundle.classifier) throw StateError("bundle has no classifier");
  const Tensor maps = range_doppler_frames(sr_frames);
  const std::size_t b = maps.dim(0) / frames;
  return bundle.classifier->forward(reshape(maps, {b, frames, maps.dim(1), maps.dim(2)}));
}

namespace {

// Concatenates records along the frame axis: [sum F, 2, h, w].
Tensor stack(std::span<const PreparedRecord> records, std::span<const std::size_t> which, bool hr) {
  const Tensor& first = hr ? records[which[0]].hr : records[which[0]].lr;
  Shape shape = first.shape();
  std::vector<double> data;
  data.reserve(first.numel() * which.size());
  for (std::size_t i : which) {
    const Tensor& t = hr ? records[i].hr : records[i].lr;
    if (t.shape() != first.shape()) throw DimensionError("records in a batch differ in shape");
    data.insert(data.end(), t.data().begin(), t.data().end());
  }
  shape[0] *= which.size();
  return Tensor(std::move(shape), std::move(data));
}

std::vector<std::size_t> labels_of(std::span<const PreparedRecord> records,
                                   std::span<const std::size_t> which) {
  std::vector<std::size_t> out;
  for (std::size_t i : which) out.push_back(records[i].label);
  return out;
}

// MS-SSIM averaged over every (frame, channel) image of two [F, 2, H, W]
// slices. Frames narrower than the 11-tap window use the largest odd window
// that fits.
double frame_ms_ssim(const double* a, const double* b, std::size_t images, std::size_t h,
                     std::size_t w) {
  MsSsimOptions opts;
  const std::size_t fit = std::min(h, w);
  if (fit < opts.window) opts.window = fit % 2 == 1 ? fit : fit - 1;
  double total = 0.0;
  for (std::size_t k = 0; k < images; ++k) {
    total += ms_ssim(std::span<const double>(a + k * h * w, h * w),
                     std::span<const double>(b + k * h * w, h * w), h, w, opts);
  }
  return total / static_cast<double>(images);
}

}  // namespace

MetricsRecord evaluate(const ModelBundle& bundle, std::span<const PreparedRecord> records,
                       const TrainConfig& config) {
  if (records.empty()) throw ArgumentError("evaluate: empty dataset");
  NoGradScope no_grad;
  const std::size_t frames = records[0].lr.dim(0);
  std::size_t correct = 0;
  double ce_total = 0.0, l1_total = 0.0, ssim_total = 0.0, psnr_total = 0.0;
  for (std::size_t start = 0; start < records.size(); start += config.batch_size) {
    const std::size_t end = std::min(records.size(), start + config.batch_size);
    std::vector<std::size_t> which(end - start);
    std::iota(which.begin(), which.end(), start);
    const Tensor lr = stack(records, which, false);
    const Tensor sr = super_resolve(bundle, lr, config.ds, config.df);
    const Tensor hr = stack(records, which, true);
    if (sr.shape() != hr.shape()) {
      throw DimensionError("SR output " + shape_to_string(sr.shape()) + " does not match target " +
                           shape_to_string(hr.shape()));
    }
    const Tensor logits = classify_frames(bundle, sr, frames);
    const std::vector<std::size_t> labels = labels_of(records, which);
    const std::size_t classes = logits.dim(1);
    for (std::size_t r = 0; r < which.size(); ++r) {
      const auto row = logits.data().subspan(r * classes, classes);
      if (predict(row) == labels[r]) ++correct;
      const std::size_t per = sr.numel() / which.size();
      const auto s = sr.data().subspan(r * per, per);
      const auto t = hr.data().subspan(r * per, per);
      l1_total += mean_absolute_error(s, t);
      psnr_total += psnr(s, t, 1.0);
      ssim_total += frame_ms_ssim(s.data(), t.data(), frames * sr.dim(1), sr.dim(2), sr.dim(3));
    }
    ce_total += cross_entropy_loss(logits, labels).item() * static_cast<double>(which.size());
  }
  const double n = static_cast<double>(records.size());
  MetricsRecord m;
  m.regime = regime_name(config.regime);
  m.d = config.ds;
  m.gamma = config.gamma;
  m.accuracy = static_cast<double>(correct) / n;
  m.l1 = l1_total / n;
  m.ms_ssim = ssim_total / n;
  m.psnr = psnr_total / n;
  m.ce_loss = ce_total / n;
  m.sr_loss = config.gamma * m.l1;
  return m;
}

namespace {

enum class StageLoss { cross_entropy, l1, combined };

struct Stage {
  ParamStore params;  // optimized tensors
  StageLoss loss;
  bool sr_frozen;
  std::size_t epochs;
};

class Trainer {
 public:
  Trainer(const TrainConfig& config, TrainResult& result,
          std::vector<std::vector<PreparedRecord>> train_sets,
          std::vector<std::pair<std::size_t, std::size_t>> factors,
          std::vector<PreparedRecord> val)
      : config_(config), result_(result), train_sets_(std::move(train_sets)),
        factors_(std::move(factors)), val_(std::move(val)) {}

  void run(Stage& stage) {
    Adam adam(stage.params, config_.adam, true);
    for (std::size_t e = 0; e < stage.epochs; ++e) {
      ++epoch_;
      const auto batches = epoch_batches();
      result_.steps_per_epoch = batches.size();
      double total = 0.0;
      for (const auto& [fi, which] : batches) {
        adam.zero_grad();
        GradTape tape;
        const Tensor loss = step_loss(stage, fi, which);
        tape.backward(loss);
        adam.step();
        result_.step_losses.push_back(loss.item());
        total += loss.item();
      }
      result_.epoch_losses.push_back(total / static_cast<double>(batches.size()));
      MetricsRecord row = evaluate(result_.models, val_, config_);
      row.epoch = epoch_;
      result_.history.push_back(row);
    }
  }

 private:
  using Batch = std::pair<std::size_t, std::vector<std::size_t>>;

  // Every factor contributes a full pass over its training set; with several
  // factors the batch order is shuffled so factors interleave.
  std::vector<Batch> epoch_batches() const {
    std::vector<Batch> batches;
    for (std::size_t fi = 0; fi < train_sets_.size(); ++fi) {
      const std::size_t n = train_sets_[fi].size();
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng = make_rng(config_.seed, epoch_, kOrderSalt + fi);
      for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[uniform_index(rng, i + 1)]);
      for (std::size_t s = 0; s < n; s += config_.batch_size) {
        const std::size_t end = std::min(n, s + config_.batch_size);
        batches.emplace_back(fi, std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(s),
                                                          order.begin() + static_cast<std::ptrdiff_t>(end)));
      }
    }
    if (train_sets_.size() > 1) {
      Rng rng = make_rng(config_.seed, epoch_, kMixSalt);
      for (std::size_t i = batches.size() - 1; i > 0; --i) {
        std::swap(batches[i], batches[uniform_index(rng, i + 1)]);
      }
    }
    return batches;
  }

  Tensor step_loss(const Stage& stage, std::size_t fi, const std::vector<std::size_t>& which) {
    const auto& records = train_sets_[fi];
    const auto [ds, df] = factors_[fi];
    const std::size_t frames = records[which[0]].lr.dim(0);
    Tensor lr = stack(records, which, false);
    if (config_.mask_percent > 0.0) {
      Rng rng = make_rng(config_.seed, step_++, kMaskSalt);
      lr = patch_mask_augment(lr, config_.mask_percent, config_.mask_patch, rng);
    }
    const ModelBundle& models = result_.models;
    if (stage.loss == StageLoss::l1) {
      return l1_loss(super_resolve(models, lr, ds, df), stack(records, which, true));
    }
    const std::vector<std::size_t> labels = labels_of(records, which);
    if (stage.sr_frozen) {
      Tensor sr;
      {
        NoGradScope no_grad;
        sr = super_resolve(models, lr, ds, df);
      }
      return cross_entropy_loss(classify_frames(models, sr, frames), labels);
    }
    const Tensor sr = super_resolve(models, lr, ds, df);
    const Tensor logits = classify_frames(models, sr, frames);
    if (stage.loss == StageLoss::combined && config_.include_sr_term) {
      return combined_loss(sr, stack(records, which, true), logits, labels, config_.gamma);
    }
    return cross_entropy_loss(logits, labels);
  }

  const TrainConfig& config_;
  TrainResult& result_;
  std::vector<std::vector<PreparedRecord>> train_sets_;
  std::vector<std::pair<std::size_t, std::size_t>> factors_;
  std::vector<PreparedRecord> val_;
  std::size_t epoch_ = 0;
  std::size_t step_ = 0;
};

ParamStore collect(const ModelBundle& bundle, bool sr, bool cls) {
  ParamStore out;
  if (sr) {
    for (std::size_t i = 0; i < bundle.sr.size(); ++i) {
      append_prefixed(out, bundle.sr[i].params(), "sr." + std::to_string(i) + ".");
    }
  }
  if (cls) append_prefixed(out, bundle.classifier->params(), "cls.");
  return out;
}

std::vector<PreparedRecord> records_for(std::span<const LabeledCube> dataset,
                                        std::span<const LabeledCube> lr_dataset,
                                        std::span<const std::size_t> indices, std::size_t ds,
                                        std::size_t df, const TrainConfig& config) {
  if (!lr_dataset.empty()) return prepare_records_from_lr(dataset, lr_dataset, indices, ds, df);
  return prepare_records(dataset, indices, ds, df, config.noise_sigma_rel, config.seed);
}

void check_dataset(std::span<const LabeledCube> dataset, const TrainConfig& config) {
  if (dataset.empty()) throw ArgumentError("dataset is empty");
  for (const LabeledCube& r : dataset) {
    if (r.label >= config.classifier.num_classes) {
      throw ConfigError("dataset label " + std::to_string(r.label) + " exceeds num_classes=" +
                        std::to_string(config.classifier.num_classes));
    }
  }
}

}  // namespace

std::vector<PreparedRecord> validation_records(std::span<const LabeledCube> dataset,
                                               const TrainConfig& config,
                                               std::span<const LabeledCube> lr_dataset) {
  config.validate();
  check_dataset(dataset, config);
  const Split split = split_train_val(dataset.size(), config.val_fraction, config.seed);
  return records_for(dataset, lr_dataset, split.val, config.ds, config.df, config);
}

TrainResult train_regime(std::span<const LabeledCube> dataset, const TrainConfig& config,
                         const TrainHooks& hooks, std::span<const LabeledCube> lr_dataset) {
  config.validate();
  check_dataset(dataset, config);
  const auto factors = training_factors(config);
  if (!lr_dataset.empty() && factors.size() > 1) {
    throw ConfigError("regime " + regime_name(config.regime) +
                      " trains on several factors and cannot use a pre-degraded LR dataset");
  }

  TrainResult result;
  result.split = split_train_val(dataset.size(), config.val_fraction, config.seed);
  result.models = make_bundle(config);

  std::vector<std::vector<PreparedRecord>> train_sets;
  for (const auto& [ds, df] : factors) {
    train_sets.push_back(records_for(dataset, lr_dataset, result.split.train, ds, df, config));
  }
  std::vector<PreparedRecord> val =
      records_for(dataset, lr_dataset, result.split.val, config.ds, config.df, config);

  Trainer trainer(config, result, std::move(train_sets), factors, std::move(val));
  switch (config.regime) {
    case Regime::cubic: {
      Stage stage{collect(result.models, false, true), StageLoss::cross_entropy, true, config.epochs};
      trainer.run(stage);
      break;
    }
    case Regime::frozen: {
      Stage sr_stage{collect(result.models, true, false), StageLoss::l1, false,
                     config.sr_epochs == 0 ? config.epochs : config.sr_epochs};
      trainer.run(sr_stage);
      if (hooks.after_sr_stage) hooks.after_sr_stage(result.models);
      Stage cls_stage{collect(result.models, false, true), StageLoss::cross_entropy, true, config.epochs};
      trainer.run(cls_stage);
      break;
    }
    case Regime::joint:
    case Regime::multi:
    case Regime::recursive: {
      Stage stage{collect(result.models, true, true), StageLoss::combined, false, config.epochs};
      trainer.run(stage);
      break;
    }
  }
  return result;
}

}  // namespace radgest
