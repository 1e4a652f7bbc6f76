#pragma once

// Training and evaluation loops for the five model regimes.
//
//   C   cubic interpolation of the LR cube, classifier trained with CE
//   FM  SR trained with L1, then frozen while the classifier trains with CE
//   M   SR and classifier trained jointly with gamma * L1 + CE
//   SM  one SR model per factor in {2, 3, 4}, shared classifier
//   RM  one x2 SR model applied log2(d) times for d in {2, 4, 8}, shared classifier

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radgest/classifier.hpp"
#include "radgest/optim.hpp"
#include "radgest/radar_sim.hpp"
#include "radgest/safmn.hpp"

namespace radgest {

enum class Regime { cubic, frozen, joint, multi, recursive };

std::string regime_name(Regime regime);  // "C", "FM", "M", "SM", "RM"
Regime parse_regime(const std::string& name);  // throws ConfigError

struct TrainConfig {
  Regime regime = Regime::joint;
  std::size_t ds = 2;
  std::size_t df = 2;
  double gamma = 1.0;
  bool include_sr_term = true;  // false drops gamma * L1 from the driving loss
  std::size_t epochs = 30;
  std::size_t sr_epochs = 0;  // FM stage 1; 0 means `epochs`
  std::size_t batch_size = 16;
  AdamConfig adam;
  std::uint64_t seed = 0;
  double noise_sigma_rel = 0.01;
  double mask_percent = 0.0;
  std::size_t mask_patch = 2;
  double val_fraction = 0.2;
  SafmnConfig safmn;
  ClassifierConfig classifier;

  void validate() const;  // throws ConfigError
};

struct MetricsRecord {
  std::size_t epoch = 0;
  std::string regime;
  std::size_t d = 0;
  double gamma = 0.0;
  double accuracy = 0.0;
  double l1 = 0.0;
  double ms_ssim = 0.0;
  double psnr = 0.0;
  double ce_loss = 0.0;
  double sr_loss = 0.0;  // gamma * l1
};

// Factor pairs (ds, df) a regime trains on. Throws ConfigError when the
// configured factor is not allowed for the regime (e.g. RM with d = 3).
std::vector<std::pair<std::size_t, std::size_t>> training_factors(const TrainConfig& config);

// Trained networks of one run. SR models are keyed by factor; RM holds a
// single x2 model that serves every factor.
struct ModelBundle {
  Regime regime = Regime::cubic;
  std::vector<std::size_t> sr_factors;
  std::vector<SafmnModel> sr;
  std::optional<GestureClassifier> classifier;

  // Model that upsamples by `factor` (applied recursively for RM), or null
  // for the cubic regime.
  const SafmnModel* sr_for(std::size_t factor) const;
  std::size_t applications_for(std::size_t factor) const;
};

ModelBundle make_bundle(const TrainConfig& config);

// Flat view sharing storage with the bundle. Names are prefixed with "sr."
// (FM, M), "sr.x<f>." (SM, RM) and "cls.".
ParamStore bundle_params(const ModelBundle& bundle);
// Inverse of bundle_params; throws ConfigError listing missing, extra and
// mis-shaped names.
ModelBundle bundle_from_params(const TrainConfig& config, const ParamStore& params);

// One recording in frame-batch layout, normalized.
struct PreparedRecord {
  Tensor lr;  // [F, 2, h, w]
  Tensor hr;  // [F, 2, h*ds, w*df]
  std::size_t label = 0;
};

// Degrades dataset[i] for every i in `indices`. Record i's noise stream is
// derived from (seed, i, factor), so it does not depend on the split.
std::vector<PreparedRecord> prepare_records(std::span<const LabeledCube> dataset,
                                            std::span<const std::size_t> indices, std::size_t ds,
                                            std::size_t df, double noise_sigma_rel,
                                            std::uint64_t seed);
// Uses externally degraded LR cubes instead of generating them.
std::vector<PreparedRecord> prepare_records_from_lr(std::span<const LabeledCube> hr,
                                                    std::span<const LabeledCube> lr,
                                                    std::span<const std::size_t> indices,
                                                    std::size_t ds, std::size_t df);

// Seeded shuffle, then the first round((1 - val_fraction) * n) indices train.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};
Split split_train_val(std::size_t n, double val_fraction, std::uint64_t seed);

// Runs the SR stage of a bundle on a frame batch [B, 2, h, w]. The cubic
// regime interpolates without gradients.
Tensor super_resolve(const ModelBundle& bundle, const Tensor& lr_frames, std::size_t ds,
                     std::size_t df);

// Logits [B, classes] for B recordings of `frames` frames each, from SR frames.
Tensor classify_frames(const ModelBundle& bundle, const Tensor& sr_frames, std::size_t frames);

MetricsRecord evaluate(const ModelBundle& bundle, std::span<const PreparedRecord> records,
                       const TrainConfig& config);

struct TrainResult {
  ModelBundle models;
  std::vector<MetricsRecord> history;  // one row per epoch (FM: both stages)
  std::vector<double> step_losses;     // driving loss of every optimizer step
  std::vector<double> epoch_losses;    // mean driving loss per epoch
  std::size_t steps_per_epoch = 0;     // of the last (FM: classifier) stage
  Split split;
};

// Optional hook observing the bundle between FM stages (used to verify the
// frozen-SR contract).
struct TrainHooks {
  std::function<void(const ModelBundle&)> after_sr_stage;
};

TrainResult train_regime(std::span<const LabeledCube> dataset, const TrainConfig& config,
                         const TrainHooks& hooks = {},
                         std::span<const LabeledCube> lr_dataset = {});

// Evaluation split for a config: the same records train_regime validated on.
std::vector<PreparedRecord> validation_records(std::span<const LabeledCube> dataset,
                                               const TrainConfig& config,
                                               std::span<const LabeledCube> lr_dataset = {});

}  // namespace radgest
