#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "radgest/param_store.hpp"

namespace radgest {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
};

// One bias-corrected Adam update of a flat parameter buffer.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config);

// Adam over every tensor of a ParamStore. Tensors that received no gradient
// are updated with a zero gradient so all moments advance in lockstep.
class Adam {
 public:
  Adam(ParamStore& params, AdamConfig config, bool round_to_float = false);

  void step();
  void zero_grad() { params_->zero_grad(); }
  std::size_t steps() const { return steps_; }

 private:
  ParamStore* params_;
  AdamConfig config_;
  bool round_to_float_;
  std::vector<AdamState> states_;
  std::size_t steps_ = 0;
};

}  // namespace radgest
