#include "radgest/optim.hpp"

#include <cmath>

#include "radgest/error.hpp"

namespace radgest {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config) {
  if (params.size() != grads.size()) throw DimensionError("adam_step: params/grads size mismatch");
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.step = 0;
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

Adam::Adam(ParamStore& params, AdamConfig config, bool round_to_float)
    : params_(&params), config_(config), round_to_float_(round_to_float),
      states_(params.size()) {}

void Adam::step() {
  auto& tensors = params_->tensors();
  if (tensors.size() != states_.size()) throw StateError("Adam: parameter store changed size");
  std::vector<double> zeros;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    Tensor& t = tensors[i];
    std::span<const double> g;
    if (t.has_grad()) {
      g = t.grad();
    } else {
      zeros.assign(t.numel(), 0.0);
      g = zeros;
    }
    adam_step(t.mutable_data(), g, states_[i], config_);
    if (round_to_float_) {
      for (double& v : t.mutable_data()) v = static_cast<double>(static_cast<float>(v));
    }
  }
  ++steps_;
}

}  // namespace radgest
