#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "radgest/tensor.hpp"

namespace radgest::testing {

// Builds the value to differentiate from the inputs. Non-scalar outputs are
// contracted with fixed random weights before differentiation.
using GradFn = std::function<Tensor(const std::vector<Tensor>&)>;

struct GradCheckOptions {
  double step = 1e-6;
  std::size_t max_coords_per_input = 0;  // 0 checks every coordinate
};

// Worst per-input relative error ||analytic - numeric|| / max(||analytic||,
// ||numeric||, 1e-12) over the checked coordinates, using central differences.
double grad_check(const GradFn& fn, std::vector<Tensor> inputs, std::uint64_t seed,
                  const GradCheckOptions& options = {});

struct GradCase {
  std::string name;
  std::function<double(std::uint64_t seed)> run;  // returns the relative error
};

// Every differentiable op plus reduced SR, classifier and cascade models.
std::vector<GradCase> gradient_cases();

Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0);

}  // namespace radgest::testing
