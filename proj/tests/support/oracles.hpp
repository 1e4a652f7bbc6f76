#pragma once

// Slow textbook reference implementations used as test oracles.

#include <complex>
#include <cstddef>
#include <vector>

#include "radgest/radar_sim.hpp"
#include "radgest/tensor.hpp"

namespace radgest::testing {

// O(L^2) DFT in long double.
std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x);

// Direct cross-correlation with explicit zero padding.
Tensor naive_conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, std::size_t stride,
                    std::size_t pad, std::size_t groups);

// |DFT over pulses| per frame, computed with naive_dft: [K, M, N].
std::vector<double> naive_range_doppler(const ComplexCube& cube);

}  // namespace radgest::testing
