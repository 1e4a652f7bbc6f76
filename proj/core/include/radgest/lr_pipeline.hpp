#pragma once

// Low-resolution emulation (decimation of the slow- and fast-time axes) and
// the pre-processing that turns a complex cube into a network input.

#include <cstddef>
#include <utility>

#include "radgest/radar_sim.hpp"
#include "radgest/random.hpp"
#include "radgest/tensor.hpp"

namespace radgest {

struct DegradeSpec {
  std::size_t ds = 1;  // slow-time (pulse) decimation, lowers the effective PRF
  std::size_t df = 1;  // fast-time (range) decimation, lowers the effective bandwidth
  double noise_sigma_rel = 0.01;

  void validate() const;  // throws ConfigError
};

// Affine map y = (x - offset) / scale applied to both real and imaginary parts.
struct NormTransform {
  double offset = 0.0;
  double scale = 1.0;

  double apply(double x) const { return (x - offset) / scale; }
  double invert(double y) const { return y * scale + offset; }
};

// Keeps pulses 0, ds, 2ds, ... and samples 0, df, 2df, ...; output is
// (K, floor(M/ds), floor(N/df)). Throws ArgumentError if a factor is 0 or
// exceeds its axis.
ComplexCube downsample(const ComplexCube& cube, std::size_t ds, std::size_t df);

// First `pulses` x `samples` corner of every frame.
ComplexCube crop(const ComplexCube& cube, std::size_t pulses, std::size_t samples);

double cube_rms(const ComplexCube& cube);

// Adds independent N(0, (sigma_rel * rms)^2) noise to the real and imaginary parts.
ComplexCube add_complex_noise(const ComplexCube& cube, double sigma_rel, Rng& rng);

// Min-max scaling over the union of real and imaginary parts. A constant cube
// maps to 0.5 with scale 1.
std::pair<ComplexCube, NormTransform> normalize01(const ComplexCube& cube);
ComplexCube apply_transform(const ComplexCube& cube, const NormTransform& t);
ComplexCube invert_transform(const ComplexCube& cube, const NormTransform& t);

// (K, M, N) complex -> [2, K, M, N] real, channel 0 real, channel 1 imaginary.
Tensor complex_to_channels(const ComplexCube& cube);
ComplexCube channels_to_complex(const Tensor& channels);

// Separable Catmull-Rom interpolation per frame with edge clamping. Output
// sample i along an axis sits at source coordinate i / factor, so original
// samples are reproduced exactly. Throws ArgumentError when an axis that is
// upsampled has fewer than two samples.
ComplexCube cubic_upsample(const ComplexCube& cube, std::size_t ds, std::size_t df);

// Network-ready pair for one recording.
struct PreparedPair {
  Tensor lr;  // [2, K, M/ds, N/df] normalized
  Tensor hr;  // [2, K, (M/ds)*ds, (N/df)*df] normalized with the HR transform
  NormTransform lr_transform;
  NormTransform hr_transform;
};

// Decimate, add noise, normalize, split channels; the HR target is normalized
// with its own transform and cropped to the exact multiple of the LR size.
PreparedPair prepare_pair(const ComplexCube& hr, const DegradeSpec& spec, Rng& noise_rng);

}  // namespace radgest
