#include "radgest/lr_pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "radgest/error.hpp"

namespace radgest {

void DegradeSpec::validate() const {
  if (ds == 0) throw ConfigError("ds must be >= 1");
  if (df == 0) throw ConfigError("df must be >= 1");
  if (!(noise_sigma_rel >= 0.0) || !std::isfinite(noise_sigma_rel)) {
    throw ConfigError("noise_sigma_rel must be finite and >= 0");
  }
}

ComplexCube downsample(const ComplexCube& cube, std::size_t ds, std::size_t df) {
  if (ds == 0 || df == 0) throw ArgumentError("downsample: factors must be >= 1");
  if (ds > cube.pulses) {
    throw ArgumentError("downsample: slow-time factor " + std::to_string(ds) +
                        " exceeds axis length " + std::to_string(cube.pulses));
  }
  if (df > cube.samples) {
    throw ArgumentError("downsample: fast-time factor " + std::to_string(df) +
                        " exceeds axis length " + std::to_string(cube.samples));
  }
  ComplexCube out(cube.frames, cube.pulses / ds, cube.samples / df);
  for (std::size_t k = 0; k < out.frames; ++k) {
    for (std::size_t m = 0; m < out.pulses; ++m) {
      for (std::size_t n = 0; n < out.samples; ++n) out.at(k, m, n) = cube.at(k, m * ds, n * df);
    }
  }
  return out;
}

ComplexCube crop(const ComplexCube& cube, std::size_t pulses, std::size_t samples) {
  if (pulses == 0 || pulses > cube.pulses || samples == 0 || samples > cube.samples) {
    throw ArgumentError("crop: target size outside the cube");
  }
  ComplexCube out(cube.frames, pulses, samples);
  for (std::size_t k = 0; k < cube.frames; ++k) {
    for (std::size_t m = 0; m < pulses; ++m) {
      std::copy_n(&cube.at(k, m, 0), samples, &out.at(k, m, 0));
    }
  }
  return out;
}

double cube_rms(const ComplexCube& cube) {
  if (cube.data.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& v : cube.data) acc += std::norm(v);
  return std::sqrt(acc / static_cast<double>(cube.data.size()));
}

ComplexCube add_complex_noise(const ComplexCube& cube, double sigma_rel, Rng& rng) {
  if (!(sigma_rel >= 0.0)) throw ArgumentError("add_complex_noise: sigma_rel must be >= 0");
  ComplexCube out = cube;
  const double sigma = sigma_rel * cube_rms(cube);
  if (sigma == 0.0) return out;
  std::normal_distribution<double> normal(0.0, sigma);
  for (auto& v : out.data) {
    const double re = normal(rng);
    const double im = normal(rng);
    v += std::complex<double>(re, im);
  }
  return out;
}

std::pair<ComplexCube, NormTransform> normalize01(const ComplexCube& cube) {
  if (cube.data.empty()) throw ArgumentError("normalize01: empty cube");
  double lo = cube.data.front().real();
  double hi = lo;
  for (const auto& v : cube.data) {
    lo = std::min({lo, v.real(), v.imag()});
    hi = std::max({hi, v.real(), v.imag()});
  }
  NormTransform t;
  if (hi > lo) {
    t.offset = lo;
    t.scale = hi - lo;
  } else {
    t.offset = lo - 0.5;
    t.scale = 1.0;
  }
  ComplexCube out = apply_transform(cube, t);
  // Guard against rounding just outside [0, 1].
  for (auto& v : out.data) {
    v = {std::clamp(v.real(), 0.0, 1.0), std::clamp(v.imag(), 0.0, 1.0)};
  }
  return {std::move(out), t};
}

ComplexCube apply_transform(const ComplexCube& cube, const NormTransform& t) {
  ComplexCube out = cube;
  for (auto& v : out.data) v = {t.apply(v.real()), t.apply(v.imag())};
  return out;
}

ComplexCube invert_transform(const ComplexCube& cube, const NormTransform& t) {
  ComplexCube out = cube;
  for (auto& v : out.data) v = {t.invert(v.real()), t.invert(v.imag())};
  return out;
}

Tensor complex_to_channels(const ComplexCube& cube) {
  const std::size_t n = cube.size();
  std::vector<double> data(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = cube.data[i].real();
    data[n + i] = cube.data[i].imag();
  }
  return Tensor(Shape{2, cube.frames, cube.pulses, cube.samples}, std::move(data));
}

ComplexCube channels_to_complex(const Tensor& channels) {
  if (channels.rank() != 4 || channels.dim(0) != 2) {
    throw DimensionError("channels_to_complex: expected [2, K, M, N], got " +
                         shape_to_string(channels.shape()));
  }
  ComplexCube out(channels.dim(1), channels.dim(2), channels.dim(3));
  const std::size_t n = out.size();
  auto d = channels.data();
  for (std::size_t i = 0; i < n; ++i) out.data[i] = {d[i], d[n + i]};
  return out;
}

namespace {

// Catmull-Rom weights for taps at offsets -1, 0, 1, 2 and fractional position t.
std::array<double, 4> catmull_rom(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {0.5 * (-t3 + 2.0 * t2 - t), 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
          0.5 * (-3.0 * t3 + 4.0 * t2 + t), 0.5 * (t3 - t2)};
}

// Interpolates `len` strided values to len*factor outputs.
void upsample_line(const std::complex<double>* src, std::size_t src_stride, std::size_t len,
                   std::size_t factor, std::complex<double>* dst, std::size_t dst_stride) {
  const long last = static_cast<long>(len) - 1;
  for (std::size_t i = 0; i < len * factor; ++i) {
    const std::size_t base = i / factor;
    const double t = static_cast<double>(i % factor) / static_cast<double>(factor);
    if (t == 0.0) {
      dst[i * dst_stride] = src[base * src_stride];
      continue;
    }
    const auto w = catmull_rom(t);
    std::complex<double> acc = 0.0;
    for (int tap = 0; tap < 4; ++tap) {
      const long j = std::clamp(static_cast<long>(base) + tap - 1, 0L, last);
      acc += w[tap] * src[static_cast<std::size_t>(j) * src_stride];
    }
    dst[i * dst_stride] = acc;
  }
}

}  // namespace

ComplexCube cubic_upsample(const ComplexCube& cube, std::size_t ds, std::size_t df) {
  if (ds == 0 || df == 0) throw ArgumentError("cubic_upsample: factors must be >= 1");
  if (ds > 1 && cube.pulses < 2) {
    throw ArgumentError("cubic_upsample: slow-time axis shorter than 2 samples");
  }
  if (df > 1 && cube.samples < 2) {
    throw ArgumentError("cubic_upsample: fast-time axis shorter than 2 samples");
  }
  const std::size_t m_out = cube.pulses * ds, n_out = cube.samples * df;
  // Fast-time pass, then slow-time pass.
  ComplexCube wide(cube.frames, cube.pulses, n_out);
  for (std::size_t k = 0; k < cube.frames; ++k) {
    for (std::size_t m = 0; m < cube.pulses; ++m) {
      upsample_line(&cube.at(k, m, 0), 1, cube.samples, df, &wide.at(k, m, 0), 1);
    }
  }
  ComplexCube out(cube.frames, m_out, n_out);
  for (std::size_t k = 0; k < cube.frames; ++k) {
    for (std::size_t n = 0; n < n_out; ++n) {
      upsample_line(&wide.at(k, 0, n), n_out, cube.pulses, ds, &out.at(k, 0, n), n_out);
    }
  }
  return out;
}

PreparedPair prepare_pair(const ComplexCube& hr, const DegradeSpec& spec, Rng& noise_rng) {
  spec.validate();
  ComplexCube lr = downsample(hr, spec.ds, spec.df);
  lr = add_complex_noise(lr, spec.noise_sigma_rel, noise_rng);
  auto [lr_norm, lr_t] = normalize01(lr);
  auto [hr_norm, hr_t] = normalize01(hr);
  ComplexCube target = crop(hr_norm, lr.pulses * spec.ds, lr.samples * spec.df);
  return {complex_to_channels(lr_norm), complex_to_channels(target), lr_t, hr_t};
}

}  // namespace radgest
