#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "radgest/error.hpp"
#include "radgest/radar_sim.hpp"
#include "radgest/random.hpp"

using namespace radgest;

namespace {

GestureScene single(const RadarParams& radar, Motion range, double rcs = 1.0) {
  GestureScene scene;
  scene.radar = radar;
  scene.scatterers.push_back({std::move(range), Motion::constant(rcs)});
  return scene;
}

std::size_t peak_range_bin(const ComplexCube& cube, std::size_t frame, std::size_t pulse) {
  std::size_t best = 0;
  for (std::size_t n = 1; n < cube.samples; ++n) {
    if (std::abs(cube.at(frame, pulse, n)) > std::abs(cube.at(frame, pulse, best))) best = n;
  }
  return best;
}

// Doppler bin with the most energy summed over range bins.
std::size_t peak_doppler_bin(const ComplexCube& cube) {
  const auto map = radgest::testing::naive_range_doppler(cube);
  std::vector<double> energy(cube.pulses, 0.0);
  for (std::size_t m = 0; m < cube.pulses; ++m)
    for (std::size_t n = 0; n < cube.samples; ++n) energy[m] += map[cube.index(0, m, n)] * map[cube.index(0, m, n)];
  return static_cast<std::size_t>(std::max_element(energy.begin(), energy.end()) - energy.begin());
}

std::size_t circular_distance(std::size_t a, std::size_t b, std::size_t m) {
  const std::size_t d = a > b ? a - b : b - a;
  return std::min(d, m - d);
}

}  // namespace

TEST(RadarParams, DefaultsAndRangeBin) {
  RadarParams p;
  EXPECT_EQ(p.carrier_hz, 70e9);
  EXPECT_EQ(p.prf_hz, 256.0);
  EXPECT_EQ(p.frames, 5u);
  EXPECT_EQ(p.pulses, 32u);
  EXPECT_EQ(p.samples, 492u);
  EXPECT_NEAR(p.range_bin(), 0.2 / 492, 1e-15);
  EXPECT_NEAR(p.pulse_width_m(), 3 * p.range_bin(), 1e-15);
  p.r_max = p.r_min;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Synthesize, StaticScattererLandsInPredictedBin) {
  RadarParams p;
  p.r_max = 0.10 + 492 * 0.000483;  // 0.483 mm range bins
  const ComplexCube cube = synthesize_cube(single(p, Motion::constant(0.15)));
  const long predicted = std::lround((0.15 - 0.10) / p.range_bin());
  EXPECT_EQ(predicted, 104);
  for (std::size_t m = 0; m < p.pulses; m += 7) {
    EXPECT_LE(std::labs(static_cast<long>(peak_range_bin(cube, 0, m)) - predicted), 1);
  }
}

TEST(Synthesize, StaticSceneRowsArePulseInvariant) {
  RadarParams p;
  p.frames = 2;
  GestureScene scene = single(p, Motion::constant(0.2), 0.7);
  scene.scatterers.push_back({Motion::constant(0.123), Motion::constant(1.3)});
  const ComplexCube cube = synthesize_cube(scene);
  for (std::size_t k = 0; k < p.frames; ++k)
    for (std::size_t m = 1; m < p.pulses; ++m)
      for (std::size_t n = 0; n < p.samples; ++n) ASSERT_EQ(cube.at(k, m, n), cube.at(0, 0, n));
}

TEST(Synthesize, EchoAmplitudeAndPhase) {
  RadarParams p;
  const double r = 0.2;
  const ComplexCube cube = synthesize_cube(single(p, Motion::constant(r), 2.0));
  const std::size_t n = peak_range_bin(cube, 0, 0);
  const std::complex<double> expect = std::polar(2.0 / std::pow(r, 4), -2 * M_PI * p.carrier_hz * 2 * r / kSpeedOfLight);
  EXPECT_NEAR(std::abs(cube.at(0, 0, n) - expect) / std::abs(expect), 0.0, 1e-12);
}

TEST(Synthesize, NoHandIsAllZero) {
  GestureScene scene;
  const ComplexCube cube = synthesize_cube(scene);
  EXPECT_EQ(cube.size(), 5u * 32 * 492);
  for (const auto& z : cube.data) ASSERT_EQ(z, std::complex<double>(0.0, 0.0));
}

TEST(Synthesize, NonPositiveRangeIsAnError) {
  EXPECT_THROW(synthesize_cube(single(RadarParams{}, Motion::constant(0.0))), ArgumentError);
  EXPECT_THROW(synthesize_cube(single(RadarParams{}, Motion::linear(0.01, -1.0))), ArgumentError);
}

TEST(Synthesize, DopplerExampleBinSix) {
  RadarParams p;
  p.frames = 1;
  p.pulse_duration_s = 4 * (p.r_max - p.r_min) / kSpeedOfLight;  // envelope covers the sweep
  const double v = 0.1;                                          // closing speed
  const ComplexCube cube = synthesize_cube(single(p, Motion::linear(0.2, -v)));
  const double f = 2 * v * p.carrier_hz / kSpeedOfLight;
  const auto predicted = static_cast<std::size_t>(std::lround(f / (p.prf_hz / p.pulses)));
  EXPECT_EQ(predicted, 6u);
  EXPECT_LE(circular_distance(peak_doppler_bin(cube), predicted, p.pulses), 1u);
}

TEST(Synthesize, DopplerPeakForRandomVelocities) {
  RadarParams p;
  p.frames = 1;
  p.pulse_duration_s = 4 * (p.r_max - p.r_min) / kSpeedOfLight;
  Rng rng = make_rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const double v = uniform(rng, 0.02, 0.25);
    const double r0 = uniform(rng, 0.15, 0.28);
    const ComplexCube cube = synthesize_cube(single(p, Motion::linear(r0, -v)));
    const double bins = 2 * v * p.carrier_hz / kSpeedOfLight / (p.prf_hz / p.pulses);
    const auto predicted = static_cast<std::size_t>(std::lround(bins));
    EXPECT_LE(circular_distance(peak_doppler_bin(cube), predicted, p.pulses), 1u) << "v=" << v << " r0=" << r0;
  }
}

TEST(Synthesize, RecedingTargetMirrorsBin) {
  RadarParams p;
  p.frames = 1;
  p.pulse_duration_s = 4 * (p.r_max - p.r_min) / kSpeedOfLight;
  const ComplexCube cube = synthesize_cube(single(p, Motion::linear(0.15, 0.1)));
  EXPECT_LE(circular_distance(peak_doppler_bin(cube), p.pulses - 6, p.pulses), 1u);
}

TEST(Synthesize, SuperpositionIsExact) {
  RadarParams p;
  p.frames = 2;
  const GestureScene a = single(p, Motion::linear(0.14, 0.05), 0.8);
  const GestureScene b = single(p, Motion::sinusoid(0.2, 0.004, 3.0, 0.3), 1.7);
  GestureScene both = a;
  both.scatterers.push_back(b.scatterers[0]);
  const ComplexCube ca = synthesize_cube(a), cb = synthesize_cube(b), cab = synthesize_cube(both);
  for (std::size_t i = 0; i < cab.size(); ++i) ASSERT_EQ(cab.data[i], ca.data[i] + cb.data[i]);
}

TEST(Synthesize, ReflectivityScalingIsExact) {
  RadarParams p;
  p.frames = 1;
  for (double s : {2.0, 0.5, 3.0}) {
    const ComplexCube c1 = synthesize_cube(single(p, Motion::linear(0.14, 0.05), 0.8));
    const ComplexCube cs = synthesize_cube(single(p, Motion::linear(0.14, 0.05), 0.8 * s));
    for (std::size_t i = 0; i < c1.size(); ++i) {
      if (s == 3.0) {
        ASSERT_NEAR(std::abs(cs.data[i] - s * c1.data[i]), 0.0, 1e-15 * std::abs(cs.data[i]) + 1e-300);
      } else {
        ASSERT_EQ(cs.data[i], s * c1.data[i]);
      }
    }
  }
}

TEST(Synthesize, OutOfSweepRangeIsClipped) {
  RadarParams p;
  p.frames = 1;
  const ComplexCube far = synthesize_cube(single(p, Motion::constant(0.5)));
  const ComplexCube edge = synthesize_cube(single(p, Motion::constant(p.r_max)));
  for (std::size_t i = 0; i < far.size(); ++i) ASSERT_EQ(far.data[i], edge.data[i]);
}

TEST(Motion, Primitives) {
  EXPECT_EQ(Motion::constant(2.0).at(5.0), 2.0);
  EXPECT_DOUBLE_EQ(Motion::linear(1.0, -0.5).at(2.0), 0.0);
  EXPECT_NEAR(Motion::sinusoid(1.0, 0.1, 1.0).at(0.25), 1.1, 1e-15);
  const Motion pw = Motion::piecewise({{0.0, 1.0}, {1.0, 3.0}});
  EXPECT_EQ(pw.at(-1.0), 1.0);
  EXPECT_EQ(pw.at(0.5), 2.0);
  EXPECT_EQ(pw.at(9.0), 3.0);
  EXPECT_THROW(Motion::piecewise({}), ArgumentError);
}

TEST(GenerateDataset, BalancedAndDeterministic) {
  RadarParams p;
  p.frames = 2;
  p.pulses = 8;
  p.samples = 32;
  const auto templates = builtin_gesture_templates(4);
  const auto a = generate_dataset(p, templates, 50, 7);
  ASSERT_EQ(a.size(), 200u);
  std::map<std::size_t, int> counts;
  for (const auto& r : a) ++counts[r.label];
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(counts[c], 50);
  const auto b = generate_dataset(p, templates, 50, 7);
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i].cube.data, b[i].cube.data);
  const auto c = generate_dataset(p, templates, 50, 8);
  bool differs = false;
  for (std::size_t i = 0; i < a.size() && !differs; ++i) differs = a[i].cube.data != c[i].cube.data;
  EXPECT_TRUE(differs);
}

TEST(GenerateDataset, Errors) {
  EXPECT_THROW(generate_dataset(RadarParams{}, {}, 1, 0), ArgumentError);
  EXPECT_THROW(generate_dataset(RadarParams{}, {ClassTemplate{}}, 1, 0), ArgumentError);
  EXPECT_THROW(builtin_gesture_templates(13), ArgumentError);
  EXPECT_EQ(builtin_gesture_templates().size(), 12u);
}
