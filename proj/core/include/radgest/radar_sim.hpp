#pragma once

// Synthetic pulse-radar gesture recordings: a hand is a set of point
// scatterers with time-varying range and reflectivity; each recording is a
// K x M x N cube of complex baseband samples (frames x pulses x range bins).

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace radgest {

inline constexpr double kSpeedOfLight = 299'792'458.0;

struct RadarParams {
  double carrier_hz = 70e9;
  double prf_hz = 256.0;
  std::size_t pulses = 32;    // M, slow-time samples per frame
  std::size_t samples = 492;  // N, fast-time samples per pulse
  std::size_t frames = 5;     // K
  double r_min = 0.10;        // meters
  double r_max = 0.30;
  // Rectangular pulse duration in seconds; <= 0 selects a width of three range bins.
  double pulse_duration_s = 0.0;
  double tx_amplitude = 1.0;

  double pulse_interval() const { return 1.0 / prf_hz; }
  double range_bin() const { return (r_max - r_min) / static_cast<double>(samples); }
  double effective_pulse_duration() const;
  // Pulse extent in range, d*c/2.
  double pulse_width_m() const { return effective_pulse_duration() * kSpeedOfLight / 2.0; }
  double recording_duration() const {
    return static_cast<double>(frames * pulses) * pulse_interval();
  }
  void validate() const;  // throws ConfigError
};

// Parameterized scalar function of slow time. Non-piecewise kinds evaluate
// base + rate*t + amplitude*sin(2*pi*frequency*t + phase); piecewise kinds
// interpolate linearly between knots and hold the end values outside them.
struct Motion {
  enum class Kind { constant, linear, sinusoidal, piecewise };

  Kind kind = Kind::constant;
  double base = 0.0;
  double rate = 0.0;
  double amplitude = 0.0;
  double frequency_hz = 0.0;
  double phase = 0.0;
  std::vector<std::pair<double, double>> knots;  // (time s, value), time-sorted

  static Motion constant(double value);
  static Motion linear(double start, double rate);
  static Motion sinusoid(double center, double amplitude, double frequency_hz, double phase = 0.0,
                         double drift = 0.0);
  static Motion piecewise(std::vector<std::pair<double, double>> knots);

  double at(double t) const;
};

// Point scattering center. `range` is the radial distance in meters (a
// positive rate recedes from the radar); `rcs` is the reflectivity.
struct Scatterer {
  Motion range;
  Motion rcs = Motion::constant(1.0);
};

struct GestureScene {
  RadarParams radar;
  std::vector<Scatterer> scatterers;
  std::size_t label = 0;
  std::uint64_t rng_seed = 0;
};

// Frame-major, pulse-major, sample-major complex samples.
struct ComplexCube {
  std::size_t frames = 0;
  std::size_t pulses = 0;
  std::size_t samples = 0;
  std::vector<std::complex<double>> data;

  ComplexCube() = default;
  ComplexCube(std::size_t k, std::size_t m, std::size_t n)
      : frames(k), pulses(m), samples(n), data(k * m * n) {}

  std::size_t index(std::size_t k, std::size_t m, std::size_t n) const {
    return (k * pulses + m) * samples + n;
  }
  std::complex<double>& at(std::size_t k, std::size_t m, std::size_t n) {
    return data[index(k, m, n)];
  }
  const std::complex<double>& at(std::size_t k, std::size_t m, std::size_t n) const {
    return data[index(k, m, n)];
  }
  std::size_t size() const { return data.size(); }
};

struct LabeledCube {
  ComplexCube cube;
  std::size_t label = 0;
};

// Baseband echo sampled on the range grid r_n = r_min + n*dr at slow time
// T = (k*M + m)/prf:
//   sum_i rho_i(T)/r_i(T)^4 * A_tx * rect(r_n - r_i(T)) * exp(-j*2*pi*f_c*2*r_i(T)/c)
// where rect is the pulse envelope of width d*c/2 centred on the echo delay.
// Throws ArgumentError when any scatterer range is <= 0.
ComplexCube synthesize_cube(const GestureScene& scene);

// Uniform interval used for template parameter draws.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Distribution of scenes for one gesture class. Ranges are given as fractions
// of the sweep [r_min, r_max]; velocities in m/s (negative approaches).
struct ClassTemplate {
  enum class Pattern { none, linear, oscillate, tap, double_tap };

  std::string name;
  std::size_t min_scatterers = 0;
  std::size_t max_scatterers = 0;
  Pattern pattern = Pattern::none;
  Interval start_fraction{0.4, 0.6};
  Interval velocity{0.0, 0.0};
  Interval osc_amplitude{0.0, 0.0};  // meters
  Interval osc_frequency{0.0, 0.0};  // Hz
  Interval rcs{0.5, 1.5};
  Interval rcs_mod_depth{0.0, 0.0};  // fraction of the base rcs
  Interval rcs_mod_frequency{0.0, 0.0};
  bool rcs_bump = false;             // reflectivity rises then falls (hand passing by)
  double spread_m = 0.008;           // per-scatterer offset around the hand centre
};

// The twelve built-in gesture classes; class 0 is "no_hand".
std::vector<ClassTemplate> builtin_gesture_templates();
// First `count` built-in classes; throws ArgumentError outside [2, 12].
std::vector<ClassTemplate> builtin_gesture_templates(std::size_t count);

// Draws one scene from a template using the supplied per-recording seed.
GestureScene sample_scene(const RadarParams& radar, const ClassTemplate& tmpl, std::size_t label,
                          std::uint64_t seed);

// Balanced dataset: record i has label i % classes. Record i draws from its
// own RNG stream derived from (rng_seed, i), so generation is order independent.
std::vector<LabeledCube> generate_dataset(const RadarParams& radar,
                                          const std::vector<ClassTemplate>& templates,
                                          std::size_t per_class_count, std::uint64_t rng_seed);

}  // namespace radgest
