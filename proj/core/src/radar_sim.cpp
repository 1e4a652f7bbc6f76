#include "radgest/radar_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "radgest/error.hpp"
#include "radgest/random.hpp"

namespace radgest {

double RadarParams::effective_pulse_duration() const {
  if (pulse_duration_s > 0.0) return pulse_duration_s;
  return 3.0 * range_bin() * 2.0 / kSpeedOfLight;
}

void RadarParams::validate() const {
  if (!(carrier_hz > 0.0)) throw ConfigError("carrier_hz must be > 0");
  if (!(prf_hz > 0.0)) throw ConfigError("prf_hz must be > 0");
  if (pulses == 0) throw ConfigError("pulses (M) must be >= 1");
  if (samples == 0) throw ConfigError("samples (N) must be >= 1");
  if (frames == 0) throw ConfigError("frames (K) must be >= 1");
  if (!(r_min < r_max)) throw ConfigError("r_min must be < r_max");
  if (!(r_min > 0.0)) throw ConfigError("r_min must be > 0");
  if (pulse_duration_s < 0.0) throw ConfigError("pulse_duration_s must be >= 0");
  if (!(tx_amplitude >= 0.0)) throw ConfigError("tx_amplitude must be >= 0");
}

Motion Motion::constant(double value) {
  Motion m;
  m.base = value;
  return m;
}

Motion Motion::linear(double start, double rate) {
  Motion m;
  m.kind = Kind::linear;
  m.base = start;
  m.rate = rate;
  return m;
}

Motion Motion::sinusoid(double center, double amplitude, double frequency_hz, double phase,
                        double drift) {
  Motion m;
  m.kind = Kind::sinusoidal;
  m.base = center;
  m.amplitude = amplitude;
  m.frequency_hz = frequency_hz;
  m.phase = phase;
  m.rate = drift;
  return m;
}

Motion Motion::piecewise(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) throw ArgumentError("piecewise motion needs at least one knot");
  if (!std::is_sorted(knots.begin(), knots.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; })) {
    throw ArgumentError("piecewise motion knots must be time-sorted");
  }
  Motion m;
  m.kind = Kind::piecewise;
  m.knots = std::move(knots);
  return m;
}

double Motion::at(double t) const {
  if (kind == Kind::piecewise) {
    if (t <= knots.front().first) return knots.front().second;
    if (t >= knots.back().first) return knots.back().second;
    auto hi = std::upper_bound(knots.begin(), knots.end(), t,
                               [](double v, const auto& k) { return v < k.first; });
    auto lo = hi - 1;
    const double w = (t - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
  }
  return base + rate * t + amplitude * std::sin(2.0 * std::numbers::pi * frequency_hz * t + phase);
}

ComplexCube synthesize_cube(const GestureScene& scene) {
  const RadarParams& p = scene.radar;
  p.validate();
  ComplexCube cube(p.frames, p.pulses, p.samples);
  const double dr = p.range_bin();
  const double half_width = p.pulse_width_m() / 2.0;
  const double tp = p.pulse_interval();
  const double wavenumber = 2.0 * std::numbers::pi * p.carrier_hz * 2.0 / kSpeedOfLight;

  for (std::size_t k = 0; k < p.frames; ++k) {
    for (std::size_t m = 0; m < p.pulses; ++m) {
      const double t = static_cast<double>(k * p.pulses + m) * tp;
      std::complex<double>* row = &cube.at(k, m, 0);
      for (const Scatterer& s : scene.scatterers) {
        const double raw = s.range.at(t);
        if (!(raw > 0.0)) {
          throw ArgumentError("scatterer range " + std::to_string(raw) + " m at T = " +
                              std::to_string(t) + " s is not positive");
        }
        const double r = std::clamp(raw, p.r_min, p.r_max);
        const double rho = std::max(0.0, s.rcs.at(t));
        const double amp = p.tx_amplitude * rho / (r * r * r * r);
        const std::complex<double> echo = std::polar(amp, -wavenumber * r);
        const double first = std::ceil((r - half_width - p.r_min) / dr);
        const double last = std::floor((r + half_width - p.r_min) / dr);
        const long n0 = std::max(0L, static_cast<long>(first));
        const long n1 = std::min(static_cast<long>(p.samples) - 1, static_cast<long>(last));
        for (long n = n0; n <= n1; ++n) {
          const double rn = p.r_min + static_cast<double>(n) * dr;
          if (std::fabs(rn - r) < half_width) row[n] += echo;
        }
      }
    }
  }
  return cube;
}

std::vector<ClassTemplate> builtin_gesture_templates() {
  using P = ClassTemplate::Pattern;
  std::vector<ClassTemplate> t(12);

  t[0].name = "no_hand";

  t[1].name = "push";
  t[1].min_scatterers = 3;
  t[1].max_scatterers = 6;
  t[1].pattern = P::linear;
  t[1].start_fraction = {0.55, 0.75};
  t[1].velocity = {-0.12, -0.06};

  t[2].name = "pull";
  t[2].min_scatterers = 3;
  t[2].max_scatterers = 6;
  t[2].pattern = P::linear;
  t[2].start_fraction = {0.25, 0.45};
  t[2].velocity = {0.06, 0.12};

  t[3].name = "wave";
  t[3].min_scatterers = 3;
  t[3].max_scatterers = 6;
  t[3].pattern = P::oscillate;
  t[3].start_fraction = {0.4, 0.6};
  t[3].osc_amplitude = {0.004, 0.008};
  t[3].osc_frequency = {2.5, 4.0};

  t[4].name = "hold";
  t[4].min_scatterers = 3;
  t[4].max_scatterers = 6;
  t[4].pattern = P::none;
  t[4].start_fraction = {0.3, 0.7};
  t[4].rcs_mod_depth = {0.0, 0.1};
  t[4].rcs_mod_frequency = {0.5, 1.0};

  t[5].name = "swipe";
  t[5].min_scatterers = 3;
  t[5].max_scatterers = 6;
  t[5].pattern = P::linear;
  t[5].start_fraction = {0.3, 0.7};
  t[5].velocity = {-0.02, 0.02};
  t[5].rcs_bump = true;

  t[6].name = "circle";
  t[6].min_scatterers = 3;
  t[6].max_scatterers = 6;
  t[6].pattern = P::oscillate;
  t[6].start_fraction = {0.4, 0.6};
  t[6].osc_amplitude = {0.01, 0.02};
  t[6].osc_frequency = {1.0, 1.5};
  t[6].rcs_mod_depth = {0.3, 0.6};
  t[6].rcs_mod_frequency = {1.0, 1.5};

  t[7].name = "tap";
  t[7].min_scatterers = 2;
  t[7].max_scatterers = 4;
  t[7].pattern = P::tap;
  t[7].start_fraction = {0.4, 0.6};
  t[7].velocity = {0.08, 0.15};

  t[8].name = "slow_push";
  t[8].min_scatterers = 3;
  t[8].max_scatterers = 6;
  t[8].pattern = P::linear;
  t[8].start_fraction = {0.5, 0.7};
  t[8].velocity = {-0.05, -0.02};

  t[9].name = "slow_pull";
  t[9].min_scatterers = 3;
  t[9].max_scatterers = 6;
  t[9].pattern = P::linear;
  t[9].start_fraction = {0.3, 0.5};
  t[9].velocity = {0.02, 0.05};

  t[10].name = "finger_rub";
  t[10].min_scatterers = 2;
  t[10].max_scatterers = 4;
  t[10].pattern = P::oscillate;
  t[10].start_fraction = {0.3, 0.6};
  t[10].osc_amplitude = {0.0005, 0.001};
  t[10].osc_frequency = {8.0, 12.0};

  t[11].name = "double_tap";
  t[11].min_scatterers = 2;
  t[11].max_scatterers = 4;
  t[11].pattern = P::double_tap;
  t[11].start_fraction = {0.4, 0.6};
  t[11].velocity = {0.08, 0.15};
  return t;
}

std::vector<ClassTemplate> builtin_gesture_templates(std::size_t count) {
  auto all = builtin_gesture_templates();
  if (count < 2 || count > all.size()) {
    throw ArgumentError("number of built-in classes must be in [2, " + std::to_string(all.size()) +
                        "], got " + std::to_string(count));
  }
  all.resize(count);
  return all;
}

namespace {

double draw(Rng& rng, const Interval& iv) { return uniform(rng, iv.lo, iv.hi); }

// Piecewise range trajectory that approaches and retreats `cycles` times.
Motion tap_motion(double start, double speed, double duration, int cycles) {
  std::vector<std::pair<double, double>> knots;
  const double leg = duration / (2.0 * cycles);
  double t = 0.0;
  knots.emplace_back(t, start);
  for (int c = 0; c < cycles; ++c) {
    t += leg;
    knots.emplace_back(t, start - speed * leg);
    t += leg;
    knots.emplace_back(t, start);
  }
  return Motion::piecewise(std::move(knots));
}

}  // namespace

GestureScene sample_scene(const RadarParams& radar, const ClassTemplate& tmpl, std::size_t label,
                          std::uint64_t seed) {
  using P = ClassTemplate::Pattern;
  Rng rng(seed);
  GestureScene scene;
  scene.radar = radar;
  scene.label = label;
  scene.rng_seed = seed;

  const std::size_t span = tmpl.max_scatterers - tmpl.min_scatterers + 1;
  const std::size_t count =
      tmpl.max_scatterers == 0 ? 0 : tmpl.min_scatterers + uniform_index(rng, span);
  const double sweep = radar.r_max - radar.r_min;
  const double duration = radar.recording_duration();

  // Hand-level motion shared by all scatterers, plus small per-scatterer offsets.
  const double centre = radar.r_min + sweep * draw(rng, tmpl.start_fraction);
  const double velocity = draw(rng, tmpl.velocity);
  const double osc_amp = draw(rng, tmpl.osc_amplitude);
  const double osc_freq = draw(rng, tmpl.osc_frequency);
  const double osc_phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double mod_depth = draw(rng, tmpl.rcs_mod_depth);
  const double mod_freq = draw(rng, tmpl.rcs_mod_frequency);

  for (std::size_t i = 0; i < count; ++i) {
    const double offset = uniform(rng, -tmpl.spread_m, tmpl.spread_m);
    const double rcs = draw(rng, tmpl.rcs);
    const double start = centre + offset;
    Scatterer s;
    switch (tmpl.pattern) {
      case P::none:
        s.range = Motion::constant(start);
        break;
      case P::linear:
        s.range = Motion::linear(start, velocity);
        break;
      case P::oscillate:
        s.range = Motion::sinusoid(start, osc_amp, osc_freq, osc_phase);
        break;
      case P::tap:
        s.range = tap_motion(start, velocity, duration, 1);
        break;
      case P::double_tap:
        s.range = tap_motion(start, velocity, duration, 2);
        break;
    }
    if (tmpl.rcs_bump) {
      s.rcs = Motion::piecewise({{0.0, 0.2 * rcs}, {0.5 * duration, 1.5 * rcs}, {duration, 0.2 * rcs}});
    } else if (mod_depth > 0.0) {
      s.rcs = Motion::sinusoid(rcs, mod_depth * rcs, mod_freq, osc_phase);
    } else {
      s.rcs = Motion::constant(rcs);
    }
    scene.scatterers.push_back(std::move(s));
  }
  return scene;
}

std::vector<LabeledCube> generate_dataset(const RadarParams& radar,
                                          const std::vector<ClassTemplate>& templates,
                                          std::size_t per_class_count, std::uint64_t rng_seed) {
  if (templates.empty()) throw ArgumentError("generate_dataset: empty template list");
  if (templates.size() < 2) throw ArgumentError("generate_dataset: at least 2 classes required");
  radar.validate();
  const std::size_t classes = templates.size();
  std::vector<LabeledCube> out;
  out.reserve(classes * per_class_count);
  for (std::size_t i = 0; i < classes * per_class_count; ++i) {
    const std::size_t label = i % classes;
    const GestureScene scene =
        sample_scene(radar, templates[label], label, derive_seed(rng_seed, i, 0x5ce4e));
    out.push_back({synthesize_cube(scene), label});
  }
  return out;
}

}  // namespace radgest
