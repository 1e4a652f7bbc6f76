#pragma once

#include <cstdint>
#include <random>

namespace radgest {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent per-stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t salt = 0) {
  return mix64(mix64(seed ^ mix64(salt)) + stream);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t salt = 0) {
  return Rng(derive_seed(seed, stream, salt));
}

// Uniform double in [lo, hi) from 53 random bits; portable across standard libraries.
inline double uniform(Rng& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

// Uniform integer in [0, n) by rejection; portable across standard libraries.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

}  // namespace radgest
