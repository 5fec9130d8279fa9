#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "mhd/field.hpp"

namespace mhd {

// SplitMix64: tiny counter-style generator with full 64-bit state, fixed
// output for a fixed seed on every platform. We use it everywhere randomness
// is needed so runs are reproducible from the seed alone.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in (0,1]; the +1 keeps log() in Box-Muller finite.
  double uniform01() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

  // Standard normal via Box-Muller (one draw per call, second value unused:
  // simplicity over throughput, and no hidden cache state).
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
};

// Independent N(mean, amp^2) samples at every grid point. Used by tests to
// exercise spectral identities on data with content at every mode, Nyquist
// included.
inline ScalarField white_noise(const GridSpec& g, std::uint64_t seed, double mean = 0.0,
                               double amp = 1.0) {
  SplitMix64 rng(seed);
  ScalarField f(g);
  for (Eigen::Index m = 0; m < f.values().size(); ++m) f.values()[m] = mean + amp * rng.normal();
  return f;
}

}  // namespace mhd
