#pragma once

// Bit-reproducible draws on top of raw std::mt19937_64 output. The standard
// fixes the engine's output sequence but not the <random> distributions, so
// everything that feeds a reported number goes through these helpers.

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace ergocube::rng {

using Engine = std::mt19937_64;

/// Engine seeded through std::seed_seq (whose mixing is fully specified).
inline Engine make_engine(std::initializer_list<std::uint64_t> key) {
  std::vector<std::uint32_t> words;
  for (auto k : key) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq s(words.begin(), words.end());
  return Engine(s);
}

/// Uniform double in [0,1) with 53 random bits.
inline double uniform01(Engine& e) { return static_cast<double>(e() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n) by rejection.
inline std::uint64_t uniform_index(Engine& e, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  for (;;) {
    const std::uint64_t x = e();
    if (x < limit) return x % n;
  }
}

/// Uniform point of the closed unit disk.
inline std::complex<double> unit_disk(Engine& e) {
  const double r = std::sqrt(uniform01(e));
  const double theta = 2.0 * std::numbers::pi * uniform01(e);
  return std::polar(r, theta);
}

}  // namespace ergocube::rng
