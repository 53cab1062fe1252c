#pragma once

#include "ergocube/dynsys.hpp"
#include "ergocube/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace testing_support {

inline ergocube::SampledSequence disk_sequence(ergocube::rng::Engine& e, std::size_t length) {
  std::vector<ergocube::Complex> v(length);
  for (auto& x : v) x = ergocube::rng::unit_disk(e);
  return ergocube::SampledSequence(std::move(v), 1.0);
}

inline ergocube::SampledSequence constant_sequence(ergocube::Complex value, std::size_t length) {
  return ergocube::SampledSequence(std::vector<ergocube::Complex>(length, value), std::abs(value));
}

inline ergocube::SampledSequence from_function(std::size_t length, auto&& f, double bound = 1.0) {
  std::vector<ergocube::Complex> v(length);
  for (std::size_t n = 1; n <= length; ++n) v[n - 1] = f(n);
  return ergocube::SampledSequence(std::move(v), bound);
}

inline ergocube::Complex e(double x) { return std::polar(1.0, 2.0 * std::numbers::pi * x); }

inline double relative_error(ergocube::Complex got, ergocube::Complex want) {
  return std::abs(got - want) / std::max(std::abs(want), std::numeric_limits<double>::min());
}

}  // namespace testing_support
