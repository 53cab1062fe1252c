#include "ergocube/expsum.hpp"

#include "ergocube/cubeavg.hpp"
#include "ergocube/fft.hpp"
#include "ergocube/summation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace ergocube {

namespace {

void require_length(const SampledSequence& s, std::size_t needed, const char* what) {
  if (s.size() < needed) throw std::length_error(std::string(what) + ": insufficient length");
}

void require_unit_bounded(const SampledSequence& s, std::size_t upto, const char* what) {
  for (std::size_t j = 1; j <= upto; ++j) {
    if (std::abs(s.at(j)) > 1.0 + 1e-12) {
      throw std::invalid_argument(std::string("lemma1_check: ") + what + " is not bounded by one at index " +
                                  std::to_string(j));
    }
  }
}

}  // namespace

Complex ww_average(const SampledSequence& a, std::size_t N, double t) {
  if (N == 0) throw std::invalid_argument("ww_average: N must be >= 1");
  require_length(a, N, "ww_average");
  CompensatedComplexSum sum;
  for (std::size_t n = 1; n <= N; ++n) {
    const double x = static_cast<double>(n) * t;
    sum.add(a.at(n) * std::polar(1.0, 2.0 * std::numbers::pi * (x - std::floor(x))));
  }
  return sum.value() / static_cast<double>(N);
}

double certification_factor(std::size_t degree, std::size_t grid_size) {
  const double ratio = static_cast<double>(degree) / static_cast<double>(grid_size);
  if (!(ratio < 0.5)) throw std::invalid_argument("certification_factor: grid too coarse for the degree");
  return 1.0 / std::cos(std::numbers::pi * ratio);
}

SupBound sup_exp_sum(std::span<const Complex> coefficients, std::size_t oversample) {
  if (oversample < min_oversample) {
    throw std::invalid_argument("sup_exp_sum: oversample must be >= 8");
  }
  if (!std::has_single_bit(oversample)) throw std::invalid_argument("sup_exp_sum: oversample must be a power of two");
  const std::size_t N = coefficients.size();
  if (N == 0) throw std::invalid_argument("sup_exp_sum: N must be >= 1");
  const std::size_t base = fft::next_pow2(N);
  if (base > fft::max_length / oversample) throw std::length_error("sup_exp_sum: grid too large");
  const std::size_t L = oversample * base;

  // Slot n holds a_n; the inverse unitary DFT gives L^{-1/2} sum_n a_n e(nk/L).
  std::vector<Complex> grid(L);
  std::copy(coefficients.begin(), coefficients.end(), grid.begin() + 1);
  fft::transform(grid, fft::Direction::inverse);
  double peak = 0.0;
  for (const auto& z : grid) peak = std::max(peak, std::abs(z));
  const double lo = peak * std::sqrt(static_cast<double>(L)) / static_cast<double>(N);
  return SupBound{lo, lo * certification_factor(N, L), L, N};
}

SupBound sup_exp_sum(const SampledSequence& a, std::size_t N, std::size_t oversample) {
  if (N == 0) throw std::invalid_argument("sup_exp_sum: N must be >= 1");
  require_length(a, N, "sup_exp_sum");
  return sup_exp_sum(a.values().first(N), oversample);
}

Lemma1Report lemma1_check(const SampledSequence& a, const SampledSequence& b, const SampledSequence& c,
                          std::size_t N, std::size_t oversample) {
  if (N == 0) throw std::invalid_argument("lemma1_check: N must be >= 1");
  require_length(a, N, "a");
  require_length(b, N, "b");
  require_length(c, 2 * N, "c");
  require_unit_bounded(a, N, "a");
  require_unit_bounded(b, N, "b");
  require_unit_bounded(c, 2 * N, "c");

  Lemma1Report r;
  r.lhs = std::norm(cube_avg2_naive(CubeInput2{a, b, c}, N));
  const double hi_c = sup_exp_sum(c, 2 * N, oversample).hi;
  const double hi_a = sup_exp_sum(a, N, oversample).hi;
  r.rhs_c = 4.0 * hi_c * hi_c;
  r.rhs_a = 4.0 * hi_a * hi_a;
  r.holds = r.lhs <= std::min(r.rhs_c, r.rhs_a) + lemma1_slack;
  return r;
}

Eq4Estimate eq4_estimator(const SampledSequence& u, const SampledSequence& v, std::size_t N,
                          std::size_t oversample) {
  if (N == 0) throw std::invalid_argument("eq4_estimator: N must be >= 1");
  require_length(u, N, "u");
  require_length(v, 2 * N, "v");
  std::vector<Complex> w(N);
  CompensatedSum lower, upper;
  for (std::size_t n = 1; n <= N; ++n) {
    for (std::size_t m = 1; m <= N; ++m) w[m - 1] = u.at(m) * v.at(n + m);
    const SupBound s = sup_exp_sum(w, oversample);
    lower.add(s.lo * s.lo);
    upper.add(s.hi * s.hi);
  }
  const double scale = static_cast<double>(N);
  return Eq4Estimate{lower.value() / scale, upper.value() / scale};
}

double dense_grid_max(std::span<const Complex> coefficients, std::size_t points) {
  if (coefficients.empty() || points == 0) throw std::invalid_argument("dense_grid_max: empty input");
  const double N = static_cast<double>(coefficients.size());
  double best = 0.0;
  for (std::size_t j = 0; j < points; ++j) {
    const Complex z = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(points));
    // p(z) = z (a_1 + z (a_2 + ... + z a_N))
    Complex acc = 0.0;
    for (std::size_t i = coefficients.size(); i-- > 0;) acc = acc * z + coefficients[i];
    best = std::max(best, std::abs(acc * z) / N);
  }
  return best;
}

}  // namespace ergocube
