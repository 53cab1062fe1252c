#pragma once

// Wiener-Wintner exponential sums and certified bounds on their suprema.

#include "ergocube/dynsys.hpp"

#include <span>

namespace ergocube {

inline constexpr std::size_t default_oversample = 16;
inline constexpr std::size_t min_oversample = 8;

/// (1/N) sum_{n=1}^N a_n e^{2 pi i n t}.
Complex ww_average(const SampledSequence& a, std::size_t N, double t);

/// Bracket for sup_t |(1/N) sum_{n=1}^N a_n e^{2 pi i n t}|.
///
/// lo is the maximum over grid_size equispaced t (an attained value, so a
/// lower bound); hi = lo * certification_factor(degree, grid_size) is an upper
/// bound for the true supremum.
struct SupBound {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t grid_size = 0;
  std::size_t degree = 0;
};

/// sec(pi * degree / grid_size). If the modulus peaks at t*, the real
/// trigonometric polynomial Re(conj(phase) * p) has frequency half-span
/// (degree-1)/2 and stays above |p(t*)| cos(pi (degree-1) / (2 grid_size))
/// within half a grid step of t*, so the nearest grid point sees at least that.
/// The factor used here is the looser sec(pi * degree / grid_size).
double certification_factor(std::size_t degree, std::size_t grid_size);

/// Evaluates on grid_size = oversample * next_pow2(N) points with one
/// zero-padded FFT. oversample must be a power of two >= 8.
SupBound sup_exp_sum(std::span<const Complex> coefficients, std::size_t oversample = default_oversample);
SupBound sup_exp_sum(const SampledSequence& a, std::size_t N, std::size_t oversample = default_oversample);

/// Both sides of the three-sequence inequality
///   |M_N(a,b,c)|^2 <= 4 min( sup_t |(2N)^-1 sum_{m'=1}^{2N} c_m' e(m't)|^2,
///                            sup_t |N^-1 sum_{n'=1}^{N} a_n' e(n't)|^2 ).
struct Lemma1Report {
  double lhs = 0.0;
  double rhs_c = 0.0;
  double rhs_a = 0.0;
  bool holds = false;
};

inline constexpr double lemma1_slack = 1e-10;

/// lhs from cube_avg2_naive, right-hand sides from certified sup bounds.
/// Rejects (std::invalid_argument) any a_n, b_n (n <= N) or c_j (j <= 2N)
/// with modulus above 1 + 1e-12.
Lemma1Report lemma1_check(const SampledSequence& a, const SampledSequence& b, const SampledSequence& c,
                          std::size_t N, std::size_t oversample = default_oversample);

/// Bracket for (1/N) sum_{n=1}^N sup_t |(1/N) sum_{m=1}^N u_m v_{n+m} e^{2 pi i m t}|^2.
/// upper uses the certified hi_n of every inner sup, lower the grid maxima lo_n.
struct Eq4Estimate {
  double lower = 0.0;
  double upper = 0.0;
};

/// Needs |u| >= N, |v| >= 2N. O(N^2 log N).
Eq4Estimate eq4_estimator(const SampledSequence& u, const SampledSequence& v, std::size_t N,
                          std::size_t oversample = default_oversample);

/// Brute-force max of |(1/N) sum a_n e(n t)| over t = j / points, by Horner
/// evaluation at every point. Independent of the FFT path; O(points * N).
double dense_grid_max(std::span<const Complex> coefficients, std::size_t points);

}  // namespace ergocube
