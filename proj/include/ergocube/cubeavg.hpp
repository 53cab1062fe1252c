#pragma once

// Multiple ergodic averages along cubes.
//
//   arity 2:  M_N(a,b,c)      = N^-2 sum_{n,m=1}^N a_n b_m c_{n+m}
//   arity 3:  M_N(u1,...,u7)  = N^-3 sum_{n,m,p=1}^N u1_n u2_m u3_p u4_{n+m}
//                                    u5_{n+p} u6_{m+p} u7_{n+m+p}
//   twisted:  W_N(b,c;t)      = N^-2 sum_{m,n=1}^N b_m c_{m+n} e^{2 pi i n t}
//
// Indices are 1-based as written; sequences must cover the largest shifted
// index (2N for c, u4..u6; 3N for u7). Nothing is ever wrapped periodically.

#include "ergocube/dynsys.hpp"

#include <array>
#include <functional>
#include <vector>

namespace ergocube {

struct CubeInput2 {
  const SampledSequence& a;
  const SampledSequence& b;
  const SampledSequence& c;
};

struct CubeInput3 {
  std::array<std::reference_wrapper<const SampledSequence>, 7> u;
};

/// Largest N accepted by the naive arity-3 kernel (O(N^3)).
inline constexpr std::size_t max_naive_cube3 = 1024;

Complex cube_avg2_naive(const CubeInput2& in, std::size_t N);
/// Same value as cube_avg2_naive via w = a*b (acyclic convolution), then
/// sum_k c_k w_k. FFT length is the next power of two >= 2N+1.
Complex cube_avg2_fft(const CubeInput2& in, std::size_t N);

Complex cube_avg3_naive(const CubeInput3& in, std::size_t N);
/// O(N^2 log N). For each p the inner (n,m) sum is an arity-2 cube sum with
/// a_n = u1_n u5_{n+p}, b_m = u2_m u6_{m+p}, c_j = u4_j u7_{j+p}, evaluated by
/// one convolution; the slabs are then weighted by u3_p.
Complex cube_avg3_fft(const CubeInput3& in, std::size_t N);

Complex twisted_cube_avg2_naive(const SampledSequence& b, const SampledSequence& c, std::size_t N, double t);
/// Evaluates through the correlation weights r_n = sum_m b_m c_{m+n}.
Complex twisted_cube_avg2(const SampledSequence& b, const SampledSequence& c, std::size_t N, double t);

/// Correlation weights r_1..r_N (0-based storage) used by the twisted average;
/// W_N(t) = N^-2 sum_n r_n e^{2 pi i n t}. Reusable across many t.
std::vector<Complex> twisted_weights(const SampledSequence& b, const SampledSequence& c, std::size_t N);
Complex twisted_from_weights(std::span<const Complex> weights, std::size_t N, double t);

struct AverageSeries {
  std::vector<std::size_t> grid;
  std::vector<Complex> values;
  std::vector<double> cauchy_gaps;  // |M_{N_{j+1}} - M_{N_j}|
};

using CubeKernel = std::function<Complex(std::size_t N)>;

/// Evaluates the kernel on a strictly increasing grid.
AverageSeries average_series(const CubeKernel& kernel, std::span<const std::size_t> grid);

}  // namespace ergocube
