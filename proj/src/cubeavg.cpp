#include "ergocube/cubeavg.hpp"

#include "ergocube/fft.hpp"
#include "ergocube/summation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ergocube {

namespace {

void require_length(const SampledSequence& s, std::size_t needed, const char* what) {
  if (s.size() < needed) {
    throw std::length_error(std::string(what) + ": insufficient length (have " + std::to_string(s.size()) +
                            ", need " + std::to_string(needed) + ")");
  }
}

void require_positive(std::size_t N) {
  if (N == 0) throw std::invalid_argument("cube average: N must be >= 1");
}

void check_inputs(const CubeInput2& in, std::size_t N) {
  require_positive(N);
  require_length(in.a, N, "a");
  require_length(in.b, N, "b");
  require_length(in.c, 2 * N, "c");
}

void check_inputs(const CubeInput3& in, std::size_t N) {
  require_positive(N);
  static constexpr std::array<std::size_t, 7> multiples{1, 1, 1, 2, 2, 2, 3};
  static constexpr std::array<const char*, 7> names{"u1", "u2", "u3", "u4", "u5", "u6", "u7"};
  for (std::size_t i = 0; i < 7; ++i) require_length(in.u[i].get(), multiples[i] * N, names[i]);
}

void guard_fft_size(std::size_t N, std::size_t factor) {
  if (N > fft::max_length / factor) throw std::length_error("cube average: FFT size overflow");
}

// e^{2 pi i x} with x reduced mod 1 first.
Complex unit_phase(double x) {
  const double frac = x - std::floor(x);
  return std::polar(1.0, 2.0 * std::numbers::pi * frac);
}

}  // namespace

Complex cube_avg2_naive(const CubeInput2& in, std::size_t N) {
  check_inputs(in, N);
  CompensatedComplexSum sum;
  for (std::size_t n = 1; n <= N; ++n) {
    const Complex an = in.a.at(n);
    for (std::size_t m = 1; m <= N; ++m) sum.add(an * in.b.at(m) * in.c.at(n + m));
  }
  const double NN = static_cast<double>(N) * static_cast<double>(N);
  return sum.value() / NN;
}

Complex cube_avg2_fft(const CubeInput2& in, std::size_t N) {
  check_inputs(in, N);
  guard_fft_size(N, 2);
  // Slot 0 is the unused index 0, so convolution index k equals n + m.
  std::vector<Complex> a(N + 1), b(N + 1);
  for (std::size_t n = 1; n <= N; ++n) {
    a[n] = in.a.at(n);
    b[n] = in.b.at(n);
  }
  const auto w = fft::convolve(a, b);
  CompensatedComplexSum sum;
  for (std::size_t k = 2; k <= 2 * N; ++k) sum.add(in.c.at(k) * w[k]);
  const double NN = static_cast<double>(N) * static_cast<double>(N);
  return sum.value() / NN;
}

Complex cube_avg3_naive(const CubeInput3& in, std::size_t N) {
  check_inputs(in, N);
  if (N > max_naive_cube3) throw std::length_error("cube_avg3_naive: N exceeds the naive limit");
  const auto& u1 = in.u[0].get();
  const auto& u2 = in.u[1].get();
  const auto& u3 = in.u[2].get();
  const auto& u4 = in.u[3].get();
  const auto& u5 = in.u[4].get();
  const auto& u6 = in.u[5].get();
  const auto& u7 = in.u[6].get();
  CompensatedComplexSum sum;
  for (std::size_t n = 1; n <= N; ++n) {
    for (std::size_t m = 1; m <= N; ++m) {
      const Complex outer = u1.at(n) * u2.at(m) * u4.at(n + m);
      for (std::size_t p = 1; p <= N; ++p) {
        sum.add(outer * u3.at(p) * u5.at(n + p) * u6.at(m + p) * u7.at(n + m + p));
      }
    }
  }
  const double N3 = static_cast<double>(N) * static_cast<double>(N) * static_cast<double>(N);
  return sum.value() / N3;
}

Complex cube_avg3_fft(const CubeInput3& in, std::size_t N) {
  check_inputs(in, N);
  guard_fft_size(N, 3);
  const auto& u1 = in.u[0].get();
  const auto& u2 = in.u[1].get();
  const auto& u3 = in.u[2].get();
  const auto& u4 = in.u[3].get();
  const auto& u5 = in.u[4].get();
  const auto& u6 = in.u[5].get();
  const auto& u7 = in.u[6].get();

  std::vector<Complex> a(N + 1), b(N + 1);
  CompensatedComplexSum total;
  for (std::size_t p = 1; p <= N; ++p) {
    for (std::size_t n = 1; n <= N; ++n) {
      a[n] = u1.at(n) * u5.at(n + p);
      b[n] = u2.at(n) * u6.at(n + p);
    }
    const auto w = fft::convolve(a, b);
    CompensatedComplexSum slab;
    for (std::size_t j = 2; j <= 2 * N; ++j) slab.add(u4.at(j) * u7.at(j + p) * w[j]);
    total.add(u3.at(p) * slab.value());
  }
  const double N3 = static_cast<double>(N) * static_cast<double>(N) * static_cast<double>(N);
  return total.value() / N3;
}

Complex twisted_cube_avg2_naive(const SampledSequence& b, const SampledSequence& c, std::size_t N, double t) {
  require_positive(N);
  require_length(b, N, "b");
  require_length(c, 2 * N, "c");
  CompensatedComplexSum sum;
  for (std::size_t n = 1; n <= N; ++n) {
    const Complex phase = unit_phase(static_cast<double>(n) * t);
    for (std::size_t m = 1; m <= N; ++m) sum.add(b.at(m) * c.at(m + n) * phase);
  }
  const double NN = static_cast<double>(N) * static_cast<double>(N);
  return sum.value() / NN;
}

std::vector<Complex> twisted_weights(const SampledSequence& b, const SampledSequence& c, std::size_t N) {
  require_positive(N);
  require_length(b, N, "b");
  require_length(c, 2 * N, "c");
  guard_fft_size(N, 3);
  // brev_i = b_{N-i}; (brev * c)_{N+n} = sum_m b_m c_{n+m}.
  std::vector<Complex> brev(N), cc(2 * N + 1);
  for (std::size_t i = 0; i < N; ++i) brev[i] = b.at(N - i);
  for (std::size_t j = 1; j <= 2 * N; ++j) cc[j] = c.at(j);
  const auto conv = fft::convolve(brev, cc);
  std::vector<Complex> r(N);
  for (std::size_t n = 1; n <= N; ++n) r[n - 1] = conv[N + n];
  return r;
}

Complex twisted_from_weights(std::span<const Complex> weights, std::size_t N, double t) {
  if (weights.size() < N) throw std::length_error("twisted weights: insufficient length");
  CompensatedComplexSum sum;
  for (std::size_t n = 1; n <= N; ++n) sum.add(weights[n - 1] * unit_phase(static_cast<double>(n) * t));
  const double NN = static_cast<double>(N) * static_cast<double>(N);
  return sum.value() / NN;
}

Complex twisted_cube_avg2(const SampledSequence& b, const SampledSequence& c, std::size_t N, double t) {
  if (N < 32) return twisted_cube_avg2_naive(b, c, N, t);
  return twisted_from_weights(twisted_weights(b, c, N), N, t);
}

AverageSeries average_series(const CubeKernel& kernel, std::span<const std::size_t> grid) {
  if (grid.empty()) throw std::invalid_argument("average_series: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) throw std::invalid_argument("average_series: grid must be strictly increasing");
  }
  AverageSeries series;
  series.grid.assign(grid.begin(), grid.end());
  series.values.reserve(grid.size());
  for (auto N : grid) {
    const Complex v = kernel(N);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw std::runtime_error("average_series: non-finite value at N=" + std::to_string(N));
    }
    series.values.push_back(v);
  }
  for (std::size_t i = 1; i < series.values.size(); ++i) {
    series.cauchy_gaps.push_back(std::abs(series.values[i] - series.values[i - 1]));
  }
  return series;
}

}  // namespace ergocube
