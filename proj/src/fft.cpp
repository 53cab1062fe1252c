#include "ergocube/fft.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace ergocube::fft {

namespace {

struct Plan {
  std::vector<Complex> twiddles;  // exp(-2 pi i k / L), k < L/2
  std::vector<std::size_t> bitrev;
};

const Plan& plan_for(std::size_t length) {
  thread_local std::map<std::size_t, Plan> cache;
  auto [it, inserted] = cache.try_emplace(length);
  if (inserted) {
    Plan& p = it->second;
    p.twiddles.resize(length / 2);
    for (std::size_t k = 0; k < length / 2; ++k) {
      p.twiddles[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(length));
    }
    const int bits = std::countr_zero(length);
    p.bitrev.resize(length);
    for (std::size_t i = 0; i < length; ++i) {
      std::size_t r = 0;
      for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      p.bitrev[i] = r;
    }
  }
  return it->second;
}

}  // namespace

std::size_t next_pow2(std::size_t n) { return n <= 1 ? 1 : std::bit_ceil(n); }

void transform(std::span<Complex> data, Direction dir) {
  const std::size_t n = data.size();
  if (n == 0 || !std::has_single_bit(n)) throw std::invalid_argument("fft: length must be a power of two");
  if (n > max_length) throw std::length_error("fft: transform length exceeds limit");
  if (n == 1) return;
  const Plan& plan = plan_for(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < plan.bitrev[i]) std::swap(data[i], data[plan.bitrev[i]]);
  }
  const bool inverse = dir == Direction::inverse;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        Complex w = plan.twiddles[j * stride];
        if (inverse) w = std::conj(w);
        const Complex u = data[start + j];
        const Complex v = data[start + j + half] * w;
        data[start + j] = u + v;
        data[start + j + half] = u - v;
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& x : data) x *= scale;
}

std::vector<Complex> convolve(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  std::vector<Complex> fa(n), fb(n);
  std::copy(a.begin(), a.end(), fa.begin());
  std::copy(b.begin(), b.end(), fb.begin());
  transform(fa, Direction::forward);
  transform(fb, Direction::forward);
  // Unitary pair: conv = sqrt(n) * IFFT(FFT(a) FFT(b)).
  const double scale = std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i] * scale;
  transform(fa, Direction::inverse);
  fa.resize(out_len);
  return fa;
}

}  // namespace ergocube::fft
