#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ergocube::fft {

using Complex = std::complex<double>;

enum class Direction { forward, inverse };

/// Smallest power of two >= n (and >= 1).
std::size_t next_pow2(std::size_t n);

/// Largest transform length accepted; guards the size arithmetic of callers.
inline constexpr std::size_t max_length = std::size_t{1} << 26;

/// In-place unitary DFT of power-of-two length.
/// forward: X_k = L^{-1/2} sum_j x_j exp(-2 pi i jk/L); inverse uses exp(+...).
/// Twiddles are tabulated per length from std::polar, so the result depends
/// only on the input (no reduction reordering).
void transform(std::span<Complex> data, Direction dir);

/// Acyclic convolution (a * b)_k = sum_{i+j=k} a_i b_j, k = 0..|a|+|b|-2,
/// via zero padding to a power of two.
std::vector<Complex> convolve(std::span<const Complex> a, std::span<const Complex> b);

}  // namespace ergocube::fft
