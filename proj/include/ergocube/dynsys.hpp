#pragma once

// Concrete measure-preserving systems, their exact orbits, and observables
// sampled along those orbits.
//
// Index convention: a SampledSequence stores a_1..a_L in storage slots
// 0..L-1. Use SampledSequence::at(n) for the 1-based view.

#include "ergocube/rational.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ergocube {

using Complex = std::complex<double>;

/// x -> x + alpha on the circle. Positions and alpha are fractions of the unit
/// circle in 64-bit fixed point (value / 2^64), so addition wraps exactly.
struct Rotation {
  std::uint64_t alpha = 0;
};

/// Shift on an i.i.d. symbol stream with rational symbol probabilities.
struct BernoulliShift {
  std::vector<Rational> probabilities;
  std::uint64_t seed = 0;
};

/// Shift on a stationary Markov chain. `initial` must be stationary for
/// `transition` so that the shift preserves the path measure.
struct MarkovShift {
  std::vector<std::vector<Rational>> transition;
  std::vector<Rational> initial;
  std::uint64_t seed = 0;
};

/// A permutation of {0..K-1} with the uniform measure.
struct FinitePermutation {
  std::vector<std::size_t> pi;
};

using SystemSpec = std::variant<Rotation, BernoulliShift, MarkovShift, FinitePermutation>;

enum class SystemKind { rotation, bernoulli, markov, permutation };

SystemKind kind_of(const SystemSpec& spec);
std::string to_string(SystemKind kind);

/// Checks the invariants of a spec (bijection, distributions summing to one,
/// stationarity, alphabet size >= 2). Throws std::invalid_argument.
void validate(const SystemSpec& spec);

/// Size of the symbol alphabet (shifts), ground set (permutations); 0 for rotations.
std::size_t alphabet_size(const SystemSpec& spec);

/// Measure of the cylinder {x_0 = symbol}, or of the point {symbol} for permutations.
Rational symbol_measure(const SystemSpec& spec, std::size_t symbol);

/// Converts a circle fraction in [0,1) to 64-bit fixed point, rounding down.
std::uint64_t to_fixed_point(const Rational& fraction);
double fixed_point_to_double(std::uint64_t value);

/// The states x, Tx, ..., T^{L-1}x of one orbit.
///
/// Rotations and permutations store the states themselves. Shifts store the
/// symbol stream; state n is the window of symbols starting at position n, and
/// `window` extra symbols are kept past the last state so that cylinder
/// observables of that length can be evaluated at every state.
class Orbit {
 public:
  Orbit(SystemSpec spec, std::vector<std::uint64_t> data, std::size_t length, std::size_t window);

  const SystemSpec& spec() const { return spec_; }
  SystemKind kind() const { return kind_of(spec_); }
  std::size_t size() const { return length_; }
  std::size_t window() const { return window_; }

  /// Circle position, point, or leading symbol of state n.
  std::uint64_t state(std::size_t n) const;
  /// Symbols of state n (shifts only), `len` <= window().
  std::span<const std::uint64_t> symbols(std::size_t n, std::size_t len) const;

  const std::vector<std::uint64_t>& raw() const { return data_; }

 private:
  SystemSpec spec_;
  std::vector<std::uint64_t> data_;
  std::size_t length_;
  std::size_t window_;
};

/// Builds the orbit of length `length` from the initial datum `start`.
///
/// Rotation: start is the 64-bit circle position of x. Permutation: start is
/// the point x. Shifts: the seed in the spec fixes a point x_0 of the sequence
/// space and start counts shift steps, x = T^start x_0.
///
/// Symbol streams are drawn from std::mt19937_64 seeded with the spec's seed;
/// each symbol consumes one raw 64-bit output u and is the first j with
/// u < ceil(F_j * 2^64), F_j the cumulative rational distribution.
Orbit generate_orbit(const SystemSpec& spec, std::uint64_t start, std::size_t length,
                     std::size_t window = 1);

/// Wraps an explicit symbol stream as the orbit of a shift system. The stream
/// must hold at least length + window - 1 symbols from the spec's alphabet.
Orbit orbit_from_symbols(const SystemSpec& spec, std::vector<std::uint64_t> symbols,
                         std::size_t length, std::size_t window = 1);

/// x -> exp(2 pi i k x) on the circle.
struct Character {
  std::int64_t k = 1;
};
/// 1 if the current symbol (or point) lies in the set.
struct SymbolIndicator {
  std::vector<std::uint64_t> symbols;
};
/// 1 if the next |word| symbols equal word.
struct CylinderIndicator {
  std::vector<std::uint64_t> word;
};
struct Constant {
  Rational value = 1;
};
/// Real function of the current symbol with exact mean zero.
struct MeanZeroSymbol {
  std::vector<Rational> table;
};

using Observable = std::variant<Character, SymbolIndicator, CylinderIndicator, Constant, MeanZeroSymbol>;

std::string describe(const Observable& f);

/// Throws std::invalid_argument if `f` is not defined on `spec` (wrong system
/// family, symbol out of range, table mean not exactly zero, ...).
void validate(const Observable& f, const SystemSpec& spec);

/// Exact integral of f with respect to the invariant measure of spec.
Rational exact_integral(const Observable& f, const SystemSpec& spec);

/// Sup-norm bound B with |f| <= B everywhere.
double bound(const Observable& f);

/// f evaluated at state n of the orbit.
Complex evaluate(const Observable& f, const Orbit& orbit, std::size_t n);

struct SampleOrigin {
  SystemSpec system;
  Observable observable;
  std::size_t offset = 0;
};

/// A finite sequence a_1..a_L with a modulus bound.
class SampledSequence {
 public:
  SampledSequence(std::vector<Complex> values, double bound,
                  std::optional<SampleOrigin> origin = std::nullopt);

  std::size_t size() const { return values_.size(); }
  double bound() const { return bound_; }
  /// 1-based access, a_n for 1 <= n <= size().
  const Complex& at(std::size_t n) const { return values_[n - 1]; }
  /// 0-based storage: values()[j] == at(j + 1).
  std::span<const Complex> values() const { return values_; }
  const std::optional<SampleOrigin>& origin() const { return origin_; }

  SampledSequence scaled(Complex factor) const;
  SampledSequence conjugated() const;

 private:
  std::vector<Complex> values_;
  double bound_;
  std::optional<SampleOrigin> origin_;
};

/// a_j = f(T^{offset + j - 1} x) for j = 1..length, so offset = 1 yields the
/// usual a_n = f(T^n x). Requires offset + length <= orbit.size().
SampledSequence sample_observable(const Orbit& orbit, const Observable& f, std::size_t offset,
                                  std::size_t length);

}  // namespace ergocube
