#pragma once

// Exact reference values: product-of-integrals limits, conditional
// expectations on finite permutation systems, the two-transformation
// recurrence limit and its cube bound, and return-set window scans.

#include "ergocube/dynsys.hpp"
#include "ergocube/random.hpp"

#include <optional>
#include <span>
#include <vector>

namespace ergocube {

/// Two permutations of {0..K-1} with uniform measure. The invariant
/// sigma-algebra of each permutation is generated by its cycles.
class FiniteSystem {
 public:
  FiniteSystem(std::vector<std::size_t> pi1, std::vector<std::size_t> pi2);

  std::size_t size() const { return pi1_.size(); }
  const std::vector<std::size_t>& pi(int which) const;
  /// Cycle index of every point under pi(which).
  const std::vector<std::size_t>& cycle_of(int which) const;
  const std::vector<std::vector<std::size_t>>& cycles(int which) const;
  std::size_t max_cycle_length(int which) const;
  /// lcm of all cycle lengths of both permutations.
  std::uint64_t joint_period() const;

 private:
  std::vector<std::size_t> pi1_, pi2_;
  std::vector<std::size_t> cycle_of1_, cycle_of2_;
  std::vector<std::vector<std::size_t>> cycles1_, cycles2_;
};

/// Membership vector of A, validated against the ground set.
std::vector<bool> subset_mask(const FiniteSystem& system, std::span<const std::size_t> A);
Rational measure_of(const FiniteSystem& system, std::span<const std::size_t> A);

/// Per-point E(1_A | I_which): |A cap cycle| / |cycle| on each cycle.
struct ConditionalExpectation {
  std::vector<Rational> values;
};

ConditionalExpectation cond_exp(const FiniteSystem& system, int which, std::span<const std::size_t> A);
/// Projects an arbitrary rational function onto the cycle sigma-algebra.
ConditionalExpectation cond_exp(const FiniteSystem& system, int which, std::span<const Rational> f);

/// (1/K) sum_{x in A} E(1_A|I_1)(x) E(1_A|I_2)(x).
Rational cor1_limit_exact(const FiniteSystem& system, std::span<const std::size_t> A);

/// N^-2 sum_{n,m=1}^N mu(A cap T1^-n A cap T2^-(n+m) A), counted exactly in
/// O(K N + K^2) using per-point periodic prefix counts along pi2-cycles.
Rational cor1_average_empirical(const FiniteSystem& system, std::span<const std::size_t> A, std::uint64_t N);

/// Direct O(N^2 K) count of the same average (reference for small N).
Rational cor1_average_bruteforce(const FiniteSystem& system, std::span<const std::size_t> A, std::uint64_t N);

struct KhintchineReport {
  Rational limit;
  Rational bound;  // mu(A)^3
  bool nested = false;
  /// limit >= bound, evaluated only when the cycle partitions are nested.
  std::optional<bool> holds_when_nested;
};

/// True if every cycle of `fine` lies inside one cycle of `coarse`.
bool refines(const FiniteSystem& system, int fine, int coarse);

KhintchineReport khintchine_check(const FiniteSystem& system, std::span<const std::size_t> A);

/// Random system with K points. pi1 is a single K-cycle when requested.
FiniteSystem random_finite_system(rng::Engine& engine, std::size_t K, bool pi1_single_cycle);
/// Random subset; each point included with probability 1/2.
std::vector<std::size_t> random_subset(rng::Engine& engine, std::size_t K);

struct IntegralTerm {
  Observable observable;
  SystemSpec system;
};

/// prod_i integral f_i d(mu_i), exact.
Rational product_integral_limit(std::span<const IntegralTerm> terms);

/// Window view of the return set
///   { (n_1..n_k) in [1,W]^k : 1_A(x) 1_A(T_1^{n_1} x) ... 1_A(T_k^{n_1+...+n_k} x)
///                              > lambda mu(A)^(2^k) }.
///
/// max_gap[i] is the longest run of consecutive misses (window edges count as
/// run ends) along lines parallel to axis i, over lines holding at least one
/// hit; lines with no hit are tallied in empty_lines[i]. largest_hole is the
/// side of the largest axis-aligned cube of misses.
struct GapReport {
  std::size_t window = 0;
  std::size_t dimension = 0;
  std::uint64_t hits = 0;
  bool nonempty = false;
  std::vector<std::size_t> max_gap;
  std::size_t max_gap_all = 0;
  std::vector<std::uint64_t> empty_lines;
  std::size_t largest_hole = 0;
  double threshold = 0.0;
};

inline constexpr std::size_t max_scan_window2 = 4096;
inline constexpr std::size_t max_scan_window3 = 256;

/// One system, indicator and start per factor index i = 1..k; the leading
/// factor 1_A(x) is the first indicator at the first start. mu(A) is the
/// exact integral of the first indicator. k must be 2 or 3.
GapReport syndeticity_scan(std::span<const SystemSpec> systems, std::span<const Observable> indicators,
                           std::span<const std::uint64_t> starts, double lambda, std::size_t window);

/// Same scan over prebuilt orbits (each of length >= k * window + 1).
GapReport syndeticity_scan(std::span<const Orbit> orbits, std::span<const Observable> indicators, double lambda,
                           std::size_t window);

}  // namespace ergocube
