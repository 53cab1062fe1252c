#include "ergocube/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ergocube {

namespace {

void check_permutation(const std::vector<std::size_t>& pi, std::size_t K) {
  if (pi.size() != K) throw std::invalid_argument("finite system: permutations must share the ground set");
  std::vector<bool> seen(K, false);
  for (auto v : pi) {
    if (v >= K) throw std::invalid_argument("finite system: permutation index out of range");
    if (seen[v]) throw std::invalid_argument("finite system: permutation is not a bijection");
    seen[v] = true;
  }
}

void decompose(const std::vector<std::size_t>& pi, std::vector<std::size_t>& cycle_of,
               std::vector<std::vector<std::size_t>>& cycles) {
  const std::size_t K = pi.size();
  cycle_of.assign(K, K);
  for (std::size_t x = 0; x < K; ++x) {
    if (cycle_of[x] != K) continue;
    std::vector<std::size_t> cycle;
    for (std::size_t y = x; cycle_of[y] == K; y = pi[y]) {
      cycle_of[y] = cycles.size();
      cycle.push_back(y);
    }
    cycles.push_back(std::move(cycle));
  }
}

void check_which(int which) {
  if (which != 1 && which != 2) throw std::invalid_argument("finite system: which must be 1 or 2");
}

bool is_indicator(const Observable& f) {
  return std::holds_alternative<SymbolIndicator>(f) || std::holds_alternative<CylinderIndicator>(f);
}

}  // namespace

FiniteSystem::FiniteSystem(std::vector<std::size_t> pi1, std::vector<std::size_t> pi2)
    : pi1_(std::move(pi1)), pi2_(std::move(pi2)) {
  if (pi1_.empty()) throw std::invalid_argument("finite system: empty ground set");
  check_permutation(pi1_, pi1_.size());
  check_permutation(pi2_, pi1_.size());
  decompose(pi1_, cycle_of1_, cycles1_);
  decompose(pi2_, cycle_of2_, cycles2_);
}

const std::vector<std::size_t>& FiniteSystem::pi(int which) const {
  check_which(which);
  return which == 1 ? pi1_ : pi2_;
}

const std::vector<std::size_t>& FiniteSystem::cycle_of(int which) const {
  check_which(which);
  return which == 1 ? cycle_of1_ : cycle_of2_;
}

const std::vector<std::vector<std::size_t>>& FiniteSystem::cycles(int which) const {
  check_which(which);
  return which == 1 ? cycles1_ : cycles2_;
}

std::size_t FiniteSystem::max_cycle_length(int which) const {
  std::size_t best = 0;
  for (const auto& c : cycles(which)) best = std::max(best, c.size());
  return best;
}

std::uint64_t FiniteSystem::joint_period() const {
  std::uint64_t period = 1;
  for (int which : {1, 2}) {
    for (const auto& c : cycles(which)) period = std::lcm(period, static_cast<std::uint64_t>(c.size()));
  }
  return period;
}

std::vector<bool> subset_mask(const FiniteSystem& system, std::span<const std::size_t> A) {
  std::vector<bool> mask(system.size(), false);
  for (auto x : A) {
    if (x >= system.size()) throw std::invalid_argument("subset: point outside the ground set");
    mask[x] = true;
  }
  return mask;
}

Rational measure_of(const FiniteSystem& system, std::span<const std::size_t> A) {
  const auto mask = subset_mask(system, A);
  return Rational(static_cast<long long>(std::count(mask.begin(), mask.end(), true)),
                  static_cast<long long>(system.size()));
}

ConditionalExpectation cond_exp(const FiniteSystem& system, int which, std::span<const Rational> f) {
  if (f.size() != system.size()) throw std::invalid_argument("cond_exp: function size must equal K");
  const auto& cycles = system.cycles(which);
  ConditionalExpectation out;
  out.values.resize(system.size());
  for (const auto& cycle : cycles) {
    Rational mean = 0;
    for (auto x : cycle) mean += f[x];
    mean /= static_cast<long long>(cycle.size());
    for (auto x : cycle) out.values[x] = mean;
  }
  return out;
}

ConditionalExpectation cond_exp(const FiniteSystem& system, int which, std::span<const std::size_t> A) {
  const auto mask = subset_mask(system, A);
  std::vector<Rational> f(system.size());
  for (std::size_t x = 0; x < f.size(); ++x) f[x] = mask[x] ? 1 : 0;
  return cond_exp(system, which, f);
}

Rational cor1_limit_exact(const FiniteSystem& system, std::span<const std::size_t> A) {
  const auto mask = subset_mask(system, A);
  const auto e1 = cond_exp(system, 1, A);
  const auto e2 = cond_exp(system, 2, A);
  Rational total = 0;
  for (std::size_t x = 0; x < system.size(); ++x) {
    if (mask[x]) total += e1.values[x] * e2.values[x];
  }
  return total / static_cast<long long>(system.size());
}

Rational cor1_average_empirical(const FiniteSystem& system, std::span<const std::size_t> A, std::uint64_t N) {
  if (N == 0) throw std::invalid_argument("cor1_average_empirical: N must be >= 1");
  const auto mask = subset_mask(system, A);
  const auto& pi1 = system.pi(1);
  const auto& pi2 = system.pi(2);
  BigInt count = 0;
  for (std::size_t x = 0; x < system.size(); ++x) {
    if (!mask[x]) continue;
    // hits along the pi2-orbit of x over one period: prefix[j] = #{0 <= i < j : 1_A(pi2^i x)}
    std::vector<std::uint64_t> prefix{0};
    for (std::size_t y = x;;) {
      prefix.push_back(prefix.back() + (mask[y] ? 1 : 0));
      y = pi2[y];
      if (y == x) break;
    }
    const std::uint64_t period = prefix.size() - 1;
    const std::uint64_t per_period = prefix.back();
    // #{0 <= i < h : 1_A(pi2^i x)}
    auto hits_before = [&](std::uint64_t h) {
      return static_cast<unsigned __int128>(h / period) * per_period + prefix[h % period];
    };
    unsigned __int128 local = 0;
    std::size_t y = pi1[x];  // pi1^n x, n = 1
    for (std::uint64_t n = 1; n <= N; ++n, y = pi1[y]) {
      if (mask[y]) local += hits_before(n + N + 1) - hits_before(n + 1);
    }
    count += BigInt(static_cast<std::uint64_t>(local >> 64)) << 64;
    count += BigInt(static_cast<std::uint64_t>(local));
  }
  const BigInt den = BigInt(N) * N * system.size();
  return Rational(count, den);
}

Rational cor1_average_bruteforce(const FiniteSystem& system, std::span<const std::size_t> A, std::uint64_t N) {
  if (N == 0) throw std::invalid_argument("cor1_average_bruteforce: N must be >= 1");
  const auto mask = subset_mask(system, A);
  const auto& pi1 = system.pi(1);
  const auto& pi2 = system.pi(2);
  auto power = [](const std::vector<std::size_t>& pi, std::size_t x, std::uint64_t e) {
    for (std::uint64_t i = 0; i < e; ++i) x = pi[x];
    return x;
  };
  std::uint64_t count = 0;
  for (std::uint64_t n = 1; n <= N; ++n) {
    for (std::uint64_t m = 1; m <= N; ++m) {
      for (std::size_t x = 0; x < system.size(); ++x) {
        if (mask[x] && mask[power(pi1, x, n)] && mask[power(pi2, x, n + m)]) ++count;
      }
    }
  }
  return Rational(BigInt(count), BigInt(N) * N * system.size());
}

bool refines(const FiniteSystem& system, int fine, int coarse) {
  const auto& coarse_of = system.cycle_of(coarse);
  for (const auto& cycle : system.cycles(fine)) {
    for (auto x : cycle) {
      if (coarse_of[x] != coarse_of[cycle.front()]) return false;
    }
  }
  return true;
}

KhintchineReport khintchine_check(const FiniteSystem& system, std::span<const std::size_t> A) {
  KhintchineReport r;
  r.limit = cor1_limit_exact(system, A);
  const Rational mu = measure_of(system, A);
  r.bound = mu * mu * mu;
  // I_1 subset I_2 iff the pi2-cycles refine the pi1-cycles, and vice versa.
  r.nested = refines(system, 2, 1) || refines(system, 1, 2);
  if (r.nested) r.holds_when_nested = r.limit >= r.bound;
  return r;
}

FiniteSystem random_finite_system(rng::Engine& engine, std::size_t K, bool pi1_single_cycle) {
  if (K == 0) throw std::invalid_argument("random_finite_system: K must be >= 1");
  auto shuffled = [&] {
    std::vector<std::size_t> v(K);
    std::iota(v.begin(), v.end(), 0);
    for (std::size_t i = K; i-- > 1;) std::swap(v[i], v[rng::uniform_index(engine, i + 1)]);
    return v;
  };
  std::vector<std::size_t> pi1;
  if (pi1_single_cycle) {
    const auto order = shuffled();
    pi1.resize(K);
    for (std::size_t i = 0; i < K; ++i) pi1[order[i]] = order[(i + 1) % K];
  } else {
    pi1 = shuffled();
  }
  auto pi2 = shuffled();
  return FiniteSystem(std::move(pi1), std::move(pi2));
}

std::vector<std::size_t> random_subset(rng::Engine& engine, std::size_t K) {
  std::vector<std::size_t> A;
  for (std::size_t x = 0; x < K; ++x) {
    if (engine() >> 63) A.push_back(x);
  }
  return A;
}

Rational product_integral_limit(std::span<const IntegralTerm> terms) {
  Rational product = 1;
  for (const auto& t : terms) product *= exact_integral(t.observable, t.system);
  return product;
}

GapReport syndeticity_scan(std::span<const Orbit> orbits, std::span<const Observable> indicators, double lambda,
                           std::size_t window) {
  const std::size_t k = orbits.size();
  if (k != 2 && k != 3) throw std::invalid_argument("syndeticity_scan: k must be 2 or 3");
  if (indicators.size() != k) throw std::invalid_argument("syndeticity_scan: one indicator per system");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("syndeticity_scan: lambda must lie in [0,1)");
  const std::size_t limit = k == 2 ? max_scan_window2 : max_scan_window3;
  if (window == 0 || window > limit) {
    throw std::invalid_argument("syndeticity_scan: window must be in [1, " + std::to_string(limit) + "]");
  }
  for (const auto& f : indicators) {
    if (!is_indicator(f)) throw std::invalid_argument("syndeticity_scan: observables must be indicators");
  }
  const Rational mu = exact_integral(indicators[0], orbits[0].spec());
  if (mu == 0) throw std::invalid_argument("syndeticity_scan: mu(A) = 0");

  const std::size_t reach = k * window;
  std::vector<std::vector<char>> factor(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (orbits[i].size() < reach + 1) throw std::invalid_argument("syndeticity_scan: orbit too short");
    const auto seq = sample_observable(orbits[i], indicators[i], 0, reach + 1);
    factor[i].resize(reach + 1);
    for (std::size_t s = 0; s <= reach; ++s) factor[i][s] = seq.values()[s].real() != 0.0;
  }

  GapReport r;
  r.window = window;
  r.dimension = k;
  r.threshold = lambda * std::pow(to_double(mu), static_cast<double>(1u << k));
  const double lead = factor[0][0] ? 1.0 : 0.0;
  const std::size_t W = window;

  // Row-major hit grid over [1,W]^k, coordinate 0 slowest.
  std::size_t cells = 1;
  for (std::size_t i = 0; i < k; ++i) cells *= W;
  std::vector<char> hit(cells, 0);
  std::vector<std::size_t> idx(k, 1);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    std::size_t rem = cell;
    for (std::size_t i = k; i-- > 0;) {
      idx[i] = rem % W + 1;
      rem /= W;
    }
    double product = lead;
    std::size_t partial = 0;
    for (std::size_t i = 0; i < k && product != 0.0; ++i) {
      partial += idx[i];
      product *= factor[i][partial] ? 1.0 : 0.0;
    }
    if (product > r.threshold) {
      hit[cell] = 1;
      ++r.hits;
    }
  }
  r.nonempty = r.hits > 0;

  // Axis-parallel lines.
  r.max_gap.assign(k, 0);
  r.empty_lines.assign(k, 0);
  std::vector<std::size_t> stride(k, 1);
  for (std::size_t i = k - 1; i-- > 0;) stride[i] = stride[i + 1] * W;
  for (std::size_t axis = 0; axis < k; ++axis) {
    bool any_nonempty = false;
    for (std::size_t cell = 0; cell < cells; ++cell) {
      if ((cell / stride[axis]) % W != 0) continue;  // line starts where the axis coordinate is 1
      std::size_t run = 0, longest = 0;
      bool any = false;
      for (std::size_t j = 0; j < W; ++j) {
        if (hit[cell + j * stride[axis]]) {
          any = true;
          run = 0;
        } else {
          longest = std::max(longest, ++run);
        }
      }
      if (any) {
        any_nonempty = true;
        r.max_gap[axis] = std::max(r.max_gap[axis], longest);
      } else {
        ++r.empty_lines[axis];
      }
    }
    if (!any_nonempty) r.max_gap[axis] = W;
  }
  r.max_gap_all = *std::max_element(r.max_gap.begin(), r.max_gap.end());

  // Largest cube of misses: side[c] = 1 + min over the 2^k - 1 lower neighbours.
  std::vector<std::uint16_t> side(cells, 0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    if (hit[cell]) continue;
    bool on_border = false;
    for (std::size_t i = 0; i < k; ++i) on_border |= (cell / stride[i]) % W == 0;
    std::size_t s = 1;
    if (!on_border) {
      std::size_t best = W;
      for (std::size_t mask = 1; mask < (1u << k); ++mask) {
        std::size_t nb = cell;
        for (std::size_t i = 0; i < k; ++i) {
          if (mask & (1u << i)) nb -= stride[i];
        }
        best = std::min<std::size_t>(best, side[nb]);
      }
      s = best + 1;
    }
    side[cell] = static_cast<std::uint16_t>(s);
    r.largest_hole = std::max(r.largest_hole, s);
  }
  return r;
}

GapReport syndeticity_scan(std::span<const SystemSpec> systems, std::span<const Observable> indicators,
                           std::span<const std::uint64_t> starts, double lambda, std::size_t window) {
  const std::size_t k = systems.size();
  if (k != 2 && k != 3) throw std::invalid_argument("syndeticity_scan: k must be 2 or 3");
  if (starts.size() != k) throw std::invalid_argument("syndeticity_scan: one start per system");
  std::size_t word = 1;
  for (const auto& f : indicators) {
    if (const auto* c = std::get_if<CylinderIndicator>(&f)) word = std::max(word, c->word.size());
  }
  std::vector<Orbit> orbits;
  orbits.reserve(k);
  for (std::size_t i = 0; i < k; ++i) orbits.push_back(generate_orbit(systems[i], starts[i], k * window + 1, word));
  return syndeticity_scan(orbits, indicators, lambda, window);
}

}  // namespace ergocube
