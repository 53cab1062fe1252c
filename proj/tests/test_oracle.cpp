#include "doctest.h"

#include "ergocube/oracle.hpp"

#include <numeric>

using namespace ergocube;

namespace {

std::vector<std::size_t> identity(std::size_t K) {
  std::vector<std::size_t> v(K);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::vector<std::size_t> rotation_cycle(std::size_t K) {
  std::vector<std::size_t> v(K);
  for (std::size_t i = 0; i < K; ++i) v[i] = (i + 1) % K;
  return v;
}

const std::vector<std::size_t> swaps{1, 0, 3, 2};  // (0 1)(2 3)

Rational integral(const FiniteSystem& s, const ConditionalExpectation& e) {
  Rational total = 0;
  for (const auto& v : e.values) total += v;
  return total / static_cast<long long>(s.size());
}

}  // namespace

TEST_CASE("cond_exp: identity keeps the indicator") {
  const FiniteSystem sys(identity(5), identity(5));
  const std::vector<std::size_t> A{1, 3};
  const auto e = cond_exp(sys, 1, A);
  for (std::size_t x = 0; x < 5; ++x) CHECK(e.values[x] == ((x == 1 || x == 3) ? 1 : 0));
}

TEST_CASE("cond_exp: a single cycle averages to mu(A)") {
  const FiniteSystem sys(rotation_cycle(7), identity(7));
  const std::vector<std::size_t> A{0, 2, 5};
  for (const auto& v : cond_exp(sys, 1, A).values) CHECK(v == Rational(3, 7));
}

TEST_CASE("cond_exp: two swaps") {
  const FiniteSystem sys(swaps, identity(4));
  const std::vector<std::size_t> A{0, 2};
  for (const auto& v : cond_exp(sys, 1, A).values) CHECK(v == Rational(1, 2));
}

TEST_CASE("cond_exp: input validation") {
  CHECK_THROWS_AS(FiniteSystem({0, 0}, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteSystem({0, 1}, {0, 1, 2}), std::invalid_argument);
  const FiniteSystem sys(swaps, identity(4));
  const std::vector<std::size_t> bad{4};
  CHECK_THROWS_AS(cond_exp(sys, 1, bad), std::invalid_argument);
  const std::vector<std::size_t> A{0};
  CHECK_THROWS_AS(cond_exp(sys, 3, A), std::invalid_argument);
}

TEST_CASE("property: cond_exp is an idempotent, measure preserving projection") {
  auto engine = rng::make_engine({31});
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t K = 1 + rng::uniform_index(engine, 12);
    const auto sys = random_finite_system(engine, K, false);
    const auto A = random_subset(engine, K);
    for (int which : {1, 2}) {
      const auto once = cond_exp(sys, which, A);
      const auto twice = cond_exp(sys, which, std::span<const Rational>(once.values));
      CHECK(once.values == twice.values);
      CHECK(integral(sys, once) == measure_of(sys, A));
      for (const auto& cycle : sys.cycles(which)) {
        for (auto x : cycle) CHECK(once.values[x] == once.values[cycle.front()]);
      }
    }
  }
}

TEST_CASE("cor1 limit: closed forms") {
  const std::vector<std::size_t> A{0, 2};
  CHECK(cor1_limit_exact(FiniteSystem(swaps, identity(4)), A) == Rational(1, 4));
  CHECK(cor1_limit_exact(FiniteSystem(identity(4), identity(4)), A) == Rational(1, 2));
  const std::vector<std::size_t> single{0};
  const FiniteSystem ergodic(rotation_cycle(4), identity(4));
  const Rational limit = cor1_limit_exact(ergodic, single);
  CHECK(limit == Rational(1, 16));
  CHECK(limit >= Rational(1, 64));
}

TEST_CASE("cor1 limit: single-cycle pi1 factorises") {
  auto engine = rng::make_engine({32});
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t K = 1 + rng::uniform_index(engine, 12);
    const auto sys = random_finite_system(engine, K, true);
    const auto A = random_subset(engine, K);
    const auto mask = subset_mask(sys, A);
    const auto e2 = cond_exp(sys, 2, A);
    Rational direct = 0;
    for (std::size_t x = 0; x < K; ++x) {
      if (mask[x]) direct += e2.values[x];
    }
    direct = measure_of(sys, A) * direct / static_cast<long long>(K);
    CHECK(cor1_limit_exact(sys, A) == direct);
  }
}

TEST_CASE("cor1 empirical: closed forms") {
  const std::vector<std::size_t> A{0, 2};
  const FiniteSystem trivial(identity(4), identity(4));
  for (std::uint64_t N : {1u, 2u, 17u, 100u}) CHECK(cor1_average_empirical(trivial, A, N) == Rational(1, 2));
  const FiniteSystem sys(swaps, identity(4));
  CHECK(cor1_average_empirical(sys, A, 100) == Rational(1, 4));
  const Rational odd = cor1_average_empirical(sys, A, 99);
  CHECK(abs(odd - Rational(1, 4)) <= Rational(10, 99));
  CHECK_THROWS_AS(cor1_average_empirical(sys, A, 0), std::invalid_argument);
}

TEST_CASE("property: periodic counting matches the brute-force count") {
  auto engine = rng::make_engine({33});
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t K = 1 + rng::uniform_index(engine, 8);
    const auto sys = random_finite_system(engine, K, false);
    const auto A = random_subset(engine, K);
    const std::uint64_t N = 1 + rng::uniform_index(engine, 25);
    CHECK(cor1_average_empirical(sys, A, N) == cor1_average_bruteforce(sys, A, N));
  }
}

TEST_CASE("property: empirical averages approach the limit at rate L1 L2 / N") {
  auto engine = rng::make_engine({34});
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t K = 1 + rng::uniform_index(engine, 12);
    const auto sys = random_finite_system(engine, K, false);
    const auto A = random_subset(engine, K);
    const Rational limit = cor1_limit_exact(sys, A);
    const auto L = static_cast<long long>(2 * sys.max_cycle_length(1) * sys.max_cycle_length(2));
    for (std::uint64_t N : {10u, 97u, 1000u}) {
      CHECK(abs(cor1_average_empirical(sys, A, N) - limit) <= Rational(L, static_cast<long long>(N)));
    }
    CHECK(cor1_average_empirical(sys, A, sys.joint_period()) == limit);
  }
}

TEST_CASE("khintchine: single-cycle pi1 is nested and the bound holds") {
  auto engine = rng::make_engine({35});
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t K = 1 + rng::uniform_index(engine, 12);
    const auto sys = random_finite_system(engine, K, true);
    const auto A = random_subset(engine, K);
    const auto r = khintchine_check(sys, A);
    CHECK(r.nested);
    REQUIRE(r.holds_when_nested.has_value());
    CHECK(*r.holds_when_nested);
    CHECK(r.limit >= r.bound);
  }
}

TEST_CASE("khintchine: empty and full sets") {
  const FiniteSystem sys(rotation_cycle(6), {1, 0, 2, 3, 5, 4});
  const auto none = khintchine_check(sys, std::vector<std::size_t>{});
  CHECK(none.limit == 0);
  CHECK(none.bound == 0);
  const auto all = khintchine_check(sys, identity(6));
  CHECK(all.limit == 1);
  CHECK(all.bound == 1);
  CHECK(*all.holds_when_nested);
}

TEST_CASE("khintchine: non-nested partitions are not asserted") {
  // pi1 cycles {0,1},{2,3}; pi2 cycles {0},{1,2},{3}.
  const FiniteSystem sys(swaps, {0, 2, 1, 3});
  CHECK_FALSE(refines(sys, 1, 2));
  CHECK_FALSE(refines(sys, 2, 1));
  const auto r = khintchine_check(sys, std::vector<std::size_t>{1});
  CHECK_FALSE(r.nested);
  CHECK_FALSE(r.holds_when_nested.has_value());
  // E1 = E2 = 1/2 on the point 1.
  CHECK(r.limit == Rational(1, 16));
  CHECK(r.bound == Rational(1, 64));
}

TEST_CASE("khintchine: nesting either way is detected") {
  // pi2 = (0 1 2 3) is coarser than pi1 = (0 1)(2 3).
  const FiniteSystem sys(swaps, rotation_cycle(4));
  CHECK(refines(sys, 1, 2));
  CHECK_FALSE(refines(sys, 2, 1));
  CHECK(khintchine_check(sys, std::vector<std::size_t>{0, 1}).nested);
}

TEST_CASE("product integral limit") {
  const BernoulliShift coin{{Rational(1, 2), Rational(1, 2)}, 0};
  const std::vector<IntegralTerm> with_zero{{SymbolIndicator{{0}}, coin},
                                            {MeanZeroSymbol{{Rational(1), Rational(-1)}}, coin},
                                            {Constant{Rational(1)}, coin}};
  CHECK(product_integral_limit(with_zero) == 0);
  const std::vector<IntegralTerm> ones(3, IntegralTerm{Constant{Rational(1)}, coin});
  CHECK(product_integral_limit(ones) == 1);
  const std::vector<IntegralTerm> halves(3, IntegralTerm{SymbolIndicator{{0}}, coin});
  CHECK(product_integral_limit(halves) == Rational(1, 8));
  const std::vector<IntegralTerm> bad{{Character{1}, coin}};
  CHECK_THROWS_AS(product_integral_limit(bad), std::invalid_argument);
}

TEST_CASE("syndeticity scan: full space hits everywhere") {
  const BernoulliShift coin{{Rational(1, 2), Rational(1, 2)}, 4};
  const std::vector<SystemSpec> systems{coin, coin};
  const std::vector<Observable> A(2, SymbolIndicator{{0, 1}});
  const std::vector<std::uint64_t> starts{0, 0};
  const auto r = syndeticity_scan(systems, A, starts, 0.5, 64);
  CHECK(r.hits == 64u * 64u);
  CHECK(r.nonempty);
  CHECK(r.max_gap_all == 0);
  CHECK(r.largest_hole == 0);
}

TEST_CASE("syndeticity scan: a start outside A gives the empty set") {
  const BernoulliShift coin{{Rational(1, 2), Rational(1, 2)}, 4};
  const auto orbit = generate_orbit(coin, 0, 10);
  std::uint64_t start = 0;
  while (orbit.state(start) == 0) ++start;
  const std::vector<SystemSpec> systems{coin, coin};
  const std::vector<Observable> A(2, SymbolIndicator{{0}});
  const std::vector<std::uint64_t> starts{start, start};
  const auto r = syndeticity_scan(systems, A, starts, 0.0, 32);
  CHECK_FALSE(r.nonempty);
  CHECK(r.hits == 0);
  CHECK(r.max_gap_all == 32);
  CHECK(r.largest_hole == 32);
  CHECK(r.empty_lines[0] == 32);
}

TEST_CASE("syndeticity scan: hits and gaps agree with a direct scan") {
  const BernoulliShift coin{{Rational(1, 2), Rational(1, 2)}, 17};
  const std::size_t W = 40;
  const auto orbit = generate_orbit(coin, 0, 2 * W + 1);
  std::uint64_t start = 0;
  while (orbit.state(start) != 0) ++start;
  const std::vector<SystemSpec> systems{coin, coin};
  const std::vector<Observable> A(2, SymbolIndicator{{0}});
  const std::vector<std::uint64_t> starts{start, start};
  const auto r = syndeticity_scan(systems, A, starts, 0.3, W);

  const auto o = generate_orbit(coin, start, 2 * W + 1);
  auto in_A = [&](std::size_t n) { return o.state(n) == 0; };
  std::uint64_t hits = 0;
  std::size_t gap_axis0 = 0;
  for (std::size_t n2 = 1; n2 <= W; ++n2) {
    std::size_t run = 0;
    bool any = false;
    std::size_t longest = 0;
    for (std::size_t n1 = 1; n1 <= W; ++n1) {
      const bool h = in_A(0) && in_A(n1) && in_A(n1 + n2);
      hits += h;
      any |= h;
      run = h ? 0 : run + 1;
      longest = std::max(longest, run);
    }
    if (any) gap_axis0 = std::max(gap_axis0, longest);
  }
  CHECK(r.hits == hits);
  CHECK(r.max_gap[0] == gap_axis0);
  CHECK(r.threshold == doctest::Approx(0.3 / 16.0));
}

TEST_CASE("syndeticity scan: relabelling symbols consistently changes nothing") {
  const BernoulliShift spec{{Rational(1, 4), Rational(1, 4), Rational(1, 2)}, 0};
  const std::size_t W = 48;
  const auto base = generate_orbit(BernoulliShift{spec.probabilities, 99}, 0, 2 * W + 1);
  std::vector<std::uint64_t> relabelled(base.raw().size());
  const std::uint64_t sigma[] = {2, 0, 1};  // symbol s becomes sigma[s]
  for (std::size_t i = 0; i < relabelled.size(); ++i) relabelled[i] = sigma[base.raw()[i]];
  const BernoulliShift permuted{{Rational(1, 4), Rational(1, 2), Rational(1, 4)}, 0};

  const std::vector<Orbit> first{base, base};
  const auto other = orbit_from_symbols(permuted, relabelled, 2 * W + 1);
  const std::vector<Orbit> second{other, other};
  const std::vector<Observable> A1(2, SymbolIndicator{{0, 2}});
  const std::vector<Observable> A2(2, SymbolIndicator{{2, 1}});
  const auto r1 = syndeticity_scan(first, A1, 0.5, W);
  const auto r2 = syndeticity_scan(second, A2, 0.5, W);
  CHECK(r1.hits == r2.hits);
  CHECK(r1.max_gap == r2.max_gap);
  CHECK(r1.empty_lines == r2.empty_lines);
  CHECK(r1.largest_hole == r2.largest_hole);
  CHECK(r1.threshold == r2.threshold);
}

TEST_CASE("syndeticity scan: three dimensions") {
  const BernoulliShift coin{{Rational(1, 2), Rational(1, 2)}, 21};
  const std::vector<SystemSpec> systems{coin, coin, coin};
  const std::vector<Observable> A(3, SymbolIndicator{{0, 1}});
  const std::vector<std::uint64_t> starts{0, 0, 0};
  const auto r = syndeticity_scan(systems, A, starts, 0.0, 16);
  CHECK(r.hits == 16u * 16u * 16u);
  CHECK(r.max_gap.size() == 3);
}

TEST_CASE("syndeticity scan: input validation") {
  const BernoulliShift coin{{Rational(1, 2), Rational(1, 2)}, 0};
  const BernoulliShift degenerate{{Rational(1), Rational(0)}, 0};
  const std::vector<std::uint64_t> starts{0, 0};
  const std::vector<Observable> A(2, SymbolIndicator{{1}});
  CHECK_THROWS_AS(syndeticity_scan(std::vector<SystemSpec>{degenerate, degenerate}, A, starts, 0.5, 8),
                  std::invalid_argument);
  CHECK_THROWS_AS(syndeticity_scan(std::vector<SystemSpec>{coin, coin}, A, starts, 1.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(syndeticity_scan(std::vector<SystemSpec>{coin, coin}, A, starts, 0.5, 4097), std::invalid_argument);
  const std::vector<Observable> notind(2, Constant{Rational(1)});
  CHECK_THROWS_AS(syndeticity_scan(std::vector<SystemSpec>{coin, coin}, notind, starts, 0.5, 8), std::invalid_argument);
}
