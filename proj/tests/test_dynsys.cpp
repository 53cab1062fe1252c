#include "doctest.h"

#include "ergocube/dynsys.hpp"
#include "ergocube/random.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace ergocube;

namespace {

BernoulliShift fair_coin(std::uint64_t seed) { return BernoulliShift{{Rational(1, 2), Rational(1, 2)}, seed}; }

}  // namespace

TEST_CASE("rotation by one half has period two") {
  const auto orbit = generate_orbit(Rotation{std::uint64_t{1} << 63}, 0, 4);
  REQUIRE(orbit.size() == 4);
  CHECK(orbit.state(0) == 0);
  CHECK(orbit.state(1) == std::uint64_t{1} << 63);
  CHECK(orbit.state(2) == 0);
  CHECK(orbit.state(3) == std::uint64_t{1} << 63);
}

TEST_CASE("permutation orbit follows the two-cycle") {
  const auto orbit = generate_orbit(FinitePermutation{{1, 0, 3, 2}}, 2, 3);
  CHECK(orbit.state(0) == 2);
  CHECK(orbit.state(1) == 3);
  CHECK(orbit.state(2) == 2);
}

TEST_CASE("fair coin stream has balanced frequencies") {
  const std::size_t L = 10000;
  const auto orbit = generate_orbit(fair_coin(42), 0, L);
  std::size_t zeros = 0;
  for (std::size_t n = 0; n < L; ++n) zeros += orbit.state(n) == 0;
  CHECK(std::abs(static_cast<double>(zeros) / L - 0.5) <= 0.02);
}

TEST_CASE("fair coin symbols are the top bit of the raw engine output") {
  // With p = (1/2, 1/2) the thresholds are 2^63 and 2^64, so symbol = u >> 63.
  std::mt19937_64 engine(42);
  const auto orbit = generate_orbit(fair_coin(42), 0, 1000);
  for (std::size_t n = 0; n < 1000; ++n) REQUIRE(orbit.state(n) == engine() >> 63);
}

TEST_CASE("shift start skips along the same stream") {
  const auto base = generate_orbit(fair_coin(9), 0, 200);
  const auto shifted = generate_orbit(fair_coin(9), 37, 100);
  for (std::size_t n = 0; n < 100; ++n) REQUIRE(shifted.state(n) == base.state(n + 37));
}

TEST_CASE("same seed reproduces the stream bit for bit") {
  const BernoulliShift spec{{Rational(1, 3), Rational(1, 6), Rational(1, 2)}, 1234};
  const auto a = generate_orbit(spec, 0, 5000, 4);
  const auto b = generate_orbit(spec, 0, 5000, 4);
  CHECK(a.raw() == b.raw());
  const auto c = generate_orbit(BernoulliShift{spec.probabilities, 1235}, 0, 5000, 4);
  CHECK(a.raw() != c.raw());
}

TEST_CASE("zero-probability symbols never appear") {
  const BernoulliShift spec{{Rational(0), Rational(1, 2), Rational(1, 2)}, 5};
  const auto orbit = generate_orbit(spec, 0, 4000);
  for (std::size_t n = 0; n < orbit.size(); ++n) REQUIRE(orbit.state(n) != 0);
}

TEST_CASE("markov shift respects forbidden transitions and stationarity") {
  // 0 -> 1 always; 1 -> 0 or 1 with probability 1/2. Stationary (1/3, 2/3).
  const MarkovShift spec{{{Rational(0), Rational(1)}, {Rational(1, 2), Rational(1, 2)}},
                         {Rational(1, 3), Rational(2, 3)},
                         77};
  const auto orbit = generate_orbit(spec, 0, 30000);
  std::size_t zeros = 0;
  for (std::size_t n = 0; n + 1 < orbit.size(); ++n) {
    if (orbit.state(n) == 0) {
      ++zeros;
      REQUIRE(orbit.state(n + 1) == 1);
    }
  }
  CHECK(std::abs(static_cast<double>(zeros) / orbit.size() - 1.0 / 3.0) <= 0.02);
  CHECK(exact_integral(SymbolIndicator{{0}}, spec) == Rational(1, 3));
  CHECK(exact_integral(CylinderIndicator{{1, 1}}, spec) == Rational(1, 3));
}

TEST_CASE("spec validation rejects broken systems") {
  CHECK_THROWS_AS(validate(FinitePermutation{{0, 0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(FinitePermutation{{0, 3, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(BernoulliShift{{Rational(1, 2), Rational(1, 3)}, 0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(BernoulliShift{{Rational(1)}, 0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(BernoulliShift{{Rational(3, 2), Rational(-1, 2)}, 0}), std::invalid_argument);
  const MarkovShift not_stationary{{{Rational(0), Rational(1)}, {Rational(1, 2), Rational(1, 2)}},
                                   {Rational(1, 2), Rational(1, 2)},
                                   0};
  CHECK_THROWS_AS(validate(not_stationary), std::invalid_argument);
}

TEST_CASE("orbit generation errors") {
  CHECK_THROWS_AS(generate_orbit(Rotation{1}, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(generate_orbit(FinitePermutation{{1, 0}}, 2, 4), std::invalid_argument);
}

TEST_CASE("character on the half rotation alternates") {
  const auto orbit = generate_orbit(Rotation{std::uint64_t{1} << 63}, 0, 4);
  const auto seq = sample_observable(orbit, Character{1}, 0, 4);
  const double expected[] = {1, -1, 1, -1};
  for (std::size_t j = 1; j <= 4; ++j) {
    CHECK(seq.at(j).real() == doctest::Approx(expected[j - 1]).epsilon(1e-15));
    CHECK(std::abs(seq.at(j).imag()) < 1e-15);
  }
}

TEST_CASE("constant observable samples to a constant sequence") {
  const auto orbit = generate_orbit(fair_coin(3), 0, 10);
  const auto seq = sample_observable(orbit, Constant{1}, 2, 5);
  REQUIRE(seq.size() == 5);
  for (std::size_t j = 1; j <= 5; ++j) CHECK(seq.at(j) == Complex(1.0, 0.0));
}

TEST_CASE("cylinder indicator matches the stored stream positionwise") {
  const auto orbit = generate_orbit(fair_coin(42), 0, 500, 3);
  const auto one = sample_observable(orbit, CylinderIndicator{{0}}, 0, 500);
  const auto two = sample_observable(orbit, CylinderIndicator{{0, 1}}, 0, 500);
  const auto& raw = orbit.raw();
  for (std::size_t j = 0; j < 500; ++j) {
    REQUIRE(one.values()[j].real() == (raw[j] == 0 ? 1.0 : 0.0));
    REQUIRE(two.values()[j].real() == (raw[j] == 0 && raw[j + 1] == 1 ? 1.0 : 0.0));
  }
}

TEST_CASE("sampling past the end of the orbit is rejected") {
  const auto orbit = generate_orbit(Rotation{12345}, 0, 10);
  CHECK_THROWS_AS(sample_observable(orbit, Character{1}, 5, 6), std::invalid_argument);
  CHECK_NOTHROW(sample_observable(orbit, Character{1}, 5, 5));
  const auto shift = generate_orbit(fair_coin(1), 0, 10, 2);
  CHECK_THROWS_AS(sample_observable(shift, CylinderIndicator{{0, 0, 0}}, 0, 5), std::invalid_argument);
}

TEST_CASE("observable validation") {
  CHECK_THROWS_AS(validate(Character{1}, fair_coin(0)), std::invalid_argument);
  CHECK_THROWS_AS(validate(SymbolIndicator{{2}}, fair_coin(0)), std::invalid_argument);
  CHECK_THROWS_AS(validate(MeanZeroSymbol{{Rational(1), Rational(0)}}, fair_coin(0)), std::invalid_argument);
  CHECK_NOTHROW(validate(MeanZeroSymbol{{Rational(1), Rational(-1)}}, fair_coin(0)));
  const BernoulliShift skew{{Rational(1, 4), Rational(3, 4)}, 0};
  CHECK_NOTHROW(validate(MeanZeroSymbol{{Rational(3), Rational(-1)}}, skew));
}

TEST_CASE("exact integrals") {
  const BernoulliShift spec{{Rational(1, 4), Rational(1, 4), Rational(1, 2)}, 0};
  CHECK(exact_integral(Character{0}, Rotation{5}) == 1);
  CHECK(exact_integral(Character{3}, Rotation{5}) == 0);
  CHECK(exact_integral(SymbolIndicator{{0, 2}}, spec) == Rational(3, 4));
  CHECK(exact_integral(SymbolIndicator{{2, 2}}, spec) == Rational(1, 2));
  CHECK(exact_integral(CylinderIndicator{{2, 0}}, spec) == Rational(1, 8));
  CHECK(exact_integral(Constant{Rational(-3, 7)}, spec) == Rational(-3, 7));
  CHECK(exact_integral(SymbolIndicator{{1}}, FinitePermutation{{1, 2, 0}}) == Rational(1, 3));
}

TEST_CASE("fixed point conversion") {
  CHECK(to_fixed_point(Rational(1, 2)) == std::uint64_t{1} << 63);
  CHECK(to_fixed_point(Rational(0)) == 0);
  CHECK(to_fixed_point(Rational(1, 3)) == 0x5555555555555555ull);
  CHECK_THROWS_AS(to_fixed_point(Rational(1)), std::invalid_argument);
  CHECK(parse_rational("0.125") == Rational(1, 8));
  CHECK(parse_rational(" -3/6 ") == Rational(-1, 2));
  CHECK(parse_rational("7") == 7);
  CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("x"), std::invalid_argument);
}

TEST_CASE("property: rotation orbits are exactly additive") {
  auto engine = rng::make_engine({101});
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint64_t alpha = engine();
    const std::uint64_t start = engine();
    const auto orbit = generate_orbit(Rotation{alpha}, start, 400);
    for (int k = 0; k < 20; ++k) {
      const auto n = rng::uniform_index(engine, 200);
      const auto m = rng::uniform_index(engine, 200);
      REQUIRE(orbit.state(n + m) == orbit.state(n) + m * alpha);
    }
  }
}

TEST_CASE("property: characters pick up the phase e(k m alpha)") {
  auto engine = rng::make_engine({202});
  for (int trial = 0; trial < 30; ++trial) {
    const std::uint64_t alpha = engine();
    const auto k = static_cast<std::int64_t>(rng::uniform_index(engine, 21)) - 10;
    const auto orbit = generate_orbit(Rotation{alpha}, engine(), 300);
    const auto seq = sample_observable(orbit, Character{k}, 0, 300);
    for (int r = 0; r < 20; ++r) {
      const auto n = rng::uniform_index(engine, 150);
      const auto m = rng::uniform_index(engine, 150);
      const std::uint64_t turns = static_cast<std::uint64_t>(k) * (m * alpha);
      const Complex phase = std::polar(1.0, 2.0 * std::numbers::pi * std::ldexp(static_cast<double>(turns), -64));
      REQUIRE(std::abs(seq.values()[n + m] - seq.values()[n] * phase) <= 1e-12);
    }
  }
}

TEST_CASE("property: sampled values respect the observable bound") {
  auto engine = rng::make_engine({303});
  const BernoulliShift spec{{Rational(1, 5), Rational(3, 10), Rational(1, 2)}, 8};
  const std::vector<Observable> fs{SymbolIndicator{{1}}, CylinderIndicator{{2, 2}}, Constant{Rational(-5, 2)},
                                   MeanZeroSymbol{{Rational(5), Rational(-5), Rational(1)}}};
  for (int trial = 0; trial < 10; ++trial) {
    BernoulliShift s = spec;
    s.seed = engine();
    const auto orbit = generate_orbit(s, 0, 1000, 2);
    for (const auto& f : fs) {
      const auto seq = sample_observable(orbit, f, 0, 1000);
      for (const auto& v : seq.values()) REQUIRE(std::abs(v) <= bound(f));
    }
  }
}

TEST_CASE("sampled sequences reject values above their bound") {
  CHECK_THROWS_AS(SampledSequence({Complex(1.5, 0.0)}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SampledSequence({}, 1.0), std::invalid_argument);
}
