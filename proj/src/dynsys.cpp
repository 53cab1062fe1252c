#include "ergocube/dynsys.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ergocube {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

using u128 = unsigned __int128;

const BigInt& two_pow_64() {
  static const BigInt value = BigInt(1) << 64;
  return value;
}

void check_distribution(const std::vector<Rational>& p, const char* what) {
  if (p.size() < 2) throw std::invalid_argument(std::string(what) + ": alphabet size must be >= 2");
  Rational total = 0;
  for (const auto& x : p) {
    if (x < 0) throw std::invalid_argument(std::string(what) + ": negative probability");
    total += x;
  }
  if (total != 1) {
    throw std::invalid_argument(std::string(what) + ": probabilities sum to " + to_string(total) +
                                ", not 1");
  }
}

// ceil(F_j * 2^64) for the cumulative distribution F; the last entry is 2^64.
std::vector<u128> cumulative_thresholds(const std::vector<Rational>& p) {
  std::vector<u128> out;
  out.reserve(p.size());
  Rational cumulative = 0;
  for (const auto& x : p) {
    cumulative += x;
    const Rational scaled = cumulative * Rational(two_pow_64());
    BigInt q = boost::multiprecision::numerator(scaled) / boost::multiprecision::denominator(scaled);
    if (Rational(q) < scaled) q += 1;
    const auto hi = static_cast<std::uint64_t>(q >> 64);
    const auto lo = static_cast<std::uint64_t>(q & BigInt(~std::uint64_t{0}));
    out.push_back((u128(hi) << 64) | lo);
  }
  return out;
}

std::uint64_t draw_symbol(std::mt19937_64& rng, const std::vector<u128>& thresholds) {
  const u128 u = rng();
  const auto it = std::upper_bound(thresholds.begin(), thresholds.end(), u);
  return static_cast<std::uint64_t>(it - thresholds.begin());
}

std::vector<std::uint64_t> bernoulli_stream(const BernoulliShift& spec, std::size_t count) {
  const auto thresholds = cumulative_thresholds(spec.probabilities);
  std::mt19937_64 rng(spec.seed);
  std::vector<std::uint64_t> out(count);
  for (auto& s : out) s = draw_symbol(rng, thresholds);
  return out;
}

std::vector<std::uint64_t> markov_stream(const MarkovShift& spec, std::size_t count) {
  const auto initial = cumulative_thresholds(spec.initial);
  std::vector<std::vector<u128>> rows;
  rows.reserve(spec.transition.size());
  for (const auto& row : spec.transition) rows.push_back(cumulative_thresholds(row));
  std::mt19937_64 rng(spec.seed);
  std::vector<std::uint64_t> out(count);
  if (count == 0) return out;
  out[0] = draw_symbol(rng, initial);
  for (std::size_t i = 1; i < count; ++i) out[i] = draw_symbol(rng, rows[out[i - 1]]);
  return out;
}

bool is_shift(SystemKind k) { return k == SystemKind::bernoulli || k == SystemKind::markov; }

// Observable lowered to double tables for fast repeated evaluation.
struct Evaluator {
  enum class Tag { character, table, cylinder, constant } tag;
  std::int64_t k = 0;
  std::vector<double> table;
  std::vector<std::uint64_t> word;
  double constant = 0.0;

  Evaluator(const Observable& f, const SystemSpec& spec) {
    validate(f, spec);
    std::visit(overloaded{
                   [&](const Character& c) {
                     tag = Tag::character;
                     k = c.k;
                   },
                   [&](const SymbolIndicator& s) {
                     tag = Tag::table;
                     table.assign(alphabet_size(spec), 0.0);
                     for (auto sym : s.symbols) table[sym] = 1.0;
                   },
                   [&](const CylinderIndicator& c) {
                     tag = Tag::cylinder;
                     word = c.word;
                   },
                   [&](const Constant& c) {
                     tag = Tag::constant;
                     constant = to_double(c.value);
                   },
                   [&](const MeanZeroSymbol& m) {
                     tag = Tag::table;
                     for (const auto& v : m.table) table.push_back(to_double(v));
                   },
               },
               f);
  }

  Complex operator()(const Orbit& orbit, std::size_t n) const {
    switch (tag) {
      case Tag::character: {
        // k * x mod 1, exact in 64-bit wraparound, then centered in [-1/2, 1/2).
        const std::uint64_t phase = static_cast<std::uint64_t>(k) * orbit.state(n);
        const double turns = std::ldexp(static_cast<double>(static_cast<std::int64_t>(phase)), -64);
        return std::polar(1.0, 2.0 * std::numbers::pi * turns);
      }
      case Tag::table:
        return table[orbit.state(n)];
      case Tag::cylinder: {
        const auto window = orbit.symbols(n, word.size());
        return std::equal(word.begin(), word.end(), window.begin()) ? 1.0 : 0.0;
      }
      case Tag::constant:
        return constant;
    }
    return 0.0;
  }
};

}  // namespace

SystemKind kind_of(const SystemSpec& spec) {
  return std::visit(overloaded{
                        [](const Rotation&) { return SystemKind::rotation; },
                        [](const BernoulliShift&) { return SystemKind::bernoulli; },
                        [](const MarkovShift&) { return SystemKind::markov; },
                        [](const FinitePermutation&) { return SystemKind::permutation; },
                    },
                    spec);
}

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::rotation: return "rotation";
    case SystemKind::bernoulli: return "bernoulli";
    case SystemKind::markov: return "markov";
    case SystemKind::permutation: return "permutation";
  }
  return "?";
}

void validate(const SystemSpec& spec) {
  std::visit(overloaded{
                 [](const Rotation&) {},
                 [](const BernoulliShift& b) {
                   check_distribution(b.probabilities, "bernoulli");
                   for (const auto& p : b.probabilities) {
                     if (boost::multiprecision::denominator(p) > two_pow_64()) {
                       throw std::invalid_argument("bernoulli: denominators must not exceed 2^64");
                     }
                   }
                 },
                 [](const MarkovShift& m) {
                   const std::size_t s = m.initial.size();
                   check_distribution(m.initial, "markov initial");
                   if (m.transition.size() != s) {
                     throw std::invalid_argument("markov: transition matrix must be s x s");
                   }
                   for (const auto& row : m.transition) {
                     if (row.size() != s) throw std::invalid_argument("markov: transition matrix must be s x s");
                     check_distribution(row, "markov row");
                   }
                   for (std::size_t j = 0; j < s; ++j) {
                     Rational mass = 0;
                     for (std::size_t i = 0; i < s; ++i) mass += m.initial[i] * m.transition[i][j];
                     if (mass != m.initial[j]) {
                       throw std::invalid_argument("markov: initial distribution is not stationary");
                     }
                   }
                 },
                 [](const FinitePermutation& p) {
                   if (p.pi.empty()) throw std::invalid_argument("permutation: empty ground set");
                   std::vector<bool> seen(p.pi.size(), false);
                   for (auto v : p.pi) {
                     if (v >= p.pi.size()) throw std::invalid_argument("permutation: index out of range");
                     if (seen[v]) throw std::invalid_argument("permutation: not a bijection");
                     seen[v] = true;
                   }
                 },
             },
             spec);
}

std::size_t alphabet_size(const SystemSpec& spec) {
  return std::visit(overloaded{
                        [](const Rotation&) -> std::size_t { return 0; },
                        [](const BernoulliShift& b) { return b.probabilities.size(); },
                        [](const MarkovShift& m) { return m.initial.size(); },
                        [](const FinitePermutation& p) { return p.pi.size(); },
                    },
                    spec);
}

Rational symbol_measure(const SystemSpec& spec, std::size_t symbol) {
  if (symbol >= alphabet_size(spec)) throw std::invalid_argument("symbol out of range");
  return std::visit(overloaded{
                        [](const Rotation&) -> Rational { return 0; },
                        [&](const BernoulliShift& b) { return b.probabilities[symbol]; },
                        [&](const MarkovShift& m) { return m.initial[symbol]; },
                        [](const FinitePermutation& p) { return Rational(1, p.pi.size()); },
                    },
                    spec);
}

std::uint64_t to_fixed_point(const Rational& fraction) {
  if (fraction < 0 || fraction >= 1) throw std::invalid_argument("circle fraction must lie in [0,1)");
  const Rational scaled = fraction * Rational(two_pow_64());
  const BigInt q = boost::multiprecision::numerator(scaled) / boost::multiprecision::denominator(scaled);
  return static_cast<std::uint64_t>(q);
}

double fixed_point_to_double(std::uint64_t value) { return std::ldexp(static_cast<double>(value), -64); }

Orbit::Orbit(SystemSpec spec, std::vector<std::uint64_t> data, std::size_t length, std::size_t window)
    : spec_(std::move(spec)), data_(std::move(data)), length_(length), window_(window) {
  if (length_ == 0) throw std::invalid_argument("orbit: zero-length request");
  const std::size_t needed = is_shift(kind()) ? length_ + window_ - 1 : length_;
  if (data_.size() < needed) throw std::invalid_argument("orbit: state storage too short");
}

std::uint64_t Orbit::state(std::size_t n) const {
  if (n >= length_) throw std::out_of_range("orbit: state index past the end");
  return data_[n];
}

std::span<const std::uint64_t> Orbit::symbols(std::size_t n, std::size_t len) const {
  if (!is_shift(kind())) throw std::logic_error("orbit: symbol windows exist only for shifts");
  if (n >= length_ || len > window_) throw std::out_of_range("orbit: symbol window out of range");
  return std::span<const std::uint64_t>(data_).subspan(n, len);
}

Orbit generate_orbit(const SystemSpec& spec, std::uint64_t start, std::size_t length, std::size_t window) {
  if (length == 0) throw std::invalid_argument("generate_orbit: zero-length request");
  if (window == 0) throw std::invalid_argument("generate_orbit: window must be >= 1");
  validate(spec);
  std::vector<std::uint64_t> data;
  switch (kind_of(spec)) {
    case SystemKind::rotation: {
      const auto alpha = std::get<Rotation>(spec).alpha;
      data.resize(length);
      std::uint64_t x = start;
      for (auto& s : data) {
        s = x;
        x += alpha;
      }
      return Orbit(spec, std::move(data), length, 1);
    }
    case SystemKind::permutation: {
      const auto& pi = std::get<FinitePermutation>(spec).pi;
      if (start >= pi.size()) throw std::invalid_argument("generate_orbit: permutation index out of range");
      data.resize(length);
      std::uint64_t x = start;
      for (auto& s : data) {
        s = x;
        x = pi[x];
      }
      return Orbit(spec, std::move(data), length, 1);
    }
    case SystemKind::bernoulli:
    case SystemKind::markov: {
      const std::size_t count = start + length + window - 1;
      auto stream = kind_of(spec) == SystemKind::bernoulli ? bernoulli_stream(std::get<BernoulliShift>(spec), count)
                                                           : markov_stream(std::get<MarkovShift>(spec), count);
      stream.erase(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(start));
      return Orbit(spec, std::move(stream), length, window);
    }
  }
  throw std::logic_error("generate_orbit: unknown system");
}

Orbit orbit_from_symbols(const SystemSpec& spec, std::vector<std::uint64_t> symbols, std::size_t length,
                         std::size_t window) {
  validate(spec);
  if (!is_shift(kind_of(spec))) throw std::invalid_argument("orbit_from_symbols: shift systems only");
  const std::size_t s = alphabet_size(spec);
  for (auto sym : symbols) {
    if (sym >= s) throw std::invalid_argument("orbit_from_symbols: symbol outside the alphabet");
  }
  return Orbit(spec, std::move(symbols), length, window);
}

std::string describe(const Observable& f) {
  std::ostringstream os;
  auto list = [&](const std::vector<std::uint64_t>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  };
  std::visit(overloaded{
                 [&](const Character& c) { os << "character(" << c.k << ")"; },
                 [&](const SymbolIndicator& s) {
                   os << "symbol{";
                   list(s.symbols);
                   os << "}";
                 },
                 [&](const CylinderIndicator& c) {
                   os << "cylinder(";
                   list(c.word);
                   os << ")";
                 },
                 [&](const Constant& c) { os << "constant(" << to_string(c.value) << ")"; },
                 [&](const MeanZeroSymbol& m) {
                   os << "meanzero(";
                   for (std::size_t i = 0; i < m.table.size(); ++i) os << (i ? "," : "") << to_string(m.table[i]);
                   os << ")";
                 },
             },
             f);
  return os.str();
}

void validate(const Observable& f, const SystemSpec& spec) {
  const SystemKind k = kind_of(spec);
  const std::size_t s = alphabet_size(spec);
  std::visit(overloaded{
                 [&](const Character&) {
                   if (k != SystemKind::rotation) throw std::invalid_argument("character observables need a rotation");
                 },
                 [&](const SymbolIndicator& ind) {
                   if (k == SystemKind::rotation) throw std::invalid_argument("symbol indicators need a symbolic system");
                   for (auto sym : ind.symbols) {
                     if (sym >= s) throw std::invalid_argument("symbol indicator: symbol out of range");
                   }
                 },
                 [&](const CylinderIndicator& c) {
                   if (!is_shift(k)) throw std::invalid_argument("cylinder indicators need a shift system");
                   if (c.word.empty()) throw std::invalid_argument("cylinder indicator: empty word");
                   for (auto sym : c.word) {
                     if (sym >= s) throw std::invalid_argument("cylinder indicator: symbol out of range");
                   }
                 },
                 [](const Constant&) {},
                 [&](const MeanZeroSymbol& m) {
                   if (k == SystemKind::rotation) throw std::invalid_argument("mean-zero tables need a symbolic system");
                   if (m.table.size() != s) throw std::invalid_argument("mean-zero table size must equal the alphabet size");
                   Rational mean = 0;
                   for (std::size_t j = 0; j < s; ++j) mean += m.table[j] * symbol_measure(spec, j);
                   if (mean != 0) throw std::invalid_argument("mean-zero table has mean " + to_string(mean));
                 },
             },
             f);
}

Rational exact_integral(const Observable& f, const SystemSpec& spec) {
  validate(f, spec);
  return std::visit(overloaded{
                        [](const Character& c) -> Rational { return c.k == 0 ? 1 : 0; },
                        [&](const SymbolIndicator& ind) {
                          std::vector<std::uint64_t> distinct = ind.symbols;
                          std::sort(distinct.begin(), distinct.end());
                          distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
                          Rational total = 0;
                          for (auto sym : distinct) total += symbol_measure(spec, sym);
                          return total;
                        },
                        [&](const CylinderIndicator& c) -> Rational {
                          if (const auto* b = std::get_if<BernoulliShift>(&spec)) {
                            Rational m = 1;
                            for (auto sym : c.word) m *= b->probabilities[sym];
                            return m;
                          }
                          const auto& mk = std::get<MarkovShift>(spec);
                          Rational m = mk.initial[c.word[0]];
                          for (std::size_t i = 1; i < c.word.size(); ++i) m *= mk.transition[c.word[i - 1]][c.word[i]];
                          return m;
                        },
                        [](const Constant& c) { return c.value; },
                        [](const MeanZeroSymbol&) -> Rational { return 0; },
                    },
                    f);
}

double bound(const Observable& f) {
  return std::visit(overloaded{
                        [](const Character&) { return 1.0; },
                        [](const SymbolIndicator&) { return 1.0; },
                        [](const CylinderIndicator&) { return 1.0; },
                        [](const Constant& c) { return std::abs(to_double(c.value)); },
                        [](const MeanZeroSymbol& m) {
                          double b = 0.0;
                          for (const auto& v : m.table) b = std::max(b, std::abs(to_double(v)));
                          return b;
                        },
                    },
                    f);
}

Complex evaluate(const Observable& f, const Orbit& orbit, std::size_t n) {
  return Evaluator(f, orbit.spec())(orbit, n);
}

SampledSequence::SampledSequence(std::vector<Complex> values, double bound, std::optional<SampleOrigin> origin)
    : values_(std::move(values)), bound_(bound), origin_(std::move(origin)) {
  if (values_.empty()) throw std::invalid_argument("sampled sequence: length must be >= 1");
  if (!(bound_ >= 0.0)) throw std::invalid_argument("sampled sequence: bound must be nonnegative");
  for (const auto& v : values_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw std::invalid_argument("sampled sequence: non-finite value");
    }
    if (std::abs(v) > bound_ + 1e-12) throw std::invalid_argument("sampled sequence: value exceeds bound");
  }
}

SampledSequence SampledSequence::scaled(Complex factor) const {
  std::vector<Complex> v(values_);
  for (auto& x : v) x *= factor;
  return SampledSequence(std::move(v), bound_ * std::abs(factor) * (1.0 + 1e-15));
}

SampledSequence SampledSequence::conjugated() const {
  std::vector<Complex> v(values_);
  for (auto& x : v) x = std::conj(x);
  return SampledSequence(std::move(v), bound_);
}

SampledSequence sample_observable(const Orbit& orbit, const Observable& f, std::size_t offset, std::size_t length) {
  if (length == 0) throw std::invalid_argument("sample_observable: zero-length request");
  if (offset + length > orbit.size()) throw std::invalid_argument("sample_observable: orbit too short");
  if (const auto* c = std::get_if<CylinderIndicator>(&f); c && c->word.size() > orbit.window()) {
    throw std::invalid_argument("sample_observable: cylinder word longer than the orbit window");
  }
  const Evaluator eval(f, orbit.spec());
  std::vector<Complex> values(length);
  for (std::size_t j = 0; j < length; ++j) values[j] = eval(orbit, offset + j);
  return SampledSequence(std::move(values), bound(f), SampleOrigin{orbit.spec(), f, offset});
}

}  // namespace ergocube
