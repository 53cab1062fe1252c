#include "ergocube/runner.hpp"

#include "ergocube/cubeavg.hpp"
#include "ergocube/expsum.hpp"
#include "ergocube/fft.hpp"
#include "ergocube/oracle.hpp"
#include "ergocube/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace ergocube {

namespace {

// Size limits, also printed by list_experiments().
constexpr std::size_t limit_lemma1 = 4096;
constexpr std::size_t limit_naive2 = 4096;
constexpr std::size_t limit_fft2 = std::size_t{1} << 22;
constexpr std::size_t limit_naive3 = 128;
constexpr std::size_t limit_fft3 = 2048;
constexpr std::size_t limit_twisted = std::size_t{1} << 22;
constexpr std::size_t limit_supdecay = std::size_t{1} << 22;
constexpr std::size_t limit_eq4 = 4096;
constexpr std::size_t limit_degree = 4096;
constexpr std::size_t limit_points = std::size_t{1} << 24;
constexpr std::size_t limit_trials = 100000;
constexpr std::size_t limit_random_k = 64;
constexpr std::size_t limit_explicit_k = 100000;
constexpr std::uint64_t limit_cor1_n = 100000000;
constexpr std::size_t first_hit_search = 1 << 16;

const std::string root;

// ---------------------------------------------------------------------------
// helpers

template <class R, class F>
std::vector<R> parallel_map(std::size_t count, std::size_t threads, F&& f) {
  std::vector<std::optional<R>> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> result;
  result.reserve(count);
  for (auto& o : out) result.push_back(std::move(*o));
  return result;
}

SampledSequence disk_sequence(rng::Engine& engine, std::size_t length) {
  std::vector<Complex> v(length);
  for (auto& z : v) z = rng::unit_disk(engine);
  return SampledSequence(std::move(v), 1.0);
}

double relative_error(Complex got, Complex want) {
  return std::abs(got - want) / std::max(std::abs(want), std::numeric_limits<double>::min());
}

// Shortest round-trip form, for messages.
std::string brief(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

[[noreturn]] void bad(const Config& c, const std::string& section, const std::string& key, const std::string& msg) {
  const std::string where = section.empty() ? key : section + "." + key;
  throw ConfigError(c.line_of(section, key), where + ": " + msg);
}

std::vector<std::size_t> read_grid(const Config& c, const std::string& key, std::size_t limit) {
  const auto raw = c.get_uint_list(root, key);
  if (raw.empty()) bad(c, root, key, "grid is empty");
  std::vector<std::size_t> grid;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == 0) bad(c, root, key, "grid values must be >= 1");
    if (i && raw[i] <= raw[i - 1]) bad(c, root, key, "grid must be strictly increasing");
    if (raw[i] > limit) bad(c, root, key, "value " + std::to_string(raw[i]) + " exceeds the limit " + std::to_string(limit));
    grid.push_back(static_cast<std::size_t>(raw[i]));
  }
  return grid;
}

std::vector<std::uint64_t> read_seeds(const Config& c) {
  auto seeds = c.get_uint_list(root, "seeds");
  if (seeds.empty()) bad(c, root, "seeds", "at least one seed is required");
  return seeds;
}

std::size_t read_count(const Config& c, const std::string& key, std::size_t limit) {
  const auto v = c.get_uint(root, key);
  if (v == 0 || v > limit) bad(c, root, key, "must be in [1, " + std::to_string(limit) + "]");
  return static_cast<std::size_t>(v);
}

std::size_t read_oversample(const Config& c) {
  const auto v = c.get_uint(root, "oversample", default_oversample);
  if (v < min_oversample || v > 1024 || !std::has_single_bit(v)) {
    bad(c, root, "oversample", "must be a power of two in [8, 1024]");
  }
  return static_cast<std::size_t>(v);
}

double read_probability_like(const Config& c, const std::string& key, double fallback) {
  const double v = c.get_double(root, key, fallback);
  if (!(v >= 0.0)) bad(c, root, key, "must be >= 0");
  return v;
}

// ---------------------------------------------------------------------------
// systems and observables

struct SystemEntry {
  SystemSpec spec;
  std::uint64_t start = 0;
};

struct ObservableEntry {
  std::string system;
  Observable f;
};

struct Model {
  std::map<std::string, SystemEntry> systems;
  std::vector<ObservableEntry> observables;  // observable.1 .. observable.n

  const SystemEntry& system_of(std::size_t i) const { return systems.at(observables[i].system); }
};

SystemEntry parse_system(const Config& c, const std::string& section) {
  const std::string type = c.get_string(section, "type");
  SystemEntry e;
  if (type == "rotation") {
    const Rational alpha = c.get_rational(section, "alpha");
    if (alpha < 0 || alpha >= 1) bad(c, section, "alpha", "must lie in [0, 1)");
    e.spec = Rotation{to_fixed_point(alpha)};
    if (c.has(section, "start")) {
      const Rational x = c.get_rational(section, "start");
      if (x < 0 || x >= 1) bad(c, section, "start", "must lie in [0, 1)");
      e.start = to_fixed_point(x);
    }
  } else if (type == "bernoulli") {
    e.spec = BernoulliShift{c.get_rational_list(section, "probabilities"), c.get_uint(section, "seed", 0)};
    e.start = c.get_uint(section, "start", 0);
  } else if (type == "markov") {
    e.spec = MarkovShift{c.get_rational_matrix(section, "transition"), c.get_rational_list(section, "initial"),
                         c.get_uint(section, "seed", 0)};
    e.start = c.get_uint(section, "start", 0);
  } else if (type == "permutation") {
    const auto pi = c.get_uint_list(section, "pi");
    e.spec = FinitePermutation{std::vector<std::size_t>(pi.begin(), pi.end())};
    e.start = c.get_uint(section, "start", 0);
  } else {
    bad(c, section, "type", "unknown system type '" + type + "' (rotation, bernoulli, markov, permutation)");
  }
  try {
    validate(e.spec);
    if (const auto* p = std::get_if<FinitePermutation>(&e.spec); p && e.start >= p->pi.size()) {
      throw std::invalid_argument("start point outside the ground set");
    }
  } catch (const std::invalid_argument& err) {
    bad(c, section, "type", err.what());
  }
  return e;
}

Observable parse_observable(const Config& c, const std::string& section) {
  const std::string type = c.get_string(section, "type");
  if (type == "character") return Character{c.get_int(section, "k")};
  if (type == "indicator") return SymbolIndicator{c.get_uint_list(section, "symbols")};
  if (type == "cylinder") return CylinderIndicator{c.get_uint_list(section, "word")};
  if (type == "constant") return Constant{c.get_rational(section, "value")};
  if (type == "meanzero") return MeanZeroSymbol{c.get_rational_list(section, "table")};
  bad(c, section, "type", "unknown observable type '" + type +
                              "' (character, indicator, cylinder, constant, meanzero)");
}

Model parse_model(const Config& c, std::size_t min_count, std::size_t max_count) {
  Model m;
  for (const auto& section : c.sections_with_prefix("system.")) {
    m.systems.emplace(section.substr(7), parse_system(c, section));
  }
  const auto obs_sections = c.sections_with_prefix("observable.");
  for (std::size_t i = 1; i <= obs_sections.size(); ++i) {
    if (!c.has_section("observable." + std::to_string(i))) {
      throw ConfigError(0, "observable sections must be numbered 1.." + std::to_string(obs_sections.size()));
    }
  }
  if (obs_sections.size() < min_count || obs_sections.size() > max_count) {
    const std::string want = min_count == max_count ? std::to_string(min_count)
                                                    : std::to_string(min_count) + ".." + std::to_string(max_count);
    throw ConfigError(0, "this experiment needs " + want + " [observable.N] sections, found " +
                             std::to_string(obs_sections.size()));
  }
  for (std::size_t i = 1; i <= obs_sections.size(); ++i) {
    const std::string section = "observable." + std::to_string(i);
    ObservableEntry o;
    o.system = c.get_string(section, "system");
    if (!m.systems.count(o.system)) bad(c, section, "system", "no [system." + o.system + "] section");
    o.f = parse_observable(c, section);
    try {
      validate(o.f, m.systems.at(o.system).spec);
    } catch (const std::invalid_argument& err) {
      bad(c, section, "type", err.what());
    }
    m.observables.push_back(std::move(o));
  }
  return m;
}

SystemSpec seeded(const SystemSpec& spec, std::uint64_t run_seed) {
  SystemSpec s = spec;
  if (auto* b = std::get_if<BernoulliShift>(&s)) b->seed += run_seed;
  if (auto* mk = std::get_if<MarkovShift>(&s)) mk->seed += run_seed;
  return s;
}

std::size_t word_length(const Observable& f) {
  if (const auto* c = std::get_if<CylinderIndicator>(&f)) return c->word.size();
  return 1;
}

// a_n = f_i(T^n x) for n = 1..lengths[i]. Observables on the same system share one orbit.
std::vector<SampledSequence> sample_model(const Model& m, const std::vector<std::size_t>& lengths,
                                          std::uint64_t run_seed) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> need;
  for (std::size_t i = 0; i < m.observables.size(); ++i) {
    auto& [len, window] = need[m.observables[i].system];
    len = std::max(len, lengths[i]);
    window = std::max(window, word_length(m.observables[i].f));
  }
  std::map<std::string, Orbit> orbits;
  for (const auto& [name, n] : need) {
    const auto& sys = m.systems.at(name);
    orbits.emplace(name, generate_orbit(seeded(sys.spec, run_seed), sys.start, n.first + 1, n.second));
  }
  std::vector<SampledSequence> out;
  for (std::size_t i = 0; i < m.observables.size(); ++i) {
    out.push_back(sample_observable(orbits.at(m.observables[i].system), m.observables[i].f, 1, lengths[i]));
  }
  return out;
}

Rational model_limit(const Model& m) {
  std::vector<IntegralTerm> terms;
  for (const auto& o : m.observables) terms.push_back(IntegralTerm{o.f, m.systems.at(o.system).spec});
  return product_integral_limit(terms);
}

// ---------------------------------------------------------------------------
// experiments

struct Result {
  Table table;
  std::vector<Assertion> assertions;
};

using Runner = std::function<Result(std::size_t threads)>;

// lemma1 ---------------------------------------------------------------------

Runner plan_lemma1(const Config& c) {
  const std::uint64_t seed = c.get_uint(root, "seed");
  const std::size_t trials = read_count(c, "trials", limit_trials);
  const auto grid = read_grid(c, "grid", limit_lemma1);
  const std::size_t oversample = read_oversample(c);
  return [=](std::size_t threads) {
    struct Out {
      bool holds;
      double ratio;
    };
    const auto outs = parallel_map<Out>(grid.size() * trials, threads, [&](std::size_t u) {
      const std::size_t N = grid[u / trials];
      auto engine = rng::make_engine({seed, N, u % trials});
      const auto a = disk_sequence(engine, N);
      const auto b = disk_sequence(engine, N);
      const auto cc = disk_sequence(engine, 2 * N);
      const auto r = lemma1_check(a, b, cc, N, oversample);
      const double rhs = std::min(r.rhs_a, r.rhs_c);
      return Out{r.holds, rhs > 0.0 ? r.lhs / rhs : 0.0};
    });
    Result res;
    res.table.columns = {"N", "trials", "holds", "max_lhs_over_rhs"};
    std::size_t total = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      std::uint64_t holds = 0;
      double worst = 0.0;
      for (std::size_t t = 0; t < trials; ++t) {
        holds += outs[g * trials + t].holds;
        worst = std::max(worst, outs[g * trials + t].ratio);
      }
      total += holds;
      res.table.rows.push_back({std::uint64_t{grid[g]}, std::uint64_t{trials}, holds, worst});
    }
    const std::size_t cases = grid.size() * trials;
    res.assertions.push_back(
        {"lemma1_holds", total == cases, std::to_string(total) + "/" + std::to_string(cases) + " cases hold"});
    return res;
  };
}

// converge2 / converge3 ---------------------------------------------------------

Runner plan_equivalence(const Config& c, int arity) {
  struct Batch {
    int arity;
    std::size_t trials, min_n, max_n;
    double tolerance;
  };
  std::vector<Batch> batches;
  const std::uint64_t seed = c.get_uint(root, "seed");
  auto read_batch = [&](int a, const std::string& suffix, double tol) {
    const std::size_t limit = a == 2 ? limit_naive2 : limit_naive3;
    Batch b{a, read_count(c, "trials" + suffix, limit_trials), 0, 0, tol};
    b.min_n = static_cast<std::size_t>(c.get_uint(root, "min_n" + suffix, 8));
    b.max_n = static_cast<std::size_t>(c.get_uint(root, "max_n" + suffix));
    if (b.min_n == 0 || b.min_n > b.max_n) bad(c, root, "min_n" + suffix, "need 1 <= min_n <= max_n");
    if (b.max_n > limit) bad(c, root, "max_n" + suffix, "exceeds the limit " + std::to_string(limit));
    b.tolerance = c.get_double(root, "tolerance" + suffix, tol);
    batches.push_back(b);
  };
  if (arity == 2) {
    read_batch(2, "", 1e-9);
    if (c.has(root, "trials3")) read_batch(3, "3", 1e-8);
  } else {
    read_batch(3, "", 1e-8);
  }
  return [=](std::size_t threads) {
    struct Unit {
      std::size_t batch, trial;
    };
    std::vector<Unit> units;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      for (std::size_t t = 0; t < batches[b].trials; ++t) units.push_back({b, t});
    }
    struct Out {
      std::size_t N;
      Complex fast, slow;
    };
    const auto outs = parallel_map<Out>(units.size(), threads, [&](std::size_t i) {
      const Batch& b = batches[units[i].batch];
      auto engine = rng::make_engine({seed, static_cast<std::uint64_t>(b.arity), units[i].trial});
      const std::size_t N = b.min_n + rng::uniform_index(engine, b.max_n - b.min_n + 1);
      if (b.arity == 2) {
        const auto x = disk_sequence(engine, N);
        const auto y = disk_sequence(engine, N);
        const auto z = disk_sequence(engine, 2 * N);
        const CubeInput2 in{x, y, z};
        return Out{N, cube_avg2_fft(in, N), cube_avg2_naive(in, N)};
      }
      std::vector<SampledSequence> u;
      for (std::size_t len : {N, N, N, 2 * N, 2 * N, 2 * N, 3 * N}) u.push_back(disk_sequence(engine, len));
      const CubeInput3 in{{std::cref(u[0]), std::cref(u[1]), std::cref(u[2]), std::cref(u[3]), std::cref(u[4]),
                           std::cref(u[5]), std::cref(u[6])}};
      return Out{N, cube_avg3_fft(in, N), cube_avg3_naive(in, N)};
    });
    Result res;
    res.table.columns = {"arity", "trial", "N", "fft_re", "fft_im", "naive_re", "naive_im", "rel_error", "within"};
    std::vector<std::size_t> ok(batches.size(), 0);
    std::vector<double> worst(batches.size(), 0.0);
    for (std::size_t i = 0; i < units.size(); ++i) {
      const Batch& b = batches[units[i].batch];
      const auto& o = outs[i];
      const double err = relative_error(o.fast, o.slow);
      const bool within = err <= b.tolerance;
      ok[units[i].batch] += within;
      worst[units[i].batch] = std::max(worst[units[i].batch], err);
      res.table.rows.push_back({std::int64_t{b.arity}, std::uint64_t{units[i].trial}, std::uint64_t{o.N},
                                o.fast.real(), o.fast.imag(), o.slow.real(), o.slow.imag(), err, within});
    }
    for (std::size_t b = 0; b < batches.size(); ++b) {
      std::ostringstream detail;
      detail << ok[b] << "/" << batches[b].trials << " within " << brief(batches[b].tolerance)
             << ", worst " << brief(worst[b]);
      res.assertions.push_back(
          {"equivalence_arity" + std::to_string(batches[b].arity), ok[b] == batches[b].trials, detail.str()});
    }
    return res;
  };
}

Runner plan_converge(const Config& c, int arity) {
  const std::string mode = c.find_string(root, "mode").value_or("series");
  if (mode == "equivalence") return plan_equivalence(c, arity);
  if (mode != "series") bad(c, root, "mode", "expected series or equivalence");

  const std::size_t count = arity == 2 ? 3 : 7;
  const Model model = parse_model(c, count, count);
  const auto seeds = read_seeds(c);
  const std::string method = c.find_string(root, "method").value_or("fft");
  if (method != "fft" && method != "naive") bad(c, root, "method", "expected fft or naive");
  const bool naive = method == "naive";
  const std::size_t limit = arity == 2 ? (naive ? limit_naive2 : limit_fft2) : (naive ? limit_naive3 : limit_fft3);
  const auto grid = read_grid(c, "grid", limit);
  std::optional<double> tol;
  if (c.has(root, "expect_tol")) tol = read_probability_like(c, "expect_tol", 0.0);
  const std::size_t min_seeds = static_cast<std::size_t>(c.get_uint(root, "expect_min_seeds", seeds.size()));
  if (min_seeds > seeds.size()) bad(c, root, "expect_min_seeds", "exceeds the number of seeds");
  std::optional<std::size_t> monotone;
  if (c.has(root, "expect_monotone_steps")) {
    monotone = static_cast<std::size_t>(c.get_uint(root, "expect_monotone_steps"));
    if (*monotone + 1 > grid.size()) bad(c, root, "expect_monotone_steps", "exceeds the number of grid steps");
  }
  const Rational limit_exact = model_limit(model);

  return [=](std::size_t threads) {
    const std::size_t Nmax = grid.back();
    const auto lengths = arity == 2 ? std::vector<std::size_t>{Nmax, Nmax, 2 * Nmax}
                                    : std::vector<std::size_t>{Nmax, Nmax, Nmax, 2 * Nmax, 2 * Nmax, 2 * Nmax, 3 * Nmax};
    const auto series = parallel_map<AverageSeries>(seeds.size(), threads, [&](std::size_t s) {
      const auto u = sample_model(model, lengths, seeds[s]);
      CubeKernel kernel;
      if (arity == 2) {
        kernel = [&](std::size_t N) {
          const CubeInput2 in{u[0], u[1], u[2]};
          return naive ? cube_avg2_naive(in, N) : cube_avg2_fft(in, N);
        };
      } else {
        kernel = [&](std::size_t N) {
          const CubeInput3 in{{std::cref(u[0]), std::cref(u[1]), std::cref(u[2]), std::cref(u[3]), std::cref(u[4]),
                               std::cref(u[5]), std::cref(u[6])}};
          return naive ? cube_avg3_naive(in, N) : cube_avg3_fft(in, N);
        };
      }
      return average_series(kernel, grid);
    });
    const double L = to_double(limit_exact);
    Result res;
    res.table.columns = {"seed", "N", "re", "im", "abs", "limit", "error", "cauchy_gap"};
    std::size_t final_ok = 0;
    std::vector<std::size_t> steps(seeds.size(), 0);
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      double previous = 0.0;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const Complex v = series[s].values[g];
        const double err = std::abs(v - L);
        const double gap = g ? series[s].cauchy_gaps[g - 1] : std::numeric_limits<double>::quiet_NaN();
        res.table.rows.push_back({seeds[s], std::uint64_t{grid[g]}, v.real(), v.imag(), std::abs(v), L, err, gap});
        if (g && err <= previous) ++steps[s];
        previous = err;
      }
      if (tol && previous <= *tol) ++final_ok;
    }
    if (tol) {
      res.assertions.push_back({"final_error", final_ok >= min_seeds,
                                std::to_string(final_ok) + "/" + std::to_string(seeds.size()) +
                                    " seeds with |M_N - L| <= " + brief(*tol) + " at N = " +
                                    std::to_string(grid.back()) + " (need " + std::to_string(min_seeds) + ")"});
    }
    if (monotone) {
      std::vector<std::string> counts;
      bool all = true;
      for (auto k : steps) {
        counts.push_back(std::to_string(k));
        all = all && k >= *monotone;
      }
      res.assertions.push_back({"monotone_steps", all,
                                "non-increasing steps per seed: " + join(counts, " ") + " (need >= " +
                                    std::to_string(*monotone) + " of " + std::to_string(grid.size() - 1) + ")"});
    }
    return res;
  };
}

// twisted -------------------------------------------------------------------

Runner plan_twisted(const Config& c) {
  const Model model = parse_model(c, 2, 2);
  const auto seeds = read_seeds(c);
  const auto grid = read_grid(c, "grid", limit_twisted);
  const auto freqs = c.get_double_list(root, "t");
  return [=](std::size_t threads) {
    const std::size_t Nmax = grid.back();
    const auto all = parallel_map<std::vector<AverageSeries>>(seeds.size(), threads, [&](std::size_t s) {
      const auto u = sample_model(model, {Nmax, 2 * Nmax}, seeds[s]);
      std::vector<AverageSeries> out;
      for (double t : freqs) {
        out.push_back(average_series([&](std::size_t N) { return twisted_cube_avg2(u[0], u[1], N, t); }, grid));
      }
      return out;
    });
    Result res;
    res.table.columns = {"seed", "t", "N", "re", "im", "abs", "cauchy_gap"};
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      for (std::size_t f = 0; f < freqs.size(); ++f) {
        for (std::size_t g = 0; g < grid.size(); ++g) {
          const Complex v = all[s][f].values[g];
          const double gap = g ? all[s][f].cauchy_gaps[g - 1] : std::numeric_limits<double>::quiet_NaN();
          res.table.rows.push_back({seeds[s], freqs[f], std::uint64_t{grid[g]}, v.real(), v.imag(), std::abs(v), gap});
        }
      }
    }
    return res;
  };
}

// cor1 / khintchine ---------------------------------------------------------

struct ExplicitSystem {
  FiniteSystem system;
  std::vector<std::size_t> A;
};

std::optional<ExplicitSystem> read_explicit_system(const Config& c) {
  if (!c.has(root, "pi1")) return std::nullopt;
  const auto p1 = c.get_uint_list(root, "pi1");
  const auto p2 = c.get_uint_list(root, "pi2");
  const auto a = c.get_string(root, "A").empty() ? std::vector<std::uint64_t>{} : c.get_uint_list(root, "A");
  if (p1.size() > limit_explicit_k) bad(c, root, "pi1", "ground set exceeds " + std::to_string(limit_explicit_k));
  try {
    FiniteSystem sys(std::vector<std::size_t>(p1.begin(), p1.end()), std::vector<std::size_t>(p2.begin(), p2.end()));
    std::vector<std::size_t> A(a.begin(), a.end());
    subset_mask(sys, A);
    return ExplicitSystem{std::move(sys), std::move(A)};
  } catch (const std::invalid_argument& e) {
    bad(c, root, "pi1", e.what());
  }
}

struct RandomSystems {
  std::uint64_t seed;
  std::size_t count, max_k;
};

RandomSystems read_random_systems(const Config& c) {
  RandomSystems r{c.get_uint(root, "seed"), read_count(c, "systems", limit_trials), 0};
  r.max_k = static_cast<std::size_t>(c.get_uint(root, "max_k"));
  if (r.max_k == 0 || r.max_k > limit_random_k) bad(c, root, "max_k", "must be in [1, 64]");
  return r;
}

std::pair<FiniteSystem, std::vector<std::size_t>> draw_system(const RandomSystems& r, std::size_t index,
                                                              bool single_cycle) {
  auto engine = rng::make_engine({r.seed, index});
  const std::size_t K = 1 + rng::uniform_index(engine, r.max_k);
  auto sys = random_finite_system(engine, K, single_cycle);
  auto A = random_subset(engine, K);
  return {std::move(sys), std::move(A)};
}

Rational cor1_bound(const FiniteSystem& sys, std::uint64_t N) {
  return Rational(static_cast<long long>(2 * sys.max_cycle_length(1) * sys.max_cycle_length(2)),
                  static_cast<long long>(N));
}

Runner plan_cor1(const Config& c) {
  auto fixed = read_explicit_system(c);
  if (fixed) {
    const auto grid = read_grid(c, "grid", limit_cor1_n);
    return [sys = fixed->system, A = fixed->A, grid](std::size_t threads) {
      const Rational exact = cor1_limit_exact(sys, A);
      const auto emp = parallel_map<Rational>(grid.size(), threads,
                                              [&](std::size_t g) { return cor1_average_empirical(sys, A, grid[g]); });
      Result res;
      res.table.columns = {"N", "empirical", "exact", "empirical_value", "exact_value", "abs_error", "bound", "within"};
      bool all = true;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const Rational err = abs(emp[g] - exact);
        const Rational bound = cor1_bound(sys, grid[g]);
        const bool within = err <= bound;
        all = all && within;
        res.table.rows.push_back({std::uint64_t{grid[g]}, to_string(emp[g]), to_string(exact), to_double(emp[g]),
                                  to_double(exact), to_double(err), to_double(bound), within});
      }
      res.assertions.push_back({"within_bound", all, "|empirical - exact| <= 2 L1 L2 / N on every grid point"});
      return res;
    };
  }
  const auto r = read_random_systems(c);
  const std::uint64_t N = c.get_uint(root, "n");
  if (N == 0 || N > limit_cor1_n) bad(c, root, "n", "must be in [1, 10^8]");
  return [=](std::size_t threads) {
    struct Out {
      std::size_t K, L1, L2;
      std::uint64_t period;
      Rational emp, exact, at_period, bound;
    };
    const auto outs = parallel_map<Out>(r.count, threads, [&](std::size_t i) {
      const auto [sys, A] = draw_system(r, i, false);
      Out o{sys.size(), sys.max_cycle_length(1), sys.max_cycle_length(2), sys.joint_period(), 0, 0, 0, 0};
      o.emp = cor1_average_empirical(sys, A, N);
      o.exact = cor1_limit_exact(sys, A);
      o.at_period = cor1_average_empirical(sys, A, o.period);
      o.bound = cor1_bound(sys, N);
      return o;
    });
    Result res;
    res.table.columns = {"system", "K",         "L1",        "L2",     "lcm", "empirical", "exact",
                         "abs_error", "bound", "within", "equal_at_lcm"};
    std::size_t within = 0, equal = 0;
    for (std::size_t i = 0; i < outs.size(); ++i) {
      const auto& o = outs[i];
      const Rational err = abs(o.emp - o.exact);
      const bool w = err <= o.bound;
      const bool e = o.at_period == o.exact;
      within += w;
      equal += e;
      res.table.rows.push_back({std::uint64_t{i}, std::uint64_t{o.K}, std::uint64_t{o.L1}, std::uint64_t{o.L2},
                                o.period, to_string(o.emp), to_string(o.exact), to_double(err), to_double(o.bound), w,
                                e});
    }
    const std::string of = "/" + std::to_string(outs.size());
    res.assertions.push_back({"within_bound", within == outs.size(),
                              std::to_string(within) + of + " systems within 2 L1 L2 / N at N = " + std::to_string(N)});
    res.assertions.push_back(
        {"exact_at_lcm", equal == outs.size(), std::to_string(equal) + of + " systems exact at N = lcm"});
    return res;
  };
}

Runner plan_khintchine(const Config& c) {
  auto fixed = read_explicit_system(c);
  std::optional<RandomSystems> random;
  bool single_cycle = true;
  if (!fixed) {
    random = read_random_systems(c);
    single_cycle = c.get_bool(root, "single_cycle", true);
  }
  return [=](std::size_t threads) {
    const std::size_t count = fixed ? 1 : random->count;
    struct Out {
      std::size_t K;
      Rational mu;
      KhintchineReport report;
    };
    const auto outs = parallel_map<Out>(count, threads, [&](std::size_t i) {
      if (fixed) return Out{fixed->system.size(), measure_of(fixed->system, fixed->A), khintchine_check(fixed->system, fixed->A)};
      const auto [sys, A] = draw_system(*random, i, single_cycle);
      return Out{sys.size(), measure_of(sys, A), khintchine_check(sys, A)};
    });
    Result res;
    res.table.columns = {"system", "K", "mu", "limit", "bound", "limit_value", "bound_value", "nested", "holds"};
    std::size_t nested = 0, holds = 0;
    for (std::size_t i = 0; i < outs.size(); ++i) {
      const auto& r = outs[i].report;
      nested += r.nested;
      holds += r.holds_when_nested.value_or(false);
      const std::string h = r.holds_when_nested ? (*r.holds_when_nested ? "true" : "false") : "n/a";
      res.table.rows.push_back({std::uint64_t{i}, std::uint64_t{outs[i].K}, to_string(outs[i].mu),
                                to_string(r.limit), to_string(r.bound), to_double(r.limit), to_double(r.bound),
                                r.nested, h});
    }
    res.assertions.push_back({"khintchine_bound", holds == nested,
                              std::to_string(holds) + "/" + std::to_string(nested) +
                                  " nested systems satisfy limit >= mu(A)^3 (" + std::to_string(outs.size() - nested) +
                                  " not nested, not asserted)"});
    return res;
  };
}

// syndetic --------------------------------------------------------------------

Runner plan_syndetic(const Config& c) {
  const Model model = parse_model(c, 2, 3);
  const std::size_t k = model.observables.size();
  const auto seeds = read_seeds(c);
  const double lambda = c.get_double(root, "lambda");
  if (!(lambda >= 0.0 && lambda < 1.0)) bad(c, root, "lambda", "must lie in [0, 1)");
  const std::size_t limit = k == 2 ? max_scan_window2 : max_scan_window3;
  const std::size_t window = static_cast<std::size_t>(c.get_uint(root, "window"));
  if (window == 0 || window > limit) bad(c, root, "window", "must be in [1, " + std::to_string(limit) + "]");
  const std::string condition = c.find_string(root, "condition").value_or("first_hit");
  if (condition != "first_hit" && condition != "none") bad(c, root, "condition", "expected first_hit or none");
  for (std::size_t i = 0; i < k; ++i) {
    const auto& f = model.observables[i].f;
    if (!std::holds_alternative<SymbolIndicator>(f) && !std::holds_alternative<CylinderIndicator>(f)) {
      bad(c, "observable." + std::to_string(i + 1), "type", "syndetic scans need indicator observables");
    }
  }
  if (exact_integral(model.observables[0].f, model.system_of(0).spec) == 0) {
    bad(c, "observable.1", "type", "mu(A) = 0");
  }
  const bool expect_nonempty = c.get_bool(root, "expect_nonempty", false);
  std::optional<std::size_t> expect_gap;
  if (c.has(root, "expect_max_gap")) expect_gap = static_cast<std::size_t>(c.get_uint(root, "expect_max_gap"));

  return [=](std::size_t threads) {
    struct Out {
      std::uint64_t start;
      GapReport report;
    };
    const auto outs = parallel_map<Out>(seeds.size(), threads, [&](std::size_t s) {
      std::vector<SystemSpec> specs;
      std::vector<Observable> fs;
      std::vector<std::uint64_t> starts;
      for (std::size_t i = 0; i < k; ++i) {
        specs.push_back(seeded(model.system_of(i).spec, seeds[s]));
        fs.push_back(model.observables[i].f);
        starts.push_back(model.system_of(i).start);
      }
      std::uint64_t start = starts[0];
      if (condition == "first_hit") {
        const auto orbit = generate_orbit(specs[0], starts[0], first_hit_search, word_length(fs[0]));
        std::size_t n = 0;
        while (n < first_hit_search && evaluate(fs[0], orbit, n) == 0.0) ++n;
        if (n == first_hit_search) throw std::runtime_error("syndetic: no visit to A in the first 65536 states");
        const auto kind = kind_of(specs[0]);
        start = (kind == SystemKind::bernoulli || kind == SystemKind::markov) ? starts[0] + n : orbit.state(n);
        for (std::size_t i = 0; i < k; ++i) {
          if (model.observables[i].system == model.observables[0].system) starts[i] = start;
        }
      }
      return Out{start, syndeticity_scan(specs, fs, starts, lambda, window)};
    });
    Result res;
    res.table.columns = {"seed", "start", "hits", "nonempty"};
    for (std::size_t i = 1; i <= k; ++i) res.table.columns.push_back("max_gap_" + std::to_string(i));
    for (std::size_t i = 1; i <= k; ++i) res.table.columns.push_back("empty_lines_" + std::to_string(i));
    res.table.columns.push_back("largest_hole");
    res.table.columns.push_back("threshold");
    std::size_t nonempty = 0, gap_ok = 0;
    std::size_t worst = 0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const auto& r = outs[s].report;
      std::vector<Cell> row{seeds[s], outs[s].start, r.hits, r.nonempty};
      for (auto g : r.max_gap) row.push_back(std::uint64_t{g});
      for (auto e : r.empty_lines) row.push_back(e);
      row.push_back(std::uint64_t{r.largest_hole});
      row.push_back(r.threshold);
      res.table.rows.push_back(std::move(row));
      nonempty += r.nonempty;
      worst = std::max(worst, r.max_gap_all);
      if (expect_gap && r.max_gap_all <= *expect_gap) ++gap_ok;
    }
    const std::string of = "/" + std::to_string(seeds.size());
    if (expect_nonempty) {
      res.assertions.push_back(
          {"nonempty", nonempty == seeds.size(), std::to_string(nonempty) + of + " runs with a nonempty set"});
    }
    if (expect_gap) {
      res.assertions.push_back({"max_gap", gap_ok == seeds.size(),
                                std::to_string(gap_ok) + of + " runs with per-axis max gap <= " +
                                    std::to_string(*expect_gap) + " (largest seen " + std::to_string(worst) + ")"});
    }
    return res;
  };
}

// supdecay ------------------------------------------------------------------

Runner plan_soundness(const Config& c) {
  const std::uint64_t seed = c.get_uint(root, "seed");
  const std::size_t trials = read_count(c, "trials", limit_trials);
  const std::size_t max_degree = read_count(c, "max_degree", limit_degree);
  const std::size_t points = static_cast<std::size_t>(c.get_uint(root, "points", std::uint64_t{1} << 20));
  if (points == 0 || points > limit_points) bad(c, root, "points", "must be in [1, 2^24]");
  const std::size_t oversample = read_oversample(c);
  return [=](std::size_t threads) {
    struct Out {
      std::size_t degree;
      SupBound bound;
      double dense;
    };
    const auto outs = parallel_map<Out>(trials, threads, [&](std::size_t t) {
      auto engine = rng::make_engine({seed, t});
      const std::size_t degree = 1 + rng::uniform_index(engine, max_degree);
      std::vector<Complex> coeffs(degree);
      for (auto& z : coeffs) z = rng::unit_disk(engine);
      return Out{degree, sup_exp_sum(coeffs, oversample), dense_grid_max(coeffs, points)};
    });
    Result res;
    res.table.columns = {"trial", "degree", "lo", "dense", "hi", "contained"};
    std::size_t ok = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& o = outs[t];
      // lo and dense are maxima over nested grids computed by different arithmetic; allow rounding on that side.
      const bool contained = o.bound.lo <= o.dense * (1.0 + 1e-12) && o.dense <= o.bound.hi;
      ok += contained;
      res.table.rows.push_back(
          {std::uint64_t{t}, std::uint64_t{o.degree}, o.bound.lo, o.dense, o.bound.hi, contained});
    }
    res.assertions.push_back({"dense_within_bracket", ok == trials,
                              std::to_string(ok) + "/" + std::to_string(trials) + " dense maxima inside [lo, hi]"});
    return res;
  };
}

Runner plan_supdecay(const Config& c) {
  const std::string mode = c.find_string(root, "mode").value_or("decay");
  if (mode == "soundness") return plan_soundness(c);
  if (mode != "decay") bad(c, root, "mode", "expected decay or soundness");
  const Model model = parse_model(c, 1, 1);
  const auto seeds = read_seeds(c);
  const auto grid = read_grid(c, "grid", limit_supdecay);
  const std::size_t oversample = read_oversample(c);
  const bool expect_decreasing = c.get_bool(root, "expect_decreasing", false);
  std::optional<double> expect_ratio;
  if (c.has(root, "expect_ratio")) expect_ratio = read_probability_like(c, "expect_ratio", 0.0);

  return [=](std::size_t threads) {
    const auto outs = parallel_map<std::vector<SupBound>>(seeds.size(), threads, [&](std::size_t s) {
      const auto u = sample_model(model, {grid.back()}, seeds[s]);
      std::vector<SupBound> out;
      for (auto N : grid) out.push_back(sup_exp_sum(u[0], N, oversample));
      return out;
    });
    Result res;
    res.table.columns = {"seed", "N", "lo", "hi"};
    std::vector<double> mean_lo(grid.size(), 0.0), mean_hi(grid.size(), 0.0);
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      for (std::size_t g = 0; g < grid.size(); ++g) {
        res.table.rows.push_back({std::to_string(seeds[s]), std::uint64_t{grid[g]}, outs[s][g].lo, outs[s][g].hi});
        mean_lo[g] += outs[s][g].lo;
        mean_hi[g] += outs[s][g].hi;
      }
    }
    bool decreasing = true;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      mean_lo[g] /= static_cast<double>(seeds.size());
      mean_hi[g] /= static_cast<double>(seeds.size());
      res.table.rows.push_back({std::string("mean"), std::uint64_t{grid[g]}, mean_lo[g], mean_hi[g]});
      if (g && !(mean_hi[g] < mean_hi[g - 1])) decreasing = false;
    }
    if (expect_decreasing) {
      res.assertions.push_back({"mean_hi_decreasing", decreasing, "mean hi strictly decreasing along the grid"});
    }
    if (expect_ratio) {
      const double ratio = mean_hi.back() / mean_hi.front();
      res.assertions.push_back({"mean_hi_ratio", ratio <= *expect_ratio,
                                "hi(" + std::to_string(grid.back()) + ")/hi(" + std::to_string(grid.front()) +
                                    ") = " + brief(ratio) + " (need <= " + brief(*expect_ratio) + ")"});
    }
    return res;
  };
}

// eq4decay ------------------------------------------------------------------

Runner plan_eq4decay(const Config& c) {
  const Model model = parse_model(c, 2, 2);
  const auto seeds = read_seeds(c);
  const auto grid = read_grid(c, "grid", limit_eq4);
  const std::size_t oversample = read_oversample(c);
  std::optional<std::size_t> min_seeds;
  if (c.has(root, "expect_min_seeds")) {
    min_seeds = static_cast<std::size_t>(c.get_uint(root, "expect_min_seeds"));
    if (*min_seeds > seeds.size()) bad(c, root, "expect_min_seeds", "exceeds the number of seeds");
  }
  return [=](std::size_t threads) {
    std::vector<std::pair<std::size_t, std::size_t>> units;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      for (std::size_t g = 0; g < grid.size(); ++g) units.push_back({s, g});
    }
    const auto outs = parallel_map<Eq4Estimate>(units.size(), threads, [&](std::size_t i) {
      const auto [s, g] = units[i];
      const auto u = sample_model(model, {grid.back(), 2 * grid.back()}, seeds[s]);
      return eq4_estimator(u[0], u[1], grid[g], oversample);
    });
    Result res;
    res.table.columns = {"seed", "N", "lower", "upper"};
    std::size_t decreasing = 0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      bool dec = true;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto& e = outs[s * grid.size() + g];
        res.table.rows.push_back({seeds[s], std::uint64_t{grid[g]}, e.lower, e.upper});
        if (g && !(e.upper < outs[s * grid.size() + g - 1].upper)) dec = false;
      }
      decreasing += dec;
    }
    if (min_seeds) {
      res.assertions.push_back({"upper_decreasing", decreasing >= *min_seeds,
                                std::to_string(decreasing) + "/" + std::to_string(seeds.size()) +
                                    " seeds strictly decreasing (need " + std::to_string(*min_seeds) + ")"});
    }
    return res;
  };
}

// ---------------------------------------------------------------------------

Runner plan(const Config& c, std::string& kind) {
  kind = c.get_string(root, "kind");
  Runner r;
  if (kind == "lemma1") r = plan_lemma1(c);
  else if (kind == "converge2") r = plan_converge(c, 2);
  else if (kind == "converge3") r = plan_converge(c, 3);
  else if (kind == "twisted") r = plan_twisted(c);
  else if (kind == "cor1") r = plan_cor1(c);
  else if (kind == "khintchine") r = plan_khintchine(c);
  else if (kind == "syndetic") r = plan_syndetic(c);
  else if (kind == "supdecay") r = plan_supdecay(c);
  else if (kind == "eq4decay") r = plan_eq4decay(c);
  else bad(c, root, "kind", "unknown experiment kind '" + kind + "'; valid kinds: " + join(experiment_kinds(), ", "));
  c.find_string(root, "description");
  if (const auto out = c.find_string(root, "output"); out && out->empty()) bad(c, root, "output", "empty path");
  if (const auto f = c.find_string(root, "format")) {
    try {
      parse_format(*f);
    } catch (const std::invalid_argument& e) {
      bad(c, root, "format", e.what());
    }
  }
  c.require_all_used();
  return r;
}

void write_cell(std::ostream& out, const Cell& cell) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          out << format_double(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          out << (v ? "true" : "false");
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (v.find_first_of(",\"\n") == std::string::npos) {
            out << v;
          } else {
            out << '"';
            for (char ch : v) out << (ch == '"' ? "\"\"" : std::string(1, ch));
            out << '"';
          }
        } else {
          out << v;
        }
      },
      cell);
}

}  // namespace

bool RunRecord::passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"lemma1",     "converge2", "converge3", "twisted", "cor1",
                                              "khintchine", "syndetic",  "supdecay",  "eq4decay"};
  return kinds;
}

std::string list_experiments() {
  std::ostringstream o;
  o << "Experiment kinds (root key `kind`):\n"
       "\n"
       "  lemma1      random unit-disk triples, |M_N|^2 against 4 min(sup|c-sum|^2, sup|a-sum|^2)\n"
       "              keys: seed, trials, grid [, oversample]; N <= "
    << limit_lemma1
    << "\n"
       "  converge2   2-cube averages along a grid, with Cauchy gaps and |M_N - prod of integrals|\n"
       "              keys: seeds, grid, observable.1..3 [, method=fft|naive, expect_tol, expect_min_seeds,\n"
       "              expect_monotone_steps]; N <= "
    << limit_fft2 << " (fft), " << limit_naive2
    << " (naive)\n"
       "              mode=equivalence: seed, trials, max_n [, min_n, tolerance, trials3, max_n3, min_n3,\n"
       "              tolerance3]; fft against naive on random data; N <= "
    << limit_naive2 << " (arity 2), " << limit_naive3
    << " (arity 3)\n"
       "  converge3   3-cube averages of seven observables, same keys with observable.1..7; N <= "
    << limit_fft3 << " (fft), " << limit_naive3
    << " (naive)\n"
       "              mode=equivalence: seed, trials, max_n [, min_n, tolerance]\n"
       "  twisted     N^-2 sum b_m c_(m+n) e(nt) for each t\n"
       "              keys: seeds, grid, t, observable.1..2; N <= "
    << limit_twisted
    << "\n"
       "  cor1        exact finite-permutation averages against the conditional-expectation limit\n"
       "              explicit: pi1, pi2, A, grid;  random: seed, systems, max_k (<= "
    << limit_random_k << "), n (<= " << limit_cor1_n
    << ")\n"
       "  khintchine  limit >= mu(A)^3 as an exact comparison, asserted when the cycle partitions nest\n"
       "              explicit: pi1, pi2, A;  random: seed, systems, max_k [, single_cycle=true]\n"
       "  syndetic    window scan of the return set of A for k = 2 or 3 indicator observables\n"
       "              keys: seeds, lambda, window, observable.1..k [, condition=first_hit|none,\n"
       "              expect_nonempty, expect_max_gap]; window <= "
    << max_scan_window2 << " (k=2), " << max_scan_window3
    << " (k=3)\n"
       "  supdecay    certified [lo, hi] for sup_t |N^-1 sum a_n e(nt)| along a grid, with seed means\n"
       "              keys: seeds, grid, observable.1 [, oversample, expect_decreasing, expect_ratio]; N <= "
    << limit_supdecay
    << "\n"
       "              mode=soundness: seed, trials, max_degree (<= "
    << limit_degree << ") [, points (<= 2^24), oversample]\n"
       "  eq4decay    N^-1 sum_n sup_t |N^-1 sum_m u_m v_(n+m) e(mt)|^2, lower and certified upper\n"
       "              keys: seeds, grid, observable.1 (u), observable.2 (v) [, oversample,\n"
       "              expect_min_seeds]; N <= "
    << limit_eq4
    << "\n"
       "\n"
       "Common root keys: kind, output, format=csv|json, description. oversample is a power of two\n"
       "in [8, 1024], default "
    << default_oversample
    << ".\n"
       "Systems: [system.NAME] type=rotation (alpha, start), bernoulli (probabilities, seed, start),\n"
       "markov (transition, initial, seed, start), permutation (pi, start). Shift seeds are added to\n"
       "the run seed.\n"
       "Observables: [observable.I] system=NAME, type=character (k), indicator (symbols),\n"
       "cylinder (word), constant (value), meanzero (table).\n";
  return o.str();
}

void check_config(const Config& config) {
  std::string kind;
  plan(config, kind);
}

RunRecord run_experiment(const Config& config, const RunOptions& options) {
  RunRecord rec;
  const Runner runner = plan(config, rec.kind);
  rec.canonical_config = config.canonical();
  rec.config_hash = config.hash();
  if (auto out = config.find_string(root, "output")) rec.output_path = *out;
  if (auto f = config.find_string(root, "format")) rec.format = parse_format(*f);
  const auto t0 = std::chrono::steady_clock::now();
  Result r = runner(std::max<std::size_t>(options.threads, 1));
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rec.table = std::move(r.table);
  rec.assertions = std::move(r.assertions);
  return rec;
}

OutputFormat parse_format(const std::string& text) {
  if (text == "csv") return OutputFormat::csv;
  if (text == "json") return OutputFormat::json;
  throw std::invalid_argument("format must be csv or json");
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_csv(const RunRecord& record, std::ostream& out) {
  for (std::size_t i = 0; i < record.table.columns.size(); ++i) out << (i ? "," : "") << record.table.columns[i];
  out << '\n';
  for (const auto& row : record.table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      write_cell(out, row[i]);
    }
    out << '\n';
  }
}

void write_json(const RunRecord& record, std::ostream& out) {
  using nlohmann::json;
  json rows = json::array();
  for (const auto& row : record.table.rows) {
    json r = json::array();
    for (const auto& cell : row) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              if (std::isfinite(v)) {
                r.push_back(v);
              } else {
                r.push_back(nullptr);
              }
            } else {
              r.push_back(v);
            }
          },
          cell);
    }
    rows.push_back(std::move(r));
  }
  json assertions = json::array();
  for (const auto& a : record.assertions) assertions.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  json config = json::array();
  std::istringstream lines(record.canonical_config);
  for (std::string line; std::getline(lines, line);) config.push_back(line);
  const json doc{{"kind", record.kind},
                 {"config_hash", record.config_hash},
                 {"config", config},
                 {"columns", record.table.columns},
                 {"rows", rows},
                 {"assertions", assertions},
                 {"passed", record.passed()},
                 {"wall_seconds", record.wall_seconds}};
  out << doc.dump(2) << '\n';
}

}  // namespace ergocube
