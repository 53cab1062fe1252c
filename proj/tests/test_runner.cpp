#include "doctest.h"

#include "ergocube/random.hpp"
#include "ergocube/runner.hpp"

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <sstream>

using namespace ergocube;

namespace {

std::string csv(const RunRecord& r) {
  std::ostringstream out;
  write_csv(r, out);
  return out.str();
}

std::size_t error_line(const std::string& text) {
  try {
    check_config(Config::parse(text));
  } catch (const ConfigError& e) {
    return e.line();
  }
  return 9999;
}

std::string error_text(const std::string& text) {
  try {
    check_config(Config::parse(text));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const std::string coin_triple = R"(
[system.coin]
type = bernoulli
probabilities = 1/2, 1/2
seed = 5

[observable.1]
system = coin
type = indicator
symbols = 0

[observable.2]
system = coin
type = indicator
symbols = 1

[observable.3]
system = coin
type = indicator
symbols = 0
)";

}  // namespace

TEST_CASE("config: sections, comments and lists") {
  const auto c = Config::parse(
      "# header\n"
      "kind = lemma1   # trailing\n"
      "grid = 1..3, 2^4, 100\n"
      "\n"
      "[system.a]\n"
      "type=rotation\n");
  CHECK(c.get_string("", "kind") == "lemma1");
  CHECK(c.get_uint_list("", "grid") == std::vector<std::uint64_t>{1, 2, 3, 16, 100});
  CHECK(c.get_string("system.a", "type") == "rotation");
  CHECK(c.sections() == std::vector<std::string>{"", "system.a"});
  CHECK(c.line_of("system.a", "type") == 6);
}

TEST_CASE("config: syntax errors carry line numbers") {
  auto line = [](const std::string& text) {
    try {
      Config::parse(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line("kind = a\nnonsense\n") == 2);
  CHECK(line("kind = a\n\n[system.x\n") == 3);
  CHECK(line("kind = a\nkind = b\n") == 2);
  CHECK(line("[s]\n[s]\n") == 2);
  CHECK(line("a.b = 1\n") == 1);
}

TEST_CASE("config: canonical form sorts keys and hashes stably") {
  const auto a = Config::parse("kind = x\nseed = 1\n[system.b]\ntype = t\n[system.a]\ntype = u\n");
  const auto b = Config::parse("# reordered\nseed = 1\nkind = x\n[system.a]\ntype = u\n[system.b]\ntype = t\n");
  CHECK(a.canonical() == "kind=x\nseed=1\nsystem.a.type=u\nsystem.b.type=t\n");
  CHECK(a.canonical() == b.canonical());
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  CHECK(Config::parse("kind = y\n").hash() != a.hash());
}

TEST_CASE("runner: unknown kind names the nine valid kinds") {
  const std::string msg = error_text("kind = cube4\n");
  for (const auto& k : experiment_kinds()) CHECK(msg.find(k) != std::string::npos);
  CHECK(experiment_kinds().size() == 9);
  CHECK(error_line("\nkind = cube4\n") == 2);
}

TEST_CASE("runner: field errors point at the offending line") {
  CHECK(error_line("kind = lemma1\nseed = 1\ntrials = 5\ngrid = 8, 8\n") == 4);
  CHECK(error_line("kind = lemma1\nseed = 1\ntrials = 5\ngrid = 8\ntypo = 3\n") == 5);
  CHECK(error_line("kind = lemma1\nseed = x\ntrials = 5\ngrid = 8\n") == 2);
  CHECK(error_line("kind = lemma1\nseed = 1\ntrials = 5\ngrid = 8\noversample = 12\n") == 5);
  CHECK(error_text("kind = lemma1\nseed = 1\ngrid = 8\n").find("missing required key 'trials'") != std::string::npos);
  CHECK(error_line("kind = lemma1\nseed = 1\ntrials = 5\ngrid = 8192\n") == 4);
  // indicator symbol outside the alphabet: reported at the observable's type line
  std::string text = "kind = converge2\nseeds = 1\ngrid = 8\n" + coin_triple;
  text.replace(text.rfind("symbols = 0"), 11, "symbols = 7");
  CHECK(error_line(text) == 22);
  CHECK(error_text("kind = converge2\nseeds = 1\ngrid = 8\n").find("observable") != std::string::npos);
}

TEST_CASE("runner: every checked-in config validates") {
  std::size_t count = 0;
  for (const auto& dir : {"acceptance", "examples"}) {
    for (const auto& entry : std::filesystem::directory_iterator(std::filesystem::path(ERGOCUBE_CONFIG_DIR) / dir)) {
      if (entry.path().filename() == "unknown_kind.ini") continue;
      INFO(entry.path().string());
      CHECK_NOTHROW(check_config(Config::load(entry.path().string())));
      ++count;
    }
  }
  CHECK(count >= 10);
}

TEST_CASE("runner: lemma1 example, 500 of 500 per N") {
  const auto r = run_experiment(Config::parse("kind = lemma1\nseed = 1\ntrials = 500\ngrid = 8..8, 16, 32, 64, 128, 256\n"));
  REQUIRE(r.table.rows.size() == 6);
  for (const auto& row : r.table.rows) CHECK(std::get<std::uint64_t>(row[2]) == 500);
  CHECK(r.passed());
}

TEST_CASE("runner: cor1 example, K = 4 and N = 100 give 1/4 both ways") {
  const auto r = run_experiment(Config::parse("kind = cor1\npi1 = 1,0,3,2\npi2 = 0,1,2,3\nA = 0,2\ngrid = 100\n"));
  REQUIRE(r.table.rows.size() == 1);
  CHECK(std::get<std::string>(r.table.rows[0][1]) == "1/4");
  CHECK(std::get<std::string>(r.table.rows[0][2]) == "1/4");
  CHECK(r.passed());
}

TEST_CASE("runner: converge2 on constants gives one with zero gaps") {
  const std::string text =
      "kind = converge2\nseeds = 1\ngrid = 8, 16, 32\nmethod = naive\n"
      "[system.coin]\ntype = bernoulli\nprobabilities = 1/2, 1/2\n"
      "[observable.1]\nsystem = coin\ntype = constant\nvalue = 1\n"
      "[observable.2]\nsystem = coin\ntype = constant\nvalue = 1\n"
      "[observable.3]\nsystem = coin\ntype = constant\nvalue = 1\n";
  const auto r = run_experiment(Config::parse(text));
  REQUIRE(r.table.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::get<double>(r.table.rows[i][2]) == 1.0);
    CHECK(std::get<double>(r.table.rows[i][3]) == 0.0);
    if (i) CHECK(std::get<double>(r.table.rows[i][7]) == 0.0);
  }
}

TEST_CASE("runner: output does not depend on the thread count") {
  const std::vector<std::string> configs{
      "kind = lemma1\nseed = 3\ntrials = 40\ngrid = 8, 16, 64\n",
      "kind = converge2\nseeds = 1..6\ngrid = 16, 64, 256\n" + coin_triple,
      "kind = converge2\nmode = equivalence\nseed = 2\ntrials = 30\nmax_n = 64\ntrials3 = 5\nmax_n3 = 16\n",
      "kind = cor1\nseed = 4\nsystems = 12\nmax_k = 9\nn = 500\n",
      "kind = supdecay\nmode = soundness\nseed = 5\ntrials = 6\nmax_degree = 20\npoints = 4096\n",
  };
  for (const auto& text : configs) {
    const auto cfg = Config::parse(text);
    const std::string one = csv(run_experiment(cfg, {1}));
    CHECK(csv(run_experiment(Config::parse(text), {4})) == one);
    CHECK(csv(run_experiment(Config::parse(text), {1})) == one);
  }
}

TEST_CASE("runner: shift seeds add to the run seed") {
  std::string a = "kind = converge2\nseeds = 3\ngrid = 32, 64\n" + coin_triple;
  std::string b = a;
  b.replace(b.find("seeds = 3"), 9, "seeds = 4");
  b.replace(b.find("seed = 5"), 8, "seed = 4");
  auto ra = run_experiment(Config::parse(a));
  auto rb = run_experiment(Config::parse(b));
  REQUIRE(ra.table.rows.size() == rb.table.rows.size());
  for (std::size_t i = 0; i < ra.table.rows.size(); ++i) {
    for (std::size_t j = 1; j < ra.table.rows[i].size(); ++j) {
      const auto& x = ra.table.rows[i][j];
      const auto& y = rb.table.rows[i][j];
      if (std::holds_alternative<double>(x) && std::isnan(std::get<double>(x))) {
        CHECK(std::isnan(std::get<double>(y)));
      } else {
        CHECK(x == y);
      }
    }
  }
}

TEST_CASE("runner: failing assertions make the record fail") {
  const auto r = run_experiment(
      Config::parse("kind = converge2\nseeds = 1, 2\ngrid = 16, 32\nexpect_tol = 0\n" + coin_triple));
  CHECK_FALSE(r.passed());
  REQUIRE(r.assertions.size() == 1);
  CHECK(r.assertions[0].name == "final_error");
}

TEST_CASE("csv: header row and 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-1.0 / 3.0) == "-0.33333333333333331");
  auto engine = rng::make_engine({41});
  for (int i = 0; i < 1000; ++i) {
    const double x = std::bit_cast<double>(engine());
    if (!std::isfinite(x)) continue;
    const std::string s = format_double(x);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    REQUIRE(std::bit_cast<std::uint64_t>(back) == std::bit_cast<std::uint64_t>(x));
  }
  const auto r = run_experiment(Config::parse("kind = lemma1\nseed = 1\ntrials = 2\ngrid = 8\n"));
  const std::string text = csv(r);
  CHECK(text.rfind("N,trials,holds,max_lhs_over_rhs\n8,2,2,", 0) == 0);
}

TEST_CASE("json: record carries the config echo and assertions") {
  const auto cfg = Config::parse("kind = khintchine\npi1 = 1,2,0\npi2 = 0,1,2\nA = 0\n");
  const auto r = run_experiment(cfg);
  std::ostringstream out;
  write_json(r, out);
  const auto doc = nlohmann::json::parse(out.str());
  CHECK(doc["kind"] == "khintchine");
  CHECK(doc["config_hash"] == cfg.hash());
  CHECK(doc["config"].size() == 4);
  CHECK(doc["passed"] == true);
  CHECK(doc["columns"].size() == doc["rows"][0].size());
  CHECK(doc["rows"][0][3] == "1/9");
  CHECK(doc["rows"][0][4] == "1/27");
}

TEST_CASE("list_experiments: stable catalog naming every kind") {
  const std::string a = list_experiments();
  CHECK(a == list_experiments());
  for (const auto& k : experiment_kinds()) CHECK(a.find("  " + k + " ") != std::string::npos);
}
