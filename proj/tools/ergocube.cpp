#include "ergocube/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace ergocube;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_assertion = 1;
constexpr int exit_config = 2;

int run(const std::string& path, const std::string& output, const std::string& format, std::size_t threads) {
  RunRecord rec;
  OutputFormat fmt = OutputFormat::csv;
  try {
    const Config cfg = Config::load(path);
    rec = run_experiment(cfg, RunOptions{threads});
    if (!format.empty()) {
      fmt = parse_format(format);
    } else if (rec.format) {
      fmt = *rec.format;
    }
  } catch (const ConfigError& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return exit_config;
  } catch (const std::invalid_argument& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return exit_config;
  } catch (const std::length_error& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return exit_config;
  }

  const std::string target = !output.empty() ? output : rec.output_path.value_or("");
  if (target.empty() || target == "-") {
    fmt == OutputFormat::csv ? write_csv(rec, std::cout) : write_json(rec, std::cout);
  } else {
    std::ofstream out(target);
    if (!out) {
      std::cerr << "cannot write " << target << '\n';
      return exit_config;
    }
    fmt == OutputFormat::csv ? write_csv(rec, out) : write_json(rec, out);
  }

  std::cerr << "kind=" << rec.kind << " config=" << rec.config_hash << " rows=" << rec.table.rows.size()
            << " wall=" << format_double(rec.wall_seconds) << "s\n";
  for (const auto& a : rec.assertions) {
    std::cerr << (a.passed ? "PASS " : "FAIL ") << a.name << ": " << a.detail << '\n';
  }
  return rec.passed() ? exit_ok : exit_assertion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cube averages, exponential sums and recurrence experiments"};
  app.require_subcommand(1);

  std::string path, output, format;
  std::size_t threads = 1;
  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
  run_cmd->add_option("config", path, "Config file")->required();
  run_cmd->add_option("--output,-o", output, "Output path ('-' for stdout); overrides the config");
  run_cmd->add_option("--format,-f", format, "csv or json; overrides the config")
      ->check(CLI::IsMember({"csv", "json"}));
  run_cmd->add_option("--threads,-j", threads, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1, 1024));

  app.add_subcommand("list", "Print the experiment catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  if (app.got_subcommand("list")) {
    std::cout << list_experiments();
    return exit_ok;
  }
  return run(path, output, format, threads);
}
