#pragma once

// Experiment runner: turns a Config into a RunRecord (one result table plus
// assertion outcomes) and serialises it as CSV or JSON.

#include "ergocube/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ergocube {

using Cell = std::variant<std::int64_t, std::uint64_t, double, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

enum class OutputFormat { csv, json };

struct RunRecord {
  std::string kind;
  std::string canonical_config;
  std::string config_hash;
  Table table;
  std::vector<Assertion> assertions;
  double wall_seconds = 0.0;
  /// From the config's root `output` / `format` keys, if present.
  std::optional<std::string> output_path;
  std::optional<OutputFormat> format;

  bool passed() const;
};

struct RunOptions {
  std::size_t threads = 1;
};

/// The nine experiment kinds, in catalog order.
const std::vector<std::string>& experiment_kinds();

/// Human-readable catalog: kinds, keys, size limits.
std::string list_experiments();

/// Parses and validates every key the experiment needs without running it.
/// Throws ConfigError.
void check_config(const Config& config);

/// Runs the experiment. Throws ConfigError for invalid configs.
RunRecord run_experiment(const Config& config, const RunOptions& options = {});

OutputFormat parse_format(const std::string& text);

/// 17 significant digits, '.' separator, independent of the locale.
std::string format_double(double value);

void write_csv(const RunRecord& record, std::ostream& out);
void write_json(const RunRecord& record, std::ostream& out);

}  // namespace ergocube
