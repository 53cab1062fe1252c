#pragma once

// Flat key=value experiment files.
//
//   # comment
//   kind = converge2
//   seeds = 1..10
//   [system.coin]
//   type = bernoulli
//   probabilities = 1/2, 1/2
//
// Keys before the first section header live in the root section "". Every
// key must be consumed by the experiment that reads the file; leftovers are
// reported as unknown.

#include "ergocube/rational.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergocube {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& message);
  /// 0 when the error is not tied to a line.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class Config {
 public:
  struct Entry {
    std::string value;
    std::size_t line = 0;
    bool used = false;
  };

  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  /// Section names in file order, e.g. "", "system.coin", "observable.1".
  std::vector<std::string> sections() const;
  std::vector<std::string> sections_with_prefix(const std::string& prefix) const;
  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;

  /// Accessors mark the key as used. The optional forms return nullopt if
  /// the key is absent; the plain forms throw ConfigError.
  std::string get_string(const std::string& section, const std::string& key) const;
  std::optional<std::string> find_string(const std::string& section, const std::string& key) const;
  std::uint64_t get_uint(const std::string& section, const std::string& key) const;
  std::uint64_t get_uint(const std::string& section, const std::string& key, std::uint64_t fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  Rational get_rational(const std::string& section, const std::string& key) const;
  /// Comma-separated list; items may be ranges "a..b" and powers "2^k".
  std::vector<std::uint64_t> get_uint_list(const std::string& section, const std::string& key) const;
  std::vector<double> get_double_list(const std::string& section, const std::string& key) const;
  std::vector<Rational> get_rational_list(const std::string& section, const std::string& key) const;
  /// Rows separated by ';', entries by ','.
  std::vector<std::vector<Rational>> get_rational_matrix(const std::string& section, const std::string& key) const;

  /// Throws ConfigError naming the first key that no accessor touched.
  void require_all_used() const;

  /// "section.key=value" lines sorted by section then key.
  std::string canonical() const;
  /// FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;

  std::size_t line_of(const std::string& section, const std::string& key) const;

 private:
  const Entry& entry(const std::string& section, const std::string& key) const;
  const Entry* find(const std::string& section, const std::string& key) const;
  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& message) const;

  std::vector<std::string> order_;
  mutable std::map<std::string, std::map<std::string, Entry>> data_;
  std::map<std::string, std::size_t> section_line_;
};

}  // namespace ergocube
