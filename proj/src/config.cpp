#include "ergocube/config.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace ergocube {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  for (;;) {
    const auto pos = s.find(sep, begin);
    out.push_back(trim(s.substr(begin, pos == std::string_view::npos ? std::string_view::npos : pos - begin)));
    if (pos == std::string_view::npos) break;
    begin = pos + 1;
  }
  return out;
}

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
  });
}

std::optional<std::uint64_t> to_uint(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// "17", "2^13"
std::optional<std::uint64_t> to_uint_term(std::string_view s) {
  if (const auto caret = s.find('^'); caret != std::string_view::npos) {
    const auto base = to_uint(s.substr(0, caret));
    const auto exponent = to_uint(s.substr(caret + 1));
    if (!base || !exponent) return std::nullopt;
    std::uint64_t v = 1;
    for (std::uint64_t i = 0; i < *exponent; ++i) {
      if (*base != 0 && v > UINT64_MAX / *base) return std::nullopt;
      v *= *base;
    }
    return v;
  }
  return to_uint(s);
}

std::string display(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

}  // namespace

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::string section;
  cfg.order_.push_back(section);
  cfg.data_[section];
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, "unterminated section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (!valid_name(section)) throw ConfigError(line, "invalid section name '" + section + "'");
      if (cfg.data_.count(section)) throw ConfigError(line, "duplicate section [" + section + "]");
      cfg.order_.push_back(section);
      cfg.data_[section];
      cfg.section_line_[section] = line;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected key = value");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    if (!valid_name(key) || key.find('.') != std::string::npos) throw ConfigError(line, "invalid key '" + key + "'");
    auto& entries = cfg.data_[section];
    if (entries.count(key)) {
      throw ConfigError(line, "duplicate key '" + display(section, key) + "' (first on line " +
                                  std::to_string(entries[key].line) + ")");
    }
    entries[key] = Entry{value, line, false};
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

std::vector<std::string> Config::sections() const { return order_; }

std::vector<std::string> Config::sections_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& s : order_) {
    if (s.rfind(prefix, 0) == 0) out.push_back(s);
  }
  return out;
}

bool Config::has_section(const std::string& section) const { return data_.count(section) > 0; }

bool Config::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
  const auto s = data_.find(section);
  if (s == data_.end()) return nullptr;
  const auto e = s->second.find(key);
  if (e == s->second.end()) return nullptr;
  e->second.used = true;
  return &e->second;
}

const Config::Entry& Config::entry(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) {
    const auto it = section_line_.find(section);
    throw ConfigError(it == section_line_.end() ? 0 : it->second,
                      "missing required key '" + display(section, key) + "'");
  }
  return *e;
}

void Config::fail(const std::string& section, const std::string& key, const std::string& message) const {
  const Entry* e = find(section, key);
  throw ConfigError(e ? e->line : 0, display(section, key) + ": " + message);
}

std::size_t Config::line_of(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (e) return e->line;
  const auto it = section_line_.find(section);
  return it == section_line_.end() ? 0 : it->second;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  return entry(section, key).value;
}

std::optional<std::string> Config::find_string(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  return e->value;
}

std::uint64_t Config::get_uint(const std::string& section, const std::string& key) const {
  const auto v = to_uint_term(entry(section, key).value);
  if (!v) fail(section, key, "expected a non-negative integer");
  return *v;
}

std::uint64_t Config::get_uint(const std::string& section, const std::string& key, std::uint64_t fallback) const {
  return has(section, key) ? get_uint(section, key) : fallback;
}

std::int64_t Config::get_int(const std::string& section, const std::string& key) const {
  const std::string& s = entry(section, key).value;
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(section, key, "expected an integer");
  return v;
}

double Config::get_double(const std::string& section, const std::string& key) const {
  const std::string& s = entry(section, key).value;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) fail(section, key, "expected a number");
  return v;
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string& s = entry(section, key).value;
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(section, key, "expected true or false");
}

Rational Config::get_rational(const std::string& section, const std::string& key) const {
  try {
    return parse_rational(entry(section, key).value);
  } catch (const std::invalid_argument& e) {
    fail(section, key, e.what());
  }
}

std::vector<std::uint64_t> Config::get_uint_list(const std::string& section, const std::string& key) const {
  const std::string& s = entry(section, key).value;
  std::vector<std::uint64_t> out;
  for (const auto& item : split(s, ',')) {
    if (const auto dots = item.find(".."); dots != std::string::npos) {
      const auto lo = to_uint_term(trim(std::string_view(item).substr(0, dots)));
      const auto hi = to_uint_term(trim(std::string_view(item).substr(dots + 2)));
      if (!lo || !hi || *lo > *hi) fail(section, key, "malformed range '" + item + "'");
      if (*hi - *lo > 10'000'000) fail(section, key, "range '" + item + "' is too long");
      for (std::uint64_t v = *lo;; ++v) {
        out.push_back(v);
        if (v == *hi) break;
      }
    } else {
      const auto v = to_uint_term(item);
      if (!v) fail(section, key, "expected non-negative integers, got '" + item + "'");
      out.push_back(*v);
    }
  }
  return out;
}

std::vector<double> Config::get_double_list(const std::string& section, const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split(entry(section, key).value, ',')) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || !std::isfinite(v)) {
      fail(section, key, "expected numbers, got '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<Rational> Config::get_rational_list(const std::string& section, const std::string& key) const {
  std::vector<Rational> out;
  for (const auto& item : split(entry(section, key).value, ',')) {
    try {
      out.push_back(parse_rational(item));
    } catch (const std::invalid_argument& e) {
      fail(section, key, e.what());
    }
  }
  return out;
}

std::vector<std::vector<Rational>> Config::get_rational_matrix(const std::string& section,
                                                               const std::string& key) const {
  std::vector<std::vector<Rational>> out;
  for (const auto& row : split(entry(section, key).value, ';')) {
    std::vector<Rational> r;
    for (const auto& item : split(row, ',')) {
      try {
        r.push_back(parse_rational(item));
      } catch (const std::invalid_argument& e) {
        fail(section, key, e.what());
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

void Config::require_all_used() const {
  const Entry* first = nullptr;
  std::string where;
  for (const auto& [section, entries] : data_) {
    for (const auto& [key, e] : entries) {
      if (!e.used && (!first || e.line < first->line)) {
        first = &e;
        where = display(section, key);
      }
    }
  }
  if (first) throw ConfigError(first->line, "unknown key '" + where + "'");
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [section, entries] : data_) {
    for (const auto& [key, e] : entries) out += display(section, key) + "=" + e.value + "\n";
  }
  return out;
}

std::string Config::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 15];
  return out;
}

}  // namespace ergocube
