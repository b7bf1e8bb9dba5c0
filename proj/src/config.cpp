// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include "nbrec/config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <sstream>

#include "nbrec/eval.hpp"

namespace nbrec {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, v));
  }
  return out;
}

long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ConfigError(fmt::format("{}: '{}' is not an integer", key, v));
  }
  return out;
}

std::vector<std::string> split_commas(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& source) {
  Config c;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
      throw ConfigError(fmt::format("{}:{}: expected key=value", source, lineno));
    }
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse(text, path);
}

void Config::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must be key=value: " + assignment);
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) {
  if (key.empty()) throw ConfigError("empty config key");
  values_[key] = value;
}

std::optional<std::string> Config::find(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

std::string Config::require(const std::string& key) const {
  auto v = find(key);
  if (!v || v->empty()) throw ConfigError("missing required key " + key);
  return *v;
}

double Config::real(const std::string& key, double fallback) const {
  auto v = find(key);
  return v ? to_real(key, *v) : fallback;
}

long Config::integer(const std::string& key, long fallback) const {
  auto v = find(key);
  return v ? to_long(key, *v) : fallback;
}

size_t Config::count(const std::string& key, size_t fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  const long x = to_long(key, *v);
  if (x < 0) throw ConfigError(fmt::format("{} must be non-negative", key));
  return static_cast<size_t>(x);
}

uint64_t Config::seed(const std::string& key, uint64_t fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  uint64_t out = 0;
  const auto r = std::from_chars(v->data(), v->data() + v->size(), out);
  if (r.ec != std::errc() || r.ptr != v->data() + v->size()) {
    throw ConfigError(fmt::format("{}: '{}' is not a seed", key, *v));
  }
  return out;
}

bool Config::flag(const std::string& key, bool fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, *v));
}

std::vector<double> Config::reals(const std::string& key,
                                  const std::vector<double>& fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  if (v->find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(*v);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(trim(tok));
    if (parts.size() != 3) throw ConfigError(key + ": range must be lo:hi:n");
    return geometric_grid(to_real(key, parts[0]), to_real(key, parts[1]),
                          static_cast<size_t>(to_long(key, parts[2])));
  }
  std::vector<double> out;
  for (const auto& t : split_commas(*v)) out.push_back(to_real(key, t));
  return out;
}

std::vector<std::string> Config::strings(
    const std::string& key, const std::vector<std::string>& fallback) const {
  auto v = find(key);
  return v ? split_commas(*v) : fallback;
}

void Config::check_known(const std::set<std::string>& known) const {
  for (const auto& [k, v] : values_) {
    bool ok = known.count(k) > 0;
    for (const auto& p : known) {
      if (!ok && !p.empty() && p.back() == '.' && k.rfind(p, 0) == 0) ok = true;
    }
    if (!ok) throw ConfigError("unknown config key " + k);
  }
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::string Config::hash() const {
  std::string text;
  for (const auto& [k, v] : values_) {
    if (k.rfind("output.", 0) != 0) text += k + "=" + v + "\n";
  }
  return fnv1a_hex(text);
}

std::string Config::header() const { return "# config_hash=" + hash() + "\n"; }

}  // namespace nbrec
