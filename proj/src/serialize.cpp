// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include "nbrec/serialize.hpp"

#include <fmt/format.h>

#include <cstdlib>

namespace nbrec {

void expect_header(std::istream& in, const std::string& header) {
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw ParseError(fmt::format("expected '{}', got '{}'", header, line));
  }
}

std::string read_value(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing key " + key);
  const auto eq = line.find('=');
  if (eq == std::string::npos || line.substr(0, eq) != key) {
    throw ParseError(fmt::format("expected key '{}', got '{}'", key, line));
  }
  return line.substr(eq + 1);
}

void write_array(std::ostream& out, const std::string& name,
                 const std::vector<double>& values) {
  out << name << ' ' << values.size() << '\n';
  for (size_t k = 0; k < values.size(); ++k) {
    out << fmt::format("{}", values[k]) << ((k + 1) % 8 == 0 ? '\n' : ' ');
  }
  out << '\n';
}

std::vector<double> read_array(std::istream& in, const std::string& name) {
  std::string tag;
  size_t n = 0;
  if (!(in >> tag >> n) || tag != name) {
    throw ParseError("expected array " + name);
  }
  std::vector<double> v(n);
  std::string tok;
  for (size_t k = 0; k < n; ++k) {
    if (!(in >> tok)) throw ParseError("short array " + name);
    v[k] = std::strtod(tok.c_str(), nullptr);
  }
  std::getline(in, tok);
  // Consume the terminating blank line.
  if (in.peek() == '\n') in.get();
  return v;
}

}  // namespace nbrec
