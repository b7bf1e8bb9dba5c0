/*
 * Copyright 2026 The nbrec Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NBREC_CONFIG_HPP_
#define NBREC_CONFIG_HPP_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nbrec/common.hpp"

namespace nbrec {

// Flat key=value configuration. Lines starting with '#' are comments; keys
// are dotted paths such as `train.lr`. Later assignments override earlier
// ones.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& source = "<string>");
  static Config load(const std::string& path);

  // Applies a single `key=value` override.
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::optional<std::string> find(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double real(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  size_t count(const std::string& key, size_t fallback) const;
  uint64_t seed(const std::string& key, uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  // Comma-separated reals or a `lo:hi:n` geometric range.
  std::vector<double> reals(const std::string& key,
                            const std::vector<double>& fallback) const;
  std::vector<std::string> strings(const std::string& key,
                                   const std::vector<std::string>& fallback) const;

  // Throws ConfigError naming the first key outside `known` (prefix match
  // when an entry ends with '.').
  void check_known(const std::set<std::string>& known) const;

  // Canonical `key=value` lines, sorted.
  std::string canonical() const;
  // Hash of the canonical lines without `output.*` keys, so reruns into a
  // different directory share it.
  std::string hash() const;
  // `# config_hash=<hex>` line for output headers.
  std::string header() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace nbrec

#endif  // NBREC_CONFIG_HPP_
