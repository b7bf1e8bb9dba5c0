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

// Text parameter format shared by all persisted models: a header line,
// `key=value` lines, and arrays written as `name <count>` followed by
// whitespace-separated shortest round-trip doubles.

#ifndef NBREC_SERIALIZE_HPP_
#define NBREC_SERIALIZE_HPP_

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nbrec/common.hpp"

namespace nbrec {

void expect_header(std::istream& in, const std::string& header);
std::string read_value(std::istream& in, const std::string& key);
void write_array(std::ostream& out, const std::string& name,
                 const std::vector<double>& values);
std::vector<double> read_array(std::istream& in, const std::string& name);

template <typename T>
T read_key(std::istream& in, const std::string& key) {
  std::istringstream ss(read_value(in, key));
  T v{};
  if (!(ss >> v)) throw ParseError("bad value for key " + key);
  return v;
}

}  // namespace nbrec

#endif  // NBREC_SERIALIZE_HPP_
