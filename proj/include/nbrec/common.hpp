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

#ifndef NBREC_COMMON_HPP_
#define NBREC_COMMON_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace nbrec {

// Error hierarchy. The CLI maps each family onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ParseError : public Error {
 public:
  using Error::Error;
};
class DataError : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};
class NumericError : public Error {
 public:
  using Error::Error;
};

using Rng = std::mt19937_64;

// 64-bit FNV-1a, used for config and file fingerprints.
uint64_t fnv1a(const std::string& bytes, uint64_t h = 0xcbf29ce484222325ULL);
std::string fnv1a_hex(const std::string& bytes);
std::string read_file(const std::string& path);

// Derives an independent stream seed from a master seed and an offset.
uint64_t derive_seed(uint64_t master, uint64_t offset);

// Dense row-major grid.
template <typename T>
struct Grid {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<T> values;

  Grid() = default;
  Grid(size_t r, size_t c, T fill = T{}) : rows(r), cols(c), values(r * c, fill) {}

  T& operator()(size_t u, size_t i) { return values[u * cols + i]; }
  const T& operator()(size_t u, size_t i) const { return values[u * cols + i]; }
  size_t size() const { return values.size(); }
  bool same_shape(const Grid& o) const { return rows == o.rows && cols == o.cols; }
  template <typename U>
  bool same_shape(const Grid<U>& o) const {
    return rows == o.rows && cols == o.cols;
  }
  bool operator==(const Grid& o) const = default;
};

using RatingMatrix = Grid<double>;
using ObservationMask = Grid<uint8_t>;

// Neumaier compensated accumulator; fixed call order gives bit-stable sums.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double uniform01(Rng& rng);
double normal(Rng& rng, double mean, double sd);
// Uniform index in [0, n).
size_t uniform_index(Rng& rng, size_t n);

// Fisher-Yates with the portable index draw above.
template <typename T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
  for (size_t k = v.size(); k > 1; --k) {
    std::swap(v[k - 1], v[uniform_index(rng, k)]);
  }
}

}  // namespace nbrec

#endif  // NBREC_COMMON_HPP_
