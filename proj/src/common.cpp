// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include "nbrec/common.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace nbrec {

uint64_t fnv1a(const std::string& bytes, uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a_hex(const std::string& bytes) {
  return fmt::format("{:016x}", fnv1a(bytes));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

uint64_t derive_seed(uint64_t master, uint64_t offset) {
  // splitmix64 finalizer over the combined value.
  uint64_t z = master + 0x9E3779B97F4A7C15ULL * (offset + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform01(Rng& rng) {
  boost::random::uniform_01<double> dist;
  return dist(rng);
}

double normal(Rng& rng, double mean, double sd) {
  boost::random::normal_distribution<double> dist(mean, sd);
  return dist(rng);
}

size_t uniform_index(Rng& rng, size_t n) {
  boost::random::uniform_int_distribution<size_t> dist(0, n - 1);
  return dist(rng);
}

}  // namespace nbrec
