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

#ifndef NBREC_NEIGHBORHOOD_HPP_
#define NBREC_NEIGHBORHOOD_HPP_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nbrec/common.hpp"

namespace nbrec {

// kRowColumn: same row or same column. kUserHistory: same row.
// kItemHistory: same column. kInteraction: same neighbor set as kRowColumn,
// but the count representation keeps the row and column parts as a
// two-dimensional g.
enum class NeighborhoodMode { kRowColumn, kUserHistory, kItemHistory, kInteraction };

NeighborhoodMode parse_neighborhood_mode(const std::string& s);
std::string to_string(NeighborhoodMode mode);

enum class RepKind { kBinaryThreshold, kCount, kCustom };

std::vector<std::pair<size_t, size_t>> neighbors(NeighborhoodMode mode,
                                                 size_t u, size_t i,
                                                 size_t n_users,
                                                 size_t n_items);

// Support of g along one dimension: either a finite set of points or a
// closed interval.
struct SupportDim {
  std::vector<double> points;  // empty means continuous on [lo, hi]
  double lo = 0.0;
  double hi = 1.0;

  bool discrete() const { return !points.empty(); }
  // Counting measure for discrete supports, interval length otherwise.
  double measure() const;
  double sample(Rng& rng) const;
};

struct TreatmentRep {
  size_t n_users = 0;
  size_t n_items = 0;
  size_t dim = 1;
  RepKind kind = RepKind::kCount;
  std::vector<double> values;  // (u * n_items + i) * dim + s
  std::vector<SupportDim> support;

  std::span<const double> at(size_t u, size_t i) const {
    return {values.data() + (u * n_items + i) * dim, dim};
  }
  double& scalar(size_t u, size_t i) { return values[u * n_items + i]; }
  // Product measure of the support, the constant c in the joint propensity.
  double support_measure() const;
  bool operator==(const TreatmentRep& o) const {
    return n_users == o.n_users && n_items == o.n_items && dim == o.dim &&
           kind == o.kind && values == o.values;
  }
};

// Per-pair neighbor exposure counts. kInteraction yields two columns.
std::vector<double> neighbor_counts(NeighborhoodMode mode,
                                    const ObservationMask& mask);

// Lower median of the counts at observed pairs.
double median_threshold(std::span<const double> observed_counts);

// kBinaryThreshold requires a scalar mode; when `threshold` is empty the
// lower median over observed pairs is used. kCount support is the integer
// range [0, max observed count] per dimension.
TreatmentRep compute_rep(NeighborhoodMode mode, const ObservationMask& mask,
                         RepKind kind,
                         std::optional<double> threshold = std::nullopt);

// Reference distribution as weighted nodes; continuous densities are reduced
// to Gauss-Legendre nodes.
struct RepDistribution {
  size_t dim = 1;
  std::vector<double> nodes;  // k * dim + s
  std::vector<double> weights;

  size_t size() const { return weights.size(); }
  std::span<const double> node(size_t k) const {
    return {nodes.data() + k * dim, dim};
  }
  double integrate(const std::function<double(std::span<const double>)>& f) const;

  static RepDistribution discrete(std::vector<std::vector<double>> points,
                                  std::vector<double> weights);
  static RepDistribution point_mass(std::vector<double> g);
  static RepDistribution uniform_binary();
  // Uniform over the integers in [lo, hi]; when there are more than
  // `max_points` integers, uniform over `max_points` evenly spaced values.
  static RepDistribution uniform_grid(double lo, double hi, size_t max_points);
  // Product of per-dimension uniform grids for a count representation.
  static RepDistribution uniform_over_support(const TreatmentRep& rep,
                                              size_t max_points_per_dim);
  // 64-node Gauss-Legendre reduction of a scalar density on [lo, hi].
  static RepDistribution from_density(const std::function<double(double)>& pdf,
                                      double lo, double hi);
};

// TSV `user<TAB>item<TAB>g1[,g2,...]` for every pair.
void write_rep_tsv(const TreatmentRep& rep, const std::string& path);
TreatmentRep read_rep_tsv(const std::string& path, size_t n_users,
                          size_t n_items);

}  // namespace nbrec

#endif  // NBREC_NEIGHBORHOOD_HPP_
