// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "nbrec/neighborhood.hpp"
#include "test_util.hpp"

namespace nbrec {
namespace {

using Pairs = std::set<std::pair<size_t, size_t>>;

Pairs as_set(const std::vector<std::pair<size_t, size_t>>& v) {
  return Pairs(v.begin(), v.end());
}

TEST(Neighbors, RowColumnCross) {
  const auto n = neighbors(NeighborhoodMode::kRowColumn, 1, 1, 3, 3);
  EXPECT_EQ(n.size(), 4u);
  EXPECT_EQ(as_set(n), (Pairs{{1, 0}, {1, 2}, {0, 1}, {2, 1}}));
}

TEST(Neighbors, UserAndItemHistory) {
  EXPECT_EQ(as_set(neighbors(NeighborhoodMode::kUserHistory, 2, 1, 4, 3)),
            (Pairs{{2, 0}, {2, 2}}));
  EXPECT_EQ(as_set(neighbors(NeighborhoodMode::kItemHistory, 2, 1, 4, 3)),
            (Pairs{{0, 1}, {1, 1}, {3, 1}}));
  EXPECT_EQ(as_set(neighbors(NeighborhoodMode::kInteraction, 1, 1, 3, 3)),
            as_set(neighbors(NeighborhoodMode::kRowColumn, 1, 1, 3, 3)));
}

TEST(Neighbors, SingleCellHasNone) {
  for (auto m : {NeighborhoodMode::kRowColumn, NeighborhoodMode::kUserHistory,
                 NeighborhoodMode::kItemHistory}) {
    EXPECT_TRUE(neighbors(m, 0, 0, 1, 1).empty());
  }
  EXPECT_THROW(neighbors(NeighborhoodMode::kRowColumn, 1, 0, 1, 1), DataError);
}

TEST(NeighborCounts, MatchBruteForce) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto mask = testing::random_mask(4, 5, 0.4, rng);
    for (auto mode : {NeighborhoodMode::kRowColumn, NeighborhoodMode::kUserHistory,
                      NeighborhoodMode::kItemHistory}) {
      const auto counts = neighbor_counts(mode, mask);
      for (size_t u = 0; u < 4; ++u) {
        for (size_t i = 0; i < 5; ++i) {
          double brute = 0.0;
          for (auto [v, j] : neighbors(mode, u, i, 4, 5)) brute += mask(v, j);
          ASSERT_EQ(counts[u * 5 + i], brute);
        }
      }
    }
    const auto two = neighbor_counts(NeighborhoodMode::kInteraction, mask);
    const auto row = neighbor_counts(NeighborhoodMode::kUserHistory, mask);
    const auto col = neighbor_counts(NeighborhoodMode::kItemHistory, mask);
    for (size_t k = 0; k < 20; ++k) {
      ASSERT_EQ(two[2 * k], row[k]);
      ASSERT_EQ(two[2 * k + 1], col[k]);
    }
  }
}

TEST(MedianThreshold, LowerMedian) {
  const std::vector<double> odd{3, 1, 2}, even{4, 1, 3, 2};
  EXPECT_EQ(median_threshold(odd), 2.0);
  EXPECT_EQ(median_threshold(even), 2.0);
  EXPECT_THROW(median_threshold(std::vector<double>{}), DataError);
}

TEST(MedianThreshold, MatchesSortOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(1 + uniform_index(rng, 40));
    for (auto& x : v) x = static_cast<double>(uniform_index(rng, 10));
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(median_threshold(v), sorted[(sorted.size() - 1) / 2]);
  }
}

TEST(ComputeRep, BinaryThreshold) {
  // Row 0 fully exposed: pair (0, 0) sees 4 + 1 neighbors.
  ObservationMask m(3, 5, 0);
  for (size_t i = 0; i < 5; ++i) m(0, i) = 1;
  m(1, 0) = 1;
  const auto rep = compute_rep(NeighborhoodMode::kRowColumn, m,
                               RepKind::kBinaryThreshold, 3.0);
  EXPECT_EQ(rep.at(0, 0)[0], 1.0);
  EXPECT_EQ(rep.at(2, 4)[0], 0.0);  // 1 exposed neighbor
  EXPECT_EQ(rep.support_measure(), 2.0);

  ObservationMask empty(3, 3, 0);
  const auto z = compute_rep(NeighborhoodMode::kRowColumn, empty,
                             RepKind::kBinaryThreshold, 1.0);
  for (double g : z.values) EXPECT_EQ(g, 0.0);
}

TEST(ComputeRep, CountAndThresholdAgree) {
  Rng rng(2);
  const auto mask = testing::random_mask(6, 7, 0.3, rng);
  const auto counts = compute_rep(NeighborhoodMode::kRowColumn, mask, RepKind::kCount);
  const auto bin = compute_rep(NeighborhoodMode::kRowColumn, mask,
                               RepKind::kBinaryThreshold);
  std::vector<double> obs;
  for (size_t k = 0; k < mask.size(); ++k) {
    if (mask.values[k]) obs.push_back(counts.values[k]);
  }
  const double c = median_threshold(obs);
  for (size_t k = 0; k < mask.size(); ++k) {
    EXPECT_EQ(bin.values[k], counts.values[k] >= c ? 1.0 : 0.0);
  }
  const double hi = *std::max_element(counts.values.begin(), counts.values.end());
  EXPECT_EQ(counts.support[0].points.size(), static_cast<size_t>(hi) + 1);
}

TEST(ComputeRep, BinaryNeedsScalarMode) {
  ObservationMask m(2, 2, 1);
  EXPECT_THROW(compute_rep(NeighborhoodMode::kInteraction, m,
                           RepKind::kBinaryThreshold),
               ConfigError);
  const auto two = compute_rep(NeighborhoodMode::kInteraction, m, RepKind::kCount);
  EXPECT_EQ(two.dim, 2u);
  EXPECT_EQ(two.at(1, 0)[0], 1.0);
  EXPECT_EQ(two.at(1, 0)[1], 1.0);
}

TEST(RepDistribution, ConstantIntegratesToOne) {
  const auto d = RepDistribution::from_density([](double) { return 1.0; }, 0.0, 1.0);
  EXPECT_EQ(d.size(), 64u);
  EXPECT_NEAR(d.integrate([](std::span<const double>) { return 1.0; }), 1.0, 1e-13);
  // E[g^2] for g ~ U(0, 1).
  EXPECT_NEAR(d.integrate([](std::span<const double> g) { return g[0] * g[0]; }),
              1.0 / 3.0, 1e-13);
  EXPECT_THROW(RepDistribution::from_density([](double) { return 2.0; }, 0.0, 1.0),
               ConfigError);
}

TEST(RepDistribution, DiscreteValidation) {
  EXPECT_THROW(RepDistribution::discrete({{0.0}, {1.0}}, {0.5, 0.6}), ConfigError);
  EXPECT_THROW(RepDistribution::discrete({{0.0}, {1.0, 2.0}}, {0.5, 0.5}),
               ConfigError);
  const auto b = RepDistribution::uniform_binary();
  EXPECT_EQ(b.size(), 2u);
  EXPECT_EQ(b.node(1)[0], 1.0);
}

TEST(RepDistribution, UniformOverSupport) {
  ObservationMask m(3, 4, 1);
  const auto rep = compute_rep(NeighborhoodMode::kInteraction, m, RepKind::kCount);
  // Row counts 0..3, column counts 0..2.
  const auto pi = RepDistribution::uniform_over_support(rep, 10);
  EXPECT_EQ(pi.size(), 12u);
  EXPECT_EQ(pi.dim, 2u);
  const auto coarse = RepDistribution::uniform_grid(0.0, 100.0, 5);
  EXPECT_EQ(coarse.size(), 5u);
  EXPECT_EQ(coarse.node(4)[0], 100.0);
}

TEST(RepTsv, RoundTrip) {
  testing::TempDir dir("rep");
  Rng rng(4);
  const auto mask = testing::random_mask(5, 6, 0.5, rng);
  for (auto mode : {NeighborhoodMode::kRowColumn, NeighborhoodMode::kInteraction}) {
    const auto rep = compute_rep(mode, mask, RepKind::kCount);
    write_rep_tsv(rep, dir.file("g.tsv"));
    EXPECT_EQ(read_rep_tsv(dir.file("g.tsv"), 5, 6), rep);
  }
}

TEST(ParseMode, Names) {
  for (auto m : {NeighborhoodMode::kRowColumn, NeighborhoodMode::kUserHistory,
                 NeighborhoodMode::kItemHistory, NeighborhoodMode::kInteraction}) {
    EXPECT_EQ(parse_neighborhood_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_neighborhood_mode("diagonal"), ConfigError);
}

}  // namespace
}  // namespace nbrec
