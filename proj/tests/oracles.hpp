// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.
//
// Direct-formula metric oracles, written independently of the library.

#ifndef NBREC_TESTS_ORACLES_HPP_
#define NBREC_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "nbrec/common.hpp"

namespace nbrec::testing {

// Fraction of (positive, negative) pairs ordered correctly; ties count 1/2.
inline double auc_pair_oracle(const std::vector<double>& s, const std::vector<double>& y) {
  double good = 0.0, pairs = 0.0;
  for (size_t a = 0; a < s.size(); ++a) {
    if (y[a] <= 0.5) continue;
    for (size_t b = 0; b < s.size(); ++b) {
      if (y[b] > 0.5) continue;
      pairs += 1.0;
      good += s[a] > s[b] ? 1.0 : (s[a] == s[b] ? 0.5 : 0.0);
    }
  }
  return good / pairs;
}

// DCG@k / IDCG@k of one group; rank r (0-based) is discounted by log2(r + 2).
// Items are ranked by descending score, earlier index first among ties.
inline double ndcg_group_oracle(const std::vector<double>& s, const std::vector<double>& rel,
                                size_t k) {
  std::vector<size_t> idx(s.size());
  for (size_t a = 0; a < idx.size(); ++a) idx[a] = a;
  // Selection sort keeps the tie rule explicit.
  for (size_t a = 0; a < idx.size(); ++a) {
    size_t best = a;
    for (size_t b = a + 1; b < idx.size(); ++b) {
      const size_t x = idx[b], y = idx[best];
      if (s[x] > s[y] || (s[x] == s[y] && x < y)) best = b;
    }
    std::swap(idx[a], idx[best]);
  }
  std::vector<double> sorted_rel = rel;
  std::sort(sorted_rel.rbegin(), sorted_rel.rend());
  double dcg = 0.0, idcg = 0.0;
  for (size_t r = 0; r < k && r < s.size(); ++r) {
    dcg += rel[idx[r]] / std::log2(r + 2.0);
    idcg += sorted_rel[r] / std::log2(r + 2.0);
  }
  return idcg > 0.0 ? dcg / idcg : -1.0;
}

struct RankingInstance {
  std::vector<std::vector<double>> scores, relevance;
  std::vector<double> flat_scores, flat_labels;
};

// Groups of 3..12 items with coarse scores (ties are common) and graded
// relevance in {0, 1, 2, 3}.
inline RankingInstance random_ranking_instance(uint64_t seed) {
  Rng rng(seed);
  RankingInstance inst;
  const size_t groups = 1 + uniform_index(rng, 8);
  for (size_t q = 0; q < groups; ++q) {
    const size_t n = 3 + uniform_index(rng, 10);
    std::vector<double> s(n), r(n);
    for (size_t a = 0; a < n; ++a) {
      s[a] = static_cast<double>(uniform_index(rng, 6)) + (uniform01(rng) < 0.5 ? 0.0 : 0.25);
      r[a] = static_cast<double>(uniform_index(rng, 4));
      inst.flat_scores.push_back(s[a] + 0.1 * normal(rng, 0.0, 1.0));
      inst.flat_labels.push_back(r[a] >= 2.0 ? 1.0 : 0.0);
    }
    inst.scores.push_back(std::move(s));
    inst.relevance.push_back(std::move(r));
  }
  // Both classes for AUC.
  inst.flat_labels[0] = 1.0;
  inst.flat_labels[1] = 0.0;
  // Coarsen half of the flat scores to create ties.
  for (size_t a = 0; a < inst.flat_scores.size(); a += 2) {
    inst.flat_scores[a] = std::round(inst.flat_scores[a]);
  }
  return inst;
}

inline double ndcg_oracle(const RankingInstance& inst, size_t k) {
  double total = 0.0;
  size_t n = 0;
  for (size_t q = 0; q < inst.scores.size(); ++q) {
    const double v = ndcg_group_oracle(inst.scores[q], inst.relevance[q], k);
    if (v < 0.0) continue;
    total += v;
    ++n;
  }
  return n ? total / n : std::nan("");
}

}  // namespace nbrec::testing

#endif  // NBREC_TESTS_ORACLES_HPP_
