// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "nbrec/estimators.hpp"
#include "test_util.hpp"

namespace nbrec {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Instance {
  RatingMatrix rhat, r;
  ObservationMask mask;
  RatingMatrix p;
  TreatmentRep rep;
};

// Random grid with a binary treatment from the row/column counts.
Instance random_instance(size_t nu, size_t ni, uint64_t seed) {
  Rng rng(seed);
  Instance s;
  s.rhat = testing::random_grid(nu, ni, 1.0, 5.0, rng);
  s.r = testing::random_grid(nu, ni, 1.0, 5.0, rng);
  s.p = testing::random_grid(nu, ni, 0.1, 0.9, rng);
  s.mask = ObservationMask(nu, ni, 0);
  for (size_t k = 0; k < s.mask.size(); ++k) {
    s.mask.values[k] = uniform01(rng) < s.p.values[k];
  }
  s.rep = compute_rep(NeighborhoodMode::kRowColumn, s.mask,
                      RepKind::kBinaryThreshold, 3.0);
  return s;
}

PropensityField unclipped(const RatingMatrix& p) {
  auto f = PropensityField::from_probs(p, kInf);
  f.clip_lo = 0.0;
  return f;
}

TEST(IdealLoss, Examples) {
  RatingMatrix a(2, 1), b(2, 1);
  a.values = {1, 3};
  b.values = {2, 5};
  EXPECT_EQ(ideal_loss(a, b, LossKind::kAbsolute), 1.5);
  EXPECT_EQ(ideal_loss(a, a, LossKind::kAbsolute), 0.0);
  EXPECT_THROW(ideal_loss(a, RatingMatrix(1, 2), LossKind::kAbsolute), DataError);
}

TEST(IdealLoss, MatchesLoopOracle) {
  const auto s = random_instance(10, 10, 1);
  double loop = 0.0;
  for (size_t u = 0; u < 10; ++u) {
    for (size_t i = 0; i < 10; ++i) loop += std::pow(s.rhat(u, i) - s.r(u, i), 2);
  }
  EXPECT_NEAR(ideal_loss(s.rhat, s.r, LossKind::kSquared), loop / 100, 1e-12);
}

TEST(IdealLossN, Reductions) {
  const auto s = random_instance(6, 7, 2);
  const auto pi = RepDistribution::uniform_binary();
  const double base = ideal_loss(s.rhat, s.r, LossKind::kAbsolute);
  EXPECT_EQ(ideal_loss_n(s.rhat, {s.r, s.r}, pi, LossKind::kAbsolute), base);
  const auto pm = RepDistribution::point_mass({0.0});
  EXPECT_EQ(ideal_loss_n(s.rhat, {s.r}, pm, LossKind::kAbsolute), base);
  EXPECT_THROW(ideal_loss_n(s.rhat, {s.r}, pi, LossKind::kAbsolute), DataError);
}

TEST(IdealLossN, HandExample) {
  // Errors under g=0: {1, 0, 2, 1} -> 1; under g=1: {0, 3, 1, 0} -> 1.
  RatingMatrix rhat(2, 2, 3.0), r0(2, 2), r1(2, 2);
  r0.values = {2, 3, 5, 4};
  r1.values = {3, 0, 4, 3};
  EXPECT_EQ(ideal_loss_n(rhat, {r0, r1}, RepDistribution::uniform_binary(),
                         LossKind::kAbsolute),
            1.0);
  const auto skewed = RepDistribution::discrete({{0.0}, {1.0}}, {0.25, 0.75});
  r1.values = {3, 3, 3, 3};
  EXPECT_EQ(ideal_loss_n(rhat, {r0, r1}, skewed, LossKind::kAbsolute), 0.25);
}

TEST(NaiveLoss, FullMaskSinglePairAndLoop) {
  const auto s = random_instance(5, 6, 3);
  EXPECT_NEAR(naive_loss(s.rhat, s.r, ObservationMask(5, 6, 1), LossKind::kSquared),
              ideal_loss(s.rhat, s.r, LossKind::kSquared), 1e-12);
  ObservationMask one(5, 6, 0);
  one(2, 3) = 1;
  EXPECT_EQ(naive_loss(s.rhat, s.r, one, LossKind::kAbsolute),
            std::abs(s.rhat(2, 3) - s.r(2, 3)));
  double sum = 0.0;
  size_t n = 0;
  for (size_t u = 0; u < 5; ++u) {
    for (size_t i = 0; i < 6; ++i) {
      if (s.mask(u, i)) {
        sum += std::abs(s.rhat(u, i) - s.r(u, i));
        ++n;
      }
    }
  }
  EXPECT_NEAR(naive_loss(s.rhat, s.r, s.mask, LossKind::kAbsolute), sum / n, 1e-12);
  EXPECT_THROW(naive_loss(s.rhat, s.r, ObservationMask(5, 6, 0), LossKind::kAbsolute),
               DataError);
}

TEST(IpsLoss, Examples) {
  const auto s = random_instance(4, 4, 4);
  const auto field = unclipped(RatingMatrix(4, 4, 1.0));
  EXPECT_NEAR(ips_loss(s.rhat, s.r, ObservationMask(4, 4, 1), field, LossKind::kSquared),
              ideal_loss(s.rhat, s.r, LossKind::kSquared), 1e-12);
  RatingMatrix rhat(1, 1, 3.0), r(1, 1, 1.0);
  EXPECT_EQ(ips_loss(rhat, r, ObservationMask(1, 1, 1),
                     PropensityField::from_probs(RatingMatrix(1, 1, 0.5)),
                     LossKind::kAbsolute),
            4.0);
}

TEST(IpsLoss, UnbiasedUnderOraclePropensities) {
  auto s = random_instance(6, 6, 5);
  const auto field = unclipped(s.p);
  const double ideal = ideal_loss(s.rhat, s.r, LossKind::kSquared);
  Rng rng(99);
  const int reps = 4000;
  double mean = 0.0, sq = 0.0;
  for (int t = 0; t < reps; ++t) {
    for (size_t k = 0; k < s.mask.size(); ++k) {
      s.mask.values[k] = uniform01(rng) < s.p.values[k];
    }
    const double e = ips_loss(s.rhat, s.r, s.mask, field, LossKind::kSquared);
    mean += e / reps;
    sq += e * e / reps;
  }
  const double se = std::sqrt((sq - mean * mean) / reps);
  EXPECT_LT(std::abs(mean - ideal), 4 * se);
}

TEST(DrLoss, PerfectImputationAndIdentity) {
  const auto s = random_instance(5, 5, 6);
  const auto field = unclipped(s.p);
  const auto err = error_from_matrices(s.rhat, s.r, LossKind::kSquared);
  EXPECT_NEAR(dr_loss(s.mask, field, err, err),
              ideal_loss(s.rhat, s.r, LossKind::kSquared), 1e-12);
  const PairError zero = [](size_t, size_t) { return 0.0; };
  EXPECT_NEAR(dr_loss(s.mask, field, err, zero), ips_loss(s.mask, field, err), 1e-12);
  // DR = IPS + mean(dhat) - IPS(dhat).
  const PairError half = [&](size_t u, size_t i) { return 0.5 * err(u, i) + 0.1; };
  double mean_half = 0.0;
  for (size_t u = 0; u < 5; ++u) {
    for (size_t i = 0; i < 5; ++i) mean_half += half(u, i) / 25;
  }
  EXPECT_NEAR(dr_loss(s.mask, field, err, half),
              ips_loss(s.mask, field, err) + mean_half - ips_loss(s.mask, field, half),
              1e-12);
}

TEST(NIpsLoss, GaussianSinglePair) {
  TreatmentRep rep;
  rep.n_users = rep.n_items = 1;
  rep.values = {0.7};
  rep.support = {SupportDim{{}, 0.0, 1.0}};
  const auto field = PropensityField::from_probs(RatingMatrix(1, 1, 0.5));
  const KernelSpec k{KernelFamily::kGaussian, {1.0}};
  const auto r = n_ips_loss(ObservationMask(1, 1, 1), rep, field, k,
                            RepDistribution::point_mass({0.7}),
                            [](size_t, size_t, size_t) { return 2.0; });
  EXPECT_NEAR(r.integrated, 1.5957691216, 1e-10);
  EXPECT_EQ(r.per_g.size(), 1u);
}

TEST(NIpsLoss, ReducesToIpsWithPointMassAndExactMatch) {
  for (uint64_t seed = 10; seed < 15; ++seed) {
    auto s = random_instance(7, 8, seed);
    // Single-valued g.
    std::fill(s.rep.values.begin(), s.rep.values.end(), 1.0);
    const auto field = PropensityField::from_probs(s.p);
    const auto err = error_from_matrices(s.rhat, s.r, LossKind::kAbsolute);
    const PairErrorAt err_at = [&](size_t u, size_t i, size_t) { return err(u, i); };
    const auto pm = RepDistribution::point_mass({1.0});
    const auto ke = KernelSpec::exact_match();
    const double ips = ips_loss(s.mask, field, err);
    EXPECT_NEAR(n_ips_loss(s.mask, s.rep, field, ke, pm, err_at).integrated, ips, 1e-12);
    const PairError imp = [&](size_t u, size_t i) { return 0.3 * s.rhat(u, i); };
    const PairErrorAt imp_at = [&](size_t u, size_t i, size_t) { return imp(u, i); };
    EXPECT_NEAR(n_dr_loss(s.mask, s.rep, field, ke, pm, err_at, imp_at).integrated,
                dr_loss(s.mask, field, err, imp), 1e-12);
  }
}

TEST(NDrLoss, PerfectAndZeroImputation) {
  const auto s = random_instance(6, 6, 20);
  Rng rng(3);
  const std::vector<RatingMatrix> pots{testing::random_grid(6, 6, 1, 5, rng),
                                       testing::random_grid(6, 6, 1, 5, rng)};
  const auto pi = RepDistribution::uniform_binary();
  const auto err = error_from_potentials(s.rhat, pots, LossKind::kSquared);
  auto field = unclipped(s.p);
  field.support_measure = 2.0;
  field.ratio = [](size_t u, size_t i, std::span<const double> g) {
    return 0.8 + 0.1 * g[0] + 0.01 * (u + i);
  };
  const auto ke = KernelSpec::exact_match();
  EXPECT_NEAR(n_dr_loss(s.mask, s.rep, field, ke, pi, err, err).integrated,
              ideal_loss_n(s.rhat, pots, pi, LossKind::kSquared), 1e-12);
  const PairErrorAt zero = [](size_t, size_t, size_t) { return 0.0; };
  const auto nips = n_ips_loss(s.mask, s.rep, field, ke, pi, err);
  const auto ndr = n_dr_loss(s.mask, s.rep, field, ke, pi, err, zero);
  EXPECT_NEAR(ndr.integrated, nips.integrated, 1e-12);
  for (size_t k = 0; k < 2; ++k) EXPECT_NEAR(ndr.per_g[k], nips.per_g[k], 1e-12);
}

TEST(NIpsLoss, MatchesLoopOracleAndIsLinear) {
  const auto s = random_instance(5, 7, 30);
  auto count_rep = compute_rep(NeighborhoodMode::kRowColumn, s.mask, RepKind::kCount);
  auto field = unclipped(s.p);
  field.support_measure = 3.0;
  field.ratio = [](size_t, size_t, std::span<const double> g) { return 1.0 + 0.05 * g[0]; };
  const KernelSpec k{KernelFamily::kEpanechnikov, {2.5}};
  const auto pi = RepDistribution::discrete({{1.0}, {3.0}, {4.5}}, {0.2, 0.5, 0.3});
  const auto err = [&](size_t u, size_t i, size_t kk) {
    return std::abs(s.rhat(u, i) - s.r(u, i)) * (1.0 + kk);
  };
  double oracle = 0.0;
  for (size_t kk = 0; kk < 3; ++kk) {
    const double g = pi.node(kk)[0];
    double acc = 0.0;
    for (size_t u = 0; u < 5; ++u) {
      for (size_t i = 0; i < 7; ++i) {
        if (!s.mask(u, i)) continue;
        const double t = (count_rep.at(u, i)[0] - g) / 2.5;
        const double kw = std::abs(t) < 1 ? 0.75 * (1 - t * t) / 2.5 : 0.0;
        const double inv = 3.0 * (1.0 + 0.05 * g) / s.p(u, i);
        acc += kw * err(u, i, kk) * inv;
      }
    }
    oracle += pi.weights[kk] * acc / 35.0;
  }
  const auto r = n_ips_loss(s.mask, count_rep, field, k, pi, err);
  EXPECT_NEAR(r.integrated, oracle, 1e-12);
  const auto r2 = n_ips_loss(s.mask, count_rep, field, k, pi,
                             [&](size_t u, size_t i, size_t kk) { return 2.5 * err(u, i, kk); });
  EXPECT_NEAR(r2.integrated, 2.5 * r.integrated, 1e-12);
}

TEST(NIpsLoss, ShapeAndDimensionChecks) {
  const auto s = random_instance(3, 3, 40);
  const auto field = PropensityField::from_probs(s.p);
  const PairErrorAt e = [](size_t, size_t, size_t) { return 1.0; };
  EXPECT_THROW(n_ips_loss(ObservationMask(2, 3, 1), s.rep, field,
                          KernelSpec::exact_match(), RepDistribution::uniform_binary(), e),
               DataError);
  EXPECT_THROW(n_ips_loss(s.mask, s.rep, field, KernelSpec::exact_match(2),
                          RepDistribution::uniform_binary(), e),
               ConfigError);
}

TEST(ReportCsv, Writes) {
  testing::TempDir dir("est");
  EstimateReport r{"N-IPS", {1.0, 2.0}, 1.5};
  write_report_csv({r}, RepDistribution::uniform_binary(), dir.file("r.csv"), "# h\n");
  EXPECT_EQ(read_file(dir.file("r.csv")),
            "# h\nestimator,g,loss,integrated\nN-IPS,0,1,1.5\nN-IPS,1,2,1.5\n");
}

}  // namespace
}  // namespace nbrec
