// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include <gtest/gtest.h>

#include <cmath>

#include "nbrec/common.hpp"
#include "nbrec/loss.hpp"

namespace nbrec {
namespace {

TEST(PointwiseLoss, Values) {
  EXPECT_EQ(pointwise_loss(LossKind::kAbsolute, 1.0, 3.5), 2.5);
  EXPECT_EQ(pointwise_loss(LossKind::kSquared, 1.0, 3.5), 6.25);
  EXPECT_NEAR(pointwise_loss(LossKind::kCrossEntropy, 0.25, 1.0), std::log(4.0), 1e-15);
  EXPECT_NEAR(pointwise_loss(LossKind::kCrossEntropy, 0.25, 0.0), std::log(4.0 / 3.0),
              1e-15);
  EXPECT_TRUE(std::isfinite(pointwise_loss(LossKind::kCrossEntropy, 0.0, 1.0)));
}

TEST(PointwiseLoss, DerivativesMatchFiniteDifferences) {
  const double eps = 1e-6;
  for (auto k : {LossKind::kAbsolute, LossKind::kSquared, LossKind::kCrossEntropy}) {
    for (auto [p, y] : {std::pair{0.3, 0.9}, {0.7, 0.1}, {0.55, 1.0}}) {
      const double dp = (pointwise_loss(k, p + eps, y) - pointwise_loss(k, p - eps, y)) /
                        (2 * eps);
      const double dy = (pointwise_loss(k, p, y + eps) - pointwise_loss(k, p, y - eps)) /
                        (2 * eps);
      EXPECT_NEAR(loss_dpred(k, p, y), dp, 1e-6 * std::max(1.0, std::abs(dp)));
      EXPECT_NEAR(loss_dtarget(k, p, y), dy, 1e-6 * std::max(1.0, std::abs(dy)));
    }
  }
}

TEST(LossKind, ParseAliases) {
  EXPECT_EQ(parse_loss_kind("mae"), LossKind::kAbsolute);
  EXPECT_EQ(parse_loss_kind("mse"), LossKind::kSquared);
  EXPECT_EQ(parse_loss_kind("ce"), LossKind::kCrossEntropy);
  for (auto k : {LossKind::kAbsolute, LossKind::kSquared, LossKind::kCrossEntropy}) {
    EXPECT_EQ(parse_loss_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_loss_kind("hinge"), ConfigError);
}

}  // namespace
}  // namespace nbrec
