// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include "nbrec/loss.hpp"

#include <algorithm>
#include <cmath>

#include "nbrec/common.hpp"

namespace nbrec {

namespace {
constexpr double kProbFloor = 1e-12;
double clamp_prob(double p) {
  return std::clamp(p, kProbFloor, 1.0 - kProbFloor);
}
double sign(double x) { return (x > 0.0) - (x < 0.0); }
}  // namespace

LossKind parse_loss_kind(const std::string& s) {
  if (s == "absolute" || s == "mae") return LossKind::kAbsolute;
  if (s == "squared" || s == "mse") return LossKind::kSquared;
  if (s == "cross-entropy" || s == "ce") return LossKind::kCrossEntropy;
  throw ConfigError("unknown loss: " + s);
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kAbsolute: return "absolute";
    case LossKind::kSquared: return "squared";
    case LossKind::kCrossEntropy: return "cross-entropy";
  }
  return "?";
}

double pointwise_loss(LossKind kind, double pred, double target) {
  switch (kind) {
    case LossKind::kAbsolute: return std::abs(pred - target);
    case LossKind::kSquared: {
      const double e = pred - target;
      return e * e;
    }
    case LossKind::kCrossEntropy: {
      const double p = clamp_prob(pred);
      return -target * std::log(p) - (1.0 - target) * std::log1p(-p);
    }
  }
  return 0.0;
}

double loss_dpred(LossKind kind, double pred, double target) {
  switch (kind) {
    case LossKind::kAbsolute: return sign(pred - target);
    case LossKind::kSquared: return 2.0 * (pred - target);
    case LossKind::kCrossEntropy: {
      const double p = clamp_prob(pred);
      return (p - target) / (p * (1.0 - p));
    }
  }
  return 0.0;
}

double loss_dtarget(LossKind kind, double pred, double target) {
  switch (kind) {
    case LossKind::kAbsolute: return sign(target - pred);
    case LossKind::kSquared: return 2.0 * (target - pred);
    case LossKind::kCrossEntropy: {
      const double p = clamp_prob(pred);
      return std::log1p(-p) - std::log(p);
    }
  }
  return 0.0;
}

}  // namespace nbrec
