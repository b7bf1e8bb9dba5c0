// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include "nbrec/kernels.hpp"

#include <fmt/format.h>

#include <boost/math/constants/constants.hpp>
#include <cmath>

#include "nbrec/common.hpp"

namespace nbrec {

namespace {
constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
}

KernelFamily parse_kernel_family(const std::string& s) {
  if (s == "gaussian") return KernelFamily::kGaussian;
  if (s == "epanechnikov") return KernelFamily::kEpanechnikov;
  if (s == "exact" || s == "exact-match") return KernelFamily::kExactMatch;
  throw ConfigError("unknown kernel family: " + s);
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::kGaussian: return "gaussian";
    case KernelFamily::kEpanechnikov: return "epanechnikov";
    case KernelFamily::kExactMatch: return "exact";
  }
  return "?";
}

double kernel_eval(KernelFamily family, double t) {
  switch (family) {
    case KernelFamily::kGaussian: return kInvSqrt2Pi * std::exp(-0.5 * t * t);
    case KernelFamily::kEpanechnikov:
      return std::abs(t) <= 1.0 ? 0.75 * (1.0 - t * t) : 0.0;
    case KernelFamily::kExactMatch: break;
  }
  throw ConfigError("exact-match kernel has no density");
}

double kernel_mu2(KernelFamily family) {
  switch (family) {
    case KernelFamily::kGaussian: return 1.0;
    case KernelFamily::kEpanechnikov: return 0.2;
    case KernelFamily::kExactMatch: break;
  }
  throw ConfigError("exact-match kernel has no moments");
}

double kernel_roughness(KernelFamily family) {
  return kernel_convolution(family, 0.0);
}

double kernel_convolution(KernelFamily family, double u) {
  switch (family) {
    case KernelFamily::kGaussian: {
      const double root_pi = boost::math::constants::root_pi<double>();
      return std::exp(-0.25 * u * u) / (2.0 * root_pi);
    }
    case KernelFamily::kEpanechnikov: {
      const double a = std::abs(u);
      if (a >= 2.0) return 0.0;
      const double b = 2.0 - a;
      return 3.0 / 160.0 * b * b * b * (a * a + 6.0 * a + 4.0);
    }
    case KernelFamily::kExactMatch: break;
  }
  throw ConfigError("exact-match kernel has no convolution");
}

void KernelSpec::validate() const {
  if (bandwidth.empty()) throw ConfigError("bandwidth is empty");
  for (double h : bandwidth) {
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw ConfigError(fmt::format("bandwidth must be positive, got {}", h));
    }
  }
}

double kernel_weight(const KernelSpec& spec, std::span<const double> g_pair,
                     std::span<const double> g) {
  if (g_pair.size() != g.size() || g.size() != spec.bandwidth.size()) {
    throw ConfigError(fmt::format(
        "kernel dimension mismatch: pair {}, target {}, bandwidth {}",
        g_pair.size(), g.size(), spec.bandwidth.size()));
  }
  if (spec.family == KernelFamily::kExactMatch) {
    for (size_t s = 0; s < g.size(); ++s) {
      if (g_pair[s] != g[s]) return 0.0;
    }
    return 1.0;
  }
  double w = 1.0;
  for (size_t s = 0; s < g.size(); ++s) {
    const double h = spec.bandwidth[s];
    w *= kernel_eval(spec.family, (g_pair[s] - g[s]) / h) / h;
  }
  return w;
}

}  // namespace nbrec
