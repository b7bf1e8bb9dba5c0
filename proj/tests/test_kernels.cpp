// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nbrec/common.hpp"
#include "nbrec/kernels.hpp"

namespace nbrec {
namespace {

constexpr KernelFamily kSmooth[] = {KernelFamily::kGaussian,
                                    KernelFamily::kEpanechnikov};

// Trapezoid rule on [-a, a].
template <typename F>
double trapezoid(F f, double a, int n = 200000) {
  const double dx = 2 * a / n;
  double s = 0.5 * (f(-a) + f(a));
  for (int k = 1; k < n; ++k) s += f(-a + k * dx);
  return s * dx;
}

TEST(KernelEval, PointValues) {
  EXPECT_DOUBLE_EQ(kernel_eval(KernelFamily::kEpanechnikov, 0.0), 0.75);
  EXPECT_EQ(kernel_eval(KernelFamily::kEpanechnikov, 1.5), 0.0);
  EXPECT_NEAR(kernel_eval(KernelFamily::kGaussian, 0.0), 0.3989422804, 1e-10);
  EXPECT_THROW(kernel_eval(KernelFamily::kExactMatch, 0.0), ConfigError);
}

TEST(KernelEval, SymmetricAndNormalized) {
  for (auto f : kSmooth) {
    for (double t : {0.1, 0.5, 0.99, 2.0}) {
      EXPECT_EQ(kernel_eval(f, t), kernel_eval(f, -t));
    }
    EXPECT_NEAR(trapezoid([f](double t) { return kernel_eval(f, t); }, 10.0), 1.0,
                1e-6);
    EXPECT_NEAR(trapezoid([f](double t) { return t * kernel_eval(f, t); }, 10.0),
                0.0, 1e-12);
  }
}

TEST(KernelMoments, MatchQuadrature) {
  for (auto f : kSmooth) {
    EXPECT_NEAR(kernel_mu2(f),
                trapezoid([f](double t) { return t * t * kernel_eval(f, t); }, 10.0),
                1e-6);
    EXPECT_NEAR(kernel_roughness(f),
                trapezoid([f](double t) { return std::pow(kernel_eval(f, t), 2); },
                          10.0),
                1e-6);
    EXPECT_DOUBLE_EQ(kernel_convolution(f, 0.0), kernel_roughness(f));
    for (double u : {0.3, 1.1, 1.9}) {
      EXPECT_NEAR(kernel_convolution(f, u),
                  trapezoid([f, u](double t) {
                    return kernel_eval(f, t) * kernel_eval(f, u + t);
                  }, 10.0),
                  1e-6);
    }
  }
  EXPECT_DOUBLE_EQ(kernel_mu2(KernelFamily::kEpanechnikov), 0.2);
  EXPECT_DOUBLE_EQ(kernel_roughness(KernelFamily::kEpanechnikov), 0.6);
  EXPECT_EQ(kernel_convolution(KernelFamily::kEpanechnikov, 2.5), 0.0);
  EXPECT_DOUBLE_EQ(kernel_mu2(KernelFamily::kGaussian), 1.0);
  EXPECT_NEAR(kernel_roughness(KernelFamily::kGaussian),
              0.5 / std::sqrt(std::numbers::pi), 1e-15);
}

TEST(KernelWeight, Examples) {
  const std::vector<double> z1{0.0}, z2{0.0, 0.0};
  EXPECT_NEAR(kernel_weight({KernelFamily::kGaussian, {1.0}}, z1, z1), 0.3989422804,
              1e-10);
  EXPECT_DOUBLE_EQ(kernel_weight({KernelFamily::kEpanechnikov, {1.0, 1.0}}, z2, z2),
                   0.5625);
  const std::vector<double> one{1.0};
  EXPECT_NEAR(kernel_weight({KernelFamily::kGaussian, {2.0}}, one, z1), 0.1760326634,
              1e-10);
}

TEST(KernelWeight, ProductAndScaling) {
  const KernelSpec spec{KernelFamily::kGaussian, {0.5, 2.0}};
  const std::vector<double> a{0.3, -1.0}, b{0.1, 0.4};
  const double expect = kernel_eval(KernelFamily::kGaussian, 0.2 / 0.5) / 0.5 *
                        kernel_eval(KernelFamily::kGaussian, -1.4 / 2.0) / 2.0;
  EXPECT_NEAR(kernel_weight(spec, a, b), expect, 1e-15);
  EXPECT_EQ(kernel_weight(spec, a, b), kernel_weight(spec, b, a));
  // Kw_h(d) = K(d / h) / h.
  for (double h : {0.25, 1.0, 3.0}) {
    const std::vector<double> d{0.7}, z{0.0};
    EXPECT_NEAR(kernel_weight({KernelFamily::kEpanechnikov, {h}}, d, z),
                kernel_eval(KernelFamily::kEpanechnikov, 0.7 / h) / h, 1e-15);
  }
}

TEST(KernelWeight, ExactMatch) {
  const auto spec = KernelSpec::exact_match(2);
  const std::vector<double> a{1.0, 2.0}, b{1.0, 2.0}, c{1.0, 3.0};
  EXPECT_EQ(kernel_weight(spec, a, b), 1.0);
  EXPECT_EQ(kernel_weight(spec, a, c), 0.0);
}

TEST(KernelSpec, Validation) {
  EXPECT_THROW((KernelSpec{KernelFamily::kGaussian, {0.0}}).validate(),
               ConfigError);
  EXPECT_THROW((KernelSpec{KernelFamily::kGaussian, {}}).validate(), ConfigError);
  EXPECT_NO_THROW((KernelSpec{KernelFamily::kGaussian, {0.1}}).validate());
}

TEST(KernelFamily, ParseRoundTrip) {
  for (auto f : {KernelFamily::kGaussian, KernelFamily::kEpanechnikov,
                 KernelFamily::kExactMatch}) {
    EXPECT_EQ(parse_kernel_family(to_string(f)), f);
  }
  EXPECT_THROW(parse_kernel_family("triangle"), ConfigError);
}

}  // namespace
}  // namespace nbrec
