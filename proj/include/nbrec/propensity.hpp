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

#ifndef NBREC_PROPENSITY_HPP_
#define NBREC_PROPENSITY_HPP_

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nbrec/common.hpp"
#include "nbrec/data.hpp"
#include "nbrec/factor_model.hpp"
#include "nbrec/neighborhood.hpp"

namespace nbrec {

enum class BaseKind { kNaiveBayes, kLogistic, kOracle };

// P(o = 1 | x).
struct BasePropensityModel {
  BaseKind kind = BaseKind::kOracle;
  // Naive Bayes: P(o = 1 | r) per rating value, and P(o = 1) for pairs
  // whose rating is unknown.
  std::map<double, double> nb_table;
  double exposure_rate = 0.0;
  // Logistic: squashed factor model over learned user/item embeddings.
  FactorModel logistic;
  // Oracle: stored grid.
  RatingMatrix oracle;

  // Probability for every pair. Naive Bayes needs the ratings of observed
  // pairs; unobserved pairs get the exposure rate.
  RatingMatrix evaluate(const Dataset& ds) const;

  void save(std::ostream& out) const;
  static BasePropensityModel load(std::istream& in);
};

BasePropensityModel fit_naive_bayes(const Dataset& mnar,
                                    std::span<const Interaction> mar);

// Takes a seeded `fraction` subsample of the MAR records.
std::vector<Interaction> subsample_mar(const Dataset& ds, double fraction,
                                       uint64_t seed);

struct LogisticConfig {
  size_t dim = 8;
  bool intercept_only = false;
  size_t iterations = 300;
  double lr = 0.05;
  double l2 = 1e-6;
  double init_sd = 0.1;
  uint64_t seed = 0;
};

// Full-batch adaptive-moment descent on the Bernoulli log-likelihood of the
// exposure mask. `loss_trace` receives the mean log-loss before each step.
BasePropensityModel fit_logistic(const ObservationMask& mask,
                                 const LogisticConfig& cfg,
                                 std::vector<double>* loss_trace = nullptr);

BasePropensityModel oracle_base(RatingMatrix probs);

// Classifier separating observed treatments (L = 1) from treatments drawn
// uniformly on the support (L = 0). Logit:
//   c0 + c_u + c_i + sum_k psi_k(g) (w_k + w_uk + w_ik)
// with psi the standardized (g_s, g_s^2) features.
struct DensityRatioModel {
  size_t n_users = 0, n_items = 0, dim = 1;
  size_t k_neg = 1;
  std::vector<double> feat_mean, feat_sd;  // per psi feature
  std::vector<double> theta;

  size_t n_feat() const { return 2 * dim; }
  // P(L = 1 | x, g).
  double prob_positive(size_t u, size_t i, std::span<const double> g) const;
  // Uniform-to-observed density ratio P^u(g) / P(g | o = 1, x), recovered as
  // (P(L=1)/P(L=0)) * P(L=0 | x, g) / P(L=1 | x, g).
  double ratio(size_t u, size_t i, std::span<const double> g) const;
  bool operator==(const DensityRatioModel& o) const = default;

  void save(std::ostream& out) const;
  static DensityRatioModel load(std::istream& in);
};

struct DensityRatioConfig {
  size_t k_neg = 1;
  size_t epochs = 30;
  size_t batch_size = 256;
  double lr = 0.01;
  // Ridge penalty on the per-user and per-item terms, in units of the summed
  // log-loss.
  double l2 = 1.0;
  uint64_t seed = 0;
};

DensityRatioModel fit_density_ratio(const ObservationMask& mask,
                                    const TreatmentRep& rep,
                                    const DensityRatioConfig& cfg);

// Inverse joint propensity 1 / p(g) = c * ratio(x, g) / P(o = 1 | x), with c
// the support measure, clipped to [clip_lo, clip_hi].
struct PropensityField {
  using RatioFn =
      std::function<double(size_t u, size_t i, std::span<const double> g)>;

  RatingMatrix inv_base;  // 1 / P(o = 1 | x), unclipped
  RatioFn ratio;          // empty: no neighborhood factor
  double support_measure = 1.0;
  double clip_lo = 1.0;
  double clip_hi = 100.0;

  double inverse_base(size_t u, size_t i) const;
  double inverse_joint(size_t u, size_t i, std::span<const double> g) const;
  bool has_ratio() const { return static_cast<bool>(ratio); }

  static PropensityField from_probs(const RatingMatrix& p,
                                    double clip_hi = 100.0);
  static PropensityField from_inverse(RatingMatrix inv,
                                      double clip_hi = 100.0);
};

// Ratio function backed by a fitted model.
PropensityField::RatioFn ratio_from_model(
    std::shared_ptr<const DensityRatioModel> model);

}  // namespace nbrec

#endif  // NBREC_PROPENSITY_HPP_
