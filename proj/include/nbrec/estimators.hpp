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

#ifndef NBREC_ESTIMATORS_HPP_
#define NBREC_ESTIMATORS_HPP_

#include <functional>
#include <string>
#include <vector>

#include "nbrec/common.hpp"
#include "nbrec/kernels.hpp"
#include "nbrec/loss.hpp"
#include "nbrec/neighborhood.hpp"
#include "nbrec/propensity.hpp"

namespace nbrec {

// delta_{u,i} for the treatment actually received.
using PairError = std::function<double(size_t u, size_t i)>;
// delta_{u,i}(g_k) for the k-th support point of pi.
using PairErrorAt = std::function<double(size_t u, size_t i, size_t k)>;

struct EstimateReport {
  std::string estimator;
  std::vector<double> per_g;
  double integrated = 0.0;
};

double ideal_loss(const RatingMatrix& rhat, const RatingMatrix& r_true,
                  LossKind loss);
// One potential matrix per support point of pi.
double ideal_loss_n(const RatingMatrix& rhat,
                    const std::vector<RatingMatrix>& potentials,
                    const RepDistribution& pi, LossKind loss);

double naive_loss(const ObservationMask& mask, const PairError& err);
double naive_loss(const RatingMatrix& rhat, const RatingMatrix& r_obs,
                  const ObservationMask& mask, LossKind loss);

// |D|^-1 sum o delta / p.
double ips_loss(const ObservationMask& mask, const PropensityField& field,
                const PairError& err);
double ips_loss(const RatingMatrix& rhat, const RatingMatrix& r_obs,
                const ObservationMask& mask, const PropensityField& field,
                LossKind loss);

// |D|^-1 sum [dhat + o (delta - dhat) / p].
double dr_loss(const ObservationMask& mask, const PropensityField& field,
               const PairError& err, const PairError& imputed);

// Per support point g_k:
//   |D|^-1 sum o Kw(g_ui, g_k) delta(g_k) / p(g_k)
// integrated against pi.
EstimateReport n_ips_loss(const ObservationMask& mask, const TreatmentRep& rep,
                          const PropensityField& field,
                          const KernelSpec& kernel, const RepDistribution& pi,
                          const PairErrorAt& err);

// Per support point g_k:
//   |D|^-1 sum [dhat(g_k) + o Kw (delta(g_k) - dhat(g_k)) / p(g_k)]
EstimateReport n_dr_loss(const ObservationMask& mask, const TreatmentRep& rep,
                         const PropensityField& field, const KernelSpec& kernel,
                         const RepDistribution& pi, const PairErrorAt& err,
                         const PairErrorAt& imputed);

// Error sources. The returned functors refer to their arguments.
PairError error_from_matrices(const RatingMatrix& rhat,
                              const RatingMatrix& target, LossKind loss);
PairErrorAt error_from_potentials(const RatingMatrix& rhat,
                                  const std::vector<RatingMatrix>& potentials,
                                  LossKind loss);
// Observed-rating consistency: delta(g) evaluated at the received rating for
// every g.
PairErrorAt error_at_observed(const RatingMatrix& rhat,
                              const RatingMatrix& r_obs, LossKind loss);

void write_report_csv(const std::vector<EstimateReport>& reports,
                      const RepDistribution& pi, const std::string& path,
                      const std::string& header = "");

}  // namespace nbrec

#endif  // NBREC_ESTIMATORS_HPP_
