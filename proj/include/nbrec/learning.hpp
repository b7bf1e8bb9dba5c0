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

#ifndef NBREC_LEARNING_HPP_
#define NBREC_LEARNING_HPP_

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nbrec/common.hpp"
#include "nbrec/data.hpp"
#include "nbrec/estimators.hpp"
#include "nbrec/factor_model.hpp"
#include "nbrec/kernels.hpp"
#include "nbrec/neighborhood.hpp"
#include "nbrec/propensity.hpp"

namespace nbrec {

// Imputation of r(1, g): one factor model per support point of pi, or a
// single shared model with g as side input.
struct ImputationModel {
  std::vector<FactorModel> models;
  bool shared = false;
  std::vector<double> nodes;  // pi support, k * dim + s
  size_t dim = 1;

  double predict(size_t u, size_t i, size_t k) const;
  const FactorModel& model_for(size_t k) const {
    return shared ? models[0] : models[k];
  }
  size_t n_support() const { return nodes.size() / dim; }
  bool operator==(const ImputationModel& o) const = default;
  void save(std::ostream& out) const;
  static ImputationModel load(std::istream& in);
};

enum class TrainerKind {
  kNaive, kIps, kDrJl, kMrdrJl,  // baselines
  kNIps, kNDrJl, kNMrdrJl
};
TrainerKind parse_trainer_kind(const std::string& s);
std::string to_string(TrainerKind kind);
bool is_neighborhood(TrainerKind kind);
bool is_doubly_robust(TrainerKind kind);

struct TrainConfig {
  double lr = 0.01;
  double weight_decay = 1e-5;
  size_t batch_size = 256;
  size_t epochs = 50;
  size_t dim = 16;
  uint64_t seed = 0;
  double init_sd = 0.1;
  // Imputation model optimizer settings.
  double imp_lr = 0.01;
  double imp_weight_decay = 1e-5;
  // Steps per outer round of joint learning.
  size_t imputation_epochs = 1;
  size_t prediction_epochs = 1;
  bool shared_imputation = false;
  LossKind loss = LossKind::kSquared;
  bool squash = false;
  // Epochs without validation improvement before stopping; 0 disables.
  size_t patience = 0;
};

// Frozen per-observed-pair weights over the K support points of pi:
//   a[j * K + k]    = Kw(g_j, g_k) * inv_joint(j, g_k)
//   mrdr[j * K + k] = Kw * (1 - p) * inv^2, where p = 1 / inv
struct PairWeights {
  size_t n_support = 1;
  size_t dim = 1;
  std::vector<double> pi;
  std::vector<double> nodes;
  std::vector<double> a;
  std::vector<double> mrdr;
};

// Baseline weights: a single treatment with the classic inverse propensity.
PairWeights baseline_weights(std::span<const Interaction> observed,
                             const PropensityField& field);
PairWeights neighborhood_weights(std::span<const Interaction> observed,
                                 const TreatmentRep& rep,
                                 const PropensityField& field,
                                 const KernelSpec& kernel,
                                 const RepDistribution& pi);

// Per-pair weight of the IPS-family objective: sum_k pi_k a_jk.
std::vector<double> ips_pair_weights(const PairWeights& w);

// Objectives over a batch. Each returns the batch loss and, when `grad` is
// non-null, adds its gradient with respect to the relevant parameters.

// (1/B) sum_b w_b delta(f(u_b, i_b), y_b) over observed pairs.
double weighted_prediction_objective(const FactorModel& f,
                                     std::span<const Interaction> observed,
                                     std::span<const double> pair_weight,
                                     std::span<const size_t> batch,
                                     LossKind loss,
                                     std::vector<double>* grad);

// (1/B) sum_b sum_k pi_k [dhat_k + o a_k (d - dhat_k)] over pairs of the
// full grid; dhat_k = delta(f, m_k). Imputations are held fixed.
// `obs_index` maps u * n_items + i to the observed index or -1.
double dr_prediction_objective(const FactorModel& f, const ImputationModel& m,
                               std::span<const Interaction> observed,
                               std::span<const long> obs_index,
                               const PairWeights& w,
                               std::span<const size_t> batch_cells,
                               LossKind loss, std::vector<double>* grad);

// (1/B) sum_b sum_k pi_k W_bk (d_b - dhat_bk)^2 over observed pairs, with W
// either `a` (DR) or `mrdr`. Gradients go to the imputation models, one
// vector per model.
double imputation_objective(const FactorModel& f, const ImputationModel& m,
                            std::span<const Interaction> observed,
                            const PairWeights& w, bool mrdr,
                            std::span<const size_t> batch, LossKind loss,
                            std::vector<std::vector<double>>* grads);

struct CurvePoint {
  size_t epoch;
  std::string phase;
  double loss;
};

struct TrainResult {
  FactorModel model;
  std::optional<ImputationModel> imputation;
  std::vector<CurvePoint> curve;
  // Parameter snapshot after every optimizer step when requested.
  std::vector<std::vector<double>> trajectory;
};

struct TrainProblem {
  size_t n_users = 0;
  size_t n_items = 0;
  std::vector<Interaction> observed;
  std::vector<Interaction> validation;
  const PropensityField* field = nullptr;
  // Neighborhood machinery; unused by the baselines.
  const TreatmentRep* rep = nullptr;
  KernelSpec kernel;
  RepDistribution pi;
};

TrainResult train(TrainerKind kind, const TrainProblem& problem,
                  const TrainConfig& cfg, bool record_trajectory = false);

// Entry points named after the individual algorithms.
TrainResult train_baseline(TrainerKind kind, const TrainProblem& problem,
                           const TrainConfig& cfg);
TrainResult train_n_ips(const TrainProblem& problem, const TrainConfig& cfg);
TrainResult train_n_dr_jl(const TrainProblem& problem, const TrainConfig& cfg);
TrainResult train_n_mrdr_jl(const TrainProblem& problem,
                            const TrainConfig& cfg);

// Weighted regression of the records' ratings: minibatch descent on
// (1/B) sum_b w_b delta(f(u_b, i_b), y_b) for cfg.epochs epochs.
FactorModel fit_weighted(size_t n_users, size_t n_items,
                         std::span<const Interaction> records,
                         std::span<const double> weights,
                         const TrainConfig& cfg);

void write_curve_csv(const std::vector<CurvePoint>& curve,
                     const std::string& path, const std::string& header = "");

}  // namespace nbrec

#endif  // NBREC_LEARNING_HPP_
