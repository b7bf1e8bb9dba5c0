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

#ifndef NBREC_EXPERIMENTS_HPP_
#define NBREC_EXPERIMENTS_HPP_

#include <limits>
#include <string>
#include <vector>

#include "nbrec/config.hpp"
#include "nbrec/data.hpp"
#include "nbrec/eval.hpp"
#include "nbrec/learning.hpp"
#include "nbrec/loss.hpp"
#include "nbrec/synth.hpp"

namespace nbrec {

// ---- Semi-synthetic estimation ---------------------------------------------------

const std::vector<std::string>& estimator_names();

struct EstimateSettings {
  LossKind loss = LossKind::kAbsolute;
  // Noisy inverse propensities as in the estimation protocol; false uses the
  // true ones.
  bool noisy_propensity = true;
  double clip_hi = std::numeric_limits<double>::infinity();
  // Error-imputation regressions used by the DR family.
  TrainConfig imputation;

  EstimateSettings();
};

struct EstimateCell {
  std::string estimator;
  PredictionKind kind;
  uint64_t seed = 0;
  double estimate = 0.0;
  double ideal = 0.0;
  double relative_error = 0.0;
};

// All seven estimators on every requested prediction matrix of one world.
std::vector<EstimateCell> estimate_world(const SemiSynthWorld& world,
                                         const std::vector<PredictionKind>& kinds,
                                         const EstimateSettings& settings,
                                         uint64_t seed);

struct EstimateSummary {
  std::vector<EstimateCell> cells;
  // Mean and sample standard deviation of RE per (estimator, kind).
  double mean_re(const std::string& estimator, PredictionKind kind) const;
  double std_re(const std::string& estimator, PredictionKind kind) const;
};

// Fits the completions once and samples one world per seed.
EstimateSummary estimate_over_seeds(const Completions& base,
                                    SemiSynthConfig synth,
                                    const std::vector<uint64_t>& seeds,
                                    const std::vector<PredictionKind>& kinds,
                                    const EstimateSettings& settings);

// Rows are estimators, columns `KIND_mean,KIND_std` per kind.
void write_estimate_table(const EstimateSummary& s,
                          const std::vector<PredictionKind>& kinds,
                          const std::string& path, const std::string& header);
void write_estimate_cells(const EstimateSummary& s, const std::string& path,
                          const std::string& header);

// Mask counts given for a 943-user log are rescaled to the grid size.
size_t scaled_mask_count(size_t n_u_reference, size_t n_users);

// ---- Coat-shaped synthetic data ---------------------------------------------------

struct CoatLikeConfig {
  size_t n_users = 290;
  size_t n_items = 300;
  size_t train_per_user = 24;
  size_t test_per_user = 16;
  uint64_t seed = 5;
};

// Self-selected training ratings and uniformly drawn test ratings from one
// low-rank preference model with a neighborhood shift.
Dataset generate_coat_like(const CoatLikeConfig& cfg);

// ---- Config-driven workflows -------------------------------------------------------
// Each writes into cfg `output.dir` and embeds the config hash in every CSV.

SemiSynthConfig semi_synth_config(const Config& cfg);
SourceConfig source_config(const Config& cfg);
Dataset load_or_generate_source(const Config& cfg);

// Serializes one world; returns its directory.
std::string run_synth(const Config& cfg);
// Table over seeds; returns the table path.
std::string run_estimate(const Config& cfg);

struct PipelineOutput {
  std::string dir;
  std::vector<MetricReport> metrics;
  std::vector<CurvePoint> curve;
};
PipelineOutput run_train(const Config& cfg);
// Reloads the checkpoint written by run_train and re-evaluates.
PipelineOutput run_eval(const Config& cfg);

std::string run_verify(const Config& cfg);
std::string run_sweep_bandwidth(const Config& cfg);

ReferenceSpec reference_spec(const Config& cfg);

// Keys accepted by the workflows.
const std::set<std::string>& known_config_keys();

}  // namespace nbrec

#endif  // NBREC_EXPERIMENTS_HPP_
