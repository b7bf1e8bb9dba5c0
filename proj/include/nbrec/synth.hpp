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

#ifndef NBREC_SYNTH_HPP_
#define NBREC_SYNTH_HPP_

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "nbrec/common.hpp"
#include "nbrec/data.hpp"
#include "nbrec/learning.hpp"
#include "nbrec/neighborhood.hpp"

namespace nbrec {

// Stand-in for a public MNAR rating log: low-rank latent ratings, exposure
// tilted towards liked and popular items, and a rating shift proportional to
// the standardized neighbor exposure count of each rated pair.
struct SourceConfig {
  size_t n_users = 300;
  size_t n_items = 300;
  double density = 0.06;
  double interference = 0.6;
  size_t rank = 4;
  uint64_t seed = 7;
};

Dataset generate_source(const SourceConfig& cfg);

struct SemiSynthConfig {
  double alpha = 0.5;
  double target_fraction = 0.05;
  size_t mask_users = 0;
  // Negative: derived as mask_users * n_items / n_users.
  long mask_items = -1;
  uint64_t seed = 0;
  TrainConfig mf;  // completion fits
  // Fit the two potential matrices on the source log split by the source
  // treatment (default) or on the sampled exposures split by the sampled
  // treatment.
  bool potentials_from_source = true;

  SemiSynthConfig();
  size_t resolved_mask_items(size_t n_users, size_t n_items) const;
  void validate(size_t n_users, size_t n_items) const;
};

struct SemiSynthWorld {
  RatingMatrix completed;
  RatingMatrix propensity;
  ObservationMask block_mask;
  ObservationMask exposure;
  TreatmentRep treatment;
  std::array<RatingMatrix, 2> potentials;
  RatingMatrix noisy_inv_propensity;
  // P(g = 1 | x) under the true propensities.
  RatingMatrix neighbor_prob;
  double threshold = 0.0;

  RatingMatrix observed_ratings() const;
  std::vector<Interaction> observed() const;
};

// MF fit on the ratings, rounded and clipped to {1, ..., 5}.
RatingMatrix complete_matrix(const Dataset& mnar, const TrainConfig& cfg);

// p * alpha^max(0, 4 - r) with p set so the expected observed count is
// target_fraction * |D|.
RatingMatrix gen_propensities(const RatingMatrix& r, double alpha,
                              double target_fraction);

// Bernoulli row/column blocking; blocked pairs get 0 and the rest is
// rescaled to keep the expected observed count.
std::pair<RatingMatrix, ObservationMask> apply_mask(const RatingMatrix& p,
                                                    size_t n_u, size_t n_i,
                                                    uint64_t seed);

// Normal approximation with continuity correction of
// P(sum of independent neighbor exposures >= c).
RatingMatrix neighbor_threshold_prob(const RatingMatrix& p, double c);

// The three MF completions; independent of the world seed so that repeated
// worlds can share them.
struct Completions {
  RatingMatrix completed;
  std::array<RatingMatrix, 2> potentials;
  double source_threshold = 0.0;
  size_t source_counts[2] = {0, 0};
};

Completions fit_completions(const Dataset& source, const SemiSynthConfig& cfg);
SemiSynthWorld sample_world(const Completions& base, const SemiSynthConfig& cfg);
SemiSynthWorld build_world(const Dataset& source, const SemiSynthConfig& cfg);

enum class PredictionKind { kOne, kThree, kFour, kRotate, kSkew, kCrs };
const std::vector<PredictionKind>& all_prediction_kinds();
std::string to_string(PredictionKind kind);
PredictionKind parse_prediction_kind(const std::string& s);

RatingMatrix make_prediction_matrix(PredictionKind kind, const RatingMatrix& r,
                                    uint64_t seed);

// Nine files plus manifest.txt.
void save_world(const SemiSynthWorld& w, const std::string& dir,
                const std::string& config_echo = "");
SemiSynthWorld load_world(const std::string& dir);

void write_grid_tsv(const RatingMatrix& g, const std::string& path);
RatingMatrix read_grid_tsv(const std::string& path);

}  // namespace nbrec

#endif  // NBREC_SYNTH_HPP_
