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

#ifndef NBREC_FACTOR_MODEL_HPP_
#define NBREC_FACTOR_MODEL_HPP_

#include <iosfwd>
#include <span>
#include <vector>

#include "nbrec/common.hpp"

namespace nbrec {

// Biased matrix factorization, optionally squashed through the logistic
// function. `side_dim` adds a linear term over per-call side features, used
// by the shared imputation model that takes g as input.
class FactorModel {
 public:
  FactorModel() = default;
  FactorModel(size_t n_users, size_t n_items, size_t dim, bool squash,
              size_t side_dim = 0);

  static FactorModel random(size_t n_users, size_t n_items, size_t dim,
                            bool squash, double init_sd, Rng& rng,
                            size_t side_dim = 0);

  size_t n_users() const { return n_users_; }
  size_t n_items() const { return n_items_; }
  size_t dim() const { return dim_; }
  size_t side_dim() const { return side_dim_; }
  bool squash() const { return squash_; }

  double score(size_t u, size_t i, std::span<const double> side = {}) const;
  double predict(size_t u, size_t i, std::span<const double> side = {}) const;
  // Checked variant of predict.
  double predict_at(size_t u, size_t i) const;
  RatingMatrix predict_all() const;

  // grad += d_score * d score / d theta.
  void add_score_grad(size_t u, size_t i, double d_score,
                      std::vector<double>& grad,
                      std::span<const double> side = {}) const;

  std::vector<double>& theta() { return theta_; }
  const std::vector<double>& theta() const { return theta_; }
  double& global_bias() { return theta_[off_b0_]; }
  double* user_factors(size_t u) { return &theta_[u * dim_]; }
  double* item_factors(size_t i) { return &theta_[off_q_ + i * dim_]; }
  double& user_bias(size_t u) { return theta_[off_bu_ + u]; }
  double& item_bias(size_t i) { return theta_[off_bi_ + i]; }
  size_t global_bias_index() const { return off_b0_; }
  size_t bias_offset() const { return off_bu_; }

  bool all_finite() const;
  bool operator==(const FactorModel& o) const = default;

  void save(std::ostream& out) const;
  static FactorModel load(std::istream& in);

 private:
  size_t n_users_ = 0, n_items_ = 0, dim_ = 0, side_dim_ = 0;
  bool squash_ = false;
  size_t off_q_ = 0, off_bu_ = 0, off_bi_ = 0, off_b0_ = 0, off_side_ = 0;
  std::vector<double> theta_;
};

// Adaptive-moment descent with coupled L2 weight decay
// (grad += weight_decay * theta before the moment updates).
class Adam {
 public:
  Adam() = default;
  Adam(size_t n, double lr, double weight_decay, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8);
  void step(std::vector<double>& theta, std::vector<double>& grad);
  long steps() const { return t_; }

 private:
  double lr_ = 1e-3, wd_ = 0.0, b1_ = 0.9, b2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace nbrec

#endif  // NBREC_FACTOR_MODEL_HPP_
