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

#ifndef NBREC_EVAL_HPP_
#define NBREC_EVAL_HPP_

#include <span>
#include <string>
#include <vector>

#include "nbrec/common.hpp"
#include "nbrec/data.hpp"
#include "nbrec/kernels.hpp"
#include "nbrec/neighborhood.hpp"

namespace nbrec {

// ---- Metrics ---------------------------------------------------------------

struct MetricReport {
  std::string metric;
  double value = 0.0;
  size_t k = 0;  // NDCG cutoff, 0 otherwise
  size_t n = 0;  // pairs or users evaluated
};

// |ideal - est| / ideal. Throws NumericError when ideal <= 0.
double relative_error(double est, double ideal);

double mean_absolute_error(std::span<const double> pred,
                           std::span<const double> target);
double mean_squared_error(std::span<const double> pred,
                          std::span<const double> target);

// Probability that a random positive outscores a random negative, ties
// counted as 1/2. Labels are positive when > 0.5. O(n log n).
double auc(std::span<const double> scores, std::span<const double> labels);

// Mean over groups of DCG@K / IDCG@K with linear gains and 1/log2(rank + 1)
// discounts. Groups with zero IDCG are skipped; NaN when every group is.
// Ties in score keep input order.
double ndcg_at_k(const std::vector<std::vector<double>>& scores,
                 const std::vector<std::vector<double>>& relevance, size_t k,
                 size_t* n_evaluated = nullptr);

// Evaluates rating predictions on held-out records. AUC and NDCG use
// `positive_threshold` to binarize ratings; NDCG groups by user.
std::vector<MetricReport> evaluate_predictions(
    std::span<const Interaction> test, const std::vector<double>& pred,
    size_t ndcg_k, double positive_threshold);

void write_metrics_csv(const std::vector<MetricReport>& metrics,
                       const std::string& path, const std::string& header = "");

// ---- Selection-bias gap on an enumerable model -------------------------------

// Finite model: features x with probabilities p_x, treatments g_k, and a
// finite noise variable with probabilities p_e. The potential error for
// (x, g, e) is delta[(x * G + g) * E + e].
struct EnumerableModel {
  std::vector<double> p_x;
  std::vector<double> p_obs;       // P(o = 1 | x)
  std::vector<double> p_g_obs;     // P(g | x, o = 1), x-major
  std::vector<double> p_g_unobs;   // P(g | x, o = 0), x-major
  std::vector<double> p_e;
  std::vector<double> delta;
  std::vector<double> pi;          // reference distribution over g

  size_t n_x() const { return p_x.size(); }
  size_t n_g() const { return pi.size(); }
  size_t n_e() const { return p_e.size(); }
  void validate() const;
  // P(g | x) = P(o=1|x) P(g|x,o=1) + P(o=0|x) P(g|x,o=0).
  double p_g(size_t x, size_t g) const;
  // E[delta(g) | x].
  double mean_delta(size_t x, size_t g) const;
};

// Both ideal losses by enumerating every (x, o, g, e) outcome.
double enumerate_ideal_loss(const EnumerableModel& m);
double enumerate_ideal_loss_n(const EnumerableModel& m);

// sum_g E_x[ E{delta(g)|x} (P(g|x) - P(g|x,o=1)) ] w(g), counting measure
// over the finite support, with w = 1. Equals the ideal-loss gap when
// P(g | x) = pi(g) for every x.
double selection_gap_integral(const EnumerableModel& m);
// sum_g E_x[ E{delta(g)|x} (pi(g) - P(g|x,o=1)) ]: the gap for any model.
double selection_gap_general(const EnumerableModel& m);

// Random model whose marginal P(g | x) equals pi for every x. Conditional
// independence of g and o holds when `independent`.
EnumerableModel random_enumerable_model(size_t n_x, size_t n_g, size_t n_e,
                                        bool independent, uint64_t seed);

// ---- Exact joint propensities on a grid -------------------------------------

// P(sum of independent Bernoulli(p_j) >= c), by dynamic programming.
double poisson_binomial_tail(std::span<const double> p, double c);

// P(row/column neighbor count of (u, i) >= c) for independent exposures;
// the pair's own exposure is not counted.
RatingMatrix exact_threshold_propensity(const RatingMatrix& p, double c);

// ---- Reference continuous specification ---------------------------------------

// x ~ U(0, 1); P(o = 1 | x) = sigmoid(a0 + a1 x); g | o = 1, x has density
// c(x) (eps + (g - m(x))^2) on [0, 1] with m(x) = 0.5 + m1 (x - 0.5);
// delta(x, g) = (1 + 2 g + 0.5 x)^2 and delta_hat = kappa^2 delta.
// pi is a point mass at g0.
struct ReferenceSpec {
  double a0 = -1.2, a1 = 0.8;
  double eps = 0.1, m1 = 0.1;
  double g0 = 0.5;
  double kappa = 0.5;
  size_t n = 2000;  // |D|
  KernelFamily kernel = KernelFamily::kEpanechnikov;

  double p_obs(double x) const;
  double mode(double x) const;
  double norm_const(double x) const;
  double density(double x, double g) const;
  // d^2/dg^2 of the density.
  double density_dg2(double x, double g) const;
  // Joint propensity P(o = 1 | x) * density(x, g).
  double joint(double x, double g) const;
  double delta(double x, double g) const;
  double delta_hat(double x, double g) const;
  // Draws g | o = 1, x by rejection.
  double sample_g(double x, Rng& rng) const;

  // Ideal loss E_x delta(x, g0).
  double ideal() const;
};

enum class SweepEstimator { kNIps, kNDr };
SweepEstimator parse_sweep_estimator(const std::string& s);
std::string to_string(SweepEstimator e);

// Bias to second order: 0.5 mu2 h^2 E[(p''/p) Delta] with Delta = delta for
// N-IPS and delta - delta_hat for N-DR. Exact for this specification while
// the kernel support stays inside [0, 1].
double analytic_bias(const ReferenceSpec& spec, SweepEstimator est, double h);
// Leading variance psi_bar / (|D| h).
double asymptotic_variance(const ReferenceSpec& spec, SweepEstimator est,
                           double h);
// h* = [psi_bar / (4 |D| B^2)]^(1/5); B is the h^2 bias coefficient.
// Throws NumericError when B = 0.
double optimal_bandwidth(const ReferenceSpec& spec, SweepEstimator est);

// General form over a discrete pi with nodes g_k: the bias coefficient
// B = 0.5 mu2 sum_k pi_k E[(p''/p)(g_k) Delta(g_k)] and
// psi_bar(h) = sum_{k,l} pi_k pi_l Kbar((g_k - g_l)/h) E[Delta_k Delta_l / p(g_l)],
// iterated to a fixed point in h. Expectations are over the supplied
// feature sample.
struct BandwidthInputs {
  KernelFamily kernel = KernelFamily::kEpanechnikov;
  size_t n = 0;                             // |D|
  std::vector<double> nodes, pi;            // scalar g
  // Per feature point x_j and node k: p(g_k|x_j), d2p/dg2(g_k|x_j), Delta.
  std::vector<std::vector<double>> p, p_dg2, err;
};
double optimal_bandwidth(const BandwidthInputs& in, double h_start = 0.2,
                         size_t max_iter = 200);

struct SweepRow {
  double h = 0.0;
  double bias = 0.0, variance = 0.0, mse = 0.0;
  double bias_se = 0.0, t_stat = 0.0;
  double analytic_bias = 0.0;
};

struct SweepReport {
  std::string estimator;
  size_t replications = 0;
  double ideal = 0.0;
  std::vector<SweepRow> rows;
  // Weighted fit of log|bias| on log h with weights (bias/se)^2.
  double bias_slope = 0.0;
  // Ordinary fit of log variance on log(1 / (|D| h)).
  double variance_slope = 0.0;
  double h_opt = 0.0;  // analytic h*, NaN when undefined
};

// R independent worlds per call; every h shares the same draws. The
// estimates run through the library estimators on a 1 x |D| grid with oracle
// propensities.
SweepReport verify_bias_variance(const ReferenceSpec& spec, SweepEstimator est,
                                 std::span<const double> h_grid,
                                 size_t replications, uint64_t seed);

// `count` geometric points from lo to hi.
std::vector<double> geometric_grid(double lo, double hi, size_t count);

void write_sweep_csv(const SweepReport& r, const std::string& path,
                     const std::string& header = "");

// Slope fits.
double weighted_slope(std::span<const double> x, std::span<const double> y,
                      std::span<const double> w);
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace nbrec

#endif  // NBREC_EVAL_HPP_
