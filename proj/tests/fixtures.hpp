// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.
//
// Shared toy problems and finite-difference checks for the learning tests
// and the acceptance runner.

#ifndef NBREC_TESTS_FIXTURES_HPP_
#define NBREC_TESTS_FIXTURES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "nbrec/learning.hpp"
#include "test_util.hpp"

namespace nbrec::testing {

// Rank-2 ratings on a grid, logistic exposure, a binary treatment from the
// row/column counts and a synthetic density ratio.
struct ToyProblem {
  size_t nu = 0, ni = 0;
  RatingMatrix truth, p;
  ObservationMask mask;
  TreatmentRep rep;
  std::vector<Interaction> observed;
  std::unique_ptr<PropensityField> field;
  TrainProblem problem;

  ToyProblem() = default;
  ToyProblem(const ToyProblem&) = delete;
  ToyProblem& operator=(const ToyProblem&) = delete;
};

inline std::unique_ptr<ToyProblem> make_toy(size_t nu, size_t ni, uint64_t seed,
                                            bool binary_ratings = false) {
  auto t = std::make_unique<ToyProblem>();
  t->nu = nu;
  t->ni = ni;
  Rng rng(seed);
  std::vector<double> a(nu * 2), b(ni * 2);
  for (auto& x : a) x = normal(rng, 0.0, 1.0);
  for (auto& x : b) x = normal(rng, 0.0, 1.0);
  t->truth = RatingMatrix(nu, ni);
  t->p = RatingMatrix(nu, ni);
  t->mask = ObservationMask(nu, ni, 0);
  for (size_t u = 0; u < nu; ++u) {
    for (size_t i = 0; i < ni; ++i) {
      const double s = a[2 * u] * b[2 * i] + a[2 * u + 1] * b[2 * i + 1];
      t->truth(u, i) = binary_ratings ? (s > 0 ? 1.0 : 0.0)
                                      : std::clamp(3.0 + s, 1.0, 5.0);
      t->p(u, i) = 1.0 / (1.0 + std::exp(-(-0.5 + 0.6 * s)));
      t->mask(u, i) = uniform01(rng) < t->p(u, i);
    }
  }
  for (size_t u = 0; u < nu; ++u) {
    for (size_t i = 0; i < ni; ++i) {
      if (t->mask(u, i)) t->observed.push_back({u, i, t->truth(u, i)});
    }
  }
  t->rep = compute_rep(NeighborhoodMode::kRowColumn, t->mask,
                       RepKind::kBinaryThreshold);
  t->field = std::make_unique<PropensityField>(PropensityField::from_probs(t->p));
  t->field->support_measure = 2.0;
  t->field->ratio = [](size_t u, size_t i, std::span<const double> g) {
    return 0.35 + 0.2 * g[0] + 0.01 * static_cast<double>((u + 2 * i) % 7);
  };
  t->problem.n_users = nu;
  t->problem.n_items = ni;
  t->problem.observed = t->observed;
  t->problem.field = t->field.get();
  t->problem.rep = &t->rep;
  t->problem.kernel = KernelSpec::exact_match();
  t->problem.pi = RepDistribution::uniform_binary();
  return t;
}

// Largest |analytic - central difference| / max(|analytic|, |fd|, floor)
// over every coordinate of `theta`.
inline double max_fd_error(std::vector<double>& theta,
                           const std::function<double()>& value,
                           const std::vector<double>& analytic,
                           double eps = 1e-5, double floor = 1e-3) {
  double worst = 0.0;
  for (size_t k = 0; k < theta.size(); ++k) {
    const double keep = theta[k];
    theta[k] = keep + eps;
    const double hi = value();
    theta[k] = keep - eps;
    const double lo = value();
    theta[k] = keep;
    const double fd = (hi - lo) / (2 * eps);
    const double scale = std::max({std::abs(fd), std::abs(analytic[k]), floor});
    worst = std::max(worst, std::abs(analytic[k] - fd) / scale);
  }
  return worst;
}

inline void perturb(FactorModel& f, double sd, Rng& rng) {
  for (auto& x : f.theta()) x += normal(rng, 0.0, sd);
}

struct GradientCheck {
  std::string name;
  double max_rel_error;
};

// Finite-difference checks of every training objective on a 5 x 5 toy.
inline std::vector<GradientCheck> run_gradient_suite(uint64_t seed) {
  std::vector<GradientCheck> out;
  for (bool binary : {false, true}) {
    auto toy = make_toy(5, 5, seed + (binary ? 1 : 0), binary);
    const auto& obs = toy->observed;
    const LossKind loss = binary ? LossKind::kCrossEntropy : LossKind::kSquared;
    const std::vector<LossKind> losses =
        binary ? std::vector<LossKind>{LossKind::kCrossEntropy}
               : std::vector<LossKind>{LossKind::kSquared, LossKind::kAbsolute};
    const auto base_w = baseline_weights(obs, *toy->field);
    const auto nbr_w = neighborhood_weights(obs, toy->rep, *toy->field,
                                            toy->problem.kernel, toy->problem.pi);
    Rng rng(seed + 7);
    FactorModel f = FactorModel::random(5, 5, 3, binary, 0.5, rng);
    perturb(f, 0.3, rng);
    std::vector<size_t> batch(obs.size());
    std::iota(batch.begin(), batch.end(), size_t{0});
    std::vector<size_t> cells(25);
    std::iota(cells.begin(), cells.end(), size_t{0});
    std::vector<long> obs_index(25, -1);
    for (size_t j = 0; j < obs.size(); ++j) {
      obs_index[obs[j].user * 5 + obs[j].item] = static_cast<long>(j);
    }
    const std::string tag = binary ? "binary" : "rating";

    for (LossKind lk : losses) {
      for (const auto* w : {&base_w, &nbr_w}) {
        const auto pw = ips_pair_weights(*w);
        std::vector<double> grad(f.theta().size(), 0.0);
        weighted_prediction_objective(f, obs, pw, batch, lk, &grad);
        out.push_back({"prediction/" + to_string(lk) +
                           (w == &base_w ? "/ips" : "/n-ips"),
                       max_fd_error(f.theta(), [&] {
                         return weighted_prediction_objective(f, obs, pw, batch, lk,
                                                              nullptr);
                       }, grad)});
      }
    }

    for (bool shared : {false, true}) {
      for (const auto* w : {&base_w, &nbr_w}) {
        if (shared && w == &base_w) continue;
        ImputationModel m;
        m.shared = shared;
        m.dim = 1;
        m.nodes = w->nodes;
        const size_t n_models = shared ? 1 : w->n_support;
        for (size_t k = 0; k < n_models; ++k) {
          m.models.push_back(
              FactorModel::random(5, 5, 2, binary, 0.5, rng, shared ? 1 : 0));
          perturb(m.models.back(), 0.3, rng);
        }
        const std::string wname = std::string(w == &base_w ? "dr" : "n-dr") +
                                  (shared ? "/shared" : "");
        // Prediction step.
        std::vector<double> grad(f.theta().size(), 0.0);
        dr_prediction_objective(f, m, obs, obs_index, *w, cells, loss, &grad);
        out.push_back({"dr-prediction/" + tag + "/" + wname,
                       max_fd_error(f.theta(), [&] {
                         return dr_prediction_objective(f, m, obs, obs_index, *w,
                                                        cells, loss, nullptr);
                       }, grad)});
        // Imputation step, DR and MRDR weights.
        for (bool mrdr : {false, true}) {
          std::vector<std::vector<double>> grads;
          for (const auto& mod : m.models) grads.emplace_back(mod.theta().size(), 0.0);
          imputation_objective(f, m, obs, *w, mrdr, batch, loss, &grads);
          double worst = 0.0;
          for (size_t k = 0; k < m.models.size(); ++k) {
            worst = std::max(worst, max_fd_error(m.models[k].theta(), [&] {
              return imputation_objective(f, m, obs, *w, mrdr, batch, loss, nullptr);
            }, grads[k]));
          }
          out.push_back({"imputation/" + tag + "/" + wname + (mrdr ? "/mrdr" : ""),
                         worst});
        }
      }
    }
  }
  return out;
}

// Runs a baseline and its neighborhood counterpart with point-mass g and the
// exact-match kernel; true when both the trajectories and the final
// parameters agree bitwise.
inline bool trajectories_match(TrainerKind baseline, TrainerKind nbr,
                               const ToyProblem& toy, const TrainConfig& cfg) {
  TreatmentRep flat = toy.rep;
  std::fill(flat.values.begin(), flat.values.end(), 1.0);
  PropensityField field = *toy.field;
  field.ratio = nullptr;
  TrainProblem base = toy.problem;
  base.field = &field;
  TrainProblem n = base;
  n.rep = &flat;
  n.kernel = KernelSpec::exact_match();
  n.pi = RepDistribution::point_mass({1.0});
  const auto a = train(baseline, base, cfg, true);
  const auto b = train(nbr, n, cfg, true);
  if (a.trajectory.empty() || a.trajectory != b.trajectory) return false;
  if (!(a.model == b.model)) return false;
  if (a.imputation.has_value() != b.imputation.has_value()) return false;
  if (a.imputation && !(a.imputation->models == b.imputation->models)) return false;
  return true;
}

}  // namespace nbrec::testing

#endif  // NBREC_TESTS_FIXTURES_HPP_
