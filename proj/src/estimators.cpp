// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include "nbrec/estimators.hpp"

#include <fmt/format.h>

#include <fstream>

namespace nbrec {

namespace {

void check_shape(const RatingMatrix& a, const RatingMatrix& b) {
  if (!a.same_shape(b)) {
    throw DataError(fmt::format("shape mismatch: {}x{} vs {}x{}", a.rows,
                                a.cols, b.rows, b.cols));
  }
}

void check_problem(const ObservationMask& mask, const TreatmentRep& rep,
                   const PropensityField& field, const KernelSpec& kernel,
                   const RepDistribution& pi) {
  kernel.validate();
  if (rep.n_users != mask.rows || rep.n_items != mask.cols ||
      field.inv_base.rows != mask.rows || field.inv_base.cols != mask.cols) {
    throw DataError("mask, representation and propensity shapes differ");
  }
  if (pi.dim != rep.dim || kernel.bandwidth.size() != rep.dim) {
    throw ConfigError("pi, kernel and representation dimensions differ");
  }
}

double integrate_report(EstimateReport& r, const RepDistribution& pi) {
  double total = 0.0;
  for (size_t k = 0; k < pi.size(); ++k) total += pi.weights[k] * r.per_g[k];
  r.integrated = total;
  return total;
}

}  // namespace

double ideal_loss(const RatingMatrix& rhat, const RatingMatrix& r_true,
                  LossKind loss) {
  check_shape(rhat, r_true);
  if (rhat.size() == 0) throw DataError("empty prediction matrix");
  CompensatedSum acc;
  for (size_t k = 0; k < rhat.size(); ++k) {
    acc.add(pointwise_loss(loss, rhat.values[k], r_true.values[k]));
  }
  return acc.value() / static_cast<double>(rhat.size());
}

double ideal_loss_n(const RatingMatrix& rhat,
                    const std::vector<RatingMatrix>& potentials,
                    const RepDistribution& pi, LossKind loss) {
  if (potentials.size() != pi.size()) {
    throw DataError(fmt::format("{} potential matrices for {} support points",
                                potentials.size(), pi.size()));
  }
  double total = 0.0;
  for (size_t k = 0; k < pi.size(); ++k) {
    total += pi.weights[k] * ideal_loss(rhat, potentials[k], loss);
  }
  return total;
}

double naive_loss(const ObservationMask& mask, const PairError& err) {
  CompensatedSum acc;
  size_t n = 0;
  for (size_t u = 0; u < mask.rows; ++u) {
    for (size_t i = 0; i < mask.cols; ++i) {
      if (!mask(u, i)) continue;
      acc.add(err(u, i));
      ++n;
    }
  }
  if (n == 0) throw DataError("naive loss needs an observed pair");
  return acc.value() / static_cast<double>(n);
}

double naive_loss(const RatingMatrix& rhat, const RatingMatrix& r_obs,
                  const ObservationMask& mask, LossKind loss) {
  check_shape(rhat, r_obs);
  return naive_loss(mask, error_from_matrices(rhat, r_obs, loss));
}

double ips_loss(const ObservationMask& mask, const PropensityField& field,
                const PairError& err) {
  CompensatedSum acc;
  for (size_t u = 0; u < mask.rows; ++u) {
    for (size_t i = 0; i < mask.cols; ++i) {
      if (!mask(u, i)) continue;
      acc.add(err(u, i) * field.inverse_base(u, i));
    }
  }
  return acc.value() / static_cast<double>(mask.size());
}

double ips_loss(const RatingMatrix& rhat, const RatingMatrix& r_obs,
                const ObservationMask& mask, const PropensityField& field,
                LossKind loss) {
  check_shape(rhat, r_obs);
  return ips_loss(mask, field, error_from_matrices(rhat, r_obs, loss));
}

double dr_loss(const ObservationMask& mask, const PropensityField& field,
               const PairError& err, const PairError& imputed) {
  CompensatedSum acc;
  for (size_t u = 0; u < mask.rows; ++u) {
    for (size_t i = 0; i < mask.cols; ++i) {
      const double dhat = imputed(u, i);
      acc.add(dhat);
      if (mask(u, i)) {
        acc.add((err(u, i) - dhat) * field.inverse_base(u, i));
      }
    }
  }
  return acc.value() / static_cast<double>(mask.size());
}

EstimateReport n_ips_loss(const ObservationMask& mask, const TreatmentRep& rep,
                          const PropensityField& field,
                          const KernelSpec& kernel, const RepDistribution& pi,
                          const PairErrorAt& err) {
  check_problem(mask, rep, field, kernel, pi);
  EstimateReport r;
  r.estimator = "N-IPS";
  r.per_g.assign(pi.size(), 0.0);
  for (size_t k = 0; k < pi.size(); ++k) {
    const auto g = pi.node(k);
    CompensatedSum acc;
    for (size_t u = 0; u < mask.rows; ++u) {
      for (size_t i = 0; i < mask.cols; ++i) {
        if (!mask(u, i)) continue;
        const double kw = kernel_weight(kernel, rep.at(u, i), g);
        if (kw == 0.0) continue;
        acc.add(err(u, i, k) * kw * field.inverse_joint(u, i, g));
      }
    }
    r.per_g[k] = acc.value() / static_cast<double>(mask.size());
  }
  integrate_report(r, pi);
  return r;
}

EstimateReport n_dr_loss(const ObservationMask& mask, const TreatmentRep& rep,
                         const PropensityField& field, const KernelSpec& kernel,
                         const RepDistribution& pi, const PairErrorAt& err,
                         const PairErrorAt& imputed) {
  check_problem(mask, rep, field, kernel, pi);
  EstimateReport r;
  r.estimator = "N-DR";
  r.per_g.assign(pi.size(), 0.0);
  for (size_t k = 0; k < pi.size(); ++k) {
    const auto g = pi.node(k);
    CompensatedSum acc;
    for (size_t u = 0; u < mask.rows; ++u) {
      for (size_t i = 0; i < mask.cols; ++i) {
        const double dhat = imputed(u, i, k);
        acc.add(dhat);
        if (!mask(u, i)) continue;
        const double kw = kernel_weight(kernel, rep.at(u, i), g);
        if (kw == 0.0) continue;
        acc.add((err(u, i, k) - dhat) * kw * field.inverse_joint(u, i, g));
      }
    }
    r.per_g[k] = acc.value() / static_cast<double>(mask.size());
  }
  integrate_report(r, pi);
  return r;
}

PairError error_from_matrices(const RatingMatrix& rhat,
                              const RatingMatrix& target, LossKind loss) {
  check_shape(rhat, target);
  return [&rhat, &target, loss](size_t u, size_t i) {
    return pointwise_loss(loss, rhat(u, i), target(u, i));
  };
}

PairErrorAt error_from_potentials(const RatingMatrix& rhat,
                                  const std::vector<RatingMatrix>& potentials,
                                  LossKind loss) {
  for (const auto& p : potentials) check_shape(rhat, p);
  return [&rhat, &potentials, loss](size_t u, size_t i, size_t k) {
    return pointwise_loss(loss, rhat(u, i), potentials[k](u, i));
  };
}

PairErrorAt error_at_observed(const RatingMatrix& rhat,
                              const RatingMatrix& r_obs, LossKind loss) {
  check_shape(rhat, r_obs);
  return [&rhat, &r_obs, loss](size_t u, size_t i, size_t) {
    return pointwise_loss(loss, rhat(u, i), r_obs(u, i));
  };
}

void write_report_csv(const std::vector<EstimateReport>& reports,
                      const RepDistribution& pi, const std::string& path,
                      const std::string& header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  if (!header.empty()) out << header;
  out << "estimator,g,loss,integrated\n";
  for (const auto& r : reports) {
    for (size_t k = 0; k < r.per_g.size(); ++k) {
      std::string g;
      for (size_t s = 0; s < pi.dim; ++s) {
        g += (s ? ";" : "") + fmt::format("{}", pi.node(k)[s]);
      }
      out << fmt::format("{},{},{},{}\n", r.estimator, g, r.per_g[k],
                         r.integrated);
    }
  }
}

}  // namespace nbrec
