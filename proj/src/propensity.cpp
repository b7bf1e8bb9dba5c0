// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include "nbrec/propensity.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "nbrec/serialize.hpp"

namespace nbrec {

namespace {

double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

std::string base_kind_name(BaseKind k) {
  switch (k) {
    case BaseKind::kNaiveBayes: return "naive-bayes";
    case BaseKind::kLogistic: return "logistic";
    case BaseKind::kOracle: return "oracle";
  }
  return "?";
}

}  // namespace

RatingMatrix BasePropensityModel::evaluate(const Dataset& ds) const {
  switch (kind) {
    case BaseKind::kOracle:
      if (oracle.rows != ds.n_users || oracle.cols != ds.n_items) {
        throw DataError("oracle propensity grid shape mismatch");
      }
      return oracle;
    case BaseKind::kLogistic:
      if (logistic.n_users() != ds.n_users ||
          logistic.n_items() != ds.n_items) {
        throw DataError("logistic propensity shape mismatch");
      }
      return logistic.predict_all();
    case BaseKind::kNaiveBayes: {
      RatingMatrix out(ds.n_users, ds.n_items, exposure_rate);
      for (const auto& r : ds.mnar) {
        auto it = nb_table.find(r.rating);
        if (it == nb_table.end()) {
          throw DataError(
              fmt::format("rating {} missing from naive Bayes table", r.rating));
        }
        out(r.user, r.item) = it->second;
      }
      return out;
    }
  }
  return {};
}

BasePropensityModel fit_naive_bayes(const Dataset& mnar,
                                    std::span<const Interaction> mar) {
  if (mnar.mnar.empty()) throw DataError("naive Bayes needs MNAR records");
  if (mar.empty()) throw DataError("naive Bayes needs MAR records");
  std::map<double, double> c_obs, c_mar;
  for (const auto& r : mnar.mnar) c_obs[r.rating] += 1.0;
  for (const auto& r : mar) c_mar[r.rating] += 1.0;
  std::map<double, double> alphabet;
  for (const auto& [v, c] : c_obs) alphabet[v] = 0.0;
  for (const auto& [v, c] : c_mar) alphabet[v] = 0.0;
  // P(r | o = 1) may have zeros. The MAR table is the divisor, so it gets
  // Laplace pseudo-counts whenever it misses part of the alphabet.
  auto normalize = [&](std::map<double, double>& counts, bool smooth) {
    double total = 0.0;
    for (const auto& [v, z] : alphabet) {
      counts[v] += smooth ? 1.0 : 0.0;
      total += counts[v];
    }
    for (auto& [v, c] : counts) c /= total;
  };
  normalize(c_obs, false);
  normalize(c_mar, c_mar.size() < alphabet.size());
  BasePropensityModel m;
  m.kind = BaseKind::kNaiveBayes;
  m.exposure_rate = static_cast<double>(mnar.mnar.size()) /
                    (static_cast<double>(mnar.n_users) * mnar.n_items);
  for (const auto& [v, z] : alphabet) {
    m.nb_table[v] = std::min(1.0, c_obs[v] * m.exposure_rate / c_mar[v]);
  }
  return m;
}

std::vector<Interaction> subsample_mar(const Dataset& ds, double fraction,
                                       uint64_t seed) {
  if (!ds.mar) throw DataError("dataset has no MAR records");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError(fmt::format("MAR fraction {} outside (0, 1]", fraction));
  }
  std::vector<size_t> idx(ds.mar->size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  Rng rng(seed);
  shuffle_in_place(idx, rng);
  const size_t n = std::max<size_t>(
      1, static_cast<size_t>(std::floor(fraction * idx.size() + 1e-9)));
  std::vector<Interaction> out;
  for (size_t k = 0; k < n && k < idx.size(); ++k) out.push_back((*ds.mar)[idx[k]]);
  return out;
}

BasePropensityModel fit_logistic(const ObservationMask& mask,
                                 const LogisticConfig& cfg,
                                 std::vector<double>* loss_trace) {
  const size_t nu = mask.rows, ni = mask.cols;
  if (nu * ni == 0) throw DataError("empty exposure mask");
  Rng rng(cfg.seed);
  const size_t dim = cfg.intercept_only ? 0 : cfg.dim;
  FactorModel f = FactorModel::random(nu, ni, dim, true, cfg.init_sd, rng);
  Adam opt(f.theta().size(), cfg.lr, cfg.l2);
  std::vector<double> grad(f.theta().size());
  const double inv_n = 1.0 / static_cast<double>(nu * ni);
  for (size_t it = 0; it < cfg.iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    CompensatedSum loss;
    for (size_t u = 0; u < nu; ++u) {
      for (size_t i = 0; i < ni; ++i) {
        const double y = mask(u, i) ? 1.0 : 0.0;
        const double p = f.predict(u, i);
        loss.add(-(y * std::log(std::max(p, 1e-300)) +
                   (1.0 - y) * std::log(std::max(1.0 - p, 1e-300))));
        f.add_score_grad(u, i, (p - y) * inv_n, grad);
      }
    }
    const double mean_loss = loss.value() * inv_n;
    if (!std::isfinite(mean_loss)) {
      throw NumericError(fmt::format("logistic propensity loss diverged at "
                                     "iteration {}",
                                     it));
    }
    if (loss_trace) loss_trace->push_back(mean_loss);
    if (cfg.intercept_only) {
      const size_t b0 = f.global_bias_index();
      for (size_t k = 0; k < grad.size(); ++k) {
        if (k != b0) grad[k] = 0.0;
      }
    }
    opt.step(f.theta(), grad);
  }
  BasePropensityModel m;
  m.kind = BaseKind::kLogistic;
  m.logistic = std::move(f);
  return m;
}

BasePropensityModel oracle_base(RatingMatrix probs) {
  for (double p : probs.values) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DataError(fmt::format("oracle propensity {} outside [0, 1]", p));
    }
  }
  BasePropensityModel m;
  m.kind = BaseKind::kOracle;
  m.oracle = std::move(probs);
  return m;
}

void BasePropensityModel::save(std::ostream& out) const {
  out << "base_propensity 1\n";
  out << "kind=" << base_kind_name(kind) << '\n';
  switch (kind) {
    case BaseKind::kNaiveBayes: {
      out << fmt::format("exposure_rate={}\n", exposure_rate);
      std::vector<double> keys, vals;
      for (const auto& [k, v] : nb_table) {
        keys.push_back(k);
        vals.push_back(v);
      }
      write_array(out, "ratings", keys);
      write_array(out, "probs", vals);
      break;
    }
    case BaseKind::kLogistic: logistic.save(out); break;
    case BaseKind::kOracle:
      out << fmt::format("rows={}\ncols={}\n", oracle.rows, oracle.cols);
      write_array(out, "probs", oracle.values);
      break;
  }
}

BasePropensityModel BasePropensityModel::load(std::istream& in) {
  expect_header(in, "base_propensity 1");
  const std::string kind = read_value(in, "kind");
  BasePropensityModel m;
  if (kind == "naive-bayes") {
    m.kind = BaseKind::kNaiveBayes;
    m.exposure_rate = read_key<double>(in, "exposure_rate");
    auto keys = read_array(in, "ratings");
    auto vals = read_array(in, "probs");
    if (keys.size() != vals.size()) throw ParseError("naive Bayes table size");
    for (size_t k = 0; k < keys.size(); ++k) m.nb_table[keys[k]] = vals[k];
  } else if (kind == "logistic") {
    m.kind = BaseKind::kLogistic;
    m.logistic = FactorModel::load(in);
  } else if (kind == "oracle") {
    m.kind = BaseKind::kOracle;
    const size_t r = read_key<size_t>(in, "rows");
    const size_t c = read_key<size_t>(in, "cols");
    m.oracle = RatingMatrix(r, c);
    m.oracle.values = read_array(in, "probs");
    if (m.oracle.values.size() != r * c) throw ParseError("oracle grid size");
  } else {
    throw ParseError("unknown base propensity kind " + kind);
  }
  return m;
}

// Density-ratio classifier.

namespace {

struct DrLayout {
  size_t nu, ni, nf;
  size_t c0() const { return 0; }
  size_t cu(size_t u) const { return 1 + u; }
  size_t ci(size_t i) const { return 1 + nu + i; }
  size_t w(size_t f) const { return 1 + nu + ni + f; }
  size_t wu(size_t u, size_t f) const { return 1 + nu + ni + nf + u * nf + f; }
  size_t wi(size_t i, size_t f) const {
    return 1 + nu + ni + nf + nu * nf + i * nf + f;
  }
  size_t total() const { return 1 + nu + ni + nf * (1 + nu + ni); }
};

void psi(const DensityRatioModel& m, std::span<const double> g, double* out) {
  for (size_t s = 0; s < m.dim; ++s) {
    const double raw[2] = {g[s], g[s] * g[s]};
    for (size_t t = 0; t < 2; ++t) {
      const size_t f = 2 * s + t;
      out[f] = (raw[t] - m.feat_mean[f]) / m.feat_sd[f];
    }
  }
}

double logit(const DensityRatioModel& m, const DrLayout& L, size_t u, size_t i,
             const double* features) {
  const auto& th = m.theta;
  double s = th[L.c0()] + th[L.cu(u)] + th[L.ci(i)];
  for (size_t f = 0; f < L.nf; ++f) {
    s += features[f] * (th[L.w(f)] + th[L.wu(u, f)] + th[L.wi(i, f)]);
  }
  return s;
}

}  // namespace

double DensityRatioModel::prob_positive(size_t u, size_t i,
                                        std::span<const double> g) const {
  if (g.size() != dim) throw ConfigError("density ratio dimension mismatch");
  const DrLayout L{n_users, n_items, n_feat()};
  std::vector<double> f(n_feat());
  psi(*this, g, f.data());
  return sigmoid(logit(*this, L, u, i, f.data()));
}

double DensityRatioModel::ratio(size_t u, size_t i,
                                std::span<const double> g) const {
  if (g.size() != dim) throw ConfigError("density ratio dimension mismatch");
  const DrLayout L{n_users, n_items, n_feat()};
  std::vector<double> f(n_feat());
  psi(*this, g, f.data());
  // (1 - s) / s = exp(-logit).
  return std::exp(-logit(*this, L, u, i, f.data())) /
         static_cast<double>(k_neg);
}

DensityRatioModel fit_density_ratio(const ObservationMask& mask,
                                    const TreatmentRep& rep,
                                    const DensityRatioConfig& cfg) {
  if (!mask.same_shape(Grid<double>(rep.n_users, rep.n_items))) {
    throw DataError("mask and representation shapes differ");
  }
  if (cfg.k_neg == 0) throw ConfigError("k_neg must be positive");
  if (rep.support.size() != rep.dim) throw ConfigError("support dimension");
  std::vector<size_t> pos;
  for (size_t k = 0; k < mask.size(); ++k) {
    if (mask.values[k]) pos.push_back(k);
  }
  if (pos.empty()) throw DataError("density ratio needs exposed pairs");

  DensityRatioModel m;
  m.n_users = rep.n_users;
  m.n_items = rep.n_items;
  m.dim = rep.dim;
  m.k_neg = cfg.k_neg;
  const size_t nf = m.n_feat();
  m.feat_mean.assign(nf, 0.0);
  m.feat_sd.assign(nf, 1.0);
  for (size_t s = 0; s < rep.dim; ++s) {
    for (size_t t = 0; t < 2; ++t) {
      double sum = 0.0, sq = 0.0;
      for (size_t k : pos) {
        const double g = rep.values[k * rep.dim + s];
        const double x = t == 0 ? g : g * g;
        sum += x;
        sq += x * x;
      }
      const double n = static_cast<double>(pos.size());
      const double mean = sum / n;
      const double var = std::max(0.0, sq / n - mean * mean);
      m.feat_mean[2 * s + t] = mean;
      m.feat_sd[2 * s + t] = var > 1e-12 ? std::sqrt(var) : 1.0;
    }
  }
  const DrLayout L{m.n_users, m.n_items, nf};
  m.theta.assign(L.total(), 0.0);
  // Start from the class prior so the untrained ratio is 1.
  m.theta[L.c0()] = -std::log(static_cast<double>(cfg.k_neg));

  Rng rng(cfg.seed);
  // Only the per-user and per-item deviations are shrunk; the shared terms
  // carry the population ratio.
  Adam opt(m.theta.size(), cfg.lr, 0.0);
  std::vector<double> grad(m.theta.size());
  struct Sample {
    size_t cell;
    std::vector<double> g;
    double label;
  };
  std::vector<double> feat(nf);
  // The penalty (l2 / 2) |deviations|^2 is added to the summed log-loss, so
  // each mean-loss step carries l2 / (sample count).
  const double shrink =
      cfg.l2 / static_cast<double>(pos.size() * (1 + cfg.k_neg));
  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<Sample> samples;
    samples.reserve(pos.size() * (1 + cfg.k_neg));
    for (size_t k : pos) {
      auto g = rep.at(k / rep.n_items, k % rep.n_items);
      samples.push_back({k, {g.begin(), g.end()}, 1.0});
      for (size_t r = 0; r < cfg.k_neg; ++r) {
        std::vector<double> gn(rep.dim);
        for (size_t s = 0; s < rep.dim; ++s) gn[s] = rep.support[s].sample(rng);
        samples.push_back({k, std::move(gn), 0.0});
      }
    }
    shuffle_in_place(samples, rng);
    for (size_t start = 0; start < samples.size(); start += cfg.batch_size) {
      const size_t end = std::min(samples.size(), start + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      const double inv_b = 1.0 / static_cast<double>(end - start);
      for (size_t b = start; b < end; ++b) {
        const auto& smp = samples[b];
        const size_t u = smp.cell / rep.n_items, i = smp.cell % rep.n_items;
        psi(m, smp.g, feat.data());
        const double d = (sigmoid(logit(m, L, u, i, feat.data())) - smp.label) * inv_b;
        grad[L.c0()] += d;
        grad[L.cu(u)] += d;
        grad[L.ci(i)] += d;
        for (size_t f = 0; f < nf; ++f) {
          grad[L.w(f)] += d * feat[f];
          grad[L.wu(u, f)] += d * feat[f];
          grad[L.wi(i, f)] += d * feat[f];
        }
      }
      for (size_t k = L.cu(0); k < L.w(0); ++k) grad[k] += shrink * m.theta[k];
      for (size_t k = L.wu(0, 0); k < L.total(); ++k) grad[k] += shrink * m.theta[k];
      opt.step(m.theta, grad);
    }
    for (double x : m.theta) {
      if (!std::isfinite(x)) {
        throw NumericError(
            fmt::format("density ratio diverged in epoch {}", epoch));
      }
    }
  }
  return m;
}

void DensityRatioModel::save(std::ostream& out) const {
  out << "density_ratio 1\n";
  out << fmt::format("n_users={}\nn_items={}\ndim={}\nk_neg={}\n", n_users,
                     n_items, dim, k_neg);
  write_array(out, "feat_mean", feat_mean);
  write_array(out, "feat_sd", feat_sd);
  write_array(out, "theta", theta);
}

DensityRatioModel DensityRatioModel::load(std::istream& in) {
  expect_header(in, "density_ratio 1");
  DensityRatioModel m;
  m.n_users = read_key<size_t>(in, "n_users");
  m.n_items = read_key<size_t>(in, "n_items");
  m.dim = read_key<size_t>(in, "dim");
  m.k_neg = read_key<size_t>(in, "k_neg");
  m.feat_mean = read_array(in, "feat_mean");
  m.feat_sd = read_array(in, "feat_sd");
  m.theta = read_array(in, "theta");
  const DrLayout L{m.n_users, m.n_items, m.n_feat()};
  if (m.theta.size() != L.total() || m.feat_mean.size() != m.n_feat()) {
    throw ParseError("density ratio parameter count mismatch");
  }
  return m;
}

double PropensityField::inverse_base(size_t u, size_t i) const {
  return std::clamp(inv_base(u, i), clip_lo, clip_hi);
}

double PropensityField::inverse_joint(size_t u, size_t i,
                                      std::span<const double> g) const {
  if (!ratio) return inverse_base(u, i);
  const double v = support_measure * ratio(u, i, g) * inv_base(u, i);
  return std::clamp(v, clip_lo, clip_hi);
}

PropensityField PropensityField::from_probs(const RatingMatrix& p,
                                            double clip_hi) {
  RatingMatrix inv(p.rows, p.cols);
  for (size_t k = 0; k < p.size(); ++k) {
    inv.values[k] = p.values[k] > 0.0
                        ? 1.0 / p.values[k]
                        : std::numeric_limits<double>::infinity();
  }
  return from_inverse(std::move(inv), clip_hi);
}

PropensityField PropensityField::from_inverse(RatingMatrix inv,
                                              double clip_hi) {
  PropensityField f;
  f.inv_base = std::move(inv);
  f.clip_hi = clip_hi;
  return f;
}

PropensityField::RatioFn ratio_from_model(
    std::shared_ptr<const DensityRatioModel> model) {
  return [model](size_t u, size_t i, std::span<const double> g) {
    return model->ratio(u, i, g);
  };
}

}  // namespace nbrec
