// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include "nbrec/eval.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "nbrec/estimators.hpp"
#include "nbrec/propensity.hpp"

namespace nbrec {

namespace {

void check_pair_spans(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DataError(fmt::format("length mismatch: {} vs {}", a.size(), b.size()));
  }
  if (a.empty()) throw DataError("metric needs at least one value");
}

template <class F>
double integrate01(F&& f) {
  return boost::math::quadrature::gauss<double, 64>::integrate(f, 0.0, 1.0);
}

}  // namespace

double relative_error(double est, double ideal) {
  if (!(ideal > 0.0)) {
    throw NumericError(fmt::format("relative error needs ideal > 0, got {}", ideal));
  }
  return std::abs(ideal - est) / ideal;
}

double mean_absolute_error(std::span<const double> pred,
                           std::span<const double> target) {
  check_pair_spans(pred, target);
  CompensatedSum acc;
  for (size_t k = 0; k < pred.size(); ++k) acc.add(std::abs(pred[k] - target[k]));
  return acc.value() / static_cast<double>(pred.size());
}

double mean_squared_error(std::span<const double> pred,
                          std::span<const double> target) {
  check_pair_spans(pred, target);
  CompensatedSum acc;
  for (size_t k = 0; k < pred.size(); ++k) {
    const double d = pred[k] - target[k];
    acc.add(d * d);
  }
  return acc.value() / static_cast<double>(pred.size());
}

double auc(std::span<const double> scores, std::span<const double> labels) {
  check_pair_spans(scores, labels);
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  // Mid-ranks over tied blocks; summed as twice the rank to stay integral.
  double rank2_pos = 0.0, n_pos = 0.0;
  for (size_t lo = 0; lo < order.size();) {
    size_t hi = lo;
    while (hi + 1 < order.size() && scores[order[hi + 1]] == scores[order[lo]]) ++hi;
    const double mid2 = static_cast<double>(lo + hi + 2);  // 2 * mean 1-based rank
    for (size_t k = lo; k <= hi; ++k) {
      if (labels[order[k]] > 0.5) {
        rank2_pos += mid2;
        n_pos += 1.0;
      }
    }
    lo = hi + 1;
  }
  const double n_neg = static_cast<double>(scores.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw DataError("AUC needs both classes");
  return (rank2_pos / 2.0 - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double ndcg_at_k(const std::vector<std::vector<double>>& scores,
                 const std::vector<std::vector<double>>& relevance, size_t k,
                 size_t* n_evaluated) {
  if (k == 0) throw ConfigError("NDCG cutoff must be at least 1");
  if (scores.size() != relevance.size()) throw DataError("group count mismatch");
  double total = 0.0;
  size_t n = 0;
  for (size_t q = 0; q < scores.size(); ++q) {
    const auto& s = scores[q];
    const auto& rel = relevance[q];
    if (s.size() != rel.size()) throw DataError("group length mismatch");
    std::vector<size_t> order(s.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return s[a] > s[b]; });
    std::vector<double> ideal(rel);
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double dcg = 0.0, idcg = 0.0;
    for (size_t r = 0; r < std::min(k, s.size()); ++r) {
      const double disc = 1.0 / std::log2(static_cast<double>(r) + 2.0);
      dcg += rel[order[r]] * disc;
      idcg += ideal[r] * disc;
    }
    if (idcg <= 0.0) continue;
    total += dcg / idcg;
    ++n;
  }
  if (n_evaluated) *n_evaluated = n;
  return n ? total / static_cast<double>(n)
           : std::numeric_limits<double>::quiet_NaN();
}

std::vector<MetricReport> evaluate_predictions(
    std::span<const Interaction> test, const std::vector<double>& pred,
    size_t ndcg_k, double positive_threshold) {
  if (test.size() != pred.size()) throw DataError("prediction count mismatch");
  std::vector<double> target(test.size()), label(test.size());
  for (size_t k = 0; k < test.size(); ++k) {
    target[k] = test[k].rating;
    label[k] = test[k].rating >= positive_threshold ? 1.0 : 0.0;
  }
  std::vector<MetricReport> out;
  out.push_back({"mse", mean_squared_error(pred, target), 0, test.size()});
  out.push_back({"mae", mean_absolute_error(pred, target), 0, test.size()});
  const double n_pos = std::accumulate(label.begin(), label.end(), 0.0);
  const double a = n_pos > 0.0 && n_pos < static_cast<double>(label.size())
                       ? auc(pred, label)
                       : std::numeric_limits<double>::quiet_NaN();
  out.push_back({"auc", a, 0, test.size()});
  std::map<size_t, size_t> group_of;
  std::vector<std::vector<double>> s, rel;
  for (size_t k = 0; k < test.size(); ++k) {
    auto [it, fresh] = group_of.try_emplace(test[k].user, s.size());
    if (fresh) {
      s.emplace_back();
      rel.emplace_back();
    }
    s[it->second].push_back(pred[k]);
    rel[it->second].push_back(label[k]);
  }
  size_t n_users = 0;
  const double nd = ndcg_at_k(s, rel, ndcg_k, &n_users);
  out.push_back({fmt::format("ndcg@{}", ndcg_k), nd, ndcg_k, n_users});
  return out;
}

void write_metrics_csv(const std::vector<MetricReport>& metrics,
                       const std::string& path, const std::string& header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << header << "metric,value,k,n\n";
  for (const auto& m : metrics) {
    out << fmt::format("{},{},{},{}\n", m.metric, m.value, m.k, m.n);
  }
}

// ---- Enumerable model ---------------------------------------------------------

void EnumerableModel::validate() const {
  const size_t nx = n_x(), ng = n_g(), ne = n_e();
  if (nx == 0 || ng == 0 || ne == 0) throw ConfigError("empty enumerable model");
  if (p_obs.size() != nx || p_g_obs.size() != nx * ng ||
      p_g_unobs.size() != nx * ng || delta.size() != nx * ng * ne) {
    throw ConfigError("enumerable model tables have inconsistent sizes");
  }
  auto check_simplex = [](std::span<const double> v, const char* what) {
    double s = 0.0;
    for (double x : v) {
      if (x < 0.0) throw ConfigError(fmt::format("{} has a negative entry", what));
      s += x;
    }
    if (std::abs(s - 1.0) > 1e-12) {
      throw ConfigError(fmt::format("{} sums to {}", what, s));
    }
  };
  check_simplex(p_x, "p_x");
  check_simplex(p_e, "p_e");
  check_simplex(pi, "pi");
  for (size_t x = 0; x < nx; ++x) {
    check_simplex(std::span(p_g_obs).subspan(x * ng, ng), "P(g|x,o=1)");
    check_simplex(std::span(p_g_unobs).subspan(x * ng, ng), "P(g|x,o=0)");
  }
}

double EnumerableModel::p_g(size_t x, size_t g) const {
  const size_t ng = n_g();
  return p_obs[x] * p_g_obs[x * ng + g] + (1.0 - p_obs[x]) * p_g_unobs[x * ng + g];
}

double EnumerableModel::mean_delta(size_t x, size_t g) const {
  const size_t ne = n_e();
  double s = 0.0;
  for (size_t e = 0; e < ne; ++e) s += p_e[e] * delta[(x * n_g() + g) * ne + e];
  return s;
}

double enumerate_ideal_loss(const EnumerableModel& m) {
  m.validate();
  // Without interference the potential outcome under exposure carries the
  // treatment the pair would receive when exposed.
  const size_t ng = m.n_g(), ne = m.n_e();
  CompensatedSum acc;
  for (size_t x = 0; x < m.n_x(); ++x) {
    for (size_t g = 0; g < ng; ++g) {
      for (size_t e = 0; e < ne; ++e) {
        acc.add(m.p_x[x] * m.p_g_obs[x * ng + g] * m.p_e[e] *
                m.delta[(x * ng + g) * ne + e]);
      }
    }
  }
  return acc.value();
}

double enumerate_ideal_loss_n(const EnumerableModel& m) {
  m.validate();
  const size_t ng = m.n_g(), ne = m.n_e();
  CompensatedSum acc;
  for (size_t x = 0; x < m.n_x(); ++x) {
    for (size_t g = 0; g < ng; ++g) {
      for (size_t e = 0; e < ne; ++e) {
        acc.add(m.p_x[x] * m.pi[g] * m.p_e[e] * m.delta[(x * ng + g) * ne + e]);
      }
    }
  }
  return acc.value();
}

double selection_gap_integral(const EnumerableModel& m) {
  m.validate();
  const size_t ng = m.n_g();
  CompensatedSum acc;
  for (size_t g = 0; g < ng; ++g) {
    for (size_t x = 0; x < m.n_x(); ++x) {
      acc.add(m.p_x[x] * m.mean_delta(x, g) * (m.p_g(x, g) - m.p_g_obs[x * ng + g]));
    }
  }
  return acc.value();
}

double selection_gap_general(const EnumerableModel& m) {
  m.validate();
  const size_t ng = m.n_g();
  CompensatedSum acc;
  for (size_t g = 0; g < ng; ++g) {
    for (size_t x = 0; x < m.n_x(); ++x) {
      acc.add(m.p_x[x] * m.mean_delta(x, g) * (m.pi[g] - m.p_g_obs[x * ng + g]));
    }
  }
  return acc.value();
}

EnumerableModel random_enumerable_model(size_t n_x, size_t n_g, size_t n_e,
                                        bool independent, uint64_t seed) {
  Rng rng(seed);
  auto simplex = [&](size_t n) {
    std::vector<double> v(n);
    double s = 0.0;
    for (double& x : v) s += (x = 0.2 + uniform01(rng));
    for (double& x : v) x /= s;
    return v;
  };
  EnumerableModel m;
  m.p_x = simplex(n_x);
  m.p_e = simplex(n_e);
  m.pi = simplex(n_g);
  m.p_obs.resize(n_x);
  for (double& p : m.p_obs) p = 0.2 + 0.6 * uniform01(rng);
  m.p_g_obs.resize(n_x * n_g);
  m.p_g_unobs.resize(n_x * n_g);
  for (size_t x = 0; x < n_x; ++x) {
    std::vector<double> obs = m.pi;
    if (!independent) {
      // Tilt towards a random simplex point while keeping P(g|x,o=0) >= 0.
      const std::vector<double> q = simplex(n_g);
      const double odds = m.p_obs[x] / (1.0 - m.p_obs[x]);
      double lam = 1.0;
      for (size_t g = 0; g < n_g; ++g) {
        if (q[g] > m.pi[g]) lam = std::min(lam, m.pi[g] / (odds * (q[g] - m.pi[g])));
      }
      lam *= 0.5;
      for (size_t g = 0; g < n_g; ++g) obs[g] = (1.0 - lam) * m.pi[g] + lam * q[g];
    }
    double s0 = 0.0;
    for (size_t g = 0; g < n_g; ++g) {
      m.p_g_obs[x * n_g + g] = obs[g];
      m.p_g_unobs[x * n_g + g] =
          (m.pi[g] - m.p_obs[x] * obs[g]) / (1.0 - m.p_obs[x]);
      s0 += m.p_g_unobs[x * n_g + g];
    }
    for (size_t g = 0; g < n_g; ++g) m.p_g_unobs[x * n_g + g] /= s0;
  }
  m.delta.resize(n_x * n_g * n_e);
  for (double& d : m.delta) d = 4.0 * uniform01(rng);
  return m;
}

// ---- Exact grid propensities --------------------------------------------------

double poisson_binomial_tail(std::span<const double> p, double c) {
  std::vector<double> dist(p.size() + 1, 0.0);
  dist[0] = 1.0;
  for (size_t j = 0; j < p.size(); ++j) {
    for (size_t s = j + 1; s > 0; --s) {
      dist[s] = dist[s] * (1.0 - p[j]) + dist[s - 1] * p[j];
    }
    dist[0] *= 1.0 - p[j];
  }
  const double start = std::max(0.0, std::ceil(c));
  double tail = 0.0;
  for (size_t s = static_cast<size_t>(start); s < dist.size(); ++s) tail += dist[s];
  return tail;
}

RatingMatrix exact_threshold_propensity(const RatingMatrix& p, double c) {
  RatingMatrix out(p.rows, p.cols);
  std::vector<double> nb;
  for (size_t u = 0; u < p.rows; ++u) {
    for (size_t i = 0; i < p.cols; ++i) {
      nb.clear();
      for (size_t j = 0; j < p.cols; ++j) {
        if (j != i) nb.push_back(p(u, j));
      }
      for (size_t v = 0; v < p.rows; ++v) {
        if (v != u) nb.push_back(p(v, i));
      }
      out(u, i) = poisson_binomial_tail(nb, c);
    }
  }
  return out;
}

// ---- Reference specification -----------------------------------------------------

double ReferenceSpec::p_obs(double x) const {
  return 1.0 / (1.0 + std::exp(-(a0 + a1 * x)));
}

double ReferenceSpec::mode(double x) const { return 0.5 + m1 * (x - 0.5); }

double ReferenceSpec::norm_const(double x) const {
  const double m = mode(x);
  return 1.0 / (eps + ((1.0 - m) * (1.0 - m) * (1.0 - m) + m * m * m) / 3.0);
}

double ReferenceSpec::density(double x, double g) const {
  if (g < 0.0 || g > 1.0) return 0.0;
  const double d = g - mode(x);
  return norm_const(x) * (eps + d * d);
}

double ReferenceSpec::density_dg2(double x, double g) const {
  if (g < 0.0 || g > 1.0) return 0.0;
  return 2.0 * norm_const(x);
}

double ReferenceSpec::joint(double x, double g) const {
  return p_obs(x) * density(x, g);
}

double ReferenceSpec::delta(double x, double g) const {
  const double r = 1.0 + 2.0 * g + 0.5 * x;
  return r * r;
}

double ReferenceSpec::delta_hat(double x, double g) const {
  return kappa * kappa * delta(x, g);
}

double ReferenceSpec::sample_g(double x, Rng& rng) const {
  const double m = mode(x);
  const double bound = norm_const(x) * (eps + std::max(m * m, (1.0 - m) * (1.0 - m)));
  for (;;) {
    const double g = uniform01(rng);
    if (uniform01(rng) * bound <= density(x, g)) return g;
  }
}

double ReferenceSpec::ideal() const {
  return integrate01([&](double x) { return delta(x, g0); });
}

SweepEstimator parse_sweep_estimator(const std::string& s) {
  if (s == "n-ips" || s == "N-IPS") return SweepEstimator::kNIps;
  if (s == "n-dr" || s == "N-DR") return SweepEstimator::kNDr;
  throw ConfigError("unknown sweep estimator: " + s);
}

std::string to_string(SweepEstimator e) {
  return e == SweepEstimator::kNIps ? "N-IPS" : "N-DR";
}

namespace {

double residual(const ReferenceSpec& s, SweepEstimator est, double x) {
  const double d = s.delta(x, s.g0);
  return est == SweepEstimator::kNIps ? d : d - s.delta_hat(x, s.g0);
}

double bias_coefficient(const ReferenceSpec& s, SweepEstimator est) {
  const double mean = integrate01([&](double x) {
    return s.density_dg2(x, s.g0) / s.density(x, s.g0) * residual(s, est, x);
  });
  return 0.5 * kernel_mu2(s.kernel) * mean;
}

double psi_bar(const ReferenceSpec& s, SweepEstimator est) {
  const double mean = integrate01([&](double x) {
    const double r = residual(s, est, x);
    return r * r / s.joint(x, s.g0);
  });
  return kernel_roughness(s.kernel) * mean;
}

}  // namespace

double analytic_bias(const ReferenceSpec& spec, SweepEstimator est, double h) {
  return bias_coefficient(spec, est) * h * h;
}

double asymptotic_variance(const ReferenceSpec& spec, SweepEstimator est,
                           double h) {
  return psi_bar(spec, est) / (static_cast<double>(spec.n) * h);
}

double optimal_bandwidth(const ReferenceSpec& spec, SweepEstimator est) {
  const double b = bias_coefficient(spec, est);
  if (b == 0.0 || !std::isfinite(b)) {
    throw NumericError("bias coefficient is zero: bandwidth unbounded");
  }
  return std::pow(psi_bar(spec, est) / (4.0 * static_cast<double>(spec.n) * b * b),
                  0.2);
}

double optimal_bandwidth(const BandwidthInputs& in, double h_start,
                         size_t max_iter) {
  const size_t nk = in.nodes.size(), nj = in.p.size();
  if (nk == 0 || in.pi.size() != nk || nj == 0 || in.p_dg2.size() != nj ||
      in.err.size() != nj || in.n == 0) {
    throw ConfigError("bandwidth inputs are inconsistent");
  }
  double b = 0.0;
  for (size_t k = 0; k < nk; ++k) {
    double m = 0.0;
    for (size_t j = 0; j < nj; ++j) m += in.p_dg2[j][k] / in.p[j][k] * in.err[j][k];
    b += in.pi[k] * m / static_cast<double>(nj);
  }
  b *= 0.5 * kernel_mu2(in.kernel);
  if (b == 0.0 || !std::isfinite(b)) {
    throw NumericError("bias coefficient is zero: bandwidth unbounded");
  }
  // Cross moments do not depend on h.
  std::vector<double> cross(nk * nk, 0.0);
  for (size_t k = 0; k < nk; ++k) {
    for (size_t l = 0; l < nk; ++l) {
      double m = 0.0;
      for (size_t j = 0; j < nj; ++j) m += in.err[j][k] * in.err[j][l] / in.p[j][l];
      cross[k * nk + l] = m / static_cast<double>(nj);
    }
  }
  const double denom = 4.0 * static_cast<double>(in.n) * b * b;
  double h = h_start;
  for (size_t it = 0; it < max_iter; ++it) {
    double psi = 0.0;
    for (size_t k = 0; k < nk; ++k) {
      for (size_t l = 0; l < nk; ++l) {
        psi += in.pi[k] * in.pi[l] *
               kernel_convolution(in.kernel, (in.nodes[k] - in.nodes[l]) / h) *
               cross[k * nk + l];
      }
    }
    const double next = std::pow(psi / denom, 0.2);
    if (!std::isfinite(next) || next <= 0.0) {
      throw NumericError("bandwidth iteration left the positive reals");
    }
    if (std::abs(next - h) <= 1e-13 * h) return next;
    h = next;
  }
  return h;
}

// ---- Monte-Carlo sweep -------------------------------------------------------------

std::vector<double> geometric_grid(double lo, double hi, size_t count) {
  if (!(lo > 0.0 && hi > lo) || count < 2) {
    throw ConfigError("bandwidth grid needs 0 < lo < hi and at least 2 points");
  }
  std::vector<double> g(count);
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (size_t k = 0; k < count; ++k) {
    g[k] = lo * std::exp(step * static_cast<double>(k));
  }
  g.back() = hi;
  return g;
}

double weighted_slope(std::span<const double> x, std::span<const double> y,
                      std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size() || x.size() < 2) {
    throw ConfigError("slope fit needs at least two matching points");
  }
  double sw = 0.0, mx = 0.0, my = 0.0;
  for (size_t k = 0; k < x.size(); ++k) {
    sw += w[k];
    mx += w[k] * x[k];
    my += w[k] * y[k];
  }
  mx /= sw;
  my /= sw;
  double sxy = 0.0, sxx = 0.0;
  for (size_t k = 0; k < x.size(); ++k) {
    sxy += w[k] * (x[k] - mx) * (y[k] - my);
    sxx += w[k] * (x[k] - mx) * (x[k] - mx);
  }
  if (sxx == 0.0) throw NumericError("degenerate slope fit");
  return sxy / sxx;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  const std::vector<double> w(x.size(), 1.0);
  return weighted_slope(x, y, w);
}

SweepReport verify_bias_variance(const ReferenceSpec& spec, SweepEstimator est,
                                 std::span<const double> h_grid,
                                 size_t replications, uint64_t seed) {
  if (h_grid.size() < 2) throw ConfigError("bandwidth grid needs two points");
  for (double h : h_grid) {
    if (!(h > 0.0)) throw ConfigError("bandwidths must be positive");
  }
  if (replications < 2) throw ConfigError("need at least two replications");
  const size_t n = spec.n, nh = h_grid.size();
  std::vector<std::vector<double>> est_by_h(nh, std::vector<double>(replications));

  ObservationMask mask(1, n, 0);
  TreatmentRep rep;
  rep.n_users = 1;
  rep.n_items = n;
  rep.dim = 1;
  rep.kind = RepKind::kCount;
  rep.values.assign(n, 0.0);
  rep.support = {SupportDim{{}, 0.0, 1.0}};
  std::vector<double> xs(n);
  PropensityField field;
  field.inv_base = RatingMatrix(1, n);
  field.support_measure = 1.0;
  field.clip_lo = 0.0;
  field.clip_hi = std::numeric_limits<double>::infinity();
  field.ratio = [&](size_t, size_t i, std::span<const double> g) {
    return 1.0 / spec.density(xs[i], g[0]);
  };
  const RepDistribution pi = RepDistribution::point_mass({spec.g0});
  const PairErrorAt err = [&](size_t, size_t i, size_t) {
    return spec.delta(xs[i], spec.g0);
  };
  const PairErrorAt imputed = [&](size_t, size_t i, size_t) {
    return spec.delta_hat(xs[i], spec.g0);
  };

  for (size_t r = 0; r < replications; ++r) {
    Rng rng(derive_seed(seed, r));
    for (size_t j = 0; j < n; ++j) {
      xs[j] = uniform01(rng);
      mask.values[j] = uniform01(rng) < spec.p_obs(xs[j]) ? 1 : 0;
      rep.values[j] = mask.values[j] ? spec.sample_g(xs[j], rng) : 0.0;
      field.inv_base.values[j] = 1.0 / spec.p_obs(xs[j]);
    }
    for (size_t k = 0; k < nh; ++k) {
      const KernelSpec kernel{spec.kernel, {h_grid[k]}};
      est_by_h[k][r] =
          est == SweepEstimator::kNIps
              ? n_ips_loss(mask, rep, field, kernel, pi, err).integrated
              : n_dr_loss(mask, rep, field, kernel, pi, err, imputed).integrated;
    }
  }

  SweepReport out;
  out.estimator = to_string(est);
  out.replications = replications;
  out.ideal = spec.ideal();
  const double rr = static_cast<double>(replications);
  std::vector<double> log_h, log_abs_bias, wts, log_inv_dh, log_var;
  for (size_t k = 0; k < nh; ++k) {
    const auto& e = est_by_h[k];
    CompensatedSum s;
    for (double v : e) s.add(v);
    const double mean = s.value() / rr;
    CompensatedSum ss, sq;
    for (double v : e) {
      ss.add((v - mean) * (v - mean));
      sq.add((v - out.ideal) * (v - out.ideal));
    }
    SweepRow row;
    row.h = h_grid[k];
    row.bias = mean - out.ideal;
    row.variance = ss.value() / rr;
    row.mse = sq.value() / rr;
    row.bias_se = std::sqrt(ss.value() / (rr - 1.0) / rr);
    row.t_stat = row.bias_se > 0.0 ? row.bias / row.bias_se : 0.0;
    row.analytic_bias = analytic_bias(spec, est, row.h);
    out.rows.push_back(row);
    log_h.push_back(std::log(row.h));
    log_abs_bias.push_back(std::log(std::abs(row.bias)));
    wts.push_back(row.t_stat * row.t_stat);
    log_inv_dh.push_back(std::log(1.0 / (static_cast<double>(n) * row.h)));
    log_var.push_back(std::log(row.variance));
  }
  out.bias_slope = weighted_slope(log_h, log_abs_bias, wts);
  out.variance_slope = ols_slope(log_inv_dh, log_var);
  try {
    out.h_opt = optimal_bandwidth(spec, est);
  } catch (const NumericError&) {
    out.h_opt = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

void write_sweep_csv(const SweepReport& r, const std::string& path,
                     const std::string& header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << header;
  out << fmt::format(
      "# estimator={} replications={} ideal={} bias_slope={} variance_slope={} "
      "h_opt={}\n",
      r.estimator, r.replications, r.ideal, r.bias_slope, r.variance_slope,
      r.h_opt);
  out << "h,bias,variance,mse,bias_se,t_stat,analytic_bias\n";
  for (const auto& row : r.rows) {
    out << fmt::format("{},{},{},{},{},{},{}\n", row.h, row.bias, row.variance,
                       row.mse, row.bias_se, row.t_stat, row.analytic_bias);
  }
}

}  // namespace nbrec
