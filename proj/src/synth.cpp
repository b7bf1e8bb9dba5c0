// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include "nbrec/synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace nbrec {

namespace {

constexpr const char* kWorldFiles[] = {
    "completed.tsv",   "propensity.tsv",   "block_mask.tsv",
    "exposure.tsv",    "treatment.tsv",    "potential_g0.tsv",
    "potential_g1.tsv", "noisy_inv_propensity.tsv", "neighbor_prob.tsv"};

double clip_rating(double x) { return std::clamp(std::nearbyint(x), 1.0, 5.0); }

std::vector<double> row_col_counts(const ObservationMask& m) {
  return neighbor_counts(NeighborhoodMode::kRowColumn, m);
}

}  // namespace

Dataset generate_source(const SourceConfig& cfg) {
  const size_t nu = cfg.n_users, ni = cfg.n_items, d = cfg.rank;
  if (nu == 0 || ni == 0) throw ConfigError("source grid is empty");
  if (!(cfg.density > 0.0 && cfg.density < 1.0)) {
    throw ConfigError("source density must be in (0, 1)");
  }
  Rng rng(cfg.seed);
  std::vector<double> a(nu * d), b(ni * d), bu(nu), bi(ni), act(nu), pop(ni);
  for (auto& x : a) x = normal(rng, 0.0, 1.0);
  for (auto& x : b) x = normal(rng, 0.0, 1.0);
  for (auto& x : bu) x = normal(rng, 0.0, 0.8);
  for (auto& x : bi) x = normal(rng, 0.0, 0.8);
  for (auto& x : act) x = std::exp(normal(rng, 0.0, 0.7));
  for (auto& x : pop) x = std::exp(normal(rng, 0.0, 0.7));
  RatingMatrix lat(nu, ni);
  for (size_t u = 0; u < nu; ++u) {
    for (size_t i = 0; i < ni; ++i) {
      double dot = 0.0;
      for (size_t k = 0; k < d; ++k) dot += a[u * d + k] * b[i * d + k];
      lat(u, i) = 2.6 + bu[u] + bi[i] + 0.3 * dot + normal(rng, 0.0, 0.4);
    }
  }
  // Exposure tilted towards active users, popular items and liked items.
  RatingMatrix w(nu, ni);
  double mean_w = 0.0;
  for (size_t u = 0; u < nu; ++u) {
    for (size_t i = 0; i < ni; ++i) {
      w(u, i) = act[u] * pop[i] * std::exp(0.5 * (lat(u, i) - 3.0));
      mean_w += w(u, i);
    }
  }
  mean_w /= static_cast<double>(nu * ni);
  ObservationMask seen(nu, ni, 0);
  for (size_t k = 0; k < w.size(); ++k) {
    const double p = std::min(0.9, w.values[k] * cfg.density / mean_w);
    seen.values[k] = uniform01(rng) < p ? 1 : 0;
  }
  // Planted interference on the rated pairs.
  std::vector<double> counts = row_col_counts(seen);
  double s1 = 0.0, s2 = 0.0, n = 0.0;
  for (size_t k = 0; k < seen.size(); ++k) {
    if (!seen.values[k]) continue;
    s1 += counts[k];
    s2 += counts[k] * counts[k];
    n += 1.0;
  }
  if (n < 2.0) throw DataError("source has too few exposures");
  const double mean = s1 / n;
  const double sd = std::sqrt(std::max(1e-12, s2 / n - mean * mean));
  Dataset ds;
  ds.meta = fmt::format("synthetic-source seed={} {}x{}", cfg.seed, nu, ni);
  for (size_t u = 0; u < nu; ++u) ds.users.intern(fmt::format("u{}", u));
  for (size_t i = 0; i < ni; ++i) ds.items.intern(fmt::format("i{}", i));
  ds.n_users = nu;
  ds.n_items = ni;
  for (size_t u = 0; u < nu; ++u) {
    for (size_t i = 0; i < ni; ++i) {
      if (!seen(u, i)) continue;
      const double z = (counts[u * ni + i] - mean) / sd;
      ds.mnar.push_back({u, i, clip_rating(lat(u, i) + cfg.interference * z)});
    }
  }
  return ds;
}

SemiSynthConfig::SemiSynthConfig() {
  mf.dim = 16;
  mf.lr = 0.01;
  mf.weight_decay = 1e-5;
  mf.epochs = 50;
  mf.batch_size = 256;
  mf.seed = 11;
}

size_t SemiSynthConfig::resolved_mask_items(size_t n_users,
                                            size_t n_items) const {
  if (mask_items >= 0) return static_cast<size_t>(mask_items);
  if (n_users == 0) return 0;
  return static_cast<size_t>(
      std::llround(static_cast<double>(mask_users) * n_items / n_users));
}

void SemiSynthConfig::validate(size_t n_users, size_t n_items) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0, 1)");
  if (!(target_fraction > 0.0 && target_fraction < 1.0)) {
    throw ConfigError("target fraction must be in (0, 1)");
  }
  if (mask_users > n_users || resolved_mask_items(n_users, n_items) > n_items) {
    throw ConfigError("mask counts exceed the grid");
  }
}

RatingMatrix SemiSynthWorld::observed_ratings() const {
  RatingMatrix r(exposure.rows, exposure.cols, 0.0);
  for (size_t u = 0; u < r.rows; ++u) {
    for (size_t i = 0; i < r.cols; ++i) {
      if (!exposure(u, i)) continue;
      const int g = treatment.at(u, i)[0] > 0.5 ? 1 : 0;
      r(u, i) = potentials[g](u, i);
    }
  }
  return r;
}

std::vector<Interaction> SemiSynthWorld::observed() const {
  std::vector<Interaction> out;
  const RatingMatrix r = observed_ratings();
  for (size_t u = 0; u < r.rows; ++u) {
    for (size_t i = 0; i < r.cols; ++i) {
      if (exposure(u, i)) out.push_back({u, i, r(u, i)});
    }
  }
  return out;
}

RatingMatrix complete_matrix(const Dataset& mnar, const TrainConfig& cfg) {
  if (mnar.mnar.empty()) throw DataError("completion needs MNAR ratings");
  TrainProblem prob;
  prob.n_users = mnar.n_users;
  prob.n_items = mnar.n_items;
  prob.observed = mnar.mnar;
  TrainConfig c = cfg;
  c.loss = LossKind::kSquared;
  c.squash = false;
  const TrainResult res = train(TrainerKind::kNaive, prob, c);
  RatingMatrix out = res.model.predict_all();
  for (double& x : out.values) x = clip_rating(x);
  return out;
}

RatingMatrix gen_propensities(const RatingMatrix& r, double alpha,
                              double target_fraction) {
  RatingMatrix p(r.rows, r.cols);
  CompensatedSum total;
  for (size_t k = 0; k < r.size(); ++k) {
    p.values[k] = std::pow(alpha, std::max(0.0, 4.0 - r.values[k]));
    total.add(p.values[k]);
  }
  const double scale =
      target_fraction * static_cast<double>(r.size()) / total.value();
  for (double& x : p.values) {
    x *= scale;
    if (x > 1.0) {
      throw DataError(fmt::format(
          "target fraction {} needs a propensity above 1", target_fraction));
    }
  }
  return p;
}

std::pair<RatingMatrix, ObservationMask> apply_mask(const RatingMatrix& p,
                                                    size_t n_u, size_t n_i,
                                                    uint64_t seed) {
  const size_t nu = p.rows, ni = p.cols;
  if (n_u > nu || n_i > ni) throw ConfigError("mask counts exceed the grid");
  Rng rng(seed);
  const double pu = static_cast<double>(nu - n_u) / nu;
  const double pi = static_cast<double>(ni - n_i) / ni;
  std::vector<uint8_t> mu(nu), mi(ni);
  for (auto& x : mu) x = uniform01(rng) < pu ? 1 : 0;
  for (auto& x : mi) x = uniform01(rng) < pi ? 1 : 0;
  ObservationMask m(nu, ni, 0);
  RatingMatrix out(nu, ni, 0.0);
  CompensatedSum before, after;
  for (size_t u = 0; u < nu; ++u) {
    for (size_t i = 0; i < ni; ++i) {
      before.add(p(u, i));
      m(u, i) = mu[u] & mi[i];
      if (m(u, i)) {
        out(u, i) = p(u, i);
        after.add(p(u, i));
      }
    }
  }
  if (after.value() > 0.0) {
    const double scale = before.value() / after.value();
    for (double& x : out.values) {
      x *= scale;
      if (x > 1.0) {
        throw DataError("mask leaves too few pairs for the target fraction");
      }
    }
  }
  return {std::move(out), std::move(m)};
}

RatingMatrix neighbor_threshold_prob(const RatingMatrix& p, double c) {
  const size_t nu = p.rows, ni = p.cols;
  std::vector<double> row_m(nu, 0.0), col_m(ni, 0.0), row_v(nu, 0.0),
      col_v(ni, 0.0);
  for (size_t u = 0; u < nu; ++u) {
    for (size_t i = 0; i < ni; ++i) {
      const double x = p(u, i);
      row_m[u] += x;
      col_m[i] += x;
      row_v[u] += x * (1.0 - x);
      col_v[i] += x * (1.0 - x);
    }
  }
  const boost::math::normal_distribution<double> std_normal;
  RatingMatrix q(nu, ni);
  for (size_t u = 0; u < nu; ++u) {
    for (size_t i = 0; i < ni; ++i) {
      const double x = p(u, i);
      const double mean = row_m[u] + col_m[i] - 2.0 * x;
      const double var = row_v[u] + col_v[i] - 2.0 * x * (1.0 - x);
      double prob;
      if (var < 1e-12) {
        prob = mean >= c - 0.5 ? 1.0 : 0.0;
      } else {
        prob = boost::math::cdf(boost::math::complement(
            std_normal, (c - 0.5 - mean) / std::sqrt(var)));
      }
      q(u, i) = std::clamp(prob, 1e-3, 1.0 - 1e-3);
    }
  }
  return q;
}

namespace {

RatingMatrix fit_subset(const Dataset& like, const std::vector<Interaction>& recs,
                        const TrainConfig& cfg) {
  Dataset sub;
  sub.n_users = like.n_users;
  sub.n_items = like.n_items;
  sub.mnar = recs;
  return complete_matrix(sub, cfg);
}

std::array<RatingMatrix, 2> fit_potentials(const Dataset& like,
                                           const ObservationMask& mask,
                                           const RatingMatrix& ratings,
                                           const TrainConfig& mf, double* c_out,
                                           size_t* counts_out) {
  const TreatmentRep rep =
      compute_rep(NeighborhoodMode::kRowColumn, mask, RepKind::kCount);
  std::vector<double> obs_counts;
  for (size_t k = 0; k < mask.size(); ++k) {
    if (mask.values[k]) obs_counts.push_back(rep.values[k]);
  }
  const double c = median_threshold(obs_counts);
  std::vector<Interaction> part[2];
  for (size_t u = 0; u < mask.rows; ++u) {
    for (size_t i = 0; i < mask.cols; ++i) {
      if (!mask(u, i)) continue;
      const int g = rep.values[u * mask.cols + i] >= c ? 1 : 0;
      part[g].push_back({u, i, ratings(u, i)});
    }
  }
  std::array<RatingMatrix, 2> out;
  for (int g = 0; g < 2; ++g) {
    if (part[g].empty()) {
      throw DataError(fmt::format(
          "no exposed pairs with g={}; use a larger sample", g));
    }
    TrainConfig c2 = mf;
    c2.seed = derive_seed(mf.seed, 100 + g);
    out[g] = fit_subset(like, part[g], c2);
    if (counts_out) counts_out[g] = part[g].size();
  }
  if (c_out) *c_out = c;
  return out;
}

}  // namespace

Completions fit_completions(const Dataset& source, const SemiSynthConfig& cfg) {
  cfg.validate(source.n_users, source.n_items);
  Completions out;
  out.completed = complete_matrix(source, cfg.mf);
  if (cfg.potentials_from_source) {
    out.potentials =
        fit_potentials(source, source.mnar_mask(), source.mnar_ratings(),
                       cfg.mf, &out.source_threshold, out.source_counts);
  }
  return out;
}

SemiSynthWorld sample_world(const Completions& base,
                            const SemiSynthConfig& cfg) {
  const size_t nu = base.completed.rows, ni = base.completed.cols;
  cfg.validate(nu, ni);
  SemiSynthWorld w;
  w.completed = base.completed;
  const RatingMatrix p0 =
      gen_propensities(base.completed, cfg.alpha, cfg.target_fraction);
  auto [p, block] = apply_mask(p0, cfg.mask_users,
                               cfg.resolved_mask_items(nu, ni),
                               derive_seed(cfg.seed, 1));
  w.propensity = std::move(p);
  w.block_mask = std::move(block);

  Rng rng(derive_seed(cfg.seed, 2));
  w.exposure = ObservationMask(nu, ni, 0);
  size_t n_obs = 0;
  for (size_t k = 0; k < w.propensity.size(); ++k) {
    w.exposure.values[k] = uniform01(rng) < w.propensity.values[k] ? 1 : 0;
    n_obs += w.exposure.values[k];
  }
  if (n_obs == 0) throw DataError("no exposures sampled");
  w.treatment = compute_rep(NeighborhoodMode::kRowColumn, w.exposure,
                            RepKind::kCount);
  std::vector<double> obs_counts;
  for (size_t k = 0; k < w.exposure.size(); ++k) {
    if (w.exposure.values[k]) obs_counts.push_back(w.treatment.values[k]);
  }
  w.threshold = median_threshold(obs_counts);
  w.treatment = compute_rep(NeighborhoodMode::kRowColumn, w.exposure,
                            RepKind::kBinaryThreshold, w.threshold);

  if (cfg.potentials_from_source) {
    w.potentials = base.potentials;
  } else {
    Dataset like;
    like.n_users = nu;
    like.n_items = ni;
    w.potentials = fit_potentials(like, w.exposure, base.completed, cfg.mf,
                                  nullptr, nullptr);
  }

  w.neighbor_prob = neighbor_threshold_prob(w.propensity, w.threshold);

  const double p_o = static_cast<double>(n_obs) / static_cast<double>(nu * ni);
  Rng noise(derive_seed(cfg.seed, 3));
  w.noisy_inv_propensity = RatingMatrix(nu, ni);
  for (size_t k = 0; k < w.propensity.size(); ++k) {
    const double beta = uniform01(noise);
    const double p = w.propensity.values[k];
    w.noisy_inv_propensity.values[k] =
        p > 0.0 ? beta / p + (1.0 - beta) / p_o
                : std::numeric_limits<double>::infinity();
  }
  return w;
}

SemiSynthWorld build_world(const Dataset& source, const SemiSynthConfig& cfg) {
  return sample_world(fit_completions(source, cfg), cfg);
}

const std::vector<PredictionKind>& all_prediction_kinds() {
  static const std::vector<PredictionKind> kinds = {
      PredictionKind::kOne,    PredictionKind::kThree, PredictionKind::kFour,
      PredictionKind::kRotate, PredictionKind::kSkew,  PredictionKind::kCrs};
  return kinds;
}

std::string to_string(PredictionKind kind) {
  switch (kind) {
    case PredictionKind::kOne: return "ONE";
    case PredictionKind::kThree: return "THREE";
    case PredictionKind::kFour: return "FOUR";
    case PredictionKind::kRotate: return "ROTATE";
    case PredictionKind::kSkew: return "SKEW";
    case PredictionKind::kCrs: return "CRS";
  }
  return "?";
}

PredictionKind parse_prediction_kind(const std::string& s) {
  for (auto k : all_prediction_kinds()) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown prediction matrix: " + s);
}

RatingMatrix make_prediction_matrix(PredictionKind kind, const RatingMatrix& r,
                                    uint64_t seed) {
  for (double x : r.values) {
    if (x != std::nearbyint(x) || x < 1.0 || x > 5.0) {
      throw DataError(fmt::format("rating {} outside {{1, ..., 5}}", x));
    }
  }
  RatingMatrix out = r;
  Rng rng(seed);
  switch (kind) {
    case PredictionKind::kOne:
    case PredictionKind::kThree:
    case PredictionKind::kFour: {
      const double donor = kind == PredictionKind::kOne     ? 1.0
                           : kind == PredictionKind::kThree ? 3.0
                                                            : 4.0;
      std::vector<size_t> idx;
      size_t n5 = 0;
      for (size_t k = 0; k < r.size(); ++k) {
        if (r.values[k] == donor) idx.push_back(k);
        if (r.values[k] == 5.0) ++n5;
      }
      if (idx.size() < n5) {
        throw DataError(fmt::format("{} needs {} ratings of {}, found {}",
                                    to_string(kind), n5, donor, idx.size()));
      }
      // Partial Fisher-Yates: the first n5 entries are a uniform draw.
      for (size_t k = 0; k < n5; ++k) {
        std::swap(idx[k], idx[k + uniform_index(rng, idx.size() - k)]);
        out.values[idx[k]] = 5.0;
      }
      break;
    }
    case PredictionKind::kRotate:
      for (double& x : out.values) x = x >= 2.0 ? x - 1.0 : 5.0;
      break;
    case PredictionKind::kSkew:
      for (double& x : out.values) {
        x = std::clamp(normal(rng, x, (6.0 - x) / 2.0), 1.0, 5.0);
      }
      break;
    case PredictionKind::kCrs:
      for (double& x : out.values) x = x <= 3.0 ? 2.0 : 4.0;
      break;
  }
  return out;
}

void write_grid_tsv(const RatingMatrix& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (size_t u = 0; u < g.rows; ++u) {
    for (size_t i = 0; i < g.cols; ++i) {
      out << fmt::format("{}", g(u, i)) << (i + 1 == g.cols ? '\n' : '\t');
    }
  }
}

RatingMatrix read_grid_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<double> vals;
  size_t rows = 0, cols = 0;
  std::string line, tok;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    size_t n = 0;
    while (std::getline(ss, tok, '\t')) {
      vals.push_back(std::strtod(tok.c_str(), nullptr));
      ++n;
    }
    if (rows == 0) cols = n;
    if (n != cols) throw ParseError(fmt::format("{}: ragged row {}", path, rows + 1));
    ++rows;
  }
  RatingMatrix g(rows, cols);
  g.values = std::move(vals);
  return g;
}

namespace {

RatingMatrix mask_to_grid(const ObservationMask& m) {
  RatingMatrix g(m.rows, m.cols);
  for (size_t k = 0; k < m.size(); ++k) g.values[k] = m.values[k];
  return g;
}

ObservationMask grid_to_mask(const RatingMatrix& g) {
  ObservationMask m(g.rows, g.cols);
  for (size_t k = 0; k < g.size(); ++k) m.values[k] = g.values[k] != 0.0;
  return m;
}

}  // namespace

void save_world(const SemiSynthWorld& w, const std::string& dir,
                const std::string& config_echo) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string base = dir + "/";
  write_grid_tsv(w.completed, base + kWorldFiles[0]);
  write_grid_tsv(w.propensity, base + kWorldFiles[1]);
  write_grid_tsv(mask_to_grid(w.block_mask), base + kWorldFiles[2]);
  write_grid_tsv(mask_to_grid(w.exposure), base + kWorldFiles[3]);
  write_rep_tsv(w.treatment, base + kWorldFiles[4]);
  write_grid_tsv(w.potentials[0], base + kWorldFiles[5]);
  write_grid_tsv(w.potentials[1], base + kWorldFiles[6]);
  write_grid_tsv(w.noisy_inv_propensity, base + kWorldFiles[7]);
  write_grid_tsv(w.neighbor_prob, base + kWorldFiles[8]);
  std::ofstream man(base + "manifest.txt");
  man << fmt::format("n_users={}\nn_items={}\nthreshold={}\n", w.completed.rows,
                     w.completed.cols, w.threshold);
  if (!config_echo.empty()) man << "config_hash=" << config_echo << '\n';
  for (const char* f : kWorldFiles) {
    man << "file=" << f << ' ' << fnv1a_hex(read_file(base + f)) << '\n';
  }
}

SemiSynthWorld load_world(const std::string& dir) {
  const std::string base = dir + "/";
  std::ifstream man(base + "manifest.txt");
  if (!man) throw DataError("no manifest.txt in " + dir);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(man, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos && line.compare(0, 5, "file=") != 0) {
      kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  SemiSynthWorld w;
  w.threshold = std::strtod(kv["threshold"].c_str(), nullptr);
  w.completed = read_grid_tsv(base + kWorldFiles[0]);
  w.propensity = read_grid_tsv(base + kWorldFiles[1]);
  w.block_mask = grid_to_mask(read_grid_tsv(base + kWorldFiles[2]));
  w.exposure = grid_to_mask(read_grid_tsv(base + kWorldFiles[3]));
  w.treatment = read_rep_tsv(base + kWorldFiles[4], w.completed.rows,
                             w.completed.cols);
  w.potentials[0] = read_grid_tsv(base + kWorldFiles[5]);
  w.potentials[1] = read_grid_tsv(base + kWorldFiles[6]);
  w.noisy_inv_propensity = read_grid_tsv(base + kWorldFiles[7]);
  w.neighbor_prob = read_grid_tsv(base + kWorldFiles[8]);
  return w;
}

}  // namespace nbrec
