// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include "nbrec/experiments.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include "nbrec/estimators.hpp"
#include "nbrec/propensity.hpp"

namespace nbrec {

namespace fs = std::filesystem;

// ---- Semi-synthetic estimation ---------------------------------------------------

const std::vector<std::string>& estimator_names() {
  static const std::vector<std::string> names = {
      "Naive", "IPS", "N-IPS", "DR", "N-DR", "MRDR", "N-MRDR"};
  return names;
}

EstimateSettings::EstimateSettings() {
  imputation.dim = 4;
  imputation.lr = 0.05;
  imputation.weight_decay = 1e-4;
  imputation.epochs = 20;
  imputation.batch_size = 256;
  imputation.seed = 17;
  imputation.loss = LossKind::kSquared;
}

namespace {

// Weights rescaled to mean one over the records that carry them.
std::vector<double> unit_mean(std::vector<double> w) {
  double s = 0.0;
  for (double x : w) s += x;
  if (s > 0.0) {
    const double scale = static_cast<double>(w.size()) / s;
    for (double& x : w) x *= scale;
  }
  return w;
}

// Error regression over the records with non-zero weight.
FactorModel fit_error_model(const SemiSynthWorld& w,
                            const std::vector<Interaction>& targets,
                            const std::vector<double>& weights,
                            const TrainConfig& cfg) {
  std::vector<Interaction> recs;
  std::vector<double> wt;
  for (size_t j = 0; j < targets.size(); ++j) {
    if (weights[j] > 0.0) {
      recs.push_back(targets[j]);
      wt.push_back(weights[j]);
    }
  }
  if (recs.empty()) throw DataError("no observed pair carries imputation weight");
  return fit_weighted(w.completed.rows, w.completed.cols, recs, unit_mean(wt), cfg);
}

}  // namespace

std::vector<EstimateCell> estimate_world(const SemiSynthWorld& world,
                                         const std::vector<PredictionKind>& kinds,
                                         const EstimateSettings& settings,
                                         uint64_t seed) {
  const size_t nu = world.completed.rows, ni = world.completed.cols;
  const ObservationMask& mask = world.exposure;
  const RatingMatrix r_obs = world.observed_ratings();
  const std::vector<Interaction> observed = world.observed();

  RatingMatrix inv(nu, ni);
  for (size_t k = 0; k < inv.size(); ++k) {
    inv.values[k] = settings.noisy_propensity
                        ? world.noisy_inv_propensity.values[k]
                        : 1.0 / world.propensity.values[k];
  }
  const PropensityField base = PropensityField::from_inverse(inv, settings.clip_hi);
  PropensityField joint = base;
  const RatingMatrix& q1 = world.neighbor_prob;
  // Oracle P^u(g) / P(g | x) on the binary support.
  joint.ratio = [&q1](size_t u, size_t i, std::span<const double> g) {
    return 0.5 / (g[0] > 0.5 ? q1(u, i) : 1.0 - q1(u, i));
  };
  joint.support_measure = world.treatment.support_measure();

  const RepDistribution pi = RepDistribution::uniform_binary();
  const KernelSpec kernel = KernelSpec::exact_match(1);
  const std::vector<RatingMatrix> potentials(world.potentials.begin(),
                                             world.potentials.end());
  const PairWeights base_w = baseline_weights(observed, base);
  const PairWeights nbr_w =
      neighborhood_weights(observed, world.treatment, joint, kernel, pi);
  const size_t nk = pi.size();

  std::vector<EstimateCell> out;
  for (PredictionKind kind : kinds) {
    const RatingMatrix pred = make_prediction_matrix(
        kind, world.completed, derive_seed(seed, 40 + static_cast<uint64_t>(kind)));
    const double ideal = ideal_loss_n(pred, potentials, pi, settings.loss);
    const PairError err = error_from_matrices(pred, r_obs, settings.loss);
    const PairErrorAt err_at = error_at_observed(pred, r_obs, settings.loss);

    std::vector<Interaction> targets = observed;
    for (auto& t : targets) t.rating = err(t.user, t.item);

    auto add = [&](const std::string& name, double est) {
      out.push_back({name, kind, seed, est, ideal, relative_error(est, ideal)});
    };
    add("Naive", naive_loss(mask, err));
    add("IPS", ips_loss(mask, base, err));
    add("N-IPS", n_ips_loss(mask, world.treatment, joint, kernel, pi, err_at).integrated);

    for (bool mrdr : {false, true}) {
      TrainConfig c = settings.imputation;
      c.seed = derive_seed(settings.imputation.seed, seed * 16 + mrdr);
      const FactorModel m = fit_error_model(
          world, targets, mrdr ? base_w.mrdr : base_w.a, c);
      const PairError imputed = [&m](size_t u, size_t i) { return m.predict(u, i); };
      add(mrdr ? "MRDR" : "DR", dr_loss(mask, base, err, imputed));

      std::vector<FactorModel> per_g;
      for (size_t k = 0; k < nk; ++k) {
        std::vector<double> wk(observed.size());
        for (size_t j = 0; j < observed.size(); ++j) {
          wk[j] = (mrdr ? nbr_w.mrdr : nbr_w.a)[j * nk + k];
        }
        c.seed = derive_seed(settings.imputation.seed, seed * 16 + 2 + 2 * k + mrdr);
        per_g.push_back(fit_error_model(world, targets, wk, c));
      }
      const PairErrorAt imputed_at = [&per_g](size_t u, size_t i, size_t k) {
        return per_g[k].predict(u, i);
      };
      add(mrdr ? "N-MRDR" : "N-DR",
          n_dr_loss(mask, world.treatment, joint, kernel, pi, err_at, imputed_at)
              .integrated);
    }
  }
  return out;
}

namespace {

std::vector<double> re_values(const EstimateSummary& s, const std::string& est,
                              PredictionKind kind) {
  std::vector<double> v;
  for (const auto& c : s.cells) {
    if (c.estimator == est && c.kind == kind) v.push_back(c.relative_error);
  }
  if (v.empty()) throw DataError(fmt::format("no cells for {} on {}", est, to_string(kind)));
  return v;
}

}  // namespace

double EstimateSummary::mean_re(const std::string& estimator,
                                PredictionKind kind) const {
  const auto v = re_values(*this, estimator, kind);
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double EstimateSummary::std_re(const std::string& estimator,
                               PredictionKind kind) const {
  const auto v = re_values(*this, estimator, kind);
  if (v.size() < 2) return 0.0;
  const double m = mean_re(estimator, kind);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

EstimateSummary estimate_over_seeds(const Completions& base,
                                    SemiSynthConfig synth,
                                    const std::vector<uint64_t>& seeds,
                                    const std::vector<PredictionKind>& kinds,
                                    const EstimateSettings& settings) {
  EstimateSummary s;
  for (uint64_t seed : seeds) {
    synth.seed = seed;
    const SemiSynthWorld w = sample_world(base, synth);
    auto cells = estimate_world(w, kinds, settings, seed);
    s.cells.insert(s.cells.end(), cells.begin(), cells.end());
  }
  return s;
}

void write_estimate_table(const EstimateSummary& s,
                          const std::vector<PredictionKind>& kinds,
                          const std::string& path, const std::string& header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << header << "estimator";
  for (auto k : kinds) out << ',' << to_string(k) << "_mean," << to_string(k) << "_std";
  out << '\n';
  for (const auto& e : estimator_names()) {
    out << e;
    for (auto k : kinds) {
      out << fmt::format(",{:.6f},{:.6f}", s.mean_re(e, k), s.std_re(e, k));
    }
    out << '\n';
  }
}

void write_estimate_cells(const EstimateSummary& s, const std::string& path,
                          const std::string& header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << header << "estimator,kind,seed,estimate,ideal,relative_error\n";
  for (const auto& c : s.cells) {
    out << fmt::format("{},{},{},{},{},{}\n", c.estimator, to_string(c.kind),
                       c.seed, c.estimate, c.ideal, c.relative_error);
  }
}

size_t scaled_mask_count(size_t n_u_reference, size_t n_users) {
  return static_cast<size_t>(std::llround(static_cast<double>(n_u_reference) *
                                          static_cast<double>(n_users) / 943.0));
}

// ---- Coat-shaped data --------------------------------------------------------------

Dataset generate_coat_like(const CoatLikeConfig& cfg) {
  const size_t nu = cfg.n_users, ni = cfg.n_items;
  if (cfg.train_per_user + cfg.test_per_user > ni) {
    throw ConfigError("per-user ratings exceed the item count");
  }
  Rng rng(cfg.seed);
  const size_t d = 3;
  std::vector<double> a(nu * d), b(ni * d), bi(ni), pop(ni);
  for (auto& x : a) x = normal(rng, 0.0, 1.0);
  for (auto& x : b) x = normal(rng, 0.0, 1.0);
  for (auto& x : bi) x = normal(rng, 0.0, 0.6);
  for (auto& x : pop) x = normal(rng, 0.0, 0.8);
  RatingMatrix lat(nu, ni);
  for (size_t u = 0; u < nu; ++u) {
    for (size_t i = 0; i < ni; ++i) {
      double dot = 0.0;
      for (size_t k = 0; k < d; ++k) dot += a[u * d + k] * b[i * d + k];
      lat(u, i) = 2.8 + bi[i] + 0.5 * dot;
    }
  }
  // Self-selection towards liked and popular items via Gumbel top-k.
  ObservationMask train(nu, ni, 0), test(nu, ni, 0);
  std::vector<std::pair<double, size_t>> keys(ni);
  for (size_t u = 0; u < nu; ++u) {
    for (size_t i = 0; i < ni; ++i) {
      const double gumbel = -std::log(-std::log(std::max(1e-300, uniform01(rng))));
      keys[i] = {0.9 * lat(u, i) + pop[i] + gumbel, i};
    }
    std::sort(keys.begin(), keys.end(), std::greater<>());
    for (size_t k = 0; k < cfg.train_per_user; ++k) train(u, keys[k].second) = 1;
    std::vector<size_t> rest;
    for (size_t i = 0; i < ni; ++i) {
      if (!train(u, i)) rest.push_back(i);
    }
    shuffle_in_place(rest, rng);
    for (size_t k = 0; k < cfg.test_per_user; ++k) test(u, rest[k]) = 1;
  }
  // Items that many neighbors also rated get a small rating lift.
  const std::vector<double> counts = neighbor_counts(NeighborhoodMode::kItemHistory, train);
  double mean = 0.0;
  for (double c : counts) mean += c;
  mean /= static_cast<double>(counts.size());
  Dataset ds;
  ds.meta = fmt::format("coat-like seed={}", cfg.seed);
  for (size_t u = 0; u < nu; ++u) ds.users.intern(fmt::format("{}", u));
  for (size_t i = 0; i < ni; ++i) ds.items.intern(fmt::format("{}", i));
  ds.n_users = nu;
  ds.n_items = ni;
  ds.mar.emplace();
  for (size_t u = 0; u < nu; ++u) {
    for (size_t i = 0; i < ni; ++i) {
      if (!train(u, i) && !test(u, i)) continue;
      const double shift = 0.02 * (counts[u * ni + i] - mean);
      const double r = std::clamp(
          std::nearbyint(lat(u, i) + shift + normal(rng, 0.0, 0.5)), 1.0, 5.0);
      if (train(u, i)) ds.mnar.push_back({u, i, r});
      if (test(u, i)) ds.mar->push_back({u, i, r});
    }
  }
  return ds;
}

// ---- Config plumbing -------------------------------------------------------------------

namespace {

TrainConfig train_config(const Config& cfg, const std::string& p, TrainConfig t) {
  t.lr = cfg.real(p + "lr", t.lr);
  t.weight_decay = cfg.real(p + "weight_decay", t.weight_decay);
  t.batch_size = cfg.count(p + "batch", t.batch_size);
  t.epochs = cfg.count(p + "epochs", t.epochs);
  t.dim = cfg.count(p + "dim", t.dim);
  t.seed = cfg.seed(p + "seed", t.seed);
  t.init_sd = cfg.real(p + "init_sd", t.init_sd);
  return t;
}

LossKind loss_kind(const Config& cfg, const std::string& key, LossKind fallback) {
  auto v = cfg.find(key);
  return v ? parse_loss_kind(*v) : fallback;
}

std::string output_dir(const Config& cfg) {
  const std::string dir = cfg.require("output.dir");
  fs::create_directories(dir);
  return dir;
}

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw DataError("no such file: " + path);
}

}  // namespace

SourceConfig source_config(const Config& cfg) {
  SourceConfig s;
  s.n_users = cfg.count("source.users", s.n_users);
  s.n_items = cfg.count("source.items", s.n_items);
  s.density = cfg.real("source.density", s.density);
  s.interference = cfg.real("source.interference", s.interference);
  s.rank = cfg.count("source.rank", s.rank);
  s.seed = cfg.seed("source.seed", s.seed);
  return s;
}

SemiSynthConfig semi_synth_config(const Config& cfg) {
  SemiSynthConfig s;
  s.alpha = cfg.real("synth.alpha", s.alpha);
  s.target_fraction = cfg.real("synth.target_fraction", s.target_fraction);
  s.mask_users = cfg.count("synth.mask_users", s.mask_users);
  s.mask_items = cfg.integer("synth.mask_items", s.mask_items);
  s.seed = cfg.seed("synth.seed", s.seed);
  const std::string pot = cfg.str("synth.potentials", "source");
  if (pot != "source" && pot != "sampled") {
    throw ConfigError("synth.potentials must be source or sampled");
  }
  s.potentials_from_source = pot == "source";
  s.mf = train_config(cfg, "mf.", s.mf);
  return s;
}

Dataset load_or_generate_source(const Config& cfg) {
  if (auto path = cfg.find("source.path")) {
    require_file(*path);
    TsvSchema schema;
    schema.min_rating = 1.0;
    schema.max_rating = 5.0;
    Dataset ds = load_tsv(*path, schema);
    ds.validate(1.0, 5.0);
    return ds;
  }
  return generate_source(source_config(cfg));
}

std::string run_synth(const Config& cfg) {
  const std::string dir = output_dir(cfg);
  const Dataset source = load_or_generate_source(cfg);
  const SemiSynthWorld w = build_world(source, semi_synth_config(cfg));
  save_world(w, dir, cfg.hash());
  return dir;
}

namespace {

std::vector<PredictionKind> kinds_from(const Config& cfg) {
  std::vector<PredictionKind> kinds;
  for (const auto& s : cfg.strings("estimate.kinds", {})) {
    kinds.push_back(parse_prediction_kind(s));
  }
  if (kinds.empty()) kinds = all_prediction_kinds();
  return kinds;
}

EstimateSettings estimate_settings(const Config& cfg) {
  EstimateSettings s;
  s.loss = loss_kind(cfg, "estimate.loss", s.loss);
  s.noisy_propensity = cfg.flag("estimate.noisy", s.noisy_propensity);
  s.clip_hi = cfg.real("estimate.clip_hi", s.clip_hi);
  s.imputation = train_config(cfg, "imputation.", s.imputation);
  return s;
}

}  // namespace

std::string run_estimate(const Config& cfg) {
  const std::string dir = output_dir(cfg);
  const auto kinds = kinds_from(cfg);
  const EstimateSettings settings = estimate_settings(cfg);
  EstimateSummary summary;
  if (auto world_dir = cfg.find("estimate.world")) {
    require_file(*world_dir + "/manifest.txt");
    const SemiSynthWorld w = load_world(*world_dir);
    const uint64_t seed = cfg.seed("synth.seed", 0);
    summary.cells = estimate_world(w, kinds, settings, seed);
  } else {
    const Dataset source = load_or_generate_source(cfg);
    const SemiSynthConfig synth = semi_synth_config(cfg);
    const Completions base = fit_completions(source, synth);
    const size_t n_seeds = cfg.count("estimate.seeds", 10);
    const uint64_t first = cfg.seed("estimate.first_seed", 1);
    std::vector<uint64_t> seeds;
    for (size_t s = 0; s < n_seeds; ++s) seeds.push_back(first + s);
    summary = estimate_over_seeds(base, synth, seeds, kinds, settings);
  }
  const std::string table = dir + "/relative_error.csv";
  write_estimate_table(summary, kinds, table, cfg.header());
  write_estimate_cells(summary, dir + "/relative_error_cells.csv", cfg.header());
  return table;
}

// ---- Real-data pipeline -------------------------------------------------------------

namespace {

struct Pipeline {
  Dataset data;          // MNAR train part plus MAR test
  Dataset validation;    // held-out MNAR records
  std::vector<Interaction> test;
  ObservationMask mask;
  TreatmentRep rep;
  BasePropensityModel base;
  std::shared_ptr<DensityRatioModel> ratio;
  PropensityField field;
  KernelSpec kernel;
  RepDistribution pi;
  TrainerKind trainer = TrainerKind::kNaive;
  TrainConfig train;
  size_t ndcg_k = 5;
  double positive_threshold = 4.0;
};

LossKind default_loss(const Config& cfg) {
  return cfg.has("data.binarize") ? LossKind::kCrossEntropy : LossKind::kSquared;
}

// Loading, binarization and splitting.
Pipeline prepare_data(const Config& cfg) {
  Pipeline p;
  const std::string train_path = cfg.require("data.train");
  const std::string test_path = cfg.require("data.test");
  require_file(train_path);
  require_file(test_path);
  TsvSchema schema;
  schema.min_rating = cfg.real("data.min_rating", schema.min_rating);
  schema.max_rating = cfg.real("data.max_rating", schema.max_rating);
  Dataset all = load_tsv(train_path, schema);
  attach_mar_tsv(all, test_path, schema);
  all.validate(schema.min_rating, schema.max_rating);
  p.positive_threshold = cfg.real("eval.threshold", 4.0);
  if (cfg.has("data.binarize")) {
    all = binarize(all, cfg.real("data.binarize", 0.0));
    p.positive_threshold = 0.5;
  }
  const double val = cfg.real("data.val_fraction", 0.1);
  if (val > 0.0) {
    auto [tr, va] = split(all, 1.0 - val, val, cfg.seed("data.split_seed", 0));
    p.data = std::move(tr);
    p.validation = std::move(va);
  } else {
    p.data = std::move(all);
  }
  p.test = *p.data.mar;
  p.mask = p.data.mnar_mask();
  p.ndcg_k = cfg.count("eval.ndcg_k", 5);
  return p;
}

Pipeline prepare(const Config& cfg) {
  Pipeline p = prepare_data(cfg);

  const auto mode = parse_neighborhood_mode(cfg.str("neighborhood.mode", "row-column"));
  const std::string rep_kind = cfg.str("neighborhood.rep", "binary");
  if (rep_kind == "binary") {
    std::optional<double> thr;
    if (cfg.has("neighborhood.threshold")) thr = cfg.real("neighborhood.threshold", 0.0);
    p.rep = compute_rep(mode, p.mask, RepKind::kBinaryThreshold, thr);
  } else if (rep_kind == "count") {
    p.rep = compute_rep(mode, p.mask, RepKind::kCount);
  } else {
    throw ConfigError("neighborhood.rep must be binary or count");
  }

  const std::string base_kind = cfg.str("propensity.base", "naive-bayes");
  const uint64_t prop_seed = cfg.seed("propensity.seed", 0);
  if (base_kind == "naive-bayes") {
    const auto mar = subsample_mar(p.data, cfg.real("propensity.mar_fraction", 0.05),
                                   prop_seed);
    p.base = fit_naive_bayes(p.data, mar);
  } else if (base_kind == "logistic") {
    LogisticConfig lc;
    lc.dim = cfg.count("propensity.dim", lc.dim);
    lc.iterations = cfg.count("propensity.iterations", lc.iterations);
    lc.lr = cfg.real("propensity.lr", lc.lr);
    lc.seed = prop_seed;
    p.base = fit_logistic(p.mask, lc);
  } else {
    throw ConfigError("propensity.base must be naive-bayes or logistic");
  }
  p.field = PropensityField::from_probs(p.base.evaluate(p.data),
                                        cfg.real("propensity.clip_hi", 100.0));

  p.trainer = parse_trainer_kind(cfg.str("train.trainer", "n-ips"));
  if (is_neighborhood(p.trainer)) {
    DensityRatioConfig dc;
    dc.k_neg = cfg.count("ratio.k_neg", dc.k_neg);
    dc.epochs = cfg.count("ratio.epochs", dc.epochs);
    dc.batch_size = cfg.count("ratio.batch", dc.batch_size);
    dc.lr = cfg.real("ratio.lr", dc.lr);
    dc.l2 = cfg.real("ratio.l2", dc.l2);
    dc.seed = cfg.seed("ratio.seed", prop_seed);
    p.ratio = std::make_shared<DensityRatioModel>(fit_density_ratio(p.mask, p.rep, dc));
    p.field.ratio = ratio_from_model(p.ratio);
    p.field.support_measure = p.rep.support_measure();
  }

  const bool binary = p.rep.kind == RepKind::kBinaryThreshold;
  p.kernel.family = parse_kernel_family(
      cfg.str("kernel.family", binary ? "exact" : "gaussian"));
  if (p.kernel.family == KernelFamily::kExactMatch) {
    p.kernel = KernelSpec::exact_match(p.rep.dim);
  } else {
    p.kernel.bandwidth = cfg.reals("kernel.bandwidth", {1.0});
    if (p.kernel.bandwidth.size() == 1) p.kernel.bandwidth.resize(p.rep.dim, p.kernel.bandwidth[0]);
  }
  const std::string pi_kind = cfg.str("pi.kind", "uniform");
  if (pi_kind == "uniform") {
    p.pi = binary ? RepDistribution::uniform_binary()
                  : RepDistribution::uniform_over_support(
                        p.rep, cfg.count("pi.max_points", 5));
  } else if (pi_kind == "point") {
    p.pi = RepDistribution::point_mass(cfg.reals("pi.point", {}));
  } else {
    throw ConfigError("pi.kind must be uniform or point");
  }

  TrainConfig t;
  t = train_config(cfg, "train.", t);
  t.imp_lr = cfg.real("train.imp_lr", t.imp_lr);
  t.imp_weight_decay = cfg.real("train.imp_weight_decay", t.imp_weight_decay);
  t.imputation_epochs = cfg.count("train.imputation_epochs", t.imputation_epochs);
  t.prediction_epochs = cfg.count("train.prediction_epochs", t.prediction_epochs);
  t.shared_imputation = cfg.flag("train.shared_imputation", t.shared_imputation);
  t.loss = loss_kind(cfg, "train.loss", default_loss(cfg));
  t.squash = cfg.flag("train.squash", cfg.has("data.binarize"));
  t.patience = cfg.count("train.patience", t.patience);
  p.train = t;
  return p;
}

std::vector<MetricReport> metrics_for(const Pipeline& p, const FactorModel& f) {
  std::vector<double> pred(p.test.size());
  for (size_t k = 0; k < p.test.size(); ++k) {
    pred[k] = f.predict(p.test[k].user, p.test[k].item);
  }
  return evaluate_predictions(p.test, pred, p.ndcg_k, p.positive_threshold);
}

}  // namespace

PipelineOutput run_train(const Config& cfg) {
  PipelineOutput out;
  out.dir = output_dir(cfg);
  const Pipeline p = prepare(cfg);
  TrainProblem prob;
  prob.n_users = p.data.n_users;
  prob.n_items = p.data.n_items;
  prob.observed = p.data.mnar;
  prob.validation = p.validation.mnar;
  prob.field = &p.field;
  prob.rep = &p.rep;
  prob.kernel = p.kernel;
  prob.pi = p.pi;
  const TrainResult res = train(p.trainer, prob, p.train);
  {
    std::ofstream m(out.dir + "/model.txt");
    if (!m) throw DataError("cannot write " + out.dir + "/model.txt");
    res.model.save(m);
  }
  if (res.imputation) {
    std::ofstream m(out.dir + "/imputation.txt");
    res.imputation->save(m);
  }
  {
    std::ofstream m(out.dir + "/propensity.txt");
    p.base.save(m);
  }
  if (p.ratio) {
    std::ofstream m(out.dir + "/density_ratio.txt");
    p.ratio->save(m);
  }
  write_curve_csv(res.curve, out.dir + "/curve.csv", cfg.header());
  out.curve = res.curve;
  out.metrics = metrics_for(p, res.model);
  write_metrics_csv(out.metrics, out.dir + "/metrics.csv", cfg.header());
  std::ofstream(out.dir + "/config.txt") << cfg.canonical();
  return out;
}

PipelineOutput run_eval(const Config& cfg) {
  PipelineOutput out;
  out.dir = output_dir(cfg);
  const std::string model_path = cfg.str("eval.model", out.dir + "/model.txt");
  require_file(model_path);
  const Pipeline p = prepare_data(cfg);
  std::ifstream in(model_path);
  const FactorModel f = FactorModel::load(in);
  if (f.n_users() != p.data.n_users || f.n_items() != p.data.n_items) {
    throw DataError("checkpoint shape does not match the data");
  }
  out.metrics = metrics_for(p, f);
  write_metrics_csv(out.metrics, out.dir + "/eval_metrics.csv", cfg.header());
  return out;
}

// ---- Theory harness ---------------------------------------------------------------------

ReferenceSpec reference_spec(const Config& cfg) {
  ReferenceSpec s;
  s.a0 = cfg.real("ref.a0", s.a0);
  s.a1 = cfg.real("ref.a1", s.a1);
  s.eps = cfg.real("ref.eps", s.eps);
  s.m1 = cfg.real("ref.m1", s.m1);
  s.g0 = cfg.real("ref.g0", s.g0);
  s.kappa = cfg.real("ref.kappa", s.kappa);
  s.n = cfg.count("ref.n", s.n);
  s.kernel = parse_kernel_family(cfg.str("ref.kernel", to_string(s.kernel)));
  if (s.kernel == KernelFamily::kExactMatch) {
    throw ConfigError("the reference specification needs a smoothing kernel");
  }
  if (!(s.eps > 0.0) || s.n == 0 || s.g0 < 0.0 || s.g0 > 1.0) {
    throw ConfigError("reference specification needs eps > 0, n > 0, g0 in [0, 1]");
  }
  return s;
}

std::string run_verify(const Config& cfg) {
  const std::string dir = output_dir(cfg);
  const ReferenceSpec spec = reference_spec(cfg);
  const auto hs = cfg.reals("sweep.h", geometric_grid(0.1, 0.35, 10));
  const size_t reps = cfg.count("sweep.replications", 500);
  const uint64_t seed = cfg.seed("sweep.seed", 1);
  std::string summary = dir + "/verify_summary.csv";
  std::ofstream out(summary);
  out << cfg.header() << "estimator,bias_slope,variance_slope,h_opt,max_abs_t\n";
  for (const auto& name : cfg.strings("sweep.estimators", {"n-ips", "n-dr"})) {
    const SweepEstimator est = parse_sweep_estimator(name);
    const SweepReport r = verify_bias_variance(spec, est, hs, reps, seed);
    double max_t = 0.0;
    for (const auto& row : r.rows) max_t = std::max(max_t, std::abs(row.t_stat));
    write_sweep_csv(r, fmt::format("{}/sweep_{}.csv", dir, name), cfg.header());
    out << fmt::format("{},{},{},{},{}\n", r.estimator, r.bias_slope,
                       r.variance_slope, r.h_opt, max_t);
  }
  return summary;
}

std::string run_sweep_bandwidth(const Config& cfg) {
  const std::string dir = output_dir(cfg);
  ReferenceSpec spec = reference_spec(cfg);
  const SweepEstimator est = parse_sweep_estimator(cfg.str("sweep.estimator", "n-dr"));
  const auto hs = cfg.reals("sweep.h", geometric_grid(0.1, 0.35, 10));
  const SweepReport r = verify_bias_variance(
      spec, est, hs, cfg.count("sweep.replications", 500), cfg.seed("sweep.seed", 1));
  const std::string path = dir + "/bandwidth_sweep.csv";
  write_sweep_csv(r, path, cfg.header());
  std::ofstream scaling(dir + "/optimal_bandwidth.csv");
  scaling << cfg.header() << "n,h_opt\n";
  for (double n : cfg.reals("sweep.n_values", {500, 1000, 2000, 4000, 8000})) {
    spec.n = static_cast<size_t>(n);
    scaling << fmt::format("{},{}\n", spec.n, optimal_bandwidth(spec, est));
  }
  return path;
}

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "output.dir",
      "data.train", "data.test", "data.min_rating", "data.max_rating",
      "data.binarize", "data.val_fraction", "data.split_seed",
      "source.path", "source.users", "source.items", "source.density",
      "source.interference", "source.rank", "source.seed",
      "synth.alpha", "synth.target_fraction", "synth.mask_users",
      "synth.mask_items", "synth.seed", "synth.potentials",
      "mf.lr", "mf.weight_decay", "mf.batch", "mf.epochs", "mf.dim", "mf.seed",
      "mf.init_sd",
      "estimate.kinds", "estimate.loss", "estimate.noisy", "estimate.clip_hi",
      "estimate.world", "estimate.seeds", "estimate.first_seed",
      "imputation.lr", "imputation.weight_decay", "imputation.batch",
      "imputation.epochs", "imputation.dim", "imputation.seed",
      "imputation.init_sd",
      "neighborhood.mode", "neighborhood.rep", "neighborhood.threshold",
      "propensity.base", "propensity.seed", "propensity.mar_fraction",
      "propensity.dim", "propensity.iterations", "propensity.lr",
      "propensity.clip_hi",
      "ratio.k_neg", "ratio.epochs", "ratio.batch", "ratio.lr", "ratio.l2",
      "ratio.seed",
      "kernel.family", "kernel.bandwidth", "pi.kind", "pi.point", "pi.max_points",
      "train.trainer", "train.lr", "train.weight_decay", "train.batch",
      "train.epochs", "train.dim", "train.seed", "train.init_sd", "train.imp_lr",
      "train.imp_weight_decay", "train.imputation_epochs",
      "train.prediction_epochs", "train.shared_imputation", "train.loss",
      "train.squash", "train.patience",
      "eval.ndcg_k", "eval.threshold", "eval.model",
      "ref.a0", "ref.a1", "ref.eps", "ref.m1", "ref.g0", "ref.kappa", "ref.n",
      "ref.kernel",
      "sweep.h", "sweep.replications", "sweep.seed", "sweep.estimators",
      "sweep.estimator", "sweep.n_values"};
  return keys;
}

}  // namespace nbrec
