// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.
//
// Python bindings. Matrices cross as 2-d float64 arrays; per-support-point
// stacks as (K, n_users, n_items) arrays.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "nbrec/config.hpp"
#include "nbrec/estimators.hpp"
#include "nbrec/eval.hpp"
#include "nbrec/experiments.hpp"
#include "nbrec/kernels.hpp"
#include "nbrec/neighborhood.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
constexpr double kInf = std::numeric_limits<double>::infinity();

nbrec::RatingMatrix to_matrix(const Array& a, const char* name) {
  if (a.ndim() != 2) throw nbrec::DataError(std::string(name) + " must be 2-d");
  nbrec::RatingMatrix m(a.shape(0), a.shape(1));
  std::copy(a.data(), a.data() + a.size(), m.values.begin());
  return m;
}

nbrec::ObservationMask to_mask(const Array& a) {
  const auto m = to_matrix(a, "mask");
  nbrec::ObservationMask out(m.rows, m.cols, 0);
  for (size_t k = 0; k < m.size(); ++k) out.values[k] = m.values[k] != 0.0;
  return out;
}

std::vector<nbrec::RatingMatrix> to_stack(const Array& a, const char* name) {
  if (a.ndim() != 3) throw nbrec::DataError(std::string(name) + " must be 3-d");
  const size_t K = a.shape(0), r = a.shape(1), c = a.shape(2);
  std::vector<nbrec::RatingMatrix> out;
  for (size_t k = 0; k < K; ++k) {
    out.emplace_back(r, c);
    std::copy(a.data() + k * r * c, a.data() + (k + 1) * r * c, out.back().values.begin());
  }
  return out;
}

py::array_t<double> from_matrix(const nbrec::RatingMatrix& m) {
  py::array_t<double> out({m.rows, m.cols});
  std::copy(m.values.begin(), m.values.end(), out.mutable_data());
  return out;
}

void check_shape(const nbrec::RatingMatrix& a, const nbrec::RatingMatrix& b,
                 const char* what) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw nbrec::DataError(std::string(what) + " shape mismatch");
  }
}

nbrec::Config to_config(const std::map<std::string, std::string>& kv) {
  nbrec::Config c;
  for (const auto& [k, v] : kv) c.set(k, v);
  c.check_known(nbrec::known_config_keys());
  return c;
}

py::list metric_list(const std::vector<nbrec::MetricReport>& ms) {
  py::list out;
  for (const auto& m : ms) {
    py::dict d;
    d["metric"] = m.metric;
    d["value"] = m.value;
    d["k"] = m.k;
    d["n"] = m.n;
    out.append(d);
  }
  return out;
}

// Scalar treatment on the grid plus a joint propensity per support node.
struct Neighborhood {
  nbrec::TreatmentRep rep;
  nbrec::PropensityField field;
  nbrec::RepDistribution pi;
  nbrec::KernelSpec kernel;
};

Neighborhood neighborhood(const nbrec::ObservationMask& mask, const Array& g,
                          const std::vector<nbrec::RatingMatrix>& joint,
                          const std::vector<double>& nodes,
                          const std::vector<double>& weights,
                          const std::string& kernel, double bandwidth) {
  Neighborhood n;
  const auto gm = to_matrix(g, "g");
  if (gm.rows != mask.rows || gm.cols != mask.cols) throw nbrec::DataError("g shape mismatch");
  if (joint.size() != nodes.size()) {
    throw nbrec::DataError("one joint propensity matrix per node");
  }
  n.rep.n_users = mask.rows;
  n.rep.n_items = mask.cols;
  n.rep.kind = nbrec::RepKind::kCustom;
  n.rep.values = gm.values;
  std::vector<std::vector<double>> pts;
  for (double x : nodes) pts.push_back({x});
  n.pi = nbrec::RepDistribution::discrete(pts, weights);
  n.kernel.family = nbrec::parse_kernel_family(kernel);
  n.kernel.bandwidth = {bandwidth};
  n.field.inv_base = nbrec::RatingMatrix(mask.rows, mask.cols, 1.0);
  n.field.clip_lo = 0.0;
  n.field.clip_hi = kInf;
  n.field.ratio = [joint, nodes](size_t u, size_t i, std::span<const double> gv) {
    size_t best = 0;
    for (size_t k = 1; k < nodes.size(); ++k) {
      if (std::abs(nodes[k] - gv[0]) < std::abs(nodes[best] - gv[0])) best = k;
    }
    return 1.0 / joint[best](u, i);
  };
  return n;
}

nbrec::ReferenceSpec spec_for(size_t n, double kappa) {
  nbrec::ReferenceSpec s;
  s.n = n;
  s.kappa = kappa;
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Neighborhood-aware debiased recommendation core";

  auto base = py::register_exception<nbrec::Error>(m, "NbrecError");
  py::register_exception<nbrec::ParseError>(m, "ParseError", base.ptr());
  py::register_exception<nbrec::DataError>(m, "DataError", base.ptr());
  py::register_exception<nbrec::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<nbrec::NumericError>(m, "NumericError", base.ptr());

  // Kernels.
  m.def("kernel_eval", [](const std::string& f, double t) {
    return nbrec::kernel_eval(nbrec::parse_kernel_family(f), t);
  });
  m.def("kernel_mu2", [](const std::string& f) {
    return nbrec::kernel_mu2(nbrec::parse_kernel_family(f));
  });
  m.def("kernel_roughness", [](const std::string& f) {
    return nbrec::kernel_roughness(nbrec::parse_kernel_family(f));
  });
  m.def("kernel_convolution", [](const std::string& f, double u) {
    return nbrec::kernel_convolution(nbrec::parse_kernel_family(f), u);
  });

  // Treatment representation.
  m.def(
      "neighbor_rep",
      [](const Array& mask, const std::string& mode, const std::string& kind,
         std::optional<double> threshold) {
        const auto rep = nbrec::compute_rep(
            nbrec::parse_neighborhood_mode(mode), to_mask(mask),
            kind == "binary" ? nbrec::RepKind::kBinaryThreshold : nbrec::RepKind::kCount,
            threshold);
        if (kind != "binary" && kind != "count") {
          throw nbrec::ConfigError("kind must be binary or count");
        }
        py::array_t<double> out({rep.n_users, rep.n_items, rep.dim});
        std::copy(rep.values.begin(), rep.values.end(), out.mutable_data());
        return out;
      },
      py::arg("mask"), py::arg("mode") = "row-column", py::arg("kind") = "binary",
      py::arg("threshold") = py::none());

  // Estimators.
  m.def(
      "ideal_loss",
      [](const Array& rhat, const Array& r, const std::string& loss) {
        return nbrec::ideal_loss(to_matrix(rhat, "rhat"), to_matrix(r, "r"),
                                 nbrec::parse_loss_kind(loss));
      },
      py::arg("rhat"), py::arg("r"), py::arg("loss") = "squared");
  m.def(
      "ideal_loss_n",
      [](const Array& rhat, const Array& potentials, const std::vector<double>& nodes,
         const std::vector<double>& weights, const std::string& loss) {
        std::vector<std::vector<double>> pts;
        for (double x : nodes) pts.push_back({x});
        return nbrec::ideal_loss_n(to_matrix(rhat, "rhat"), to_stack(potentials, "potentials"),
                                   nbrec::RepDistribution::discrete(pts, weights),
                                   nbrec::parse_loss_kind(loss));
      },
      py::arg("rhat"), py::arg("potentials"), py::arg("nodes"), py::arg("weights"),
      py::arg("loss") = "squared");
  m.def(
      "naive_loss",
      [](const Array& rhat, const Array& r, const Array& mask, const std::string& loss) {
        return nbrec::naive_loss(to_matrix(rhat, "rhat"), to_matrix(r, "r"), to_mask(mask),
                                 nbrec::parse_loss_kind(loss));
      },
      py::arg("rhat"), py::arg("r"), py::arg("mask"), py::arg("loss") = "squared");
  m.def(
      "ips_loss",
      [](const Array& rhat, const Array& r, const Array& mask, const Array& propensity,
         const std::string& loss, double clip_hi) {
        return nbrec::ips_loss(to_matrix(rhat, "rhat"), to_matrix(r, "r"), to_mask(mask),
                               nbrec::PropensityField::from_probs(
                                   to_matrix(propensity, "propensity"), clip_hi),
                               nbrec::parse_loss_kind(loss));
      },
      py::arg("rhat"), py::arg("r"), py::arg("mask"), py::arg("propensity"),
      py::arg("loss") = "squared", py::arg("clip_hi") = kInf);
  m.def(
      "dr_loss",
      [](const Array& rhat, const Array& r, const Array& mask, const Array& propensity,
         const Array& imputed_error, const std::string& loss, double clip_hi) {
        const auto rh = to_matrix(rhat, "rhat");
        const auto imp = to_matrix(imputed_error, "imputed_error");
        check_shape(rh, imp, "imputed_error");
        const auto rm = to_matrix(r, "r");
        const auto err = nbrec::error_from_matrices(rh, rm, nbrec::parse_loss_kind(loss));
        const nbrec::PairError imputed = [&](size_t u, size_t i) { return imp(u, i); };
        return nbrec::dr_loss(to_mask(mask),
                              nbrec::PropensityField::from_probs(
                                  to_matrix(propensity, "propensity"), clip_hi),
                              err, imputed);
      },
      py::arg("rhat"), py::arg("r"), py::arg("mask"), py::arg("propensity"),
      py::arg("imputed_error"), py::arg("loss") = "squared", py::arg("clip_hi") = kInf);
  m.def(
      "n_ips_loss",
      [](const Array& rhat, const Array& potentials, const Array& mask, const Array& g,
         const Array& joint_propensity, const std::vector<double>& nodes,
         const std::vector<double>& weights, const std::string& kernel, double bandwidth,
         const std::string& loss) {
        const auto msk = to_mask(mask);
        const auto n = neighborhood(msk, g, to_stack(joint_propensity, "joint_propensity"),
                                    nodes, weights, kernel, bandwidth);
        // The error functor refers to these.
        const auto rh = to_matrix(rhat, "rhat");
        const auto pots = to_stack(potentials, "potentials");
        const auto err = nbrec::error_from_potentials(rh, pots, nbrec::parse_loss_kind(loss));
        const auto r = nbrec::n_ips_loss(msk, n.rep, n.field, n.kernel, n.pi, err);
        return py::make_tuple(r.integrated, r.per_g);
      },
      py::arg("rhat"), py::arg("potentials"), py::arg("mask"), py::arg("g"),
      py::arg("joint_propensity"), py::arg("nodes"), py::arg("weights"),
      py::arg("kernel") = "exact", py::arg("bandwidth") = 1.0, py::arg("loss") = "squared");
  m.def(
      "n_dr_loss",
      [](const Array& rhat, const Array& potentials, const Array& mask, const Array& g,
         const Array& joint_propensity, const Array& imputed_error,
         const std::vector<double>& nodes, const std::vector<double>& weights,
         const std::string& kernel, double bandwidth, const std::string& loss) {
        const auto msk = to_mask(mask);
        const auto n = neighborhood(msk, g, to_stack(joint_propensity, "joint_propensity"),
                                    nodes, weights, kernel, bandwidth);
        // The error functor refers to these.
        const auto rh = to_matrix(rhat, "rhat");
        const auto pots = to_stack(potentials, "potentials");
        const auto err = nbrec::error_from_potentials(rh, pots, nbrec::parse_loss_kind(loss));
        const auto imp = to_stack(imputed_error, "imputed_error");
        if (imp.size() != nodes.size()) throw nbrec::DataError("one imputed matrix per node");
        const nbrec::PairErrorAt imputed = [&](size_t u, size_t i, size_t k) {
          return imp[k](u, i);
        };
        const auto r = nbrec::n_dr_loss(msk, n.rep, n.field, n.kernel, n.pi, err, imputed);
        return py::make_tuple(r.integrated, r.per_g);
      },
      py::arg("rhat"), py::arg("potentials"), py::arg("mask"), py::arg("g"),
      py::arg("joint_propensity"), py::arg("imputed_error"), py::arg("nodes"),
      py::arg("weights"), py::arg("kernel") = "exact", py::arg("bandwidth") = 1.0,
      py::arg("loss") = "squared");

  // Metrics.
  m.def("relative_error", &nbrec::relative_error, py::arg("estimate"), py::arg("ideal"));
  m.def(
      "auc",
      [](const std::vector<double>& s, const std::vector<double>& y) { return nbrec::auc(s, y); },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "ndcg_at_k",
      [](const std::vector<std::vector<double>>& s,
         const std::vector<std::vector<double>>& rel, size_t k) {
        return nbrec::ndcg_at_k(s, rel, k);
      },
      py::arg("scores"), py::arg("relevance"), py::arg("k"));

  // Theory harness on the reference specification.
  m.def(
      "optimal_bandwidth",
      [](const std::string& est, size_t n, double kappa) {
        return nbrec::optimal_bandwidth(spec_for(n, kappa), nbrec::parse_sweep_estimator(est));
      },
      py::arg("estimator") = "n-dr", py::arg("n") = 2000, py::arg("kappa") = 0.5);
  m.def(
      "analytic_bias",
      [](double h, const std::string& est, size_t n, double kappa) {
        return nbrec::analytic_bias(spec_for(n, kappa), nbrec::parse_sweep_estimator(est), h);
      },
      py::arg("h"), py::arg("estimator") = "n-dr", py::arg("n") = 2000,
      py::arg("kappa") = 0.5);
  m.def(
      "verify_bias_variance",
      [](const std::vector<double>& h, size_t replications, uint64_t seed,
         const std::string& est, size_t n, double kappa) {
        const auto r = nbrec::verify_bias_variance(
            spec_for(n, kappa), nbrec::parse_sweep_estimator(est), h, replications, seed);
        py::list rows;
        for (const auto& row : r.rows) {
          py::dict d;
          d["h"] = row.h;
          d["bias"] = row.bias;
          d["variance"] = row.variance;
          d["mse"] = row.mse;
          d["bias_se"] = row.bias_se;
          d["t_stat"] = row.t_stat;
          d["analytic_bias"] = row.analytic_bias;
          rows.append(d);
        }
        py::dict out;
        out["estimator"] = r.estimator;
        out["ideal"] = r.ideal;
        out["bias_slope"] = r.bias_slope;
        out["variance_slope"] = r.variance_slope;
        out["h_opt"] = r.h_opt;
        out["rows"] = rows;
        return out;
      },
      py::arg("h"), py::arg("replications") = 500, py::arg("seed") = 1,
      py::arg("estimator") = "n-dr", py::arg("n") = 2000, py::arg("kappa") = 0.5);
  m.def(
      "selection_gap",
      [](size_t n_x, size_t n_g, size_t n_e, bool independent, uint64_t seed) {
        const auto em = nbrec::random_enumerable_model(n_x, n_g, n_e, independent, seed);
        py::dict out;
        out["ideal"] = nbrec::enumerate_ideal_loss(em);
        out["ideal_n"] = nbrec::enumerate_ideal_loss_n(em);
        out["gap_integral"] = nbrec::selection_gap_integral(em);
        out["gap_general"] = nbrec::selection_gap_general(em);
        return out;
      },
      py::arg("n_x"), py::arg("n_g"), py::arg("n_e") = 2, py::arg("independent") = false,
      py::arg("seed") = 0);

  // Config-driven workflows.
  m.def("config_hash", [](const std::map<std::string, std::string>& kv) {
    nbrec::Config c;
    for (const auto& [k, v] : kv) c.set(k, v);
    return c.hash();
  });
  m.def("run_synth", [](const std::map<std::string, std::string>& kv) {
    return nbrec::run_synth(to_config(kv));
  });
  m.def("run_estimate", [](const std::map<std::string, std::string>& kv) {
    return nbrec::run_estimate(to_config(kv));
  });
  m.def("run_train", [](const std::map<std::string, std::string>& kv) {
    return metric_list(nbrec::run_train(to_config(kv)).metrics);
  });
  m.def("run_eval", [](const std::map<std::string, std::string>& kv) {
    return metric_list(nbrec::run_eval(to_config(kv)).metrics);
  });
  m.def("run_verify", [](const std::map<std::string, std::string>& kv) {
    return nbrec::run_verify(to_config(kv));
  });
  m.def("run_sweep_bandwidth", [](const std::map<std::string, std::string>& kv) {
    return nbrec::run_sweep_bandwidth(to_config(kv));
  });
  m.def(
      "write_coat_like",
      [](const std::string& dir, size_t n_users, size_t n_items, size_t train_per_user,
         size_t test_per_user, uint64_t seed) {
        nbrec::CoatLikeConfig c;
        c.n_users = n_users;
        c.n_items = n_items;
        c.train_per_user = train_per_user;
        c.test_per_user = test_per_user;
        c.seed = seed;
        const auto ds = nbrec::generate_coat_like(c);
        const std::string train = dir + "/train.tsv", test = dir + "/test.tsv";
        nbrec::write_tsv(ds, train);
        nbrec::write_mar_tsv(ds, test);
        return py::make_tuple(train, test);
      },
      py::arg("dir"), py::arg("n_users") = 290, py::arg("n_items") = 300,
      py::arg("train_per_user") = 24, py::arg("test_per_user") = 16, py::arg("seed") = 5);
}
