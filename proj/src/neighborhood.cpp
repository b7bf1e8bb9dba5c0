// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include "nbrec/neighborhood.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nbrec {

NeighborhoodMode parse_neighborhood_mode(const std::string& s) {
  if (s == "row-column") return NeighborhoodMode::kRowColumn;
  if (s == "user-history") return NeighborhoodMode::kUserHistory;
  if (s == "item-history") return NeighborhoodMode::kItemHistory;
  if (s == "interaction") return NeighborhoodMode::kInteraction;
  throw ConfigError("unknown neighborhood mode: " + s);
}

std::string to_string(NeighborhoodMode mode) {
  switch (mode) {
    case NeighborhoodMode::kRowColumn: return "row-column";
    case NeighborhoodMode::kUserHistory: return "user-history";
    case NeighborhoodMode::kItemHistory: return "item-history";
    case NeighborhoodMode::kInteraction: return "interaction";
  }
  return "?";
}

std::vector<std::pair<size_t, size_t>> neighbors(NeighborhoodMode mode,
                                                 size_t u, size_t i,
                                                 size_t n_users,
                                                 size_t n_items) {
  if (u >= n_users || i >= n_items) {
    throw DataError(fmt::format("pair ({}, {}) outside {}x{} grid", u, i,
                                n_users, n_items));
  }
  std::vector<std::pair<size_t, size_t>> out;
  const bool row = mode != NeighborhoodMode::kItemHistory;
  const bool col = mode != NeighborhoodMode::kUserHistory;
  if (row) {
    for (size_t j = 0; j < n_items; ++j) {
      if (j != i) out.emplace_back(u, j);
    }
  }
  if (col) {
    for (size_t v = 0; v < n_users; ++v) {
      if (v != u) out.emplace_back(v, i);
    }
  }
  return out;
}

double SupportDim::measure() const {
  return discrete() ? static_cast<double>(points.size()) : hi - lo;
}

double SupportDim::sample(Rng& rng) const {
  if (discrete()) return points[uniform_index(rng, points.size())];
  return lo + (hi - lo) * uniform01(rng);
}

double TreatmentRep::support_measure() const {
  double c = 1.0;
  for (const auto& s : support) c *= s.measure();
  return c;
}

std::vector<double> neighbor_counts(NeighborhoodMode mode,
                                    const ObservationMask& mask) {
  const size_t nu = mask.rows, ni = mask.cols;
  std::vector<double> row(nu, 0.0), col(ni, 0.0);
  for (size_t u = 0; u < nu; ++u) {
    for (size_t i = 0; i < ni; ++i) {
      if (mask(u, i)) {
        row[u] += 1.0;
        col[i] += 1.0;
      }
    }
  }
  const size_t dim = mode == NeighborhoodMode::kInteraction ? 2 : 1;
  std::vector<double> out(nu * ni * dim);
  for (size_t u = 0; u < nu; ++u) {
    for (size_t i = 0; i < ni; ++i) {
      const double self = mask(u, i) ? 1.0 : 0.0;
      const double r = row[u] - self, c = col[i] - self;
      double* dst = &out[(u * ni + i) * dim];
      switch (mode) {
        case NeighborhoodMode::kRowColumn: dst[0] = r + c; break;
        case NeighborhoodMode::kUserHistory: dst[0] = r; break;
        case NeighborhoodMode::kItemHistory: dst[0] = c; break;
        case NeighborhoodMode::kInteraction:
          dst[0] = r;
          dst[1] = c;
          break;
      }
    }
  }
  return out;
}

double median_threshold(std::span<const double> observed_counts) {
  if (observed_counts.empty()) {
    throw DataError("median threshold needs at least one observed pair");
  }
  std::vector<double> v(observed_counts.begin(), observed_counts.end());
  const size_t mid = (v.size() - 1) / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  return v[mid];
}

TreatmentRep compute_rep(NeighborhoodMode mode, const ObservationMask& mask,
                         RepKind kind, std::optional<double> threshold) {
  TreatmentRep rep;
  rep.n_users = mask.rows;
  rep.n_items = mask.cols;
  rep.kind = kind;
  std::vector<double> counts = neighbor_counts(mode, mask);
  const size_t dim = mode == NeighborhoodMode::kInteraction ? 2 : 1;
  if (kind == RepKind::kBinaryThreshold) {
    if (dim != 1) {
      throw ConfigError("binary-threshold needs a scalar neighborhood mode");
    }
    double c;
    if (threshold) {
      c = *threshold;
    } else {
      std::vector<double> obs;
      for (size_t k = 0; k < mask.size(); ++k) {
        if (mask.values[k]) obs.push_back(counts[k]);
      }
      c = median_threshold(obs);
    }
    rep.dim = 1;
    rep.values.resize(counts.size());
    for (size_t k = 0; k < counts.size(); ++k) {
      rep.values[k] = counts[k] >= c ? 1.0 : 0.0;
    }
    rep.support = {SupportDim{{0.0, 1.0}, 0.0, 1.0}};
    return rep;
  }
  rep.dim = dim;
  rep.values = std::move(counts);
  rep.support.resize(dim);
  for (size_t s = 0; s < dim; ++s) {
    double hi = 0.0;
    for (size_t k = s; k < rep.values.size(); k += dim) {
      hi = std::max(hi, rep.values[k]);
    }
    SupportDim sd;
    sd.lo = 0.0;
    sd.hi = hi;
    for (double g = 0.0; g <= hi; g += 1.0) sd.points.push_back(g);
    rep.support[s] = std::move(sd);
  }
  return rep;
}

double RepDistribution::integrate(
    const std::function<double(std::span<const double>)>& f) const {
  CompensatedSum acc;
  for (size_t k = 0; k < size(); ++k) acc.add(weights[k] * f(node(k)));
  return acc.value();
}

RepDistribution RepDistribution::discrete(
    std::vector<std::vector<double>> points, std::vector<double> weights) {
  if (points.empty() || points.size() != weights.size()) {
    throw ConfigError("discrete distribution needs matching points/weights");
  }
  RepDistribution d;
  d.dim = points[0].size();
  double total = 0.0;
  for (size_t k = 0; k < points.size(); ++k) {
    if (points[k].size() != d.dim) throw ConfigError("ragged support points");
    if (!(weights[k] >= 0.0)) throw ConfigError("negative weight");
    d.nodes.insert(d.nodes.end(), points[k].begin(), points[k].end());
    total += weights[k];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ConfigError(fmt::format("weights sum to {}, not 1", total));
  }
  d.weights = std::move(weights);
  return d;
}

RepDistribution RepDistribution::point_mass(std::vector<double> g) {
  return discrete({std::move(g)}, {1.0});
}

RepDistribution RepDistribution::uniform_binary() {
  return discrete({{0.0}, {1.0}}, {0.5, 0.5});
}

RepDistribution RepDistribution::uniform_grid(double lo, double hi,
                                              size_t max_points) {
  std::vector<std::vector<double>> pts;
  const double span = hi - lo;
  if (span < 0.0 || max_points == 0) throw ConfigError("empty grid");
  const size_t n_int = static_cast<size_t>(std::floor(span)) + 1;
  if (n_int <= max_points) {
    for (size_t k = 0; k < n_int; ++k) pts.push_back({lo + k});
  } else {
    for (size_t k = 0; k < max_points; ++k) {
      pts.push_back({lo + span * k / (max_points - 1)});
    }
  }
  std::vector<double> w(pts.size(), 1.0 / pts.size());
  return discrete(std::move(pts), std::move(w));
}

RepDistribution RepDistribution::uniform_over_support(
    const TreatmentRep& rep, size_t max_points_per_dim) {
  std::vector<RepDistribution> per;
  for (const auto& s : rep.support) {
    if (s.discrete() && s.points.size() <= max_points_per_dim) {
      std::vector<std::vector<double>> pts;
      for (double p : s.points) pts.push_back({p});
      std::vector<double> w(pts.size(), 1.0 / pts.size());
      per.push_back(discrete(std::move(pts), std::move(w)));
    } else {
      per.push_back(uniform_grid(s.lo, s.hi, max_points_per_dim));
    }
  }
  // Cartesian product, first dimension slowest.
  std::vector<std::vector<double>> pts{{}};
  std::vector<double> w{1.0};
  for (const auto& d : per) {
    std::vector<std::vector<double>> np;
    std::vector<double> nw;
    for (size_t a = 0; a < pts.size(); ++a) {
      for (size_t k = 0; k < d.size(); ++k) {
        auto p = pts[a];
        p.push_back(d.nodes[k]);
        np.push_back(std::move(p));
        nw.push_back(w[a] * d.weights[k]);
      }
    }
    pts = std::move(np);
    w = std::move(nw);
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return discrete(std::move(pts), std::move(w));
}

RepDistribution RepDistribution::from_density(
    const std::function<double(double)>& pdf, double lo, double hi) {
  using Quad = boost::math::quadrature::gauss<double, 64>;
  const auto& abscissa = Quad::abscissa();
  const auto& weight = Quad::weights();
  RepDistribution d;
  d.dim = 1;
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  auto add = [&](double t, double w) {
    const double g = mid + half * t;
    const double pw = w * half * pdf(g);
    if (pw < 0.0) throw ConfigError("density is negative");
    d.nodes.push_back(g);
    d.weights.push_back(pw);
  };
  // Boost stores the nonnegative half of the symmetric rule.
  for (size_t k = 0; k < abscissa.size(); ++k) {
    add(abscissa[k], weight[k]);
    if (abscissa[k] != 0.0) add(-abscissa[k], weight[k]);
  }
  double total = 0.0;
  for (double w : d.weights) total += w;
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError(
        fmt::format("density integrates to {} on [{}, {}]", total, lo, hi));
  }
  return d;
}

void write_rep_tsv(const TreatmentRep& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "# kind=" << (rep.kind == RepKind::kBinaryThreshold ? "binary" : "count")
      << " dim=" << rep.dim << "\n";
  for (size_t u = 0; u < rep.n_users; ++u) {
    for (size_t i = 0; i < rep.n_items; ++i) {
      auto g = rep.at(u, i);
      out << u << '\t' << i << '\t';
      for (size_t s = 0; s < rep.dim; ++s) {
        if (s) out << ',';
        out << fmt::format("{}", g[s]);
      }
      out << '\n';
    }
  }
}

TreatmentRep read_rep_tsv(const std::string& path, size_t n_users,
                          size_t n_items) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  TreatmentRep rep;
  rep.n_users = n_users;
  rep.n_items = n_items;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# kind=", 0) != 0) {
    throw ParseError(path + ": missing header");
  }
  rep.kind = line.find("kind=binary") != std::string::npos
                 ? RepKind::kBinaryThreshold
                 : RepKind::kCount;
  rep.dim = std::stoul(line.substr(line.find("dim=") + 4));
  rep.values.assign(n_users * n_items * rep.dim, 0.0);
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    size_t u, i;
    std::string gs;
    if (!(ss >> u >> i >> gs) || u >= n_users || i >= n_items) {
      throw ParseError(fmt::format("{}:{}: bad row", path, lineno));
    }
    std::istringstream gss(gs);
    std::string tok;
    for (size_t s = 0; s < rep.dim; ++s) {
      if (!std::getline(gss, tok, ',')) {
        throw ParseError(fmt::format("{}:{}: short g", path, lineno));
      }
      rep.values[(u * n_items + i) * rep.dim + s] = std::stod(tok);
    }
  }
  rep.support.resize(rep.dim);
  for (size_t s = 0; s < rep.dim; ++s) {
    if (rep.kind == RepKind::kBinaryThreshold) {
      rep.support[s] = SupportDim{{0.0, 1.0}, 0.0, 1.0};
      continue;
    }
    double hi = 0.0;
    for (size_t k = s; k < rep.values.size(); k += rep.dim) {
      hi = std::max(hi, rep.values[k]);
    }
    SupportDim sd;
    sd.hi = hi;
    for (double g = 0.0; g <= hi; g += 1.0) sd.points.push_back(g);
    rep.support[s] = std::move(sd);
  }
  return rep;
}

}  // namespace nbrec
