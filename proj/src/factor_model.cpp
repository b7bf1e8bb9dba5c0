// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include "nbrec/factor_model.hpp"

#include <fmt/format.h>

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "nbrec/serialize.hpp"

namespace nbrec {

FactorModel::FactorModel(size_t n_users, size_t n_items, size_t dim,
                         bool squash, size_t side_dim)
    : n_users_(n_users),
      n_items_(n_items),
      dim_(dim),
      side_dim_(side_dim),
      squash_(squash) {
  off_q_ = n_users * dim;
  off_bu_ = off_q_ + n_items * dim;
  off_bi_ = off_bu_ + n_users;
  off_b0_ = off_bi_ + n_items;
  off_side_ = off_b0_ + 1;
  theta_.assign(off_side_ + side_dim, 0.0);
}

FactorModel FactorModel::random(size_t n_users, size_t n_items, size_t dim,
                                bool squash, double init_sd, Rng& rng,
                                size_t side_dim) {
  FactorModel m(n_users, n_items, dim, squash, side_dim);
  for (size_t k = 0; k < m.off_bu_; ++k) m.theta_[k] = normal(rng, 0.0, init_sd);
  return m;
}

double FactorModel::score(size_t u, size_t i,
                          std::span<const double> side) const {
  const double* p = &theta_[u * dim_];
  const double* q = &theta_[off_q_ + i * dim_];
  double s = 0.0;
  for (size_t k = 0; k < dim_; ++k) s += p[k] * q[k];
  s += theta_[off_bu_ + u] + theta_[off_bi_ + i] + theta_[off_b0_];
  for (size_t k = 0; k < side.size() && k < side_dim_; ++k) {
    s += theta_[off_side_ + k] * side[k];
  }
  return s;
}

double FactorModel::predict(size_t u, size_t i,
                            std::span<const double> side) const {
  const double s = score(u, i, side);
  return squash_ ? 1.0 / (1.0 + std::exp(-s)) : s;
}

double FactorModel::predict_at(size_t u, size_t i) const {
  if (u >= n_users_ || i >= n_items_) {
    throw DataError(fmt::format("index ({}, {}) outside {}x{} model", u, i,
                                n_users_, n_items_));
  }
  return predict(u, i);
}

RatingMatrix FactorModel::predict_all() const {
  RatingMatrix out(n_users_, n_items_);
  for (size_t u = 0; u < n_users_; ++u) {
    for (size_t i = 0; i < n_items_; ++i) out(u, i) = predict(u, i);
  }
  return out;
}

void FactorModel::add_score_grad(size_t u, size_t i, double d_score,
                                 std::vector<double>& grad,
                                 std::span<const double> side) const {
  const double* p = &theta_[u * dim_];
  const double* q = &theta_[off_q_ + i * dim_];
  double* gp = &grad[u * dim_];
  double* gq = &grad[off_q_ + i * dim_];
  for (size_t k = 0; k < dim_; ++k) {
    gp[k] += d_score * q[k];
    gq[k] += d_score * p[k];
  }
  grad[off_bu_ + u] += d_score;
  grad[off_bi_ + i] += d_score;
  grad[off_b0_] += d_score;
  for (size_t k = 0; k < side.size() && k < side_dim_; ++k) {
    grad[off_side_ + k] += d_score * side[k];
  }
}

bool FactorModel::all_finite() const {
  for (double x : theta_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void FactorModel::save(std::ostream& out) const {
  out << "factor_model 1\n";
  out << fmt::format("n_users={}\nn_items={}\ndim={}\nside_dim={}\nsquash={}\n",
                     n_users_, n_items_, dim_, side_dim_, squash_ ? 1 : 0);
  write_array(out, "theta", theta_);
}

FactorModel FactorModel::load(std::istream& in) {
  expect_header(in, "factor_model 1");
  const size_t nu = read_key<size_t>(in, "n_users");
  const size_t ni = read_key<size_t>(in, "n_items");
  const size_t d = read_key<size_t>(in, "dim");
  const size_t sd = read_key<size_t>(in, "side_dim");
  const bool sq = read_key<int>(in, "squash") != 0;
  FactorModel m(nu, ni, d, sq, sd);
  std::vector<double> theta = read_array(in, "theta");
  if (theta.size() != m.theta_.size()) {
    throw ParseError("factor model parameter count mismatch");
  }
  m.theta_ = std::move(theta);
  return m;
}

Adam::Adam(size_t n, double lr, double weight_decay, double beta1,
           double beta2, double eps)
    : lr_(lr), wd_(weight_decay), b1_(beta1), b2_(beta2), eps_(eps),
      m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::vector<double>& theta, std::vector<double>& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (size_t k = 0; k < theta.size(); ++k) {
    const double g = grad[k] + wd_ * theta[k];
    m_[k] = b1_ * m_[k] + (1.0 - b1_) * g;
    v_[k] = b2_ * v_[k] + (1.0 - b2_) * g * g;
    theta[k] -= lr_ * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
  }
}

}  // namespace nbrec
