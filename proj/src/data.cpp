// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include "nbrec/data.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string_view>

namespace nbrec {

size_t IdMap::intern(const std::string& raw) {
  auto [it, inserted] = index_.emplace(raw, raw_.size());
  if (inserted) raw_.push_back(raw);
  return it->second;
}

std::optional<size_t> IdMap::find(const std::string& raw) const {
  auto it = index_.find(raw);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

void validate_records(const std::vector<Interaction>& recs, size_t nu,
                      size_t ni, double lo, double hi, const char* what) {
  std::set<std::pair<size_t, size_t>> seen;
  for (const auto& r : recs) {
    if (r.user >= nu || r.item >= ni) {
      throw DataError(fmt::format("{}: id out of range ({}, {})", what,
                                  r.user, r.item));
    }
    if (!std::isfinite(r.rating) || r.rating < lo || r.rating > hi) {
      throw DataError(fmt::format("{}: rating {} outside [{}, {}]", what,
                                  r.rating, lo, hi));
    }
    if (!seen.emplace(r.user, r.item).second) {
      throw DataError(fmt::format("{}: duplicate pair ({}, {})", what, r.user,
                                  r.item));
    }
  }
}

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<Interaction> read_records(const std::string& path,
                                      const TsvSchema& schema, IdMap& users,
                                      IdMap& items) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open {}", path));
  std::vector<Interaction> recs;
  std::string line;
  size_t lineno = 0;
  const int need =
      std::max({schema.user_col, schema.item_col, schema.rating_col}) + 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto f = split_fields(line, schema.delimiter);
    if (static_cast<int>(f.size()) < need) {
      throw ParseError(fmt::format("{}:{}: expected {} fields, got {}", path,
                                   lineno, need, f.size()));
    }
    std::string_view rs = f[schema.rating_col];
    double rating = 0.0;
    auto res = std::from_chars(rs.data(), rs.data() + rs.size(), rating);
    if (res.ec != std::errc() || res.ptr != rs.data() + rs.size()) {
      throw ParseError(
          fmt::format("{}:{}: bad rating '{}'", path, lineno, rs));
    }
    if (f[schema.user_col].empty() || f[schema.item_col].empty()) {
      throw ParseError(fmt::format("{}:{}: empty id", path, lineno));
    }
    Interaction r;
    r.user = users.intern(std::string(f[schema.user_col]));
    r.item = items.intern(std::string(f[schema.item_col]));
    r.rating = rating;
    recs.push_back(r);
  }
  return recs;
}

void write_records(const std::vector<Interaction>& recs, const Dataset& ds,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write {}", path));
  for (const auto& r : recs) {
    out << fmt::format("{}\t{}\t{}\n", ds.users.raw(r.user),
                       ds.items.raw(r.item), r.rating);
  }
  std::ofstream man(path + ".manifest");
  man << fmt::format("n_users={}\nn_items={}\nrecords={}\nsource={}\n",
                     ds.n_users, ds.n_items, recs.size(), ds.meta);
}

}  // namespace

void Dataset::validate(double lo, double hi) const {
  validate_records(mnar, n_users, n_items, lo, hi, "mnar");
  if (mar) validate_records(*mar, n_users, n_items, lo, hi, "mar");
}

ObservationMask Dataset::mnar_mask() const {
  ObservationMask m(n_users, n_items, 0);
  for (const auto& r : mnar) m(r.user, r.item) = 1;
  return m;
}

RatingMatrix Dataset::mnar_ratings(double fill) const {
  RatingMatrix m(n_users, n_items, fill);
  for (const auto& r : mnar) m(r.user, r.item) = r.rating;
  return m;
}

Dataset load_tsv(const std::string& path, const TsvSchema& schema) {
  Dataset ds;
  ds.mnar = read_records(path, schema, ds.users, ds.items);
  ds.n_users = ds.users.size();
  ds.n_items = ds.items.size();
  ds.meta = path;
  ds.validate(schema.min_rating, schema.max_rating);
  return ds;
}

void attach_mar_tsv(Dataset& ds, const std::string& path,
                    const TsvSchema& schema) {
  ds.mar = read_records(path, schema, ds.users, ds.items);
  ds.n_users = ds.users.size();
  ds.n_items = ds.items.size();
  ds.validate(schema.min_rating, schema.max_rating);
}

void write_tsv(const Dataset& ds, const std::string& path) {
  write_records(ds.mnar, ds, path);
}

void write_mar_tsv(const Dataset& ds, const std::string& path) {
  if (!ds.mar) throw DataError("dataset has no MAR records");
  write_records(*ds.mar, ds, path);
}

Dataset binarize(const Dataset& ds, double threshold) {
  Dataset out = ds;
  auto apply = [threshold](std::vector<Interaction>& recs) {
    for (auto& r : recs) r.rating = r.rating >= threshold ? 1.0 : 0.0;
  };
  apply(out.mnar);
  if (out.mar) apply(*out.mar);
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  double validation_fraction, uint64_t seed) {
  if (!(train_fraction > 0.0) || !(validation_fraction > 0.0) ||
      train_fraction + validation_fraction > 1.0 + 1e-12) {
    throw ConfigError(fmt::format("invalid split fractions ({}, {})",
                                  train_fraction, validation_fraction));
  }
  const size_t n = ds.mnar.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  Rng rng(seed);
  shuffle_in_place(idx, rng);
  const auto n_train = static_cast<size_t>(std::floor(train_fraction * n + 1e-9));
  const auto n_val = std::min(
      n - n_train,
      static_cast<size_t>(std::floor(validation_fraction * n + 1e-9)));
  Dataset a = ds;
  Dataset b = ds;
  a.mnar.clear();
  b.mnar.clear();
  b.mar.reset();
  for (size_t k = 0; k < n_train; ++k) a.mnar.push_back(ds.mnar[idx[k]]);
  for (size_t k = n_train; k < n_train + n_val; ++k) {
    b.mnar.push_back(ds.mnar[idx[k]]);
  }
  return {std::move(a), std::move(b)};
}

}  // namespace nbrec
