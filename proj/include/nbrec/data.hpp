/*
 * Copyright 2026 The nbrec Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NBREC_DATA_HPP_
#define NBREC_DATA_HPP_

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nbrec/common.hpp"

namespace nbrec {

struct Interaction {
  size_t user = 0;
  size_t item = 0;
  double rating = 0.0;
  bool operator==(const Interaction&) const = default;
};

// Maps raw string ids onto dense 0-based indices in first-seen order.
class IdMap {
 public:
  size_t intern(const std::string& raw);
  std::optional<size_t> find(const std::string& raw) const;
  const std::string& raw(size_t dense) const { return raw_.at(dense); }
  size_t size() const { return raw_.size(); }
  const std::vector<std::string>& raw_ids() const { return raw_; }
  bool operator==(const IdMap& o) const { return raw_ == o.raw_; }

 private:
  std::unordered_map<std::string, size_t> index_;
  std::vector<std::string> raw_;
};

struct Dataset {
  size_t n_users = 0;
  size_t n_items = 0;
  std::vector<Interaction> mnar;
  std::optional<std::vector<Interaction>> mar;
  std::string meta;
  IdMap users;
  IdMap items;

  bool operator==(const Dataset& o) const {
    return n_users == o.n_users && n_items == o.n_items && mnar == o.mnar &&
           mar == o.mar && users == o.users && items == o.items;
  }

  // Throws DataError if ids are out of range, pairs repeat, or ratings are
  // not finite within [lo, hi].
  void validate(double lo = -1e300, double hi = 1e300) const;
  ObservationMask mnar_mask() const;
  RatingMatrix mnar_ratings(double fill = 0.0) const;
};

struct TsvSchema {
  int user_col = 0;
  int item_col = 1;
  int rating_col = 2;
  char delimiter = '\t';
  double min_rating = 0.0;
  double max_rating = 5.0;
};

// Loads MNAR records. Raw ids are interned into `users`/`items` so a second
// file (MAR) can share the remapping.
Dataset load_tsv(const std::string& path, const TsvSchema& schema = {});

// Loads `path` as MAR side data into `ds`, reusing its id maps. Ids unseen in
// the MNAR file extend the maps.
void attach_mar_tsv(Dataset& ds, const std::string& path,
                    const TsvSchema& schema = {});

// Writes `user<TAB>item<TAB>rating` with raw ids plus `<path>.manifest`.
void write_tsv(const Dataset& ds, const std::string& path);
void write_mar_tsv(const Dataset& ds, const std::string& path);

Dataset binarize(const Dataset& ds, double threshold);

// Disjoint partitions of the MNAR records; MAR data stays with the first part.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  double validation_fraction, uint64_t seed);

}  // namespace nbrec

#endif  // NBREC_DATA_HPP_
