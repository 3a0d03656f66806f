// Copyright 2026 The fmqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <charconv>
#include <cmath>
#include <utility>
#include <vector>

#include "fmqa/bits.hpp"

namespace fmqa {

using RawId = std::int64_t;

struct Rating {
  std::uint32_t user = 0;  // contiguous user index
  std::uint32_t item = 0;  // contiguous item index
  double value = 0.0;

  friend bool operator==(const Rating&, const Rating&) = default;
};

/// Ingested (user, item, rating) triples with contiguous indices. Raw ids are
/// stored in ascending order, so index i corresponds to the i-th smallest id.
struct RatingsDataset {
  std::vector<Rating> ratings;
  std::vector<RawId> user_ids;
  std::vector<RawId> item_ids;

  std::size_t num_users() const { return user_ids.size(); }
  std::size_t num_items() const { return item_ids.size(); }
  std::size_t size() const { return ratings.size(); }
  bool empty() const { return ratings.empty(); }

  std::optional<std::uint32_t> user_index(RawId id) const {
    const auto it = std::lower_bound(user_ids.begin(), user_ids.end(), id);
    if (it == user_ids.end() || *it != id) return std::nullopt;
    return static_cast<std::uint32_t>(it - user_ids.begin());
  }
  std::optional<std::uint32_t> item_index(RawId id) const {
    const auto it = std::lower_bound(item_ids.begin(), item_ids.end(), id);
    if (it == item_ids.end() || *it != id) return std::nullopt;
    return static_cast<std::uint32_t>(it - item_ids.begin());
  }

  /// Same id maps, different rows. Used by split().
  RatingsDataset with_ratings(std::vector<Rating> rows) const {
    RatingsDataset out;
    out.ratings = std::move(rows);
    out.user_ids = user_ids;
    out.item_ids = item_ids;
    return out;
  }
};

struct RawRating {
  RawId user = 0;
  RawId item = 0;
  double value = 0.0;
};

/// Builds a dataset from raw triples; ids are re-indexed by ascending value.
inline RatingsDataset index_ratings(const std::vector<RawRating>& rows) {
  require(!rows.empty(), "dataset is empty");
  RatingsDataset data;
  data.user_ids.reserve(rows.size());
  data.item_ids.reserve(rows.size());
  for (const auto& r : rows) {
    data.user_ids.push_back(r.user);
    data.item_ids.push_back(r.item);
  }
  auto unique_sorted = [](std::vector<RawId>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    v.shrink_to_fit();
  };
  unique_sorted(data.user_ids);
  unique_sorted(data.item_ids);
  data.ratings.reserve(rows.size());
  for (const auto& r : rows) {
    data.ratings.push_back({*data.user_index(r.user), *data.item_index(r.item), r.value});
  }
  return data;
}

enum class SelectionMode {
  kAll,         // every row
  kFirstRows,   // first `max_rows` data rows in file order
  kSampledFraction,  // seeded uniform sample of round(fraction * rows) rows
};

struct IngestOptions {
  SelectionMode mode = SelectionMode::kAll;
  std::size_t max_rows = 0;
  double fraction = 1.0;
  std::uint64_t seed = 42;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
  field = trim(field);
  if (field.empty()) return false;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace detail

/// Parses one `userId,movieId,rating[,timestamp]` line. Returns false when the
/// line is malformed; the timestamp and any further columns are ignored.
inline bool parse_rating_line(std::string_view line, RawRating& out) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (fields.size() < 4) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (fields.size() < 3) return false;
  if (!detail::parse_number(fields[0], out.user)) return false;
  if (!detail::parse_number(fields[1], out.item)) return false;
  if (!detail::parse_number(fields[2], out.value)) return false;
  return std::isfinite(out.value);
}

/// Reads MovieLens-style ratings. A leading header line starting with
/// `userId` is skipped; blank lines are ignored. Duplicate (user, item) pairs
/// are kept as separate examples.
inline RatingsDataset ingest(std::istream& in, const IngestOptions& options = {},
                             const std::string& source = "<stream>") {
  require(options.mode != SelectionMode::kFirstRows || options.max_rows > 0,
          "ingest: max_rows must be > 0");
  require(options.mode != SelectionMode::kSampledFraction ||
              (options.fraction > 0.0 && options.fraction <= 1.0),
          "ingest: fraction must be in (0, 1]");
  std::vector<RawRating> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = detail::trim(line);
    if (view.empty()) continue;
    if (line_no == 1 && view.rfind("userId", 0) == 0) continue;
    RawRating r;
    if (!parse_rating_line(view, r)) {
      throw Error(source + ":" + std::to_string(line_no) + ": malformed rating row '" +
                  std::string(view) + "'");
    }
    rows.push_back(r);
    if (options.mode == SelectionMode::kFirstRows && rows.size() >= options.max_rows) break;
  }
  if (options.mode == SelectionMode::kSampledFraction && !rows.empty()) {
    const auto keep = static_cast<std::size_t>(
        std::llround(options.fraction * static_cast<double>(rows.size())));
    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(options.seed);
    for (std::size_t i = 0; i < keep && i + 1 < order.size(); ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
      std::swap(order[i], order[pick(rng)]);
    }
    order.resize(keep);
    std::sort(order.begin(), order.end());
    std::vector<RawRating> sampled;
    sampled.reserve(keep);
    for (const auto i : order) sampled.push_back(rows[i]);
    rows = std::move(sampled);
  }
  require(!rows.empty(), source + ": no ratings selected");
  return index_ratings(rows);
}

inline RatingsDataset ingest_file(const std::string& path, const IngestOptions& options = {}) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open ratings file '" + path + "'");
  return ingest(in, options, path);
}

/// Seeded disjoint split; the test part holds round(holdout_fraction * N) rows.
/// Both parts keep the original row order and the full id maps.
inline std::pair<RatingsDataset, RatingsDataset> split(const RatingsDataset& data,
                                                       double holdout_fraction,
                                                       std::uint64_t seed) {
  require(holdout_fraction > 0.0 && holdout_fraction < 1.0,
          "split: holdout fraction must be in (0, 1)");
  const std::size_t n = data.size();
  const auto n_test = static_cast<std::size_t>(
      std::llround(holdout_fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  std::vector<bool> in_test(n, false);
  for (std::size_t i = 0; i < n_test; ++i) in_test[order[i]] = true;
  std::vector<Rating> train;
  std::vector<Rating> test;
  train.reserve(n - n_test);
  test.reserve(n_test);
  for (std::size_t i = 0; i < n; ++i) {
    (in_test[i] ? test : train).push_back(data.ratings[i]);
  }
  return {data.with_ratings(std::move(train)), data.with_ratings(std::move(test))};
}

/// Mean rating per item index; items without ratings get 0.
inline std::vector<double> item_mean_ratings(const RatingsDataset& data) {
  std::vector<double> sum(data.num_items(), 0.0);
  std::vector<std::size_t> count(data.num_items(), 0);
  for (const auto& r : data.ratings) {
    sum[r.item] += r.value;
    ++count[r.item];
  }
  for (std::size_t i = 0; i < sum.size(); ++i) {
    if (count[i] > 0) sum[i] /= static_cast<double>(count[i]);
  }
  return sum;
}

}  // namespace fmqa
