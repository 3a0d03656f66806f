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
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <random>
#include <unordered_set>
#include <vector>

#include "fmqa/bits.hpp"
#include "fmqa/dataset.hpp"
#include "fmqa/encoding.hpp"
#include "fmqa/eval.hpp"
#include "fmqa/fm.hpp"

namespace fmqa {

/// Parameters of a synthetic ratings table shaped like MovieLens: rows sorted
/// by user then item, heavy-tailed activity per user, Zipf item popularity,
/// half-star ratings in [0.5, 5] from a planted low-rank model.
struct SynthConfig {
  std::size_t users = 7000;
  std::size_t items = 27000;
  std::size_t ratings = 1000000;
  double popularity_exponent = 1.2;
  int latent_dim = 4;
  double noise_std = 0.5;
  std::uint64_t seed = 42;

  void validate() const {
    require(users >= 1 && items >= 1, "synth: need at least one user and one item");
    require(ratings >= users, "synth: need at least one rating per user");
    require(ratings <= users * items, "synth: more ratings than (user, item) pairs");
    require(popularity_exponent >= 0.0, "synth: popularity exponent must be >= 0");
    require(latent_dim >= 1 && noise_std >= 0.0, "synth: invalid latent model");
  }
};

/// Raw rows in file order. Item ids are a seeded permutation of 1..items
/// scattered over a wider range, so id order carries no popularity signal.
inline std::vector<RawRating> synthesize_ratings(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Ratings per user: lognormal weights scaled to the total, at least 1 each.
  std::vector<double> weight(config.users);
  for (auto& w : weight) w = std::exp(0.8 * normal(rng));
  double weight_sum = 0.0;
  for (const double w : weight) weight_sum += w;
  const std::size_t spare = config.ratings - config.users;
  std::vector<std::size_t> count(config.users, 1);
  std::size_t assigned = config.users;
  for (std::size_t u = 0; u < config.users; ++u) {
    const auto extra = static_cast<std::size_t>(std::floor(weight[u] / weight_sum * spare));
    count[u] += std::min(extra, config.items - 1);
    assigned += count[u] - 1;
  }
  for (std::size_t u = 0; assigned < config.ratings; u = (u + 1) % config.users) {
    if (count[u] < config.items) {
      ++count[u];
      ++assigned;
    }
  }

  // Zipf popularity over item ranks.
  std::vector<double> popularity(config.items);
  for (std::size_t i = 0; i < config.items; ++i) {
    popularity[i] = 1.0 / std::pow(static_cast<double>(i + 1), config.popularity_exponent);
  }
  std::discrete_distribution<std::size_t> pick_item(popularity.begin(), popularity.end());

  std::vector<RawId> item_id(config.items);
  for (std::size_t i = 0; i < config.items; ++i) item_id[i] = static_cast<RawId>(i);
  std::shuffle(item_id.begin(), item_id.end(), rng);
  for (auto& id : item_id) id = 1 + id * 3 + static_cast<RawId>(rng() % 3);

  const int k = config.latent_dim;
  const double factor_std = 0.6 / std::sqrt(static_cast<double>(k));
  std::vector<double> user_bias(config.users), item_bias(config.items);
  std::vector<double> user_f(config.users * k), item_f(config.items * k);
  for (auto& b : user_bias) b = 0.4 * normal(rng);
  for (auto& b : item_bias) b = 0.5 * normal(rng);
  for (auto& f : user_f) f = factor_std * normal(rng);
  for (auto& f : item_f) f = factor_std * normal(rng);

  std::vector<RawRating> rows;
  rows.reserve(config.ratings);
  std::vector<std::size_t> chosen;
  std::unordered_set<std::size_t> seen;
  for (std::size_t u = 0; u < config.users; ++u) {
    chosen.clear();
    seen.clear();
    // Dense users would stall on rejection sampling; fall back to a scan.
    if (count[u] * 2 > config.items) {
      std::vector<std::size_t> all(config.items);
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      std::shuffle(all.begin(), all.end(), rng);
      chosen.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count[u]));
    } else {
      while (chosen.size() < count[u]) {
        const auto i = pick_item(rng);
        if (seen.insert(i).second) chosen.push_back(i);
      }
    }
    std::sort(chosen.begin(), chosen.end(),
              [&](std::size_t a, std::size_t b) { return item_id[a] < item_id[b]; });
    for (const auto i : chosen) {
      double r = 3.5 + user_bias[u] + item_bias[i] + config.noise_std * normal(rng);
      for (int f = 0; f < k; ++f) r += user_f[u * k + f] * item_f[i * k + f];
      r = std::clamp(std::round(r * 2.0) / 2.0, 0.5, 5.0);
      rows.push_back({static_cast<RawId>(u + 1), item_id[i], r});
    }
  }
  return rows;
}

/// Writes `userId,movieId,rating,timestamp` with a header line.
inline void write_ratings_csv(std::ostream& out, const std::vector<RawRating>& rows) {
  out << "userId,movieId,rating,timestamp\n";
  out << std::fixed << std::setprecision(1);
  std::int64_t timestamp = 1100000000;
  for (const auto& r : rows) {
    out << r.user << ',' << r.item << ',' << r.value << ',' << timestamp << '\n';
    timestamp += 37;
  }
}

/// FM with every parameter drawn from Normal(0, scale^2), w0 from
/// Normal(3.5, scale^2).
inline FMModel random_model(int n_u, int n_m, int k, double scale, std::uint64_t seed) {
  FMModel model(n_u, n_m, k);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  model.w0 = 3.5 + normal(rng);
  for (auto& x : model.w) x = normal(rng);
  for (auto& x : model.V) x = normal(rng);
  return model;
}

/// Random model over `n_users` users and `n_items` items with a seeded item
/// ranking; stands in for a trained model when only timing matters.
inline BenchInstance synthetic_instance(std::size_t n_items, std::size_t n_users, int k,
                                        std::uint64_t seed) {
  require(n_items >= 1 && n_users >= 1, "synthetic instance: need users and items");
  std::vector<RawId> user_ids(n_users), item_ids(n_items);
  for (std::size_t i = 0; i < n_users; ++i) user_ids[i] = static_cast<RawId>(i + 1);
  for (std::size_t i = 0; i < n_items; ++i) item_ids[i] = static_cast<RawId>(i + 1);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mean(0.5, 5.0);
  std::vector<double> means(n_items);
  for (auto& m : means) m = mean(rng);
  BenchInstance inst;
  inst.codebooks = {UserCodebook(user_ids), build_item_codebook(item_ids, means)};
  inst.model = random_model(inst.codebooks.users.n_bits(), inst.codebooks.items.n_bits(), k,
                            0.1, seed ^ 0x5bd1e995ULL);
  return inst;
}

}  // namespace fmqa
