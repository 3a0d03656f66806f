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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "fmqa/encoding.hpp"
#include "fmqa/fm.hpp"
#include "fmqa/solvers.hpp"

namespace fmqa {

inline std::vector<std::uint32_t> item_set(const std::vector<Recommendation>& recs) {
  std::vector<std::uint32_t> items;
  items.reserve(recs.size());
  for (const auto& r : recs) items.push_back(r.item);
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

/// Percentage of the direct top-k_s items that also appear among the sampled
/// items: 100 * |direct ∩ sampled| / k_s.
inline double overlap_rate(std::vector<std::uint32_t> direct_topk,
                           std::vector<std::uint32_t> sampled, std::size_t k_s) {
  std::sort(direct_topk.begin(), direct_topk.end());
  direct_topk.erase(std::unique(direct_topk.begin(), direct_topk.end()), direct_topk.end());
  require(k_s >= 1 && direct_topk.size() == k_s,
          "overlap_rate: direct list has " + std::to_string(direct_topk.size()) +
              " distinct items, expected k_s = " + std::to_string(k_s));
  std::sort(sampled.begin(), sampled.end());
  sampled.erase(std::unique(sampled.begin(), sampled.end()), sampled.end());
  std::vector<std::uint32_t> common;
  std::set_intersection(direct_topk.begin(), direct_topk.end(), sampled.begin(), sampled.end(),
                        std::back_inserter(common));
  return 100.0 * static_cast<double>(common.size()) / static_cast<double>(k_s);
}

// Number of distinct direct top-k items that appear anywhere in a sample set.
inline std::size_t topk_capture(const std::vector<Recommendation>& direct_topk,
                                const SampleSet& samples, const ItemCodebook& codebook) {
  std::vector<std::uint32_t> seen;
  seen.reserve(samples.records.size());
  for (const auto& r : samples.records) seen.push_back(codebook.decode_value(r.state));
  std::sort(seen.begin(), seen.end());
  std::size_t hits = 0;
  for (const auto item : item_set(direct_topk)) {
    if (std::binary_search(seen.begin(), seen.end(), item)) ++hits;
  }
  return hits;
}

struct OverlapReport {
  RawId user_id = 0;
  std::size_t k_s = 0;
  std::vector<std::uint32_t> direct_items;
  std::vector<std::uint32_t> sampled_items;
  double overlap_rate = 0.0;
};

/// Seeded choice of `count` distinct user indices (all users when count
/// exceeds the codebook), returned in draw order.
inline std::vector<std::uint32_t> select_users(const UserCodebook& users, std::size_t count,
                                               std::uint64_t seed) {
  std::vector<std::uint32_t> order(users.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  const std::size_t take = std::min(count, order.size());
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  order.resize(take);
  return order;
}

/// For every user: the direct top-k_s list against the sampler's top-k_s list,
/// for each k_s. One sampler run per user serves all k_s values.
inline std::vector<OverlapReport> run_overlap_experiment(const FMModel& model,
                                                         const Codebooks& codebooks,
                                                         const std::vector<std::uint32_t>& users,
                                                         const std::vector<std::size_t>& ks,
                                                         const Sampler& sampler) {
  require(!ks.empty(), "overlap experiment: no k_s values");
  const std::size_t max_k = *std::max_element(ks.begin(), ks.end());
  require(max_k <= codebooks.items.size(),
          "overlap experiment: k_s exceeds the number of items");
  std::vector<OverlapReport> reports;
  for (const auto user : users) {
    require(user < codebooks.users.size(),
            "overlap experiment: unknown user index " + std::to_string(user));
    const auto user_bits = codebooks.users.encode(user);
    const auto direct = solve_direct(model, user_bits, codebooks.items, max_k);
    const auto ising = qubo_to_ising(reduce_for_user(model, user_bits));
    const auto samples = sampler.sample(ising);
    const auto sampled = samples_to_recommendations(samples, codebooks.items, model, user_bits, max_k);
    for (const auto k_s : ks) {
      require(k_s >= 1, "overlap experiment: k_s must be >= 1");
      OverlapReport rep;
      rep.user_id = codebooks.users.raw_id(user);
      rep.k_s = k_s;
      rep.direct_items = item_set({direct.begin(), direct.begin() + static_cast<std::ptrdiff_t>(k_s)});
      const auto sampled_k = std::min(k_s, sampled.size());
      rep.sampled_items =
          item_set({sampled.begin(), sampled.begin() + static_cast<std::ptrdiff_t>(sampled_k)});
      rep.overlap_rate = overlap_rate(rep.direct_items, rep.sampled_items, k_s);
      reports.push_back(std::move(rep));
    }
  }
  return reports;
}

/// Mean overlap rate per k_s, keyed by k_s.
inline std::map<std::size_t, double> mean_overlap(const std::vector<OverlapReport>& reports) {
  std::map<std::size_t, std::pair<double, std::size_t>> acc;
  for (const auto& r : reports) {
    auto& [sum, count] = acc[r.k_s];
    sum += r.overlap_rate;
    ++count;
  }
  std::map<std::size_t, double> out;
  for (const auto& [k, v] : acc) out[k] = v.first / static_cast<double>(v.second);
  return out;
}

// ---------------------------------------------------------------------------
// Timing

/// A suggestion routine under test. Only the suggestion phase is timed:
/// reduction, solve and decode for samplers; scoring and sort for direct.
struct BenchBackend {
  std::string name;
  std::function<std::vector<Recommendation>(const FMModel&, const BitVector&, const ItemCodebook&)>
      suggest;
};

inline BenchBackend direct_backend(std::size_t k_s) {
  return {"direct", [k_s](const FMModel& m, const BitVector& u, const ItemCodebook& cb) {
            return solve_direct(m, u, cb, std::min(k_s, cb.size()));
          }};
}

inline BenchBackend sampler_backend(std::shared_ptr<const Sampler> sampler, std::size_t k_s) {
  auto name = sampler->name();
  return {std::move(name), [sampler = std::move(sampler), k_s](const FMModel& m, const BitVector& u,
                                                              const ItemCodebook& cb) {
            return recommend_with_sampler(m, u, cb, *sampler, k_s);
          }};
}

struct BenchInstance {
  FMModel model;
  Codebooks codebooks;
  std::size_t n_data = 0;  // ratings used for training; 0 for synthetic models
};

struct BenchRecord {
  std::size_t n_data = 0;
  std::size_t n_items = 0;  // N_m
  int item_bits = 0;        // n_m
  std::string backend;
  RawId user_id = 0;
  int reps = 0;
  double seconds = 0.0;  // median wall time of one suggestion
};

inline double median(std::vector<double> values) {
  require(!values.empty(), "median of an empty list");
  std::sort(values.begin(), values.end());
  const auto mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

/// Times every backend on every instance for `users_per_instance` seeded users,
/// `reps` repetitions each; one record per (instance, backend, user).
inline std::vector<BenchRecord> benchmark(const std::vector<BenchInstance>& instances,
                                          const std::vector<BenchBackend>& backends,
                                          std::size_t users_per_instance, int reps,
                                          std::uint64_t seed) {
  require(reps >= 1, "benchmark: reps must be >= 1");
  require(!backends.empty(), "benchmark: no backends");
  {
    std::vector<std::size_t> sizes;
    for (const auto& inst : instances) sizes.push_back(inst.codebooks.items.size());
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    require(sizes.size() >= 2, "benchmark: need instances with at least 2 distinct item counts");
  }
  std::vector<BenchRecord> records;
  for (const auto& inst : instances) {
    const auto users = select_users(inst.codebooks.users, users_per_instance, seed);
    for (const auto& backend : backends) {
      for (const auto user : users) {
        const auto user_bits = inst.codebooks.users.encode(user);
        std::vector<double> times;
        for (int r = 0; r < reps; ++r) {
          const auto start = std::chrono::steady_clock::now();
          const auto recs = backend.suggest(inst.model, user_bits, inst.codebooks.items);
          const auto stop = std::chrono::steady_clock::now();
          require(!recs.empty(), "benchmark: backend returned no recommendation");
          times.push_back(std::max(std::chrono::duration<double>(stop - start).count(), 1e-9));
        }
        records.push_back({inst.n_data, inst.codebooks.items.size(), inst.codebooks.items.n_bits(),
                           backend.name, inst.codebooks.users.raw_id(user), reps, median(times)});
      }
    }
  }
  return records;
}

// ---------------------------------------------------------------------------
// Complexity fits

enum class ComplexityFamily {
  kDirect,    // (N log2 N)^2
  kAnnealer,  // exp(sqrt(log2 N)) * log2 N
};

inline std::string family_name(ComplexityFamily family) {
  return family == ComplexityFamily::kDirect ? "direct" : "annealer";
}

inline double family_feature(ComplexityFamily family, double n_items) {
  require(n_items >= 1.0, "complexity feature needs N_m >= 1");
  const double lg = std::log2(n_items);
  if (family == ComplexityFamily::kDirect) {
    const double t = n_items * lg;
    return t * t;
  }
  return std::exp(std::sqrt(lg)) * lg;
}

struct ComplexityPoint {
  double n_items = 0.0;
  double seconds = 0.0;
};

struct ComplexityFit {
  ComplexityFamily family = ComplexityFamily::kDirect;
  double scale = 0.0;  // a
  double shift = 0.0;  // b
  std::vector<double> residuals;

  double predict(double n_items) const { return scale * family_feature(family, n_items) + shift; }
};

/// Least squares for seconds ~ a * feature(N_m) + b.
inline ComplexityFit fit_complexity(const std::vector<ComplexityPoint>& points,
                                    ComplexityFamily family) {
  require(points.size() >= 3, "fit_complexity: need at least 3 points, got " +
                                  std::to_string(points.size()));
  std::vector<double> f;
  f.reserve(points.size());
  double f_mean = 0.0;
  double t_mean = 0.0;
  for (const auto& p : points) {
    f.push_back(family_feature(family, p.n_items));
    f_mean += f.back();
    t_mean += p.seconds;
  }
  const double count = static_cast<double>(points.size());
  f_mean /= count;
  t_mean /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  double f_scale = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double df = f[i] - f_mean;
    sxx += df * df;
    sxy += df * (points[i].seconds - t_mean);
    f_scale = std::max(f_scale, std::abs(f[i]));
  }
  require(std::isfinite(sxx) && sxx > 1e-24 * f_scale * f_scale * count,
          "fit_complexity: degenerate design (all N_m give the same feature)");
  ComplexityFit fit;
  fit.family = family;
  fit.scale = sxy / sxx;
  fit.shift = t_mean - fit.scale * f_mean;
  for (std::size_t i = 0; i < points.size(); ++i) {
    fit.residuals.push_back(points[i].seconds - (fit.scale * f[i] + fit.shift));
  }
  return fit;
}

/// Mean time per N_m for one backend; the points a fit is run on.
inline std::vector<ComplexityPoint> complexity_points(const std::vector<BenchRecord>& records,
                                                      const std::string& backend) {
  std::map<std::size_t, std::pair<double, std::size_t>> acc;
  for (const auto& r : records) {
    if (r.backend != backend) continue;
    auto& [sum, count] = acc[r.n_items];
    sum += r.seconds;
    ++count;
  }
  std::vector<ComplexityPoint> points;
  for (const auto& [n, v] : acc) {
    points.push_back({static_cast<double>(n), v.first / static_cast<double>(v.second)});
  }
  return points;
}

/// Fully connected Ising sizes reported for D-Wave hardware; annotation only.
inline constexpr int kAdvantageIsingLimit = 145;
inline constexpr int kDw2000qIsingLimit = 64;

struct ExtrapolationRow {
  int item_bits = 0;      // QUBO size n_m
  double n_items = 0.0;   // 2^n_m
  double direct_seconds = 0.0;
  double annealer_seconds = 0.0;
  std::string note;
};

/// Evaluates both fitted curves at N_m = 2^n for each n in `item_bits`, marking
/// the hardware size limits.
inline std::vector<ExtrapolationRow> extrapolate(const ComplexityFit& direct,
                                                 const ComplexityFit& annealer,
                                                 const std::vector<int>& item_bits) {
  std::vector<ExtrapolationRow> rows;
  for (const int n : item_bits) {
    require(n >= 1 && n <= 1000, "extrapolate: QUBO size out of range");
    ExtrapolationRow row;
    row.item_bits = n;
    row.n_items = std::exp2(static_cast<double>(n));
    row.direct_seconds = direct.predict(row.n_items);
    row.annealer_seconds = annealer.predict(row.n_items);
    if (n == kDw2000qIsingLimit) row.note = "DW_2000Q fully-connected limit";
    if (n == kAdvantageIsingLimit) row.note = "Advantage 4.1 fully-connected limit";
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fmqa
