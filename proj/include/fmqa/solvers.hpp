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
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "fmqa/bits.hpp"
#include "fmqa/encoding.hpp"
#include "fmqa/fm.hpp"
#include "fmqa/qubo.hpp"

namespace fmqa {

/// Simulated-annealing schedule standing in for annealer parameters. One
/// sweep is one Metropolis pass over all spins.
struct AnnealConfig {
  int shots = 100;
  int sweeps = 1000;
  double beta_initial = 0.1;
  double beta_final = 10.0;
  /// Divide both betas by max(|h|, |J|) so acceptance rates do not depend on
  /// the coefficient scale.
  bool auto_scale = true;
  /// Recorded in run metadata only; they have no effect on the simulation.
  int programming_thermalization_us = 1000;
  int readout_thermalization_us = 0;
  std::uint64_t seed = 42;
  /// Worker threads. Results do not depend on this value.
  int threads = 1;

  void validate() const {
    require(shots > 0, "anneal config: shots must be > 0");
    require(sweeps > 0, "anneal config: sweeps must be > 0");
    require(beta_initial > 0.0 && beta_final > 0.0, "anneal config: betas must be > 0");
    require(beta_initial < beta_final, "anneal config: beta_initial must be < beta_final");
    require(programming_thermalization_us >= 0 && readout_thermalization_us >= 0,
            "anneal config: thermalization times must be >= 0");
    require(threads >= 1, "anneal config: threads must be >= 1");
  }
};

struct SampleRecord {
  StateCode state = 0;
  double energy = 0.0;  // includes the problem offset
  std::uint64_t occurrences = 0;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct SampleMetadata {
  std::string backend;
  AnnealConfig config;  // meaningful for annealing backends only
  double wall_seconds = 0.0;
};

/// Read-out of a sampler: distinct states sorted by ascending energy, ties by
/// ascending state value.
struct SampleSet {
  int n = 0;
  std::vector<SampleRecord> records;
  SampleMetadata metadata;

  std::uint64_t total_occurrences() const {
    std::uint64_t total = 0;
    for (const auto& r : records) total += r.occurrences;
    return total;
  }

  SpinVector spins(std::size_t record) const { return state_to_spins(records.at(record).state, n); }
  BitVector bits(std::size_t record) const { return state_to_bits(records.at(record).state, n); }
};

/// Common interface for anything that turns an Ising problem into reads.
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual std::string name() const = 0;
  virtual SampleSet sample(const IsingProblem& problem) const = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// [0, 1) with 53 random bits.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline void sort_records(std::vector<SampleRecord>& records) {
  std::sort(records.begin(), records.end(), [](const SampleRecord& a, const SampleRecord& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.state < b.state;
  });
}

/// Energy of a packed state including the offset; same arithmetic as
/// ising_energy() so stored energies are re-derivable bit for bit.
inline double packed_energy(const IsingProblem& p, StateCode state) {
  return ising_energy(p, state_to_spins(state, p.n)) + p.offset;
}

}  // namespace detail

/// RNG seed for shot `shot` of a run seeded with `seed`.
inline std::uint64_t shot_seed(std::uint64_t seed, std::uint64_t shot) {
  return detail::splitmix64(detail::splitmix64(seed) ^ detail::splitmix64(shot + 1));
}

/// Collapses per-shot states into a sorted SampleSet.
inline SampleSet aggregate_reads(const IsingProblem& problem, const std::vector<StateCode>& reads) {
  std::unordered_map<StateCode, std::uint64_t> counts;
  for (const auto s : reads) ++counts[s];
  SampleSet set;
  set.n = problem.n;
  set.records.reserve(counts.size());
  for (const auto& [state, count] : counts) {
    set.records.push_back({state, detail::packed_energy(problem, state), count});
  }
  detail::sort_records(set.records);
  return set;
}

inline constexpr int kMaxExhaustiveSpins = 25;

/// Enumerates all 2^n states, each with one occurrence. Energies are updated
/// incrementally along a Gray code and re-synchronized every 1024 states.
inline SampleSet solve_exhaustive(const IsingProblem& problem) {
  problem.validate();
  require(problem.n <= kMaxExhaustiveSpins,
          "solve_exhaustive: n = " + std::to_string(problem.n) + " exceeds the guard of " +
              std::to_string(kMaxExhaustiveSpins) + " spins");
  const auto start = std::chrono::steady_clock::now();
  const int n = problem.n;
  const std::uint64_t count = std::uint64_t{1} << n;

  std::vector<double> coupling(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      coupling[static_cast<std::size_t>(i) * n + j] = problem.J.at(i, j);
      coupling[static_cast<std::size_t>(j) * n + i] = problem.J.at(i, j);
    }
  }

  SampleSet set;
  set.n = n;
  set.records.resize(count);
  SpinVector spins(static_cast<std::size_t>(n), -1);
  StateCode state = 0;
  double energy = detail::packed_energy(problem, state);
  set.records[0] = {state, energy, 1};
  for (std::uint64_t step = 1; step < count; ++step) {
    // Gray code: flip the lowest set bit position of `step`.
    const int bit = std::countr_zero(step);
    const int i = n - 1 - bit;
    double field = problem.h[i];
    for (int j = 0; j < n; ++j) field += coupling[static_cast<std::size_t>(i) * n + j] * spins[j];
    energy -= 2.0 * spins[i] * field;
    spins[i] = static_cast<std::int8_t>(-spins[i]);
    state ^= StateCode{1} << bit;
    if ((step & 1023U) == 0) energy = detail::packed_energy(problem, state);
    set.records[step] = {state, energy, 1};
  }
  detail::sort_records(set.records);
  set.metadata.backend = "exhaustive";
  set.metadata.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return set;
}

/// One annealing read: random start, linear beta ramp, single-site Metropolis
/// updates in site order.
inline StateCode anneal_once(const IsingProblem& problem, const std::vector<double>& coupling,
                             const AnnealConfig& config, double beta_scale,
                             std::uint64_t seed) {
  const int n = problem.n;
  std::mt19937_64 rng(seed);
  SpinVector spins(static_cast<std::size_t>(n));
  for (auto& s : spins) s = (rng() >> 63) ? 1 : -1;
  std::vector<double> field(problem.h);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) field[i] += coupling[static_cast<std::size_t>(i) * n + j] * spins[j];
  }
  const double span = config.beta_final - config.beta_initial;
  for (int sweep = 0; sweep < config.sweeps; ++sweep) {
    const double t = config.sweeps == 1 ? 1.0 : static_cast<double>(sweep) / (config.sweeps - 1);
    const double beta = (config.beta_initial + span * t) * beta_scale;
    for (int i = 0; i < n; ++i) {
      const double delta = -2.0 * spins[i] * field[i];
      if (delta > 0.0 && detail::unit_uniform(rng) >= std::exp(-beta * delta)) continue;
      spins[i] = static_cast<std::int8_t>(-spins[i]);
      const double change = 2.0 * spins[i];
      const double* row = coupling.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) field[j] += change * row[j];
    }
  }
  return spins_to_state(spins);
}

/// Runs config.shots independent reads. Shot r draws from an RNG seeded by
/// shot_seed(config.seed, r), so the result is independent of threading.
inline SampleSet sample_sa(const IsingProblem& problem, const AnnealConfig& config) {
  problem.validate();
  config.validate();
  require(problem.n <= 64, "sample_sa: at most 64 spins");
  const auto start = std::chrono::steady_clock::now();
  const int n = problem.n;
  std::vector<double> coupling(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      coupling[static_cast<std::size_t>(i) * n + j] = problem.J.at(i, j);
      coupling[static_cast<std::size_t>(j) * n + i] = problem.J.at(i, j);
    }
  }
  const double beta_scale =
      config.auto_scale ? 1.0 / std::max(problem.max_abs_coefficient(), 1e-12) : 1.0;

  std::vector<StateCode> reads(static_cast<std::size_t>(config.shots));
  auto run_range = [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      reads[static_cast<std::size_t>(r)] =
          anneal_once(problem, coupling, config, beta_scale, shot_seed(config.seed, r));
    }
  };
  const int workers = std::min(config.threads, config.shots);
  if (workers <= 1) {
    run_range(0, config.shots);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (config.shots + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * chunk;
      const int end = std::min(config.shots, begin + chunk);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  SampleSet set = aggregate_reads(problem, reads);
  set.metadata.backend = "sa";
  set.metadata.config = config;
  set.metadata.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return set;
}

class ExhaustiveSampler final : public Sampler {
 public:
  std::string name() const override { return "exhaustive"; }
  SampleSet sample(const IsingProblem& problem) const override { return solve_exhaustive(problem); }
};

class SimulatedAnnealingSampler final : public Sampler {
 public:
  explicit SimulatedAnnealingSampler(AnnealConfig config = {}) : config_(config) {
    config_.validate();
  }
  std::string name() const override { return "sa"; }
  SampleSet sample(const IsingProblem& problem) const override { return sample_sa(problem, config_); }
  const AnnealConfig& config() const { return config_; }

 private:
  AnnealConfig config_;
};

struct Recommendation {
  std::uint32_t item = 0;
  RawId item_id = 0;
  std::uint64_t code = 0;  // item code the rating was computed from
  double predicted_rating = 0.0;
  std::uint64_t hits = 0;  // sampler occurrences; 0 for the direct method

  friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

namespace detail {

inline void rank_recommendations(std::vector<Recommendation>& recs) {
  std::sort(recs.begin(), recs.end(), [](const Recommendation& a, const Recommendation& b) {
    if (a.predicted_rating != b.predicted_rating) return a.predicted_rating > b.predicted_rating;
    return a.item < b.item;
  });
}

inline std::vector<std::uint32_t> active_bits(const BitVector& bits, std::uint32_t offset) {
  std::vector<std::uint32_t> active;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) active.push_back(offset + static_cast<std::uint32_t>(i));
  }
  return active;
}

inline void check_suggestion_inputs(const FMModel& model, const BitVector& user_bits,
                                    const ItemCodebook& codebook) {
  model.validate();
  require(codebook.size() > 0, "item codebook is empty");
  require(user_bits.size() == static_cast<std::size_t>(model.n_u),
          "user code has length " + std::to_string(user_bits.size()) + ", model expects " +
              std::to_string(model.n_u));
  require(codebook.n_bits() == model.n_m,
          "item codebook has " + std::to_string(codebook.n_bits()) + " bits, model expects " +
              std::to_string(model.n_m));
}

/// FM rating of the item code `code` for a user given by its active bits.
inline double score_code(const FMModel& model, std::vector<std::uint32_t>& active,
                         std::size_t user_active, std::uint64_t code) {
  active.resize(user_active);
  for (int b = 0; b < model.n_m; ++b) {
    if ((code >> (model.n_m - 1 - b)) & 1U) active.push_back(static_cast<std::uint32_t>(model.n_u + b));
  }
  return predict_active(model, active);
}

}  // namespace detail

/// Direct method: rates every item with the FM, sorts all N_m ratings and
/// keeps the best k_s. An item reachable through two codes is rated by the
/// better of them, which is the rating a sampler sees for that item.
inline std::vector<Recommendation> solve_direct(const FMModel& model, const BitVector& user_bits,
                                                const ItemCodebook& codebook, std::size_t k_s) {
  require(k_s >= 1, "solve_direct: k_s must be >= 1");
  detail::check_suggestion_inputs(model, user_bits, codebook);
  const auto user_active = detail::active_bits(user_bits, 0);
  std::vector<std::uint32_t> active = user_active;
  std::vector<Recommendation> recs;
  recs.reserve(codebook.size());
  for (std::uint32_t item = 0; item < codebook.size(); ++item) {
    Recommendation rec;
    rec.item = item;
    rec.item_id = codebook.raw_id(item);
    bool first = true;
    for (const auto code : codebook.codes_of(item)) {
      const double rating = detail::score_code(model, active, user_active.size(), code);
      if (first || rating > rec.predicted_rating) {
        rec.predicted_rating = rating;
        rec.code = code;
        first = false;
      }
    }
    recs.push_back(rec);
  }
  detail::rank_recommendations(recs);
  if (recs.size() > k_s) recs.resize(k_s);
  return recs;
}

/// Decodes reads into items, merges codes of the same item (occurrences add
/// up, the lowest-energy code is kept) and ranks by the FM rating of that
/// code. Returns at most k_s entries.
inline std::vector<Recommendation> samples_to_recommendations(const SampleSet& samples,
                                                              const ItemCodebook& codebook,
                                                              const FMModel& model,
                                                              const BitVector& user_bits,
                                                              std::size_t k_s) {
  require(!samples.records.empty(), "samples_to_recommendations: sample set is empty");
  require(k_s >= 1, "samples_to_recommendations: k_s must be >= 1");
  detail::check_suggestion_inputs(model, user_bits, codebook);
  require(samples.n == codebook.n_bits(), "sample width does not match the item codebook");

  struct Best {
    std::uint64_t code = 0;
    double energy = 0.0;
    std::uint64_t hits = 0;
  };
  std::unordered_map<std::uint32_t, Best> merged;
  for (const auto& r : samples.records) {
    const auto item = codebook.decode_value(r.state);
    auto [it, inserted] = merged.try_emplace(item, Best{r.state, r.energy, 0});
    auto& best = it->second;
    best.hits += r.occurrences;
    if (r.energy < best.energy || (r.energy == best.energy && r.state < best.code)) {
      best.code = r.state;
      best.energy = r.energy;
    }
  }

  const auto user_active = detail::active_bits(user_bits, 0);
  std::vector<std::uint32_t> active = user_active;
  std::vector<Recommendation> recs;
  recs.reserve(merged.size());
  for (const auto& [item, best] : merged) {
    recs.push_back({item, codebook.raw_id(item), best.code,
                    detail::score_code(model, active, user_active.size(), best.code), best.hits});
  }
  detail::rank_recommendations(recs);
  if (recs.size() > k_s) recs.resize(k_s);
  return recs;
}

/// Full suggestion pipeline through a sampler: reduce, map to Ising, sample,
/// decode.
inline std::vector<Recommendation> recommend_with_sampler(const FMModel& model,
                                                          const BitVector& user_bits,
                                                          const ItemCodebook& codebook,
                                                          const Sampler& sampler,
                                                          std::size_t k_s) {
  const auto ising = qubo_to_ising(reduce_for_user(model, user_bits));
  return samples_to_recommendations(sampler.sample(ising), codebook, model, user_bits, k_s);
}

}  // namespace fmqa
