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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fmqa/bits.hpp"
#include "fmqa/dataset.hpp"
#include "fmqa/encoding.hpp"

namespace fmqa {

/// Degree-2 factorization machine
///
///   y(x) = w0 + sum_i w_i x_i + sum_{i<j} <v_i, v_j> x_i x_j
///
/// over x = (u | m) with n_u user bits followed by n_m item bits. The latent
/// matrix V has k rows and d columns; column j is the embedding v_j. It is
/// stored row-major, so factor f of feature j lives at V[f * d + j].
struct FMModel {
  double w0 = 0.0;
  std::vector<double> w;
  std::vector<double> V;
  int n_u = 0;
  int n_m = 0;
  int k = 0;

  FMModel() = default;
  FMModel(int user_bits, int item_bits, int latent_dim)
      : w(static_cast<std::size_t>(user_bits + item_bits), 0.0),
        V(static_cast<std::size_t>(latent_dim) * static_cast<std::size_t>(user_bits + item_bits),
          0.0),
        n_u(user_bits),
        n_m(item_bits),
        k(latent_dim) {
    require(user_bits >= 0 && item_bits >= 1 && latent_dim >= 1,
            "FMModel: need n_u >= 0, n_m >= 1, k >= 1");
  }

  int d() const { return n_u + n_m; }

  double& v(int f, int j) { return V[static_cast<std::size_t>(f) * d() + j]; }
  double v(int f, int j) const { return V[static_cast<std::size_t>(f) * d() + j]; }

  /// <v_i, v_j>
  double interaction(int i, int j) const {
    double dot = 0.0;
    for (int f = 0; f < k; ++f) dot += v(f, i) * v(f, j);
    return dot;
  }

  void validate() const {
    require(n_u >= 0 && n_m >= 1 && k >= 1, "FMModel: invalid dimensions");
    require(w.size() == static_cast<std::size_t>(d()), "FMModel: w must have d entries");
    require(V.size() == static_cast<std::size_t>(k) * static_cast<std::size_t>(d()),
            "FMModel: V must have k*d entries");
  }

  bool all_finite() const {
    if (!std::isfinite(w0)) return false;
    for (const double x : w) if (!std::isfinite(x)) return false;
    for (const double x : V) if (!std::isfinite(x)) return false;
    return true;
  }

  friend bool operator==(const FMModel&, const FMModel&) = default;
};

namespace detail {

inline void check_input(const FMModel& model, const BitVector& x) {
  require(x.size() == static_cast<std::size_t>(model.d()),
          "FM input has length " + std::to_string(x.size()) + ", model expects " +
              std::to_string(model.d()));
  for (const auto b : x) require(b <= 1, "FM input must be binary");
}

}  // namespace detail

/// Linear-time evaluation:
///   pairwise = 1/2 sum_f [(sum_i V_fi x_i)^2 - sum_i V_fi^2 x_i^2].
/// Summation order is fixed, so results are bit-reproducible.
inline double predict(const FMModel& model, const BitVector& x) {
  detail::check_input(model, x);
  const int d = model.d();
  double y = model.w0;
  for (int i = 0; i < d; ++i) y += model.w[i] * x[i];
  double pairwise = 0.0;
  for (int f = 0; f < model.k; ++f) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < d; ++i) {
      const double t = model.v(f, i) * x[i];
      sum += t;
      sum_sq += t * t;
    }
    pairwise += sum * sum - sum_sq;
  }
  return y + 0.5 * pairwise;
}

/// Literal O(k d^2) double sum over i < j. Test oracle for predict().
inline double predict_naive(const FMModel& model, const BitVector& x) {
  detail::check_input(model, x);
  const int d = model.d();
  double y = model.w0;
  for (int i = 0; i < d; ++i) y += model.w[i] * x[i];
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      y += model.interaction(i, j) * x[i] * x[j];
    }
  }
  return y;
}

/// Prediction for a binary input given by its set bit positions.
inline double predict_active(const FMModel& model, std::span<const std::uint32_t> active) {
  double y = model.w0;
  for (const auto i : active) y += model.w[i];
  double pairwise = 0.0;
  for (int f = 0; f < model.k; ++f) {
    const double* row = model.V.data() + static_cast<std::size_t>(f) * model.d();
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto i : active) {
      sum += row[i];
      sum_sq += row[i] * row[i];
    }
    pairwise += sum * sum - sum_sq;
  }
  return y + 0.5 * pairwise;
}

struct TrainConfig {
  int latent_dim = 200;
  double learning_rate = 0.01;
  int epochs = 30;
  double l2_w0 = 0.0;
  double l2_w = 1e-4;
  double l2_V = 1e-4;
  double init_std = 0.01;
  std::uint64_t seed = 42;

  void validate() const {
    require(latent_dim >= 1, "train config: latent_dim must be >= 1");
    require(learning_rate > 0.0, "train config: learning_rate must be > 0");
    require(epochs > 0, "train config: epochs must be > 0");
    require(l2_w0 >= 0.0 && l2_w >= 0.0 && l2_V >= 0.0, "train config: l2 terms must be >= 0");
    require(init_std > 0.0, "train config: init_std must be > 0");
  }
};

/// Per-example objective minimized by SGD:
///   1/2 (y(x) - target)^2 + 1/2 l2_w0 w0^2
///     + 1/2 sum_{i: x_i = 1} (l2_w w_i^2 + l2_V |v_i|^2).
/// Regularization only touches parameters of active features, which is what a
/// sparse SGD step updates.
inline double example_loss(const FMModel& model, const BitVector& x, double target,
                           const TrainConfig& config) {
  const double err = predict(model, x) - target;
  double loss = 0.5 * err * err + 0.5 * config.l2_w0 * model.w0 * model.w0;
  for (int i = 0; i < model.d(); ++i) {
    if (!x[i]) continue;
    loss += 0.5 * config.l2_w * model.w[i] * model.w[i];
    for (int f = 0; f < model.k; ++f) loss += 0.5 * config.l2_V * model.v(f, i) * model.v(f, i);
  }
  return loss;
}

struct Gradient {
  double w0 = 0.0;
  std::vector<double> w;
  std::vector<double> V;  // same layout as FMModel::V
};

/// Analytic gradient of example_loss().
inline Gradient example_gradient(const FMModel& model, const BitVector& x, double target,
                                 const TrainConfig& config) {
  const double err = predict(model, x) - target;
  const int d = model.d();
  Gradient g;
  g.w0 = err + config.l2_w0 * model.w0;
  g.w.assign(static_cast<std::size_t>(d), 0.0);
  g.V.assign(model.V.size(), 0.0);
  for (int f = 0; f < model.k; ++f) {
    double sum = 0.0;
    for (int j = 0; j < d; ++j) sum += model.v(f, j) * x[j];
    for (int i = 0; i < d; ++i) {
      if (!x[i]) continue;
      g.V[static_cast<std::size_t>(f) * d + i] =
          err * (sum - model.v(f, i)) + config.l2_V * model.v(f, i);
    }
  }
  for (int i = 0; i < d; ++i) {
    if (x[i]) g.w[i] = err + config.l2_w * model.w[i];
  }
  return g;
}

/// One SGD step on a single example; equivalent to subtracting
/// learning_rate * example_gradient() but touching only active parameters.
inline void sgd_step(FMModel& model, std::span<const std::uint32_t> active, double target,
                     const TrainConfig& config, std::vector<double>& scratch) {
  const double err = predict_active(model, active) - target;
  const double lr = config.learning_rate;
  const int d = model.d();
  scratch.resize(static_cast<std::size_t>(model.k));
  for (int f = 0; f < model.k; ++f) {
    const double* row = model.V.data() + static_cast<std::size_t>(f) * d;
    double sum = 0.0;
    for (const auto i : active) sum += row[i];
    scratch[f] = sum;
  }
  model.w0 -= lr * (err + config.l2_w0 * model.w0);
  for (const auto i : active) model.w[i] -= lr * (err + config.l2_w * model.w[i]);
  for (int f = 0; f < model.k; ++f) {
    double* row = model.V.data() + static_cast<std::size_t>(f) * d;
    for (const auto i : active) {
      row[i] -= lr * (err * (scratch[f] - row[i]) + config.l2_V * row[i]);
    }
  }
}

/// A rating turned into the set bit positions of (user code | item code).
struct EncodedExample {
  std::vector<std::uint32_t> active;
  double target = 0.0;
};

/// Feature vector for a user index and an item code value.
inline BitVector feature_vector(const Codebooks& codebooks, std::uint32_t user,
                                std::uint64_t item_code) {
  return concat(codebooks.users.encode(user),
                encode_index(item_code, codebooks.items.n_bits()));
}

/// Encodes every rating with the user's code and the item's primary code.
/// Dataset indices are matched to codebook entries through raw ids.
inline std::vector<EncodedExample> encode_dataset(const RatingsDataset& data,
                                                  const Codebooks& codebooks) {
  const int n_u = codebooks.users.n_bits();
  const int n_m = codebooks.items.n_bits();
  std::vector<std::vector<std::uint32_t>> user_bits(data.num_users());
  for (std::size_t u = 0; u < data.num_users(); ++u) {
    const auto idx = codebooks.users.find(data.user_ids[u]);
    if (!idx) continue;
    const auto code = codebooks.users.encode(*idx);
    for (int b = 0; b < n_u; ++b) if (code[b]) user_bits[u].push_back(static_cast<std::uint32_t>(b));
  }
  std::vector<std::vector<std::uint32_t>> item_bits(data.num_items());
  std::vector<bool> item_known(data.num_items(), false);
  std::vector<bool> user_known(data.num_users(), false);
  for (std::size_t u = 0; u < data.num_users(); ++u)
    user_known[u] = codebooks.users.find(data.user_ids[u]).has_value();
  {
    // raw id -> codebook index via sorted lookup
    const auto& ids = codebooks.items.item_ids();
    std::vector<std::uint32_t> order(ids.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ids[a] < ids[b]; });
    for (std::size_t m = 0; m < data.num_items(); ++m) {
      const auto it = std::lower_bound(order.begin(), order.end(), data.item_ids[m],
                                       [&](std::uint32_t a, RawId id) { return ids[a] < id; });
      if (it == order.end() || ids[*it] != data.item_ids[m]) continue;
      item_known[m] = true;
      const auto code = codebooks.items.primary_code(*it);
      for (int b = 0; b < n_m; ++b)
        if (code[b]) item_bits[m].push_back(static_cast<std::uint32_t>(n_u + b));
    }
  }
  std::vector<EncodedExample> out;
  out.reserve(data.size());
  for (const auto& r : data.ratings) {
    require(user_known[r.user], "user " + std::to_string(data.user_ids[r.user]) +
                                    " is not in the user codebook");
    require(item_known[r.item], "item " + std::to_string(data.item_ids[r.item]) +
                                    " is not in the item codebook");
    EncodedExample e;
    e.active = user_bits[r.user];
    e.active.insert(e.active.end(), item_bits[r.item].begin(), item_bits[r.item].end());
    e.target = r.value;
    out.push_back(std::move(e));
  }
  return out;
}

inline double rmse(const FMModel& model, const std::vector<EncodedExample>& examples) {
  require(!examples.empty(), "rmse: no examples");
  double sse = 0.0;
  for (const auto& e : examples) {
    const double err = predict_active(model, e.active) - e.target;
    sse += err * err;
  }
  return std::sqrt(sse / static_cast<double>(examples.size()));
}

inline double rmse(const FMModel& model, const RatingsDataset& data, const Codebooks& codebooks) {
  require(!data.empty(), "rmse: dataset is empty");
  return rmse(model, encode_dataset(data, codebooks));
}

/// w0 = 0, w = 0, V ~ Normal(0, init_std^2) drawn from config.seed.
inline FMModel initial_model(int n_u, int n_m, const TrainConfig& config) {
  FMModel model(n_u, n_m, config.latent_dim);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, config.init_std);
  for (auto& x : model.V) x = normal(rng);
  return model;
}

struct TrainResult {
  FMModel model;
  /// rmse_history[0] is the untrained model, rmse_history[e] follows epoch e.
  std::vector<double> rmse_history;
};

/// Sequential SGD on squared error with an epoch-wise seeded Fisher-Yates
/// shuffle. Identical inputs give bit-identical models.
inline TrainResult train_sgd(const RatingsDataset& data, const Codebooks& codebooks,
                             const TrainConfig& config) {
  config.validate();
  require(!data.empty(), "train: dataset is empty");
  const auto examples = encode_dataset(data, codebooks);

  TrainResult result;
  result.model = initial_model(codebooks.users.n_bits(), codebooks.items.n_bits(), config);
  result.rmse_history.push_back(rmse(result.model, examples));

  // Shuffle stream is independent of the initialization stream.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> scratch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    for (const auto idx : order) {
      sgd_step(result.model, examples[idx].active, examples[idx].target, config, scratch);
    }
    const double epoch_rmse = rmse(result.model, examples);
    if (!std::isfinite(epoch_rmse) || !result.model.all_finite()) {
      throw Error("train: non-finite parameters at epoch " + std::to_string(epoch));
    }
    result.rmse_history.push_back(epoch_rmse);
  }
  return result;
}

}  // namespace fmqa
