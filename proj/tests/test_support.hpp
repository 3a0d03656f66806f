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

#include <random>
#include <sstream>

#include "fmqa/fmqa.hpp"

namespace fmqa::testing {

/// Synthetic MovieLens-like table large enough for the 10^5-row prefix; the
/// 5x10^3-row prefix has N_m in (2048, 4096], i.e. n_m = 12.
inline const std::vector<RawRating>& synthetic_rows() {
  static const std::vector<RawRating> rows = [] {
    SynthConfig c;
    c.users = 1000;
    c.ratings = 150000;
    c.seed = 2023;
    return synthesize_ratings(c);
  }();
  return rows;
}

inline RatingsDataset first_rows(std::size_t n) {
  const auto& rows = synthetic_rows();
  return index_ratings({rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n)});
}

/// FM trained with default settings (k = 200) on the 5x10^3-row prefix.
inline const TrainOutcome& small_trained() {
  static const TrainOutcome outcome = train_model(first_rows(5000), TrainConfig{});
  return outcome;
}

inline BitVector random_bits(std::mt19937_64& rng, int n) {
  BitVector x(static_cast<std::size_t>(n));
  for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1U);
  return x;
}

inline FMModel random_fm(std::mt19937_64& rng, int n_u, int n_m, int k, double scale = 1.0) {
  FMModel m(n_u, n_m, k);
  std::normal_distribution<double> normal(0.0, scale);
  m.w0 = normal(rng);
  for (auto& x : m.w) x = normal(rng);
  for (auto& x : m.V) x = normal(rng);
  return m;
}

inline QuboProblem random_qubo(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  QuboProblem q(n);
  for (auto& x : q.linear) x = u(rng);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) q.quadratic.at(i, j) = u(rng);
  q.offset = u(rng);
  return q;
}

inline IsingProblem random_ising(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  IsingProblem p(n);
  for (auto& x : p.h) x = u(rng);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) p.J.at(i, j) = u(rng);
  p.offset = u(rng);
  return p;
}

}  // namespace fmqa::testing
