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
#include <cstddef>
#include <string>
#include <vector>

#include "fmqa/bits.hpp"
#include "fmqa/fm.hpp"

namespace fmqa {

/// Packed strictly-upper-triangular n x n matrix; only (i, j) with i < j is
/// stored.
class UpperTriangular {
 public:
  UpperTriangular() = default;
  explicit UpperTriangular(int n)
      : n_(n), data_(n > 1 ? static_cast<std::size_t>(n) * (n - 1) / 2 : 0, 0.0) {}

  int n() const { return n_; }

  double& at(int i, int j) { return data_[index(i, j)]; }
  double at(int i, int j) const { return data_[index(i, j)]; }

  /// Entry for an unordered pair; (j, i) folds onto (i, j).
  double& pair(int i, int j) { return i < j ? at(i, j) : at(j, i); }
  double pair(int i, int j) const { return i < j ? at(i, j) : at(j, i); }

  const std::vector<double>& values() const { return data_; }

  friend bool operator==(const UpperTriangular&, const UpperTriangular&) = default;

 private:
  std::size_t index(int i, int j) const {
    require(0 <= i && i < j && j < n_, "upper-triangular access needs 0 <= i < j < n");
    const auto ii = static_cast<std::size_t>(i);
    return ii * static_cast<std::size_t>(n_) - ii * (ii + 1) / 2 + static_cast<std::size_t>(j - i - 1);
  }

  int n_ = 0;
  std::vector<double> data_;
};

/// minimize sum_i linear_i x_i + sum_{i<j} quadratic_ij x_i x_j over {0,1}^n.
/// `offset` is carried alongside so that energy + offset is an absolute value
/// (for a fixed-user reduction it equals minus the predicted rating).
struct QuboProblem {
  int n = 0;
  std::vector<double> linear;
  UpperTriangular quadratic;
  double offset = 0.0;

  QuboProblem() = default;
  explicit QuboProblem(int num_vars)
      : n(num_vars), linear(static_cast<std::size_t>(num_vars), 0.0), quadratic(num_vars) {}

  /// Adds a coefficient for x_i x_j. i == j lands on the linear term since
  /// x_i^2 == x_i; (j, i) folds onto (i, j).
  void add(int i, int j, double value) {
    if (i == j) {
      linear.at(static_cast<std::size_t>(i)) += value;
    } else {
      quadratic.pair(i, j) += value;
    }
  }

  void validate() const {
    require(n >= 0, "QUBO: n must be >= 0");
    require(linear.size() == static_cast<std::size_t>(n), "QUBO: linear size mismatch");
    require(quadratic.n() == n, "QUBO: quadratic size mismatch");
    for (const double x : linear) require(std::isfinite(x), "QUBO: non-finite linear term");
    for (const double x : quadratic.values()) require(std::isfinite(x), "QUBO: non-finite quadratic term");
    require(std::isfinite(offset), "QUBO: non-finite offset");
  }

  friend bool operator==(const QuboProblem&, const QuboProblem&) = default;
};

/// minimize sum_i h_i s_i + sum_{i<j} J_ij s_i s_j over {-1,+1}^n.
struct IsingProblem {
  int n = 0;
  std::vector<double> h;
  UpperTriangular J;
  double offset = 0.0;

  IsingProblem() = default;
  explicit IsingProblem(int num_spins)
      : n(num_spins), h(static_cast<std::size_t>(num_spins), 0.0), J(num_spins) {}

  /// Adds a coupling for s_i s_j. i == j is a constant since s_i^2 == 1.
  void add(int i, int j, double value) {
    if (i == j) {
      require(0 <= i && i < n, "Ising: index out of range");
      offset += value;
    } else {
      J.pair(i, j) += value;
    }
  }

  /// Largest |h_i| or |J_ij|; 0 for an all-zero problem.
  double max_abs_coefficient() const {
    double m = 0.0;
    for (const double x : h) m = std::max(m, std::abs(x));
    for (const double x : J.values()) m = std::max(m, std::abs(x));
    return m;
  }

  void validate() const {
    require(n >= 0, "Ising: n must be >= 0");
    require(h.size() == static_cast<std::size_t>(n), "Ising: h size mismatch");
    require(J.n() == n, "Ising: J size mismatch");
    for (const double x : h) require(std::isfinite(x), "Ising: non-finite field");
    for (const double x : J.values()) require(std::isfinite(x), "Ising: non-finite coupling");
    require(std::isfinite(offset), "Ising: non-finite offset");
  }

  friend bool operator==(const IsingProblem&, const IsingProblem&) = default;
};

/// QUBO objective without the offset.
inline double qubo_energy(const QuboProblem& q, const BitVector& x) {
  require(x.size() == static_cast<std::size_t>(q.n), "qubo_energy: state length mismatch");
  double e = 0.0;
  for (int i = 0; i < q.n; ++i) {
    require(x[i] <= 1, "qubo_energy: state entry is not binary");
    e += q.linear[i] * x[i];
  }
  for (int i = 0; i < q.n; ++i) {
    if (!x[i]) continue;
    for (int j = i + 1; j < q.n; ++j) e += q.quadratic.at(i, j) * x[j];
  }
  return e;
}

/// Ising objective without the offset.
inline double ising_energy(const IsingProblem& p, const SpinVector& s) {
  require(s.size() == static_cast<std::size_t>(p.n), "ising_energy: state length mismatch");
  double e = 0.0;
  for (int i = 0; i < p.n; ++i) {
    require(s[i] == 1 || s[i] == -1, "ising_energy: state entry is not a spin");
    e += p.h[i] * s[i];
  }
  for (int i = 0; i < p.n; ++i) {
    for (int j = i + 1; j < p.n; ++j) e += p.J.at(i, j) * s[i] * s[j];
  }
  return e;
}

/// Fixes the user part of the FM input to `user_bits` and negates, giving an
/// n_m-variable QUBO with
///   qubo_energy(m) + offset == -predict(model, (user_bits | m))
/// for every item code m.
inline QuboProblem reduce_for_user(const FMModel& model, const BitVector& user_bits) {
  model.validate();
  require(user_bits.size() == static_cast<std::size_t>(model.n_u),
          "reduce_for_user: user code has length " + std::to_string(user_bits.size()) +
              ", model expects " + std::to_string(model.n_u));
  for (const auto b : user_bits) require(b <= 1, "reduce_for_user: user code must be binary");

  const int n_u = model.n_u;
  const int n_m = model.n_m;
  QuboProblem q(n_m);

  // Sum of active user embeddings, one entry per latent factor.
  std::vector<double> user_sum(static_cast<std::size_t>(model.k), 0.0);
  for (int f = 0; f < model.k; ++f) {
    for (int j = 0; j < n_u; ++j) {
      if (user_bits[j]) user_sum[f] += model.v(f, j);
    }
  }

  for (int i = 0; i < n_m; ++i) {
    const int col = n_u + i;
    double cross = 0.0;
    for (int f = 0; f < model.k; ++f) cross += user_sum[f] * model.v(f, col);
    q.linear[i] = -(model.w[col] + cross);
    for (int j = i + 1; j < n_m; ++j) {
      q.quadratic.at(i, j) = -model.interaction(col, n_u + j);
    }
  }

  double constant = model.w0;
  for (int j = 0; j < n_u; ++j) {
    if (user_bits[j]) constant += model.w[j];
  }
  for (int i = 0; i < n_u; ++i) {
    if (!user_bits[i]) continue;
    for (int j = i + 1; j < n_u; ++j) {
      if (user_bits[j]) constant += model.interaction(i, j);
    }
  }
  q.offset = -constant;
  return q;
}

/// Substitutes x = (s + 1) / 2. The returned offset absorbs every constant,
/// so ising_energy(s) + ising.offset == qubo_energy(x) + qubo.offset.
inline IsingProblem qubo_to_ising(const QuboProblem& q) {
  q.validate();
  IsingProblem p(q.n);
  double constant = q.offset;
  for (int i = 0; i < q.n; ++i) {
    p.h[i] += 0.5 * q.linear[i];
    constant += 0.5 * q.linear[i];
  }
  for (int i = 0; i < q.n; ++i) {
    for (int j = i + 1; j < q.n; ++j) {
      const double w = q.quadratic.at(i, j);
      p.J.at(i, j) = 0.25 * w;
      p.h[i] += 0.25 * w;
      p.h[j] += 0.25 * w;
      constant += 0.25 * w;
    }
  }
  p.offset = constant;
  return p;
}

}  // namespace fmqa
