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

#include <array>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fmqa/encoding.hpp"
#include "fmqa/eval.hpp"
#include "fmqa/fm.hpp"
#include "fmqa/qubo.hpp"
#include "fmqa/solvers.hpp"

namespace fmqa {

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  require(ec == std::errc(), "format_double failed");
  return std::string(buf.data(), ptr);
}

inline double parse_double(const std::string& text, const std::string& what) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  require(ec == std::errc() && ptr == last, "cannot parse " + what + " '" + text + "'");
  return value;
}

// ---------------------------------------------------------------------------
// Model file

inline constexpr int kModelFormatVersion = 1;

/// Trained FM plus the codebooks that define its inputs.
struct ModelBundle {
  FMModel model;
  Codebooks codebooks;

  friend bool operator==(const ModelBundle&, const ModelBundle&) = default;
};

/// JSON document. Numbers are written in shortest round-trip form, so a
/// write/read cycle reproduces every double exactly.
inline nlohmann::json model_to_json(const ModelBundle& bundle) {
  const auto& m = bundle.model;
  m.validate();
  nlohmann::json j;
  j["format"] = "fmqa-model";
  j["format_version"] = kModelFormatVersion;
  j["k"] = m.k;
  j["n_u"] = m.n_u;
  j["n_m"] = m.n_m;
  j["w0"] = m.w0;
  j["w"] = m.w;
  j["V"] = m.V;
  j["users"] = {{"n_bits", bundle.codebooks.users.n_bits()},
                {"ids", bundle.codebooks.users.user_ids()}};
  j["items"] = {{"n_bits", bundle.codebooks.items.n_bits()},
                {"ids", bundle.codebooks.items.item_ids()},
                {"rank", bundle.codebooks.items.rank()}};
  return j;
}

inline ModelBundle model_from_json(const nlohmann::json& j) {
  try {
    require(j.value("format", std::string()) == "fmqa-model", "model file: not an fmqa model");
    const int version = j.at("format_version").get<int>();
    require(version == kModelFormatVersion,
            "model file: unsupported format_version " + std::to_string(version));
    ModelBundle b;
    b.model.k = j.at("k").get<int>();
    b.model.n_u = j.at("n_u").get<int>();
    b.model.n_m = j.at("n_m").get<int>();
    b.model.w0 = j.at("w0").get<double>();
    b.model.w = j.at("w").get<std::vector<double>>();
    b.model.V = j.at("V").get<std::vector<double>>();
    b.model.validate();
    require(b.model.all_finite(), "model file: non-finite parameter");
    b.codebooks.users = UserCodebook(j.at("users").at("ids").get<std::vector<RawId>>());
    b.codebooks.items = ItemCodebook(j.at("items").at("ids").get<std::vector<RawId>>(),
                                     j.at("items").at("rank").get<std::vector<std::uint32_t>>());
    require(j.at("users").at("n_bits").get<int>() == b.codebooks.users.n_bits() &&
                b.codebooks.users.n_bits() == b.model.n_u,
            "model file: user code width mismatch");
    require(j.at("items").at("n_bits").get<int>() == b.codebooks.items.n_bits() &&
                b.codebooks.items.n_bits() == b.model.n_m,
            "model file: item code width mismatch");
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("model file: ") + e.what());
  }
}

inline void save_model(const ModelBundle& bundle, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write model file '" + path + "'");
  out << model_to_json(bundle).dump(1) << '\n';
  require(static_cast<bool>(out), "error writing model file '" + path + "'");
}

inline ModelBundle load_model(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open model file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("model file '" + path + "': " + e.what());
  }
  return model_from_json(j);
}

// ---------------------------------------------------------------------------
// QUBO / Ising text format
//
//   # offset <value>
//   i i <linear>        one line per variable, 0-based, ascending
//   i j <quadratic>     nonzero couplings only, i < j, row-major order

namespace detail {

struct CoefficientFile {
  double offset = 0.0;
  std::vector<double> diagonal;
  std::vector<std::tuple<int, int, double>> pairs;
};

inline void write_coefficients(std::ostream& out, double offset, const std::vector<double>& diag,
                               const UpperTriangular& upper) {
  out << "# offset " << format_double(offset) << '\n';
  const int n = static_cast<int>(diag.size());
  for (int i = 0; i < n; ++i) out << i << ' ' << i << ' ' << format_double(diag[i]) << '\n';
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = upper.at(i, j);
      if (v != 0.0) out << i << ' ' << j << ' ' << format_double(v) << '\n';
    }
  }
}

inline CoefficientFile read_coefficients(std::istream& in) {
  CoefficientFile file;
  bool have_offset = false;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::pair<int, double>> diag;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = "coefficient file line " + std::to_string(line_no);
    std::istringstream fields(line);
    if (line[0] == '#') {
      std::string hash, key, value;
      fields >> hash >> key >> value;
      if (key == "offset") {
        file.offset = parse_double(value, where + " offset");
        have_offset = true;
      }
      continue;
    }
    long long i = -1, j = -1;
    std::string value;
    std::string extra;
    if (!(fields >> i >> j >> value) || (fields >> extra) || i < 0 || j < i || j > 1'000'000) {
      throw Error(where + ": expected 'i j value' with 0 <= i <= j");
    }
    const double v = parse_double(value, where + " value");
    if (i == j) {
      diag.emplace_back(static_cast<int>(i), v);
    } else {
      file.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
    }
  }
  require(have_offset, "coefficient file: missing '# offset' line");
  file.diagonal.assign(diag.size(), 0.0);
  std::vector<bool> seen(diag.size(), false);
  for (const auto& [i, v] : diag) {
    require(static_cast<std::size_t>(i) < diag.size() && !seen[i],
            "coefficient file: diagonal lines must cover 0..n-1 exactly once");
    seen[i] = true;
    file.diagonal[i] = v;
  }
  for (const auto& [i, j, v] : file.pairs) {
    require(static_cast<std::size_t>(j) < diag.size(), "coefficient file: pair index out of range");
  }
  return file;
}

}  // namespace detail

inline void write_qubo(std::ostream& out, const QuboProblem& q) {
  q.validate();
  detail::write_coefficients(out, q.offset, q.linear, q.quadratic);
}

inline void write_ising(std::ostream& out, const IsingProblem& p) {
  p.validate();
  detail::write_coefficients(out, p.offset, p.h, p.J);
}

inline QuboProblem read_qubo(std::istream& in) {
  const auto file = detail::read_coefficients(in);
  QuboProblem q(static_cast<int>(file.diagonal.size()));
  q.linear = file.diagonal;
  q.offset = file.offset;
  for (const auto& [i, j, v] : file.pairs) q.quadratic.at(i, j) += v;
  return q;
}

inline IsingProblem read_ising(std::istream& in) {
  const auto file = detail::read_coefficients(in);
  IsingProblem p(static_cast<int>(file.diagonal.size()));
  p.h = file.diagonal;
  p.offset = file.offset;
  for (const auto& [i, j, v] : file.pairs) p.J.at(i, j) += v;
  return p;
}

// ---------------------------------------------------------------------------
// CSV outputs

inline std::string bitstring(StateCode state, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int i = 0; i < n; ++i) {
    if ((state >> (n - 1 - i)) & 1U) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

/// `# key value` metadata lines followed by `state,energy,occurrences` rows.
/// The state column is the bitstring of x = (s + 1) / 2.
inline void write_sample_set(std::ostream& out, const SampleSet& set, bool include_timing = true) {
  const auto& m = set.metadata;
  out << "# backend " << m.backend << '\n';
  out << "# n " << set.n << '\n';
  if (m.backend == "sa") {
    out << "# shots " << m.config.shots << '\n';
    out << "# sweeps " << m.config.sweeps << '\n';
    out << "# beta_initial " << format_double(m.config.beta_initial) << '\n';
    out << "# beta_final " << format_double(m.config.beta_final) << '\n';
    out << "# auto_scale " << (m.config.auto_scale ? 1 : 0) << '\n';
    out << "# programming_thermalization_us " << m.config.programming_thermalization_us << '\n';
    out << "# readout_thermalization_us " << m.config.readout_thermalization_us << '\n';
    out << "# seed " << m.config.seed << '\n';
  }
  if (include_timing) out << "# wall_seconds " << format_double(m.wall_seconds) << '\n';
  out << "state,energy,occurrences\n";
  for (const auto& r : set.records) {
    out << bitstring(r.state, set.n) << ',' << format_double(r.energy) << ',' << r.occurrences
        << '\n';
  }
}

/// `rank,item_id,predicted_rating[,hits]`, rank starting at 1.
inline void write_recommendations(std::ostream& out, const std::vector<Recommendation>& recs,
                                  bool header, bool with_hits) {
  if (header) out << "rank,item_id,predicted_rating" << (with_hits ? ",hits" : "") << '\n';
  std::size_t rank = 1;
  for (const auto& r : recs) {
    out << rank++ << ',' << r.item_id << ',' << format_double(r.predicted_rating);
    if (with_hits) out << ',' << r.hits;
    out << '\n';
  }
}

/// Per-user rows followed by one `mean` row per (shots, k_s).
inline void write_overlap_header(std::ostream& out) { out << "user_id,shots,k_s,overlap_rate\n"; }

inline void write_overlap_rows(std::ostream& out, const std::vector<OverlapReport>& reports,
                               int shots) {
  for (const auto& r : reports) {
    out << r.user_id << ',' << shots << ',' << r.k_s << ',' << format_double(r.overlap_rate)
        << '\n';
  }
  for (const auto& [k, mean] : mean_overlap(reports)) {
    out << "mean," << shots << ',' << k << ',' << format_double(mean) << '\n';
  }
}

inline void write_bench_records(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << "n_data,n_items,item_bits,backend,user_id,reps,median_seconds\n";
  for (const auto& r : records) {
    out << r.n_data << ',' << r.n_items << ',' << r.item_bits << ',' << r.backend << ','
        << r.user_id << ',' << r.reps << ',' << format_double(r.seconds) << '\n';
  }
}

inline void write_fit(std::ostream& out, const std::vector<ComplexityFit>& fits) {
  out << "family,scale,shift,max_abs_residual\n";
  for (const auto& f : fits) {
    double worst = 0.0;
    for (const double r : f.residuals) worst = std::max(worst, std::abs(r));
    out << family_name(f.family) << ',' << format_double(f.scale) << ','
        << format_double(f.shift) << ',' << format_double(worst) << '\n';
  }
}

inline void write_extrapolation(std::ostream& out, const std::vector<ExtrapolationRow>& rows) {
  out << "item_bits,n_items,direct_seconds,annealer_seconds,note\n";
  for (const auto& r : rows) {
    out << r.item_bits << ',' << format_double(r.n_items) << ','
        << format_double(r.direct_seconds) << ',' << format_double(r.annealer_seconds) << ','
        << r.note << '\n';
  }
}

}  // namespace fmqa
