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

// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <boost/math/distributions/students_t.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "fmqa/fmqa.hpp"
#include "test_support.hpp"

#ifndef FMQA_CLI_PATH
#error "FMQA_CLI_PATH must point at the fmqa executable"
#endif

namespace fs = std::filesystem;
using namespace fmqa;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

struct TTest {
  double mean = 0.0;
  double t = 0.0;
  double critical = 0.0;
};

// One-sided paired t statistic of the differences against zero.
TTest paired_t(const std::vector<double>& diffs, double alpha) {
  const double n = static_cast<double>(diffs.size());
  TTest r;
  r.mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) / n;
  double ss = 0.0;
  for (const double d : diffs) ss += (d - r.mean) * (d - r.mean);
  const double se = std::sqrt(ss / (n - 1) / n);
  if (se == 0.0) {
    r.t = r.mean > 0 ? INFINITY : (r.mean < 0 ? -INFINITY : 0.0);
  } else {
    r.t = r.mean / se;
  }
  boost::math::students_t dist(n - 1);
  r.critical = boost::math::quantile(dist, 1.0 - alpha);
  return r;
}

const auto& trained() { return testing::small_trained().bundle; }

Outcome prediction_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int d = 1 + static_cast<int>(rng() % 64);
    const int n_u = static_cast<int>(rng() % d);
    const int k = 1 + static_cast<int>(rng() % 16);
    const auto m = testing::random_fm(rng, n_u, d - n_u, k);
    const auto x = testing::random_bits(rng, d);
    worst = std::max(worst, std::abs(predict(m, x) - predict_naive(m, x)));
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-9 && secs < 10.0, "max |diff| " + fmt(worst) + ", " + fmt(secs) + " s"};
}

Outcome reduction_identity() {
  const auto& b = trained();
  const int n_m = b.model.n_m;
  const auto users = select_users(b.codebooks.users, 20, 7);
  double worst = 0.0;
  for (const auto u : users) {
    const auto user_bits = b.codebooks.users.encode(u);
    const auto q = reduce_for_user(b.model, user_bits);
    for (StateCode c = 0; c < (StateCode{1} << n_m); ++c) {
      const auto item_bits = state_to_bits(c, n_m);
      const double e = qubo_energy(q, item_bits) + q.offset;
      worst = std::max(worst, std::abs(e + predict_naive(b.model, concat(user_bits, item_bits))));
    }
  }
  return {worst <= 1e-9, "n_m " + std::to_string(n_m) + ", 20 users, max |diff| " + fmt(worst)};
}

Outcome ising_identity() {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const auto q = testing::random_qubo(rng, n);
    const auto p = qubo_to_ising(q);
    for (StateCode c = 0; c < (StateCode{1} << n); ++c) {
      const double eq = qubo_energy(q, state_to_bits(c, n)) + q.offset;
      const double ei = ising_energy(p, state_to_spins(c, n)) + p.offset;
      worst = std::max(worst, std::abs(eq - ei));
    }
  }
  return {worst <= 1e-9, "100 problems, max |diff| " + fmt(worst)};
}

Outcome argmax_agreement() {
  const auto& b = trained();
  const auto users = select_users(b.codebooks.users, 20, 11);
  int matches = 0;
  for (const auto u : users) {
    const auto user_bits = b.codebooks.users.encode(u);
    const auto direct = solve_direct(b.model, user_bits, b.codebooks.items, 1);
    const auto ground = solve_exhaustive(qubo_to_ising(reduce_for_user(b.model, user_bits)));
    const auto& best = ground.records.front();
    const auto item = b.codebooks.items.decode_value(best.state);
    if (item == direct.front().item || std::abs(-best.energy - direct.front().predicted_rating) <= 1e-9) {
      ++matches;
    }
  }
  return {matches == 20, std::to_string(matches) + "/20 users agree"};
}

Outcome sampler_quality() {
  constexpr double kFrozenBaseline = 100.0;  // first calibrated run, 4000 shots
  const auto& b = trained();
  const auto users = select_users(b.codebooks.users, 20, 42);
  AnnealConfig many;
  many.shots = 4000;
  AnnealConfig few;
  few.shots = 100;
  const auto r4000 = run_overlap_experiment(b.model, b.codebooks, users, {10}, SimulatedAnnealingSampler{many});
  const auto r100 = run_overlap_experiment(b.model, b.codebooks, users, {10}, SimulatedAnnealingSampler{few});
  std::vector<double> vs_few, vs_base;
  for (std::size_t i = 0; i < users.size(); ++i) {
    vs_few.push_back(r4000[i].overlap_rate - r100[i].overlap_rate);
    vs_base.push_back(r4000[i].overlap_rate - kFrozenBaseline);
  }
  // Fails only if the data show the 4000-shot overlap is significantly lower.
  const auto a = paired_t(vs_few, 0.05);
  const auto c = paired_t(vs_base, 0.05);
  const bool pass = a.t >= -a.critical && c.t >= -c.critical;
  return {pass, "mean overlap 4000 shots " + fmt(mean_overlap(r4000).at(10)) + "%, 100 shots " +
                    fmt(mean_overlap(r100).at(10)) + "%, baseline " + fmt(kFrozenBaseline) +
                    "%, t(vs 100) " + fmt(a.t) + ", t(vs baseline) " + fmt(c.t) +
                    ", critical -" + fmt(a.critical)};
}

Outcome shots_monotonicity() {
  const auto& b = trained();
  const auto users = select_users(b.codebooks.users, 20, 5);
  std::vector<double> diffs;
  double sum_many = 0.0, sum_few = 0.0;
  for (std::size_t t = 0; t < users.size(); ++t) {
    const auto user_bits = b.codebooks.users.encode(users[t]);
    const auto ising = qubo_to_ising(reduce_for_user(b.model, user_bits));
    const auto direct = solve_direct(b.model, user_bits, b.codebooks.items, 100);
    AnnealConfig cfg;
    cfg.seed = 1000 + t;
    cfg.shots = 2500;
    const double many = static_cast<double>(topk_capture(direct, sample_sa(ising, cfg), b.codebooks.items));
    cfg.shots = 100;
    const double few = static_cast<double>(topk_capture(direct, sample_sa(ising, cfg), b.codebooks.items));
    diffs.push_back(many - few);
    sum_many += many;
    sum_few += few;
  }
  const auto r = paired_t(diffs, 0.05);
  return {r.t > r.critical, "mean top-100 capture 2500 shots " + fmt(sum_many / 20) + ", 100 shots " +
                                fmt(sum_few / 20) + ", t " + fmt(r.t) + " > " + fmt(r.critical)};
}

Outcome surjective_encoding() {
  std::mt19937_64 rng(17);
  int checked = 0;
  for (int n = 1; n <= 16; ++n) {
    const std::size_t lo = n == 1 ? 1 : (std::size_t{1} << (n - 1)) + 1;
    const std::size_t hi = std::size_t{1} << n;
    std::vector<std::size_t> sizes{lo, hi, (lo + hi) / 2};
    for (int i = 0; i < 3; ++i) sizes.push_back(lo + rng() % (hi - lo + 1));
    for (const auto n_items : sizes) {
      std::vector<RawId> ids(n_items);
      std::vector<double> means(n_items);
      for (std::size_t j = 0; j < n_items; ++j) {
        ids[j] = static_cast<RawId>(3 * j + 1);
        means[j] = static_cast<double>(rng() % 9) / 2;
      }
      const auto cb = build_item_codebook(ids, means);
      if (cb.n_bits() != n) return {false, "N_m " + std::to_string(n_items) + " got width " + std::to_string(cb.n_bits())};
      std::vector<int> mult(n_items, 0);
      for (StateCode c = 0; c < (StateCode{1} << n); ++c) ++mult[cb.decode_value(c)];
      std::map<int, std::size_t> hist;
      for (const int m : mult) ++hist[m];
      std::map<int, std::size_t> want;
      const std::size_t twice = hi - n_items;
      if (n_items - twice > 0) want[1] = n_items - twice;
      if (twice > 0) want[2] = twice;
      if (hist != want) return {false, "histogram mismatch at N_m " + std::to_string(n_items)};
      ++checked;
    }
  }
  return {true, std::to_string(checked) + " codebooks with n_m in [1, 16]"};
}

Outcome scaling_sanity() {
  std::vector<BenchInstance> instances;
  const std::vector<std::size_t> sizes{2048, 8192, 16384};
  for (std::size_t i = 0; i < sizes.size(); ++i) instances.push_back(synthetic_instance(sizes[i], 50, 32, 100 + i));
  AnnealConfig cfg;
  cfg.shots = 20;
  cfg.sweeps = 100;
  const auto records =
      benchmark(instances, {direct_backend(10), sampler_backend(std::make_shared<SimulatedAnnealingSampler>(cfg), 10)},
                3, 5, 42);
  const auto direct = complexity_points(records, "direct");
  const auto sa = complexity_points(records, "sa");
  const bool increasing = direct[0].seconds < direct[1].seconds && direct[1].seconds < direct[2].seconds;
  const double direct_factor = direct[2].seconds / direct[0].seconds;
  const double sa_factor = sa[2].seconds / sa[0].seconds;

  double worst = 0.0;
  for (const auto family : {ComplexityFamily::kDirect, ComplexityFamily::kAnnealer}) {
    const double a = 2.5e-9, b = 0.125;
    std::vector<ComplexityPoint> pts;
    for (const double n : {512.0, 2048.0, 8192.0, 16384.0, 65536.0}) pts.push_back({n, a * family_feature(family, n) + b});
    const auto fit = fit_complexity(pts, family);
    worst = std::max({worst, std::abs(fit.scale - a) / a, std::abs(fit.shift - b) / b});
  }
  std::string detail = "direct s " + fmt(direct[0].seconds) + " < " + fmt(direct[1].seconds) + " < " +
                       fmt(direct[2].seconds) + ", factor direct " + fmt(direct_factor) + " vs sa " +
                       fmt(sa_factor) + ", fit rel err " + fmt(worst);
  return {increasing && sa_factor < direct_factor && worst <= 1e-6, detail};
}

std::string read_without_timing(const fs::path& p) {
  std::ifstream in(p);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.find("wall_seconds") == std::string::npos) out += line + '\n';
  }
  return out;
}

Outcome determinism() {
  const std::string cli = FMQA_CLI_PATH;
  const auto root = fs::temp_directory_path() / ("fmqa_accept_" + std::to_string(::getpid()));
  std::vector<fs::path> dirs{root / "a", root / "b"};
  const std::vector<std::string> outputs{"ratings.csv", "recommend.csv", "samples.csv", "overlap.csv",
                                         "recommend_stdout.csv"};
  for (const auto& dir : dirs) {
    fs::create_directories(dir);
    const std::string d = dir.string() + "/";
    const std::vector<std::string> steps{
        cli + " synth --users 300 --ratings 6000 --items 5000 --seed 8 --out " + d + "ratings.csv > /dev/null",
        cli + " train --ratings " + d + "ratings.csv --max-rows 5000 --k 16 --epochs 5 --out " + d +
            "model.json > /dev/null",
        cli + " recommend --model " + d + "model.json --user 1 --backend sa --shots 500 --out " + d +
            "recommend.csv --samples-out " + d + "samples.csv > " + d + "recommend_stdout.csv",
        cli + " evaluate-overlap --model " + d + "model.json --users 4 --shots 100,400 --ks 10,30 --out " + d +
            "overlap.csv > /dev/null"};
    for (const auto& s : steps) {
      if (std::system((s + " 2> /dev/null").c_str()) != 0) {
        fs::remove_all(root);
        return {false, "command failed: " + s};
      }
    }
  }
  std::string detail;
  bool same = true;
  for (const auto& name : outputs) {
    const auto a = read_without_timing(dirs[0] / name);
    const auto b = read_without_timing(dirs[1] / name);
    if (a.empty() || a != b) {
      same = false;
      detail += name + " differs; ";
    }
  }
  fs::remove_all(root);
  return {same, same ? std::to_string(outputs.size()) + " CSV outputs byte-identical" : detail};
}

Outcome training_sanity() {
  const auto outcome = train_model(testing::first_rows(100000), TrainConfig{}, 0.1, 42);
  const auto& h = outcome.rmse_history;
  const bool rmse_ok = h.back() < 0.8 * h.front();

  std::mt19937_64 rng(99);
  TrainConfig cfg;
  cfg.l2_w0 = 0.01;
  cfg.l2_w = 0.02;
  cfg.l2_V = 0.03;
  const double step = 1e-5;
  double worst = 0.0;
  auto check = [&](double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };
  for (int t = 0; t < 50; ++t) {
    const int d = 2 + static_cast<int>(rng() % 7);
    const int n_u = static_cast<int>(rng() % d);
    const int k = 1 + static_cast<int>(rng() % 4);
    auto m = testing::random_fm(rng, n_u, d - n_u, k, 0.5);
    const auto x = testing::random_bits(rng, d);
    const double y = 1.0 + static_cast<double>(rng() % 9) / 2;
    const auto g = example_gradient(m, x, y, cfg);
    auto numeric = [&](double& param) {
      const double saved = param;
      param = saved + step;
      const double up = example_loss(m, x, y, cfg);
      param = saved - step;
      const double down = example_loss(m, x, y, cfg);
      param = saved;
      return (up - down) / (2 * step);
    };
    check(g.w0, numeric(m.w0));
    for (int i = 0; i < d; ++i) check(g.w[i], numeric(m.w[i]));
    for (std::size_t i = 0; i < m.V.size(); ++i) check(g.V[i], numeric(m.V[i]));
  }
  return {rmse_ok && worst <= 1e-4, "train RMSE " + fmt(h.front()) + " -> " + fmt(h.back()) + " (n_train " +
                                        std::to_string(outcome.n_train) + "), gradient rel err " + fmt(worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"prediction equivalence", prediction_equivalence},
      {"reduction identity", reduction_identity},
      {"qubo/ising identity", ising_identity},
      {"oracle argmax agreement", argmax_agreement},
      {"sampler quality", sampler_quality},
      {"shots monotonicity", shots_monotonicity},
      {"surjective encoding", surjective_encoding},
      {"scaling sanity", scaling_sanity},
      {"determinism", determinism},
      {"training sanity", training_sanity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
              << "): " << o.detail << " [" << fmt(seconds_since(start)) << " s]" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
