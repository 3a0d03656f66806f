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

// fmqa command line: synthetic data, training, suggestion backends, overlap
// experiments, timing benchmarks and QUBO export.

#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#if __has_include("CLI11.hpp")
#include "CLI11.hpp"
#else
#include <CLI/CLI.hpp>
#endif
#include "fmqa/fmqa.hpp"
#include "manifest.hpp"

namespace {

using namespace fmqa;

struct AnnealFlags {
  AnnealConfig config;

  void add_to(CLI::App* app) {
    app->add_option("--sweeps", config.sweeps, "Metropolis sweeps per shot")->capture_default_str();
    app->add_option("--beta-initial", config.beta_initial, "Initial inverse temperature")
        ->capture_default_str();
    app->add_option("--beta-final", config.beta_final, "Final inverse temperature")
        ->capture_default_str();
    app->add_flag("!--no-auto-scale", config.auto_scale,
                  "Do not divide betas by the largest coefficient");
    app->add_option("--programming-thermalization", config.programming_thermalization_us,
                    "Recorded only (microseconds)")
        ->capture_default_str();
    app->add_option("--readout-thermalization", config.readout_thermalization_us,
                    "Recorded only (microseconds)")
        ->capture_default_str();
    app->add_option("--anneal-seed", config.seed, "Sampler seed")->capture_default_str();
    app->add_option("--threads", config.threads, "Sampler worker threads")->capture_default_str();
  }

  nlohmann::json to_json() const {
    return {{"shots", config.shots},
            {"sweeps", config.sweeps},
            {"beta_initial", config.beta_initial},
            {"beta_final", config.beta_final},
            {"auto_scale", config.auto_scale},
            {"programming_thermalization_us", config.programming_thermalization_us},
            {"readout_thermalization_us", config.readout_thermalization_us},
            {"seed", config.seed},
            {"threads", config.threads}};
  }
};

std::shared_ptr<const Sampler> make_sampler(const std::string& backend, const AnnealConfig& config) {
  if (backend == "sa") return std::make_shared<SimulatedAnnealingSampler>(config);
  if (backend == "exhaustive") return std::make_shared<ExhaustiveSampler>();
  throw Error("unknown sampler backend '" + backend + "' (expected sa or exhaustive)");
}

std::uint32_t lookup_user(const ModelBundle& bundle, RawId user) {
  const auto idx = bundle.codebooks.users.find(user);
  require(idx.has_value(), "user " + std::to_string(user) + " is not in the model");
  return *idx;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write '" + path + "'");
  return out;
}

nlohmann::json train_config_json(const TrainConfig& c) {
  return {{"k", c.latent_dim},         {"learning_rate", c.learning_rate}, {"epochs", c.epochs},
          {"l2_w0", c.l2_w0},          {"l2_w", c.l2_w},                   {"l2_V", c.l2_V},
          {"init_std", c.init_std},    {"seed", c.seed}};
}

void add_train_flags(CLI::App* app, TrainConfig& config) {
  app->add_option("--k", config.latent_dim, "Latent dimension")->capture_default_str();
  app->add_option("--epochs", config.epochs, "SGD epochs")->capture_default_str();
  app->add_option("--lr", config.learning_rate, "Learning rate")->capture_default_str();
  app->add_option("--l2-w0", config.l2_w0, "L2 on the bias")->capture_default_str();
  app->add_option("--l2-w", config.l2_w, "L2 on linear weights")->capture_default_str();
  app->add_option("--l2-v", config.l2_V, "L2 on latent factors")->capture_default_str();
  app->add_option("--init-std", config.init_std, "Stddev of latent initialization")
      ->capture_default_str();
  app->add_option("--seed", config.seed, "Training seed")->capture_default_str();
}

IngestOptions ingest_options(std::size_t max_rows, double fraction, std::uint64_t seed) {
  IngestOptions opts;
  require(max_rows == 0 || fraction >= 1.0, "--max-rows and --fraction are exclusive");
  if (max_rows > 0) {
    opts.mode = SelectionMode::kFirstRows;
    opts.max_rows = max_rows;
  } else if (fraction < 1.0) {
    opts.mode = SelectionMode::kSampledFraction;
    opts.fraction = fraction;
    opts.seed = seed;
  }
  return opts;
}

std::string mode_name(const IngestOptions& o) {
  switch (o.mode) {
    case SelectionMode::kFirstRows: return "first_rows";
    case SelectionMode::kSampledFraction: return "sampled_fraction";
    default: return "all";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factorization-machine recommender with QUBO/Ising suggestion backends"};
  app.require_subcommand(1);

  // synth ------------------------------------------------------------------
  SynthConfig synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic MovieLens-format ratings CSV");
  synth_cmd->add_option("--users", synth.users)->capture_default_str();
  synth_cmd->add_option("--items", synth.items)->capture_default_str();
  synth_cmd->add_option("--ratings", synth.ratings)->capture_default_str();
  synth_cmd->add_option("--popularity-exponent", synth.popularity_exponent)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "Output CSV")->required();

  // train ------------------------------------------------------------------
  TrainConfig train_cfg;
  std::string train_ratings, train_out;
  std::size_t train_max_rows = 0;
  double train_fraction = 1.0;
  std::uint64_t sample_seed = 42;
  double holdout = 0.0;
  std::uint64_t split_seed = 42;
  auto* train_cmd = app.add_subcommand("train", "Train an FM on a ratings CSV");
  train_cmd->add_option("--ratings", train_ratings, "userId,movieId,rating,timestamp CSV")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--max-rows", train_max_rows, "Use the first N rows");
  train_cmd->add_option("--fraction", train_fraction, "Use a seeded uniform sample of this fraction");
  train_cmd->add_option("--sample-seed", sample_seed)->capture_default_str();
  train_cmd->add_option("--holdout", holdout, "Holdout fraction for test RMSE (0 = none)")
      ->capture_default_str();
  train_cmd->add_option("--split-seed", split_seed)->capture_default_str();
  add_train_flags(train_cmd, train_cfg);
  train_cmd->add_option("--out", train_out, "Model file")->required();

  // recommend --------------------------------------------------------------
  std::string rec_model, rec_backend = "direct", rec_out, rec_samples_out;
  RawId rec_user = 0;
  std::size_t rec_top = 10;
  AnnealFlags rec_anneal;
  auto* rec_cmd = app.add_subcommand("recommend", "Top items for one user");
  rec_cmd->add_option("--model", rec_model)->required()->check(CLI::ExistingFile);
  rec_cmd->add_option("--user", rec_user, "Raw user id")->required();
  rec_cmd->add_option("--backend", rec_backend, "direct | sa | exhaustive")
      ->capture_default_str()
      ->check(CLI::IsMember({"direct", "sa", "exhaustive"}));
  rec_cmd->add_option("--top", rec_top)->capture_default_str();
  rec_cmd->add_option("--shots", rec_anneal.config.shots)->capture_default_str();
  rec_anneal.add_to(rec_cmd);
  rec_cmd->add_option("--out", rec_out, "Also write a CSV (with header and hits) here");
  rec_cmd->add_option("--samples-out", rec_samples_out, "Write the raw sample set here");

  // evaluate-overlap -------------------------------------------------------
  std::string ov_model, ov_backend = "sa", ov_out;
  std::size_t ov_users = 100;
  std::uint64_t ov_user_seed = 42;
  std::vector<int> ov_shots{4000};
  std::vector<std::size_t> ov_ks{10, 30, 50};
  AnnealFlags ov_anneal;
  auto* ov_cmd = app.add_subcommand("evaluate-overlap", "Overlap of sampler vs direct top-k lists");
  ov_cmd->add_option("--model", ov_model)->required()->check(CLI::ExistingFile);
  ov_cmd->add_option("--users", ov_users, "Number of seeded random users")->capture_default_str();
  ov_cmd->add_option("--user-seed", ov_user_seed)->capture_default_str();
  ov_cmd->add_option("--shots", ov_shots, "Comma separated shot counts")->delimiter(',');
  ov_cmd->add_option("--ks", ov_ks, "Comma separated k_s values")->delimiter(',');
  ov_cmd->add_option("--backend", ov_backend, "sa | exhaustive")
      ->capture_default_str()
      ->check(CLI::IsMember({"sa", "exhaustive"}));
  ov_anneal.add_to(ov_cmd);
  ov_cmd->add_option("--out", ov_out, "Output CSV")->required();

  // benchmark --------------------------------------------------------------
  std::string bench_ratings, bench_out, bench_fit_out, bench_extrap_out;
  std::vector<std::size_t> bench_rows, bench_items;
  std::vector<std::string> bench_backends{"direct", "sa"};
  std::size_t bench_users = 5, bench_top = 10, bench_synth_users = 1000;
  int bench_reps = 5;
  std::uint64_t bench_seed = 42;
  TrainConfig bench_train;
  AnnealFlags bench_anneal;
  bench_anneal.config.sweeps = 100;
  auto* bench_cmd = app.add_subcommand("benchmark", "Suggestion time vs number of items");
  bench_cmd->add_option("--ratings", bench_ratings, "Train one model per --rows prefix")
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--rows", bench_rows, "Comma separated row counts")->delimiter(',');
  bench_cmd->add_option("--synthetic-items", bench_items,
                        "Comma separated item counts for random models")
      ->delimiter(',');
  bench_cmd->add_option("--synthetic-users", bench_synth_users)->capture_default_str();
  bench_cmd->add_option("--backends", bench_backends, "direct,sa,exhaustive")->delimiter(',');
  bench_cmd->add_option("--users", bench_users, "Users per instance")->capture_default_str();
  bench_cmd->add_option("--reps", bench_reps, "Repetitions per user")->capture_default_str();
  bench_cmd->add_option("--top", bench_top)->capture_default_str();
  bench_cmd->add_option("--bench-seed", bench_seed)->capture_default_str();
  bench_cmd->add_option("--shots", bench_anneal.config.shots)->capture_default_str();
  bench_anneal.add_to(bench_cmd);
  add_train_flags(bench_cmd, bench_train);
  bench_cmd->add_option("--out", bench_out, "Timing CSV")->required();
  bench_cmd->add_option("--fit-out", bench_fit_out, "Complexity fit CSV");
  bench_cmd->add_option("--extrapolate-out", bench_extrap_out, "Extrapolation table CSV");

  // export-qubo ------------------------------------------------------------
  std::string ex_model, ex_out;
  RawId ex_user = 0;
  bool ex_ising = false;
  auto* ex_cmd = app.add_subcommand("export-qubo", "Write the fixed-user QUBO (or Ising) problem");
  ex_cmd->add_option("--model", ex_model)->required()->check(CLI::ExistingFile);
  ex_cmd->add_option("--user", ex_user, "Raw user id")->required();
  ex_cmd->add_flag("--ising", ex_ising, "Write the Ising form instead");
  ex_cmd->add_option("--out", ex_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      cli::RunManifest manifest("synth", argc, argv);
      const auto rows = synthesize_ratings(synth);
      {
        auto out = open_output(synth_out);
        write_ratings_csv(out, rows);
      }
      manifest.config() = {{"users", synth.users},
                           {"items", synth.items},
                           {"ratings", synth.ratings},
                           {"popularity_exponent", synth.popularity_exponent},
                           {"seed", synth.seed}};
      manifest.add_output("ratings", synth_out);
      manifest.write(synth_out);
      std::cout << "wrote " << rows.size() << " ratings to " << synth_out << '\n';
    } else if (*train_cmd) {
      cli::RunManifest manifest("train", argc, argv);
      const auto opts = ingest_options(train_max_rows, train_fraction, sample_seed);
      const auto data = ingest_file(train_ratings, opts);
      const auto outcome = train_model(data, train_cfg, holdout, split_seed);
      save_model(outcome.bundle, train_out);
      manifest.add_input("ratings", train_ratings);
      auto& cfg = manifest.config();
      cfg = train_config_json(train_cfg);
      cfg["selection"] = mode_name(opts);
      cfg["max_rows"] = train_max_rows;
      cfg["fraction"] = train_fraction;
      cfg["sample_seed"] = sample_seed;
      cfg["holdout"] = holdout;
      cfg["split_seed"] = split_seed;
      cfg["n_data"] = data.size();
      cfg["n_users"] = data.num_users();
      cfg["n_items"] = data.num_items();
      cfg["n_u"] = outcome.bundle.model.n_u;
      cfg["n_m"] = outcome.bundle.model.n_m;
      cfg["rmse_history"] = outcome.rmse_history;
      if (outcome.test_rmse) cfg["test_rmse"] = *outcome.test_rmse;
      manifest.add_output("model", train_out);
      manifest.write(train_out);
      std::cout << "N_data=" << data.size() << " N_u=" << data.num_users()
                << " N_m=" << data.num_items() << " n_u=" << outcome.bundle.model.n_u
                << " n_m=" << outcome.bundle.model.n_m << '\n';
      std::cout << "train RMSE " << outcome.rmse_history.front() << " -> "
                << outcome.rmse_history.back() << '\n';
      if (outcome.test_rmse) std::cout << "test RMSE " << *outcome.test_rmse << '\n';
    } else if (*rec_cmd) {
      const auto bundle = load_model(rec_model);
      const auto user = lookup_user(bundle, rec_user);
      const auto user_bits = bundle.codebooks.users.encode(user);
      std::vector<Recommendation> recs;
      std::optional<SampleSet> samples;
      if (rec_backend == "direct") {
        recs = solve_direct(bundle.model, user_bits, bundle.codebooks.items, rec_top);
      } else {
        const auto sampler = make_sampler(rec_backend, rec_anneal.config);
        const auto ising = qubo_to_ising(reduce_for_user(bundle.model, user_bits));
        samples = sampler->sample(ising);
        recs = samples_to_recommendations(*samples, bundle.codebooks.items, bundle.model,
                                          user_bits, rec_top);
      }
      write_recommendations(std::cout, recs, false, false);
      if (!rec_out.empty() || !rec_samples_out.empty()) {
        cli::RunManifest manifest("recommend", argc, argv);
        manifest.add_input("model", rec_model);
        manifest.config() = {{"user", rec_user}, {"backend", rec_backend}, {"top", rec_top}};
        if (rec_backend == "sa") manifest.config()["anneal"] = rec_anneal.to_json();
        if (!rec_samples_out.empty()) {
          require(samples.has_value(), "--samples-out needs a sampler backend");
          {
            auto out = open_output(rec_samples_out);
            write_sample_set(out, *samples);
          }
          manifest.add_output("samples", rec_samples_out);
        }
        if (!rec_out.empty()) {
          {
            auto out = open_output(rec_out);
            write_recommendations(out, recs, true, true);
          }
          manifest.add_output("recommendations", rec_out);
        }
        manifest.write(rec_out.empty() ? rec_samples_out : rec_out);
      }
    } else if (*ov_cmd) {
      cli::RunManifest manifest("evaluate-overlap", argc, argv);
      const auto bundle = load_model(ov_model);
      const auto users = select_users(bundle.codebooks.users, ov_users, ov_user_seed);
      {
        auto out = open_output(ov_out);
        write_overlap_header(out);
        for (const int shots : ov_shots) {
          auto config = ov_anneal.config;
          config.shots = shots;
          const auto sampler = make_sampler(ov_backend, config);
          const auto reports =
              run_overlap_experiment(bundle.model, bundle.codebooks, users, ov_ks, *sampler);
          write_overlap_rows(out, reports, ov_backend == "sa" ? shots : 0);
          for (const auto& [k, mean] : mean_overlap(reports)) {
            std::cout << "shots=" << shots << " k_s=" << k << " mean overlap " << mean << "%\n";
          }
        }
      }
      manifest.add_input("model", ov_model);
      manifest.config() = {{"users", ov_users},   {"user_seed", ov_user_seed}, {"shots", ov_shots},
                           {"ks", ov_ks},         {"backend", ov_backend},
                           {"anneal", ov_anneal.to_json()}};
      manifest.add_output("overlap", ov_out);
      manifest.write(ov_out);
    } else if (*bench_cmd) {
      cli::RunManifest manifest("benchmark", argc, argv);
      std::vector<BenchInstance> instances;
      if (!bench_ratings.empty()) {
        require(!bench_rows.empty(), "--ratings needs --rows");
        manifest.add_input("ratings", bench_ratings);
        for (const auto rows : bench_rows) {
          IngestOptions opts;
          opts.mode = SelectionMode::kFirstRows;
          opts.max_rows = rows;
          const auto data = ingest_file(bench_ratings, opts);
          auto outcome = train_model(data, bench_train);
          instances.push_back({std::move(outcome.bundle.model), std::move(outcome.bundle.codebooks),
                               data.size()});
          std::cerr << "trained on " << data.size() << " rows, N_m=" << data.num_items() << '\n';
        }
      }
      for (const auto n_items : bench_items) {
        instances.push_back(
            synthetic_instance(n_items, bench_synth_users, bench_train.latent_dim, bench_seed + n_items));
      }
      require(!instances.empty(), "benchmark needs --ratings/--rows or --synthetic-items");
      std::vector<BenchBackend> backends;
      for (const auto& name : bench_backends) {
        if (name == "direct") {
          backends.push_back(direct_backend(bench_top));
        } else {
          backends.push_back(sampler_backend(make_sampler(name, bench_anneal.config), bench_top));
        }
      }
      const auto records = benchmark(instances, backends, bench_users, bench_reps, bench_seed);
      {
        auto out = open_output(bench_out);
        write_bench_records(out, records);
      }
      manifest.add_output("timings", bench_out);
      std::vector<ComplexityFit> fits;
      const auto try_fit = [&](const std::string& backend, ComplexityFamily family) {
        const auto points = complexity_points(records, backend);
        if (points.size() >= 3) fits.push_back(fit_complexity(points, family));
      };
      try_fit("direct", ComplexityFamily::kDirect);
      for (const auto& name : bench_backends) {
        if (name != "direct") try_fit(name, ComplexityFamily::kAnnealer);
      }
      if (!bench_fit_out.empty()) {
        require(!fits.empty(), "--fit-out needs at least 3 distinct item counts");
        {
          auto out = open_output(bench_fit_out);
          write_fit(out, fits);
        }
        manifest.add_output("fit", bench_fit_out);
      }
      if (!bench_extrap_out.empty()) {
        require(fits.size() >= 2 && fits[0].family == ComplexityFamily::kDirect,
                "--extrapolate-out needs fits for direct and one sampler backend");
        std::vector<int> sizes{4, 8, 12, 16, 24, 32, 48, 64, 96, 128, 145, 163};
        {
          auto out = open_output(bench_extrap_out);
          write_extrapolation(out, extrapolate(fits[0], fits[1], sizes));
        }
        manifest.add_output("extrapolation", bench_extrap_out);
      }
      manifest.config() = {{"rows", bench_rows},       {"synthetic_items", bench_items},
                           {"backends", bench_backends}, {"users", bench_users},
                           {"reps", bench_reps},       {"top", bench_top},
                           {"seed", bench_seed},       {"train", train_config_json(bench_train)},
                           {"anneal", bench_anneal.to_json()}};
      manifest.write(bench_out);
      for (const auto& f : fits) {
        std::cout << family_name(f.family) << " fit: seconds = " << f.scale << " * feature + "
                  << f.shift << '\n';
      }
    } else if (*ex_cmd) {
      cli::RunManifest manifest("export-qubo", argc, argv);
      const auto bundle = load_model(ex_model);
      const auto user_bits = bundle.codebooks.users.encode(lookup_user(bundle, ex_user));
      const auto qubo = reduce_for_user(bundle.model, user_bits);
      {
        auto out = open_output(ex_out);
        if (ex_ising) {
          write_ising(out, qubo_to_ising(qubo));
        } else {
          write_qubo(out, qubo);
        }
      }
      manifest.add_input("model", ex_model);
      manifest.config() = {{"user", ex_user}, {"ising", ex_ising}};
      manifest.add_output(ex_ising ? "ising" : "qubo", ex_out);
      manifest.write(ex_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "fmqa: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
