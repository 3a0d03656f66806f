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

// Trains a small FM on synthetic ratings and compares the direct top-10 with
// the simulated-annealing suggestion for a few users.

#include <iomanip>
#include <iostream>
#include <sstream>

#include "fmqa/fmqa.hpp"

int main() {
  fmqa::SynthConfig synth;
  synth.users = 200;
  synth.ratings = 30000;
  std::stringstream csv;
  fmqa::write_ratings_csv(csv, fmqa::synthesize_ratings(synth));

  fmqa::IngestOptions ingest;
  ingest.mode = fmqa::SelectionMode::kFirstRows;
  ingest.max_rows = 5000;
  const auto data = fmqa::ingest(csv, ingest);

  fmqa::TrainConfig train;
  train.latent_dim = 32;
  train.epochs = 10;
  const auto outcome = fmqa::train_model(data, train);
  const auto& model = outcome.bundle.model;
  const auto& codebooks = outcome.bundle.codebooks;
  std::cout << "N_m=" << codebooks.items.size() << " n_m=" << model.n_m
            << " train RMSE " << outcome.rmse_history.front() << " -> "
            << outcome.rmse_history.back() << "\n";

  fmqa::AnnealConfig anneal;
  anneal.shots = 4000;
  const fmqa::SimulatedAnnealingSampler sampler(anneal);
  const auto users = fmqa::select_users(codebooks.users, 5, 7);
  const auto reports = fmqa::run_overlap_experiment(model, codebooks, users, {10}, sampler);
  for (const auto& r : reports) {
    std::cout << "user " << r.user_id << ": top-10 overlap " << std::fixed << std::setprecision(1)
              << r.overlap_rate << "%\n";
  }
  return 0;
}
