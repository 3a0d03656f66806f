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

#include <cstdint>
#include <optional>
#include <tuple>

#include "fmqa/dataset.hpp"
#include "fmqa/encoding.hpp"
#include "fmqa/fm.hpp"
#include "fmqa/io.hpp"

namespace fmqa {

struct TrainOutcome {
  ModelBundle bundle;
  std::vector<double> rmse_history;  // training set, index 0 = untrained
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::optional<double> test_rmse;
};

/// Optional holdout split, codebooks, SGD. Codebooks cover every user and item
/// of `data`; item ranking uses training means, so items seen only in the
/// holdout rank last.
inline TrainOutcome train_model(const RatingsDataset& data, const TrainConfig& config,
                                double holdout_fraction = 0.0, std::uint64_t split_seed = 42) {
  require(!data.empty(), "train: dataset is empty");
  RatingsDataset train = data;
  RatingsDataset test;
  if (holdout_fraction > 0.0) {
    std::tie(train, test) = split(data, holdout_fraction, split_seed);
    require(!train.empty(), "train: holdout leaves no training rows");
  }
  TrainOutcome out;
  out.bundle.codebooks = {UserCodebook(data.user_ids),
                          build_item_codebook(data.item_ids, item_mean_ratings(train))};
  auto result = train_sgd(train, out.bundle.codebooks, config);
  out.bundle.model = std::move(result.model);
  out.rmse_history = std::move(result.rmse_history);
  out.n_train = train.size();
  out.n_test = test.size();
  if (!test.empty()) out.test_rmse = rmse(out.bundle.model, test, out.bundle.codebooks);
  return out;
}

}  // namespace fmqa
