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

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>

#include "fmqa/dataset.hpp"
#include "fmqa/io.hpp"
#include "fmqa/pipeline.hpp"
#include "fmqa/synth.hpp"
#include "test_support.hpp"

namespace fmqa {
namespace {

TEST(Ingest, ThreeRowFixture) {
  std::stringstream csv("userId,movieId,rating,timestamp\n7,50,4.0,1\n3,50,3.5,2\n7,20,5.0,3\n");
  const auto data = ingest(csv);
  ASSERT_EQ(data.size(), 3U);
  EXPECT_EQ(data.user_ids, (std::vector<RawId>{3, 7}));
  EXPECT_EQ(data.item_ids, (std::vector<RawId>{20, 50}));
  EXPECT_EQ(data.ratings[0], (Rating{1, 1, 4.0}));
  EXPECT_EQ(data.ratings[1], (Rating{0, 1, 3.5}));
  EXPECT_EQ(data.ratings[2], (Rating{1, 0, 5.0}));
}

TEST(Ingest, MalformedRowNamesTheLine) {
  std::stringstream csv("userId,movieId,rating,timestamp\n1,2,3.0,4\n1,x,3.0,4\n");
  try {
    (void)ingest(csv, {}, "ratings.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("ratings.csv:3"), std::string::npos) << e.what();
  }
  std::stringstream short_row("1,2\n");
  EXPECT_THROW(ingest(short_row), Error);
}

TEST(Ingest, EmptyResultThrows) {
  std::stringstream header_only("userId,movieId,rating,timestamp\n");
  EXPECT_THROW(ingest(header_only), Error);
}

TEST(Ingest, DuplicatePairsAreKept) {
  std::stringstream csv("1,2,3.0,0\n1,2,4.0,0\n");
  const auto data = ingest(csv);
  EXPECT_EQ(data.size(), 2U);
  EXPECT_EQ(data.num_items(), 1U);
}

TEST(Ingest, FirstRowsAndSampledFraction) {
  std::stringstream csv;
  write_ratings_csv(csv, testing::synthetic_rows());
  const std::string text = csv.str();

  IngestOptions first;
  first.mode = SelectionMode::kFirstRows;
  first.max_rows = 5000;
  std::stringstream in1(text);
  const auto a = ingest(in1, first);
  EXPECT_EQ(a.size(), 5000U);
  EXPECT_EQ(ceil_log2(a.num_items()), 12);

  IngestOptions frac;
  frac.mode = SelectionMode::kSampledFraction;
  frac.fraction = 0.01;
  frac.seed = 9;
  std::stringstream in2(text), in3(text);
  const auto b = ingest(in2, frac);
  const auto c = ingest(in3, frac);
  EXPECT_EQ(b.size(), 1500U);
  EXPECT_EQ(b.ratings, c.ratings);
  EXPECT_EQ(b.item_ids, c.item_ids);
}

TEST(Split, SizesDisjointAndDeterministic) {
  std::vector<RawRating> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({i, 100 + i, 1.0 + i * 0.25});
  const auto data = index_ratings(rows);
  const auto [train, test] = split(data, 0.2, 5);
  EXPECT_EQ(train.size(), 8U);
  EXPECT_EQ(test.size(), 2U);
  const auto [train2, test2] = split(data, 0.2, 5);
  EXPECT_EQ(train.ratings, train2.ratings);
  EXPECT_EQ(test.ratings, test2.ratings);
  std::vector<double> all;
  for (const auto& r : train.ratings) all.push_back(r.value);
  for (const auto& r : test.ratings) all.push_back(r.value);
  std::sort(all.begin(), all.end());
  std::vector<double> original;
  for (const auto& r : data.ratings) original.push_back(r.value);
  EXPECT_EQ(all, original);
  EXPECT_THROW(split(data, 0.0, 1), Error);
  EXPECT_THROW(split(data, 1.0, 1), Error);
}

TEST(ItemMeans, UnratedItemsAreZero) {
  const auto data = index_ratings({{1, 10, 4.0}, {2, 10, 2.0}, {1, 20, 5.0}});
  auto [train, test] = std::pair{data.with_ratings({data.ratings[0], data.ratings[1]}), RatingsDataset{}};
  EXPECT_EQ(item_mean_ratings(train), (std::vector<double>{3.0, 0.0}));
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

TEST(ModelFile, RoundTripIsBitExact) {
  const auto& bundle = testing::small_trained().bundle;
  const auto path = std::filesystem::temp_directory_path() / "fmqa_model_roundtrip.fmq";
  save_model(bundle, path.string());
  const auto back = load_model(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(back, bundle);
  EXPECT_TRUE(same_bits(back.model.w0, bundle.model.w0));
  for (std::size_t i = 0; i < bundle.model.V.size(); ++i) {
    ASSERT_TRUE(same_bits(back.model.V[i], bundle.model.V[i]));
  }
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto x = testing::random_bits(rng, bundle.model.d());
    EXPECT_TRUE(same_bits(predict(back.model, x), predict(bundle.model, x)));
  }
}

TEST(ModelFile, ExtremeValuesSurvive) {
  ModelBundle b;
  b.codebooks = {UserCodebook({1, 2}), build_item_codebook({5, 6, 7}, {1, 2, 3})};
  b.model = FMModel(1, 2, 2);
  b.model.w0 = 0.1;
  b.model.w = {-0.0, 5e-324, 1.7976931348623157e308};
  b.model.V = {1.0 / 3.0, -2.0 / 7.0, 1e-300, 3.14159, 2.718281828459045, -1e10};
  const auto back = model_from_json(nlohmann::json::parse(model_to_json(b).dump()));
  for (std::size_t i = 0; i < b.model.w.size(); ++i) EXPECT_TRUE(same_bits(back.model.w[i], b.model.w[i]));
  EXPECT_EQ(back.model.V, b.model.V);
}

TEST(ModelFile, RejectsBadDocuments) {
  EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"format":"other"})")), Error);
  auto j = model_to_json(testing::small_trained().bundle);
  j["format_version"] = 99;
  EXPECT_THROW(model_from_json(j), Error);
  j = model_to_json(testing::small_trained().bundle);
  j["w"].erase(0);
  EXPECT_THROW(model_from_json(j), Error);
  EXPECT_THROW(load_model("/nonexistent/model.fmq"), Error);
}

TEST(TrainModel, HoldoutReportsTestRmse) {
  TrainConfig cfg;
  cfg.latent_dim = 8;
  cfg.epochs = 3;
  const auto outcome = train_model(testing::first_rows(3000), cfg, 0.1, 3);
  EXPECT_EQ(outcome.n_train + outcome.n_test, 3000U);
  EXPECT_EQ(outcome.n_test, 300U);
  ASSERT_TRUE(outcome.test_rmse.has_value());
  EXPECT_TRUE(std::isfinite(*outcome.test_rmse));
}

TEST(Synth, ShapeAndDeterminism) {
  SynthConfig c;
  c.users = 50;
  c.items = 400;
  c.ratings = 3000;
  const auto a = synthesize_ratings(c);
  EXPECT_EQ(a.size(), 3000U);
  const auto b = synthesize_ratings(c);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].user, b[i].user);
    EXPECT_EQ(a[i].item, b[i].item);
    EXPECT_EQ(a[i].value, b[i].value);
    EXPECT_GE(a[i].value, 0.5);
    EXPECT_LE(a[i].value, 5.0);
    EXPECT_EQ(std::fmod(a[i].value * 2, 1.0), 0.0);
    if (i > 0) {
      EXPECT_TRUE(a[i - 1].user < a[i].user ||
                  (a[i - 1].user == a[i].user && a[i - 1].item < a[i].item));
    }
  }
}

}  // namespace
}  // namespace fmqa
