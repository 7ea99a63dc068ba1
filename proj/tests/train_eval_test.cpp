// Copyright 2026 The MAAS Graph Authors
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

#include "maas/trainer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include "json.hpp"
#include "maas/errors.hpp"
#include "maas/metrics.hpp"
#include "support/oracles.hpp"

namespace maas {
namespace {

SynthConfig small_synth(int scenes, std::uint64_t seed = 3) {
  SynthConfig c;
  c.num_scenes = scenes;
  c.feature_dim = 32;
  c.frames_per_scene = 5;
  c.seed = seed;
  c.noise_sigma = 0.05;
  return c;
}

ModelConfig small_model() {
  ModelConfig m;
  m.input_dim = 32;
  m.hidden = 8;
  m.num_layers = 2;
  return m;
}

TrainConfig small_train(int epochs = 1) {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_scenes = 4;
  t.window.num_lans = 5;
  t.seed = 9;
  return t;
}

TEST(AveragePrecisionTest, HandWorkedExamples) {
  std::vector<double> s{0.9, 0.8, 0.7};
  std::vector<int> l{1, 0, 1};
  EXPECT_NEAR(*average_precision(s, l), (1.0 + 2.0 / 3.0) / 2.0, 1e-15);
  std::vector<double> s4{0.9, 0.8, 0.2, 0.1};
  EXPECT_EQ(*average_precision(s4, std::vector<int>{1, 1, 0, 0}), 1.0);
  EXPECT_NEAR(*average_precision(s4, std::vector<int>{0, 0, 1, 1}), (1.0 / 3.0 + 2.0 / 4.0) / 2.0, 1e-15);
}

TEST(AveragePrecisionTest, ScoresEqualToLabelsArePerfect) {
  std::vector<int> l{0, 1, 1, 0, 0, 1};
  std::vector<double> s(l.begin(), l.end());
  EXPECT_EQ(*average_precision(s, l), 1.0);
}

TEST(AveragePrecisionTest, NoPositivesIsUndefined) {
  std::vector<double> s{0.4, 0.3};
  EXPECT_FALSE(average_precision(s, std::vector<int>{0, 0}).has_value());
  EXPECT_FALSE(average_precision(std::vector<double>{}, std::vector<int>{}).has_value());
}

TEST(AveragePrecisionTest, TiesKeepInputOrder) {
  std::vector<double> s{0.5, 0.5};
  EXPECT_EQ(*average_precision(s, std::vector<int>{1, 0}), 1.0);
  EXPECT_EQ(*average_precision(s, std::vector<int>{0, 1}), 0.5);
}

TEST(AveragePrecisionTest, MatchesBruteForceAndIgnoresMonotoneTransforms) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 30;
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 10) / 10.0;  // coarse, so ties happen
      l[i] = static_cast<int>(rng() % 2);
    }
    const auto ap = average_precision(s, l);
    const auto brute = testing::brute_force_ap(s, l);
    ASSERT_EQ(ap.has_value(), brute.has_value());
    if (!ap) continue;
    EXPECT_NEAR(*ap, *brute, 1e-12);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(3.0 * s[i]) - 7.0;
    EXPECT_EQ(*average_precision(t, l), *ap);
  }
}

TEST(MetricsTest, ReportBucketsByVisibleFaces) {
  std::vector<PredictionRecord> r{
      {0, 0, 0, 0.9, 1, 1}, {0, 1, 0, 0.1, 0, 1}, {1, 0, 0, 0.8, 0, 2},
      {1, 0, 1, 0.7, 1, 2}, {2, 0, 0, 0.6, 0, 3}, {2, 0, 1, 0.5, 0, 3},
      {2, 0, 2, 0.4, 0, 3}, {3, 0, 0, 0.3, 1, 5},
  };
  const auto rep = summarize(r);
  EXPECT_EQ(rep.num_records, 8u);
  EXPECT_EQ(rep.num_positives, 3u);
  EXPECT_EQ(*rep.by_num_speakers.at("1"), 1.0);
  EXPECT_EQ(*rep.by_num_speakers.at("2"), 0.5);
  EXPECT_EQ(*rep.by_num_speakers.at("3+"), 0.25);
  const auto json = nlohmann::json::parse(
      report_to_json(summarize(std::vector<PredictionRecord>{{0, 0, 0, 0.5, 0, 1}}), "{}", 1));
  EXPECT_TRUE(json.at("overall_ap").is_null());
  EXPECT_EQ(json.at("overall_ap_defined"), false);
}

TEST(TrainTest, OneSceneOneEpochIsOneStep) {
  auto data = generate(small_synth(1));
  const auto result = train(small_model(), small_train(1), data);
  EXPECT_EQ(result.steps, 1);
  EXPECT_EQ(result.batch_loss.size(), 1u);
  EXPECT_EQ(result.params.step(), 1);
}

TEST(TrainTest, StepCountIsCeilOfScenesOverBatch) {
  auto data = generate(small_synth(10));
  const auto result = train(small_model(), small_train(2), data);
  EXPECT_EQ(result.steps, 2 * 3);
  EXPECT_EQ(result.epoch_loss.size(), 2u);
}

TEST(TrainTest, SameSeedGivesTheSameLossCurve) {
  auto data = generate(small_synth(12));
  auto cfg = small_train(2);
  cfg.offscreen_p = 0.5;
  cfg.window.max_video_nodes = 2;
  const auto a = train(small_model(), cfg, data);
  const auto b = train(small_model(), cfg, data);
  EXPECT_EQ(a.batch_loss, b.batch_loss);
  for (const auto& [path, e] : a.params.entries()) EXPECT_EQ(e.value.data, b.params.value(path).data) << path;
  cfg.seed = 10;
  EXPECT_NE(train(small_model(), cfg, data).batch_loss, a.batch_loss);
}

TEST(TrainTest, InitialLossIsNearLogTwo) {
  SynthConfig s;
  s.num_scenes = 8;
  s.seed = 5;
  s.noise_sigma = 0.1;
  TrainConfig t;
  t.epochs = 1;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    t.seed = seed;
    const auto r = train(ModelConfig{}, t, generate(s));
    EXPECT_NEAR(r.batch_loss.front(), std::log(2.0), 0.1) << "seed " << seed;
  }
}

TEST(TrainTest, EmptyDatasetAndBadConfigAreRejected) {
  EXPECT_THROW(train(small_model(), small_train(), {}), ConfigError);
  auto data = generate(small_synth(2));
  auto cfg = small_train();
  cfg.epochs = 0;
  EXPECT_THROW(train(small_model(), cfg, data), ConfigError);
  cfg = small_train();
  cfg.lr = 0.0;
  EXPECT_THROW(train(small_model(), cfg, data), ConfigError);
  auto wide = small_model();
  wide.input_dim = 64;
  EXPECT_THROW(train(wide, small_train(), data), ConfigError);
}

TEST(TrainTest, NonFiniteLossNamesTheBatch) {
  auto data = generate(small_synth(4));
  data[2].frames[0].frame.audio.feature[0] = std::numeric_limits<float>::quiet_NaN();
  auto cfg = small_train();
  cfg.batch_scenes = 1;
  try {
    train(small_model(), cfg, data);
    FAIL() << "expected NumericsError";
  } catch (const NumericsError& e) {
    EXPECT_NE(std::string(e.what()).find("batch"), std::string::npos) << e.what();
  }
}

TEST(EvaluateTest, EveryFaceIsScoredExactlyOnce) {
  auto synth = small_synth(10);
  synth.speakers_min = 0;
  synth.speakers_max = 5;
  auto data = generate(synth);
  auto cfg = small_train();
  cfg.window.max_video_nodes = 2;
  auto trained = train(small_model(), cfg, data);
  const auto eval = evaluate(small_model(), trained.params, cfg.window, data, 3);
  std::multiset<std::tuple<int, int, int>> seen;
  for (const auto& r : eval.records) {
    seen.insert({r.scene_id, r.timestamp, r.speaker_id});
    EXPECT_TRUE(std::isfinite(r.score));
    EXPECT_GE(r.score, 0.0);
    EXPECT_LE(r.score, 1.0);
  }
  std::multiset<std::tuple<int, int, int>> expected;
  std::size_t audio = 0;
  for (const auto& s : data) {
    for (const auto& f : s.frames) {
      ++audio;
      for (const auto& v : f.frame.videos) expected.insert({s.scene_id, v.timestamp, *v.speaker_id});
    }
  }
  EXPECT_EQ(seen, expected);
  EXPECT_EQ(eval.audio.size(), audio);
}

TEST(EvaluateTest, BatchSizeDoesNotChangeScores) {
  auto data = generate(small_synth(9));
  auto cfg = small_train();
  auto trained = train(small_model(), cfg, data);
  const auto one = evaluate(small_model(), trained.params, cfg.window, data, 1);
  const auto many = evaluate(small_model(), trained.params, cfg.window, data, 7);
  ASSERT_EQ(one.records.size(), many.records.size());
  for (std::size_t i = 0; i < one.records.size(); ++i) {
    EXPECT_EQ(one.records[i].scene_id, many.records[i].scene_id);
    EXPECT_NEAR(one.records[i].score, many.records[i].score, 1e-6);
  }
}

TEST(EvaluateTest, CheckpointMetadataRestoresTheModel) {
  auto data = generate(small_synth(4));
  auto cfg = small_train();
  auto trained = train(small_model(), cfg, data);
  const auto direct = evaluate(small_model(), trained.params, cfg.window, data);
  auto ck = ad::decode_checkpoint(ad::encode_checkpoint(trained.params, checkpoint_metadata(small_model(), cfg.window)));
  const auto restored = evaluate(ck, data);
  ASSERT_EQ(direct.records.size(), restored.records.size());
  for (std::size_t i = 0; i < direct.records.size(); ++i) {
    EXPECT_EQ(direct.records[i].score, restored.records[i].score);
  }
  auto other = small_synth(2);
  other.feature_dim = 48;
  EXPECT_THROW(evaluate(ck, generate(other)), ConfigError);
}

TEST(AblationTest, SinglePointGridIsOneTrainEvaluateRun) {
  const auto train_set = generate(small_synth(6));
  auto test_cfg = small_synth(4);
  test_cfg.first_scene_id = 6;
  const auto test_set = generate(test_cfg);
  AblationDims dims;
  dims.num_lans = {1};
  dims.video_nodes = {4};
  dims.depth = {2};
  dims.width = {8};
  dims.k = {3};
  const auto rows = ablation_grid(dims, small_model(), small_train(), train_set, test_set);
  ASSERT_EQ(rows.size(), 1u);
  auto cfg = small_train();
  cfg.window.num_lans = 1;
  auto trained = train(small_model(), cfg, train_set);
  EXPECT_EQ(rows[0].ap, evaluate(small_model(), trained.params, cfg.window, test_set).report.overall_ap);
  EXPECT_EQ(rows[0].num_lans, 1);
}

TEST(AblationTest, StreamGridHasOneRowPerStream) {
  const auto data = generate(small_synth(4));
  AblationDims dims;
  dims.num_lans = {5};
  dims.depth = {1};
  dims.width = {4};
  dims.streams = {Streams::StaticOnly, Streams::DynamicOnly, Streams::Both};
  const auto rows = ablation_grid(dims, small_model(), small_train(), data, data);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].streams, Streams::StaticOnly);
  EXPECT_EQ(rows[2].streams, Streams::Both);
  const auto table = ablation_table(rows);
  EXPECT_NE(table.find("dynamic"), std::string::npos);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 4);
}

}  // namespace
}  // namespace maas
