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

#include "maas/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "maas/errors.hpp"
#include "support/model_grad_check.hpp"
#include "support/oracles.hpp"
#include "support/random_graphs.hpp"

namespace maas {
namespace {

using testing::audio_node;
using testing::random_frames;
using testing::video_node;

GraphBatch batch_of(const AssignationGraph& g, bool supervise_audio = true) {
  return make_batch(std::span<const AssignationGraph>(&g, 1), supervise_audio);
}

ModelConfig small_config(int input_dim = 6, int hidden = 5) {
  ModelConfig c;
  c.input_dim = input_dim;
  c.hidden = hidden;
  c.num_layers = 2;
  return c;
}

ad::Tensor<double> reduced(const MaasModel<double>& model, ad::ParamStore<double>& store,
                           const AssignationGraph& g) {
  ad::Tape<double> tape;
  return tape.value(model.reduce_dims(tape, store, batch_of(g)));
}

TEST(ReduceDimsTest, ZeroInputsGiveModalityBiases) {
  MaasModel<double> model(small_config());
  ad::ParamStore<double> store;
  model.init_params(store, 1);
  const std::vector<float> zero(6, 0.0f);
  const auto g = build_lan(audio_node(0, zero),
                           std::vector<FeatureNode>{video_node(0, 0, 0, zero), video_node(0, 1, 0, zero)});
  const auto out = reduced(model, store, g);
  ASSERT_EQ(out.shape, (std::vector<std::size_t>{3, 5}));
  for (std::size_t c = 0; c < 5; ++c) {
    EXPECT_EQ(out.at(0, c), store.value("reduce.audio.b").data[c]);
    EXPECT_EQ(out.at(1, c), store.value("reduce.video.b").data[c]);
    EXPECT_EQ(out.at(2, c), store.value("reduce.video.b").data[c]);
  }
}

TEST(ReduceDimsTest, IdenticalVideoFeaturesGiveIdenticalRows) {
  MaasModel<double> model(small_config());
  ad::ParamStore<double> store;
  model.init_params(store, 2);
  std::mt19937_64 rng(3);
  const auto f = testing::gaussian_feature(6, rng);
  const auto g = build_lan(audio_node(0, testing::gaussian_feature(6, rng)),
                           std::vector<FeatureNode>{video_node(0, 0, 0, f), video_node(0, 1, 0, f)});
  const auto out = reduced(model, store, g);
  for (std::size_t c = 0; c < 5; ++c) EXPECT_EQ(out.at(1, c), out.at(2, c));
}

TEST(ReduceDimsTest, ModalityTagSelectsTheReducer) {
  MaasModel<double> model(small_config());
  ad::ParamStore<double> store;
  model.init_params(store, 4);
  std::mt19937_64 rng(5);
  const auto f = testing::gaussian_feature(6, rng);
  const auto as_audio = build_lan(audio_node(0, f), std::vector<FeatureNode>{});
  auto video = video_node(0, 0, 0, f);
  AssignationGraph as_video;
  as_video.nodes = {video};
  as_video.edges = {{0, 0}};
  const auto a = reduced(model, store, as_audio);
  const auto v = reduced(model, store, as_video);
  EXPECT_NE(a.data, v.data);
}

TEST(ReduceDimsTest, WrongFeatureDimensionThrows) {
  MaasModel<double> model(small_config());
  ad::ParamStore<double> store;
  model.init_params(store, 1);
  const auto g = build_lan(audio_node(0, std::vector<float>(4, 1.0f)), std::vector<FeatureNode>{});
  EXPECT_THROW(reduced(model, store, g), ShapeError);
}

// edge_conv on a hand-set layer: unit running stats, gamma 1, beta 0 and a
// linear map that copies the first (centre) block.
struct EdgeConvFixture {
  static constexpr std::size_t h = 3;
  MaasModel<double> model{[] {
    ModelConfig c = small_config(6, 3);
    c.streams = Streams::StaticOnly;
    return c;
  }()};
  ad::ParamStore<double> store;

  EdgeConvFixture() {
    model.init_params(store, 9);
    auto& w = store.value("static.layer1.lin.W");
    std::fill(w.data.begin(), w.data.end(), 0.0);
    for (std::size_t i = 0; i < h; ++i) w.at(i, i) = 1.0;
    std::fill(store.value("static.layer1.lin.b").data.begin(), store.value("static.layer1.lin.b").data.end(), 0.0);
  }

  ad::Tensor<double> run(const ad::Tensor<double>& x, std::vector<int> src, std::vector<int> dst) {
    ad::Tape<double> tape;
    return tape.value(model.edge_conv(tape, store, "static.layer1", tape.constant(x), src, dst, false));
  }
};

TEST(EdgeConvTest, SelfLoopOnlyIsTheReluPathOfTheNode) {
  EdgeConvFixture fx;
  ad::Tensor<double> x({1, 3}, std::vector<double>{0.5, -1.0, 2.0});
  const auto y = fx.run(x, {0}, {0});
  const double s = 1.0 / std::sqrt(1.0 + 1e-5);
  EXPECT_NEAR(y.at(0, 0), 0.5 * s, 1e-12);
  EXPECT_NEAR(y.at(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(y.at(0, 2), 2.0 * s, 1e-12);
}

TEST(EdgeConvTest, EqualFeaturesMakeCrossMessagesEqualSelfMessages) {
  EdgeConvFixture fx;
  // a generic linear map, so the difference block matters
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  for (auto& w : fx.store.value("static.layer1.lin.W").data) w = n01(rng);
  ad::Tensor<double> x({2, 3}, std::vector<double>{0.3, 0.1, -0.2, 0.3, 0.1, -0.2});
  const auto self_only = fx.run(x, {0, 1}, {0, 1});
  const auto with_cross = fx.run(x, {0, 1, 1, 0}, {0, 1, 0, 1});
  EXPECT_EQ(self_only, with_cross);
}

TEST(EdgeConvTest, DuplicateIncomingEdgeChangesNothing) {
  EdgeConvFixture fx;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  for (auto& w : fx.store.value("static.layer1.lin.W").data) w = n01(rng);
  ad::Tensor<double> x({3, 3});
  for (auto& v : x.data) v = n01(rng);
  const auto once = fx.run(x, {0, 1, 2, 1}, {0, 1, 2, 0});
  const auto twice = fx.run(x, {0, 1, 2, 1, 1}, {0, 1, 2, 0, 0});
  EXPECT_EQ(once, twice);
}

TEST(EdgeConvTest, NodeWithoutIncomingEdgeIsAGraphError) {
  EdgeConvFixture fx;
  ad::Tensor<double> x({2, 3}, 1.0);
  EXPECT_THROW(fx.run(x, {0}, {0}), GraphError);
}

TEST(ForwardTest, LogitsArePermutationEquivariant) {
  std::mt19937_64 rng(11);
  for (const auto streams : {Streams::StaticOnly, Streams::DynamicOnly, Streams::Both}) {
    ModelConfig c = small_config(4, 6);
    c.streams = streams;
    MaasModel<double> model(c);
    ad::ParamStore<double> store;
    model.init_params(store, 12);
    for (int trial = 0; trial < 10; ++trial) {
      const int n = static_cast<int>(rng() % 4);
      const int t = 1 + static_cast<int>(rng() % 4);
      const auto g = build_tan(random_frames(n, t, 4, rng));
      const auto perm = testing::random_permutation(g.nodes.size(), rng);
      const auto pg = testing::permute_graph(g, perm);
      const auto a = model.predict(store, batch_of(g));
      const auto b = model.predict(store, batch_of(pg));
      for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        for (std::size_t k = 0; k < 2; ++k) {
          EXPECT_NEAR(a.at(i, k), b.at(static_cast<std::size_t>(perm[i]), k), 1e-9);
        }
      }
    }
  }
}

TEST(ForwardTest, StaticOnlyAudioLogitSeesTheVideoNode) {
  ModelConfig c = small_config(4, 6);
  c.streams = Streams::StaticOnly;
  MaasModel<double> model(c);
  ad::ParamStore<double> store;
  model.init_params(store, 13);
  std::mt19937_64 rng(14);
  const auto audio = audio_node(0, testing::gaussian_feature(4, rng));
  auto video = video_node(0, 0, 0, testing::gaussian_feature(4, rng));
  const auto before = model.predict(store, batch_of(build_lan(audio, std::vector<FeatureNode>{video})));
  video.feature = testing::gaussian_feature(4, rng);
  const auto after = model.predict(store, batch_of(build_lan(audio, std::vector<FeatureNode>{video})));
  EXPECT_NE(before.at(0, 0), after.at(0, 0));
  EXPECT_NE(before.at(0, 1), after.at(0, 1));
}

TEST(ForwardTest, SingleFrameTanMatchesLan) {
  MaasModel<double> model(small_config(4, 6));
  ad::ParamStore<double> store;
  model.init_params(store, 15);
  std::mt19937_64 rng(16);
  const auto frames = random_frames(3, 1, 4, rng);
  const auto tan = build_tan(frames);
  const auto lan = build_lan(frames[0].audio, frames[0].videos);
  EXPECT_EQ(model.predict(store, batch_of(tan)), model.predict(store, batch_of(lan)));
}

TEST(ForwardTest, OutputHasTwoLogitsPerNode) {
  std::mt19937_64 rng(17);
  MaasModel<double> model(small_config(4, 6));
  ad::ParamStore<double> store;
  model.init_params(store, 18);
  for (int n = 0; n <= 4; ++n) {
    for (int t = 1; t <= 5; t += 2) {
      const auto g = build_tan(random_frames(n, t, 4, rng));
      const auto out = model.predict(store, batch_of(g));
      EXPECT_EQ(out.shape, (std::vector<std::size_t>{g.nodes.size(), 2}));
    }
  }
}

TEST(ForwardTest, ZeroedDynamicStreamReducesToStaticOnly) {
  ModelConfig both = small_config(4, 6);
  ModelConfig stat = both;
  stat.streams = Streams::StaticOnly;
  MaasModel<double> both_model(both);
  MaasModel<double> static_model(stat);
  ad::ParamStore<double> store;
  both_model.init_params(store, 19);
  for (auto& [path, e] : store.entries()) {
    if (path.rfind("dynamic.", 0) == 0 && path.find(".lin.") != std::string::npos) {
      std::fill(e.value.data.begin(), e.value.data.end(), 0.0);
    }
  }
  std::mt19937_64 rng(20);
  const auto g = build_tan(random_frames(3, 4, 4, rng));
  EXPECT_EQ(both_model.predict(store, batch_of(g)), static_model.predict(store, batch_of(g)));
}

TEST(ForwardTest, DynamicEdgesAreRecomputedPerLayer) {
  ModelConfig c = small_config(8, 16);
  c.num_layers = 4;
  MaasModel<double> model(c);
  ad::ParamStore<double> store;
  model.init_params(store, 21);
  std::mt19937_64 rng(22);
  const auto g = build_tan(random_frames(3, 6, 8, rng));
  ForwardTrace trace;
  model.predict(store, batch_of(g), &trace);
  ASSERT_EQ(trace.dynamic_edges.size(), 4u);
  bool any_change = false;
  for (std::size_t l = 1; l < 4; ++l) any_change |= trace.dynamic_edges[l] != trace.dynamic_edges[0];
  EXPECT_TRUE(any_change);
  // k neighbours plus the self-loop per node
  EXPECT_EQ(trace.dynamic_edges[0].size(), g.nodes.size() * 4);
}

TEST(NodeLabelsTest, AudioTargetIsMaxOfVisibleLabels) {
  const auto g = build_lan(audio_node(0), std::vector<FeatureNode>{video_node(0, 0, 0), video_node(0, 1, 0),
                                                                   video_node(0, 2, 1)});
  const auto t = node_labels(g, true);
  EXPECT_EQ(t.labels, (std::vector<int>{1, 0, 0, 1}));
  EXPECT_EQ(t.weights, (std::vector<float>{1, 1, 1, 1}));
}

TEST(NodeLabelsTest, AllSilentAndEmptyFramesGiveZero) {
  const auto silent = build_lan(audio_node(0), std::vector<FeatureNode>{video_node(0, 0, 0), video_node(0, 1, 0)});
  EXPECT_EQ(node_labels(silent, true).labels[0], 0);
  auto lonely = audio_node(0);
  lonely.label = 1;
  const auto empty = build_lan(lonely, std::vector<FeatureNode>{});
  EXPECT_EQ(node_labels(empty, true).labels[0], 0);
  EXPECT_EQ(node_labels(empty, true, AudioTarget::NodeLabel).labels[0], 1);
}

TEST(NodeLabelsTest, AudioTargetsFollowTheirOwnFrameInATemporalGraph) {
  std::vector<Frame> frames(2);
  frames[0].audio = audio_node(0);
  frames[0].videos = {video_node(0, 0, 1)};
  frames[1].audio = audio_node(1);
  frames[1].videos = {video_node(1, 0, 0)};
  const auto t = node_labels(build_tan(frames), true);
  EXPECT_EQ(t.labels, (std::vector<int>{1, 1, 0, 0}));
}

TEST(NodeLabelsTest, VideoOnlySupervisionMasksAudio) {
  const auto g = build_lan(audio_node(0), std::vector<FeatureNode>{video_node(0, 0, 1)});
  const auto t = node_labels(g, false);
  EXPECT_EQ(t.labels, (std::vector<int>{1, 1}));
  EXPECT_EQ(t.weights, (std::vector<float>{0, 1}));
}

TEST(MakeBatchTest, SelfLoopsOnlyDropsEveryOtherEdge) {
  const auto g = build_tan(testing::constant_frames(2, 3));
  const auto b = make_batch(std::span<const AssignationGraph>(&g, 1), true, true);
  EXPECT_EQ(b.src.size(), g.nodes.size());
  for (std::size_t i = 0; i < b.src.size(); ++i) EXPECT_EQ(b.src[i], b.dst[i]);
}

TEST(MakeBatchTest, OffsetsPartitionTheNodes) {
  const auto a = build_tan(testing::constant_frames(1, 2));
  const auto b = build_tan(testing::constant_frames(3, 1));
  const std::vector<AssignationGraph> graphs{a, b};
  const auto batch = make_batch(graphs, true);
  EXPECT_EQ(batch.offsets, (std::vector<std::size_t>{0, 4, 8}));
  EXPECT_EQ(batch.src.size(), a.edges.size() + b.edges.size());
  for (std::size_t i = a.edges.size(); i < batch.src.size(); ++i) EXPECT_GE(batch.src[i], 4);
}

TEST(GradientCheckTest, DoubleGradientsMatchFiniteDifferences) {
  for (std::uint64_t seed : {1u, 2u}) {
    for (const auto& [path, c] : testing::model_gradient_errors<double>(seed)) {
      EXPECT_TRUE(c.passes(1e-6, 1e-8)) << path << " seed " << seed << " rel " << c.relative_error;
    }
  }
}

TEST(GradientCheckTest, FloatGradientsMatchFiniteDifferences) {
  for (const auto& [path, c] : testing::model_gradient_errors<float>(3)) {
    EXPECT_TRUE(c.passes(1e-4, 1e-6)) << path << " rel " << c.relative_error << " |a| " << c.analytic_norm;
  }
}

TEST(ModelConfigTest, JsonRoundTripAndValidation) {
  ModelConfig c;
  c.streams = Streams::DynamicOnly;
  c.fusion = Fusion::Concat;
  c.supervise_audio = false;
  EXPECT_EQ(model_config_from_json(model_config_to_json(c)), c);
  c.k_dynamic = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(parse_streams("sideways"), ConfigError);
}

}  // namespace
}  // namespace maas
