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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "maas/checkpoint.hpp"
#include "maas/metrics.hpp"
#include "maas/model.hpp"
#include "maas/synth.hpp"
#include "maas/windows.hpp"

namespace maas {

struct TrainConfig {
  double lr = 3e-4;
  int epochs = 4;
  int batch_scenes = 8;
  double offscreen_p = 0.0;
  bool offscreen_audio_label_speech = false;
  WindowConfig window;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainResult {
  ad::ParamStore<float> params;
  std::vector<double> epoch_loss;  // mean batch loss per epoch
  std::vector<double> batch_loss;
  int steps = 0;
};

using ProgressFn = std::function<void(int epoch, int step, double loss)>;

/// Seeded ADAM training over shuffled scene batches. Each batch is a disjoint
/// union of window graphs. Throws NumericsError naming the batch when the
/// loss stops being finite.
TrainResult train(const ModelConfig& model, const TrainConfig& config,
                  const std::vector<SceneSample>& dataset, const ProgressFn& progress = {});

struct EvalResult {
  std::vector<PredictionRecord> records;
  std::vector<AudioRecord> audio;
  MetricsReport report;
};

/// Eval-mode scoring with InferSplit grouping; every face is scored once.
EvalResult evaluate(const ModelConfig& model, ad::ParamStore<float>& params,
                    const WindowConfig& window, const std::vector<SceneSample>& dataset,
                    int batch_scenes = 16);

/// Checkpoint metadata carries the model and window configuration.
std::string checkpoint_metadata(const ModelConfig& model, const WindowConfig& window);
std::pair<ModelConfig, WindowConfig> parse_checkpoint_metadata(const std::string& metadata);

/// Evaluates a checkpoint; ConfigError when its input width does not match
/// the dataset features.
EvalResult evaluate(ad::Checkpoint& checkpoint, const std::vector<SceneSample>& dataset,
                    int batch_scenes = 16);

struct AblationDims {
  std::vector<int> num_lans{13};
  std::vector<int> video_nodes{4};
  std::vector<int> depth{4};
  std::vector<int> width{64};
  std::vector<int> k{3};
  std::vector<Streams> streams{Streams::Both};
};

struct AblationRow {
  int num_lans = 0;
  int video_nodes = 0;
  int depth = 0;
  int width = 0;
  int k = 0;
  Streams streams = Streams::Both;
  std::optional<double> ap;
};

/// Trains and evaluates every point of the cross product of `dims`, with all
/// other settings taken from the base configurations.
std::vector<AblationRow> ablation_grid(const AblationDims& dims, const ModelConfig& base_model,
                                       const TrainConfig& base_train,
                                       const std::vector<SceneSample>& train_set,
                                       const std::vector<SceneSample>& test_set);

std::string ablation_table(const std::vector<AblationRow>& rows);
std::string ablation_json(const std::vector<AblationRow>& rows);

}  // namespace maas
