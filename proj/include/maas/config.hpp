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
#include <optional>
#include <string>
#include <vector>

#include "maas/model.hpp"
#include "maas/synth.hpp"
#include "maas/trainer.hpp"

namespace maas {

/// Artifact locations, relative to the output directory unless absolute.
struct PathsConfig {
  std::string train_data = "train.jsonl";
  std::string test_data = "test.jsonl";
  std::string checkpoint = "model.ckpt";
};

/// Everything one CLI invocation can be configured with. The JSON schema is
/// the tree produced by run_config_to_json() on a default instance; see
/// docs/config.md.
struct RunConfig {
  SynthConfig synth;
  int test_scenes = 200;
  ModelConfig model;
  TrainConfig train;
  int eval_batch_scenes = 16;
  AblationDims ablate;
  PathsConfig paths;
};

std::string run_config_to_json(const RunConfig& config);

/// Defaults, then the JSON file (unknown keys rejected), then `key=value`
/// overrides on dotted paths (values parsed as JSON, else taken as strings),
/// then `seed` applied to synth.seed and train.seed. Throws ConfigError.
RunConfig resolve_run_config(const std::optional<std::string>& config_text,
                             const std::vector<std::string>& overrides,
                             std::optional<std::uint64_t> seed);

/// Held-out generator settings derived from the training ones.
SynthConfig test_synth_config(const RunConfig& config);

}  // namespace maas
