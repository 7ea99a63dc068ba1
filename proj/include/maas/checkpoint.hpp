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

#include <string>

#include "maas/param_store.hpp"

namespace maas::ad {

/// Versioned binary container for a parameter store and its optimizer state.
/// See docs/checkpoint_format.md for the byte layout.
inline constexpr char kCheckpointMagic[8] = {'M', 'A', 'A', 'S', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string metadata;  // free-form UTF-8, the model writes its config as JSON
  ParamStore<float> params;
};

std::string encode_checkpoint(const ParamStore<float>& params, const std::string& metadata);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const ParamStore<float>& params,
                     const std::string& metadata);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace maas::ad
