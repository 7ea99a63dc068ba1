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
#include <vector>

#include "maas/graph.hpp"
#include "maas/synth.hpp"

namespace maas {

/// How a scene is cut into graphs.
struct WindowConfig {
  int num_lans = 13;         // frames per temporal window; 1 gives local graphs
  int max_video_nodes = 4;   // faces per graph
  bool self_loops_only = false;

  void validate() const;
  bool operator==(const WindowConfig&) const = default;
};

struct WindowGraph {
  int scene_id = 0;
  int window_index = 0;
  int group_index = 0;
  AssignationGraph graph;
  std::vector<int> visible_faces;  // per node: faces visible in the full scene frame
};

/// Tiles a scene into non-overlapping windows of num_lans frames and builds
/// one graph per speaker group. The grouping is decided once per window from
/// every identity seen in it, so temporal edges stay inside a group.
/// TrainSample draws a single group per window using `seed`; InferSplit
/// yields disjoint groups that cover every face.
std::vector<WindowGraph> make_windows(const SceneSample& scene, const WindowConfig& config,
                                      GroupingMode mode, std::uint64_t seed = 0);

/// splitmix64 step, used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace maas
