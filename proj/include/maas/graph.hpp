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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace maas {

enum class Modality { Audio, Video };

const char* to_string(Modality m);

/// One audio or video embedding observed at a frame.
///
/// Audio nodes carry no speaker identity; their label is 1 when any visible
/// speaker talks at that frame. Video nodes carry the persistent identity of
/// the face track and are labelled 1 iff that person speaks at the frame.
struct FeatureNode {
  int node_id = 0;
  Modality modality = Modality::Video;
  int timestamp = 0;
  std::optional<int> speaker_id;
  std::vector<float> feature;
  int label = 0;

  bool operator==(const FeatureNode&) const = default;
};

/// Directed edge; messages flow from `src` to `dst`.
struct Edge {
  int src = 0;
  int dst = 0;

  auto operator<=>(const Edge&) const = default;
};

enum class GraphKind { LAN, TAN };

struct AssignationGraph {
  std::vector<FeatureNode> nodes;
  std::vector<Edge> edges;
  GraphKind kind = GraphKind::LAN;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t feature_dim() const { return nodes.empty() ? 0 : nodes.front().feature.size(); }
  std::size_t num_self_loops() const;
  std::size_t num_non_loop_edges() const { return edges.size() - num_self_loops(); }
};

/// A single frame: the shared audio node plus the visible faces.
struct Frame {
  FeatureNode audio;
  std::vector<FeatureNode> videos;
};

/// Local graph for one frame: audio <-> every video node, plus self-loops.
/// Node ids are reassigned: audio is 0, videos follow in input order.
AssignationGraph build_lan(const FeatureNode& audio, std::span<const FeatureNode> videos);

/// Temporal graph over consecutive frames. Each frame contributes its local
/// edges; adjacent audio nodes are linked, and adjacent video nodes are linked
/// only when they share a speaker id. Nodes are laid out frame by frame, audio
/// first.
AssignationGraph build_tan(std::span<const Frame> frames);

/// K nearest neighbours (Euclidean) of every row of a row-major matrix.
/// Emits (neighbour, centre) edges sorted by centre then by rank; ties go to
/// the smaller index. Rows with fewer than k peers connect to all of them.
template <typename T>
std::vector<Edge> knn_edges(std::span<const T> features, std::size_t rows, std::size_t cols,
                            int k);

enum class GroupingMode { TrainSample, InferSplit };

struct GroupingPolicy {
  int max_video_nodes = 4;
  GroupingMode mode = GroupingMode::InferSplit;
  std::uint64_t rng_seed = 0;
};

/// Splits speaker identities into groups of at most `max_video_nodes`.
///
/// InferSplit partitions the ids in ascending order. TrainSample returns one
/// group that keeps the active speakers (at least one of them when they do
/// not all fit) and fills the remaining slots with randomly drawn silent ids.
/// Every returned group is sorted. An empty input yields one empty group.
std::vector<std::vector<int>> group_identities(std::vector<int> speaker_ids,
                                               const std::vector<int>& active_ids,
                                               const GroupingPolicy& policy);

/// Node-level wrapper over group_identities for a single frame.
std::vector<std::vector<FeatureNode>> group_speakers(std::span<const FeatureNode> videos,
                                                     const GroupingPolicy& policy);

/// Graphviz rendering. Node labels read "modality:speaker:t:label"; each edge
/// carries type=static or type=dynamic.
void write_dot(std::ostream& out, const AssignationGraph& graph,
               std::span<const Edge> dynamic_edges = {}, const std::string& name = "assignation");

}  // namespace maas
