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

#include "maas/graph.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "maas/errors.hpp"

namespace maas {

const char* to_string(Modality m) { return m == Modality::Audio ? "audio" : "video"; }

std::size_t AssignationGraph::num_self_loops() const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [](const Edge& e) { return e.src == e.dst; }));
}

namespace {

void validate_frame(const FeatureNode& audio, std::span<const FeatureNode> videos) {
  if (audio.modality != Modality::Audio) {
    throw InvalidFrame("frame audio slot holds a video node");
  }
  if (audio.speaker_id) throw InvalidFrame("audio node carries a speaker id");
  std::set<int> seen;
  for (const auto& v : videos) {
    if (v.modality != Modality::Video) {
      throw InvalidFrame("frame has more than one audio node");
    }
    if (v.timestamp != audio.timestamp) {
      throw InvalidFrame("mixed timestamps in frame: " + std::to_string(audio.timestamp) +
                         " vs " + std::to_string(v.timestamp));
    }
    if (!v.speaker_id) throw InvalidFrame("video node without speaker id");
    if (!seen.insert(*v.speaker_id).second) {
      throw InvalidFrame("duplicate speaker id " + std::to_string(*v.speaker_id) + " in frame");
    }
  }
}

// Appends one frame's nodes and local edges; returns the audio node id.
int append_local(AssignationGraph& g, const FeatureNode& audio,
                 std::span<const FeatureNode> videos) {
  const int audio_id = static_cast<int>(g.nodes.size());
  g.nodes.push_back(audio);
  g.nodes.back().node_id = audio_id;
  g.edges.push_back({audio_id, audio_id});
  for (const auto& v : videos) {
    const int vid = static_cast<int>(g.nodes.size());
    g.nodes.push_back(v);
    g.nodes.back().node_id = vid;
    g.edges.push_back({audio_id, vid});
    g.edges.push_back({vid, audio_id});
    g.edges.push_back({vid, vid});
  }
  return audio_id;
}

void check_feature_dims(const AssignationGraph& g) {
  const auto dim = g.feature_dim();
  for (const auto& n : g.nodes) {
    if (n.feature.size() != dim) throw InvalidFrame("feature dimension differs across nodes");
  }
}

}  // namespace

AssignationGraph build_lan(const FeatureNode& audio, std::span<const FeatureNode> videos) {
  validate_frame(audio, videos);
  AssignationGraph g;
  g.kind = GraphKind::LAN;
  append_local(g, audio, videos);
  check_feature_dims(g);
  return g;
}

AssignationGraph build_tan(std::span<const Frame> frames) {
  if (frames.empty()) throw InvalidWindow("temporal window has no frames");
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].audio.timestamp <= frames[i - 1].audio.timestamp) {
      throw InvalidWindow("frame timestamps are not strictly increasing at position " +
                          std::to_string(i));
    }
  }
  AssignationGraph g;
  g.kind = GraphKind::TAN;
  int prev_audio = -1;
  std::unordered_map<int, int> prev_video;  // speaker id -> node id at t-1
  int prev_t = 0;
  for (const auto& frame : frames) {
    validate_frame(frame.audio, frame.videos);
    const int audio_id = append_local(g, frame.audio, frame.videos);
    const bool adjacent = prev_audio >= 0 && frame.audio.timestamp == prev_t + 1;
    if (adjacent) {
      g.edges.push_back({prev_audio, audio_id});
      g.edges.push_back({audio_id, prev_audio});
    }
    std::unordered_map<int, int> current;
    for (std::size_t k = 0; k < frame.videos.size(); ++k) {
      const int vid = audio_id + 1 + static_cast<int>(k);
      const int sid = *frame.videos[k].speaker_id;
      current[sid] = vid;
      if (!adjacent) continue;
      if (auto it = prev_video.find(sid); it != prev_video.end()) {
        g.edges.push_back({it->second, vid});
        g.edges.push_back({vid, it->second});
      }
    }
    prev_audio = audio_id;
    prev_video = std::move(current);
    prev_t = frame.audio.timestamp;
  }
  check_feature_dims(g);
  return g;
}

template <typename T>
std::vector<Edge> knn_edges(std::span<const T> features, std::size_t rows, std::size_t cols,
                            int k) {
  if (k < 1) throw GraphError("knn requires k >= 1");
  if (features.size() != rows * cols) throw ShapeError("knn feature buffer has wrong size");
  std::vector<Edge> edges;
  if (rows <= 1) return edges;
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), rows - 1);
  edges.reserve(rows * keep);
  std::vector<std::pair<double, int>> dist;
  dist.reserve(rows - 1);
  for (std::size_t i = 0; i < rows; ++i) {
    dist.clear();
    const T* xi = features.data() + i * cols;
    for (std::size_t j = 0; j < rows; ++j) {
      if (j == i) continue;
      const T* xj = features.data() + j * cols;
      double d = 0.0;
      for (std::size_t c = 0; c < cols; ++c) {
        const double diff = static_cast<double>(xi[c]) - static_cast<double>(xj[c]);
        d += diff * diff;
      }
      dist.emplace_back(d, static_cast<int>(j));
    }
    // pair ordering breaks distance ties by the smaller index
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(keep), dist.end());
    for (std::size_t r = 0; r < keep; ++r) {
      edges.push_back({dist[r].second, static_cast<int>(i)});
    }
  }
  return edges;
}

template std::vector<Edge> knn_edges<float>(std::span<const float>, std::size_t, std::size_t,
                                            int);
template std::vector<Edge> knn_edges<double>(std::span<const double>, std::size_t, std::size_t,
                                             int);

std::vector<std::vector<int>> group_identities(std::vector<int> speaker_ids,
                                               const std::vector<int>& active_ids,
                                               const GroupingPolicy& policy) {
  if (policy.max_video_nodes < 1) throw ConfigError("max_video_nodes must be >= 1");
  std::sort(speaker_ids.begin(), speaker_ids.end());
  speaker_ids.erase(std::unique(speaker_ids.begin(), speaker_ids.end()), speaker_ids.end());
  const auto cap = static_cast<std::size_t>(policy.max_video_nodes);
  if (speaker_ids.empty()) return {{}};

  if (policy.mode == GroupingMode::InferSplit) {
    std::vector<std::vector<int>> groups;
    for (std::size_t i = 0; i < speaker_ids.size(); i += cap) {
      const auto end = std::min(speaker_ids.size(), i + cap);
      groups.emplace_back(speaker_ids.begin() + static_cast<std::ptrdiff_t>(i),
                          speaker_ids.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return groups;
  }

  if (speaker_ids.size() <= cap) return {speaker_ids};

  std::mt19937_64 rng(policy.rng_seed);
  std::vector<int> active;
  std::vector<int> silent;
  for (int id : speaker_ids) {
    if (std::find(active_ids.begin(), active_ids.end(), id) != active_ids.end()) {
      active.push_back(id);
    } else {
      silent.push_back(id);
    }
  }
  std::vector<int> group;
  if (active.size() <= cap) {
    group = active;
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
    group.push_back(active[pick(rng)]);
  }
  const std::size_t need = std::min(cap - group.size(), silent.size());
  std::vector<int> drawn;
  std::sample(silent.begin(), silent.end(), std::back_inserter(drawn),
              static_cast<std::ptrdiff_t>(need), rng);
  group.insert(group.end(), drawn.begin(), drawn.end());
  std::sort(group.begin(), group.end());
  return {group};
}

std::vector<std::vector<FeatureNode>> group_speakers(std::span<const FeatureNode> videos,
                                                     const GroupingPolicy& policy) {
  std::vector<int> ids;
  std::vector<int> active;
  for (const auto& v : videos) {
    if (v.modality != Modality::Video || !v.speaker_id) {
      throw InvalidFrame("group_speakers expects video nodes with identities");
    }
    ids.push_back(*v.speaker_id);
    if (v.label == 1) active.push_back(*v.speaker_id);
  }
  std::vector<std::vector<FeatureNode>> out;
  for (const auto& group : group_identities(ids, active, policy)) {
    auto& nodes = out.emplace_back();
    for (int id : group) {
      auto it = std::find_if(videos.begin(), videos.end(),
                             [id](const FeatureNode& v) { return *v.speaker_id == id; });
      nodes.push_back(*it);
    }
  }
  return out;
}

void write_dot(std::ostream& out, const AssignationGraph& graph,
               std::span<const Edge> dynamic_edges, const std::string& name) {
  out << "digraph \"" << name << "\" {\n";
  out << "  // kind=" << (graph.kind == GraphKind::LAN ? "LAN" : "TAN") << "\n";
  for (const auto& n : graph.nodes) {
    const std::string speaker = n.speaker_id ? std::to_string(*n.speaker_id) : "-";
    out << "  n" << n.node_id << " [label=\"" << to_string(n.modality) << ':' << speaker << ':'
        << n.timestamp << ':' << n.label << "\", shape="
        << (n.modality == Modality::Audio ? "box" : "ellipse") << "];\n";
  }
  for (const auto& e : graph.edges) {
    out << "  n" << e.src << " -> n" << e.dst << " [type=static];\n";
  }
  for (const auto& e : dynamic_edges) {
    out << "  n" << e.src << " -> n" << e.dst << " [type=dynamic, style=dashed];\n";
  }
  out << "}\n";
}

}  // namespace maas
