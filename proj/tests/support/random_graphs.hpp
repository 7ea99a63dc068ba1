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

// Random frames and graphs for property tests.

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "maas/graph.hpp"

namespace maas::testing {

inline std::vector<float> gaussian_feature(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<float> n01(0.0f, 1.0f);
  std::vector<float> f(dim);
  for (auto& x : f) x = n01(rng);
  return f;
}

/// t_count frames over n persistent identities with Gaussian features and
/// at most one positive face per frame.
inline std::vector<Frame> random_frames(int n, int t_count, std::size_t dim, std::mt19937_64& rng) {
  std::vector<Frame> frames;
  for (int t = 0; t < t_count; ++t) {
    Frame f;
    f.audio.modality = Modality::Audio;
    f.audio.timestamp = t;
    f.audio.feature = gaussian_feature(dim, rng);
    const int talker = n > 0 ? static_cast<int>(rng() % static_cast<unsigned>(n + 1)) - 1 : -1;
    for (int k = 0; k < n; ++k) {
      FeatureNode v;
      v.modality = Modality::Video;
      v.timestamp = t;
      v.speaker_id = k;
      v.label = k == talker ? 1 : 0;
      v.feature = gaussian_feature(dim, rng);
      f.videos.push_back(std::move(v));
    }
    f.audio.label = talker >= 0 ? 1 : 0;
    frames.push_back(std::move(f));
  }
  return frames;
}

/// Relabels nodes so that old node i becomes node perm[i].
inline AssignationGraph permute_graph(const AssignationGraph& g, const std::vector<int>& perm) {
  AssignationGraph out;
  out.kind = g.kind;
  out.nodes.resize(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    out.nodes[static_cast<std::size_t>(perm[i])] = g.nodes[i];
    out.nodes[static_cast<std::size_t>(perm[i])].node_id = perm[i];
  }
  for (const auto& e : g.edges) {
    out.edges.push_back({perm[static_cast<std::size_t>(e.src)], perm[static_cast<std::size_t>(e.dst)]});
  }
  return out;
}

inline std::vector<int> random_permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace maas::testing
