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

#include "maas/windows.hpp"

#include <algorithm>

#include "maas/errors.hpp"

namespace maas {

void WindowConfig::validate() const {
  if (num_lans < 1) throw ConfigError("num_lans must be >= 1");
  if (max_video_nodes < 1) throw ConfigError("max_video_nodes must be >= 1");
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<WindowGraph> make_windows(const SceneSample& scene, const WindowConfig& config,
                                      GroupingMode mode, std::uint64_t seed) {
  config.validate();
  std::vector<WindowGraph> out;
  const auto len = static_cast<std::size_t>(config.num_lans);
  int window_index = 0;
  for (std::size_t begin = 0; begin < scene.frames.size(); begin += len, ++window_index) {
    const std::size_t end = std::min(scene.frames.size(), begin + len);
    std::vector<int> ids;
    std::vector<int> active;
    for (std::size_t t = begin; t < end; ++t) {
      for (const auto& v : scene.frames[t].frame.videos) {
        ids.push_back(*v.speaker_id);
        if (v.label == 1) active.push_back(*v.speaker_id);
      }
    }
    GroupingPolicy policy;
    policy.max_video_nodes = config.max_video_nodes;
    policy.mode = mode;
    policy.rng_seed = mix_seed(seed, static_cast<std::uint64_t>(window_index));
    const auto groups = group_identities(ids, active, policy);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& group = groups[g];
      std::vector<Frame> frames;
      std::vector<std::pair<int, int>> faces_per_frame;  // (timestamp, faces)
      for (std::size_t t = begin; t < end; ++t) {
        const auto& src = scene.frames[t].frame;
        Frame f;
        f.audio = src.audio;
        for (const auto& v : src.videos) {
          if (std::binary_search(group.begin(), group.end(), *v.speaker_id)) f.videos.push_back(v);
        }
        faces_per_frame.emplace_back(src.audio.timestamp, static_cast<int>(src.videos.size()));
        frames.push_back(std::move(f));
      }
      WindowGraph wg;
      wg.scene_id = scene.scene_id;
      wg.window_index = window_index;
      wg.group_index = static_cast<int>(g);
      wg.graph = frames.size() == 1 ? build_lan(frames[0].audio, frames[0].videos)
                                    : build_tan(frames);
      for (const auto& n : wg.graph.nodes) {
        auto it = std::find_if(faces_per_frame.begin(), faces_per_frame.end(),
                               [&](const auto& p) { return p.first == n.timestamp; });
        wg.visible_faces.push_back(it->second);
      }
      out.push_back(std::move(wg));
    }
  }
  return out;
}

}  // namespace maas
