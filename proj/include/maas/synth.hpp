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
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "maas/graph.hpp"

namespace maas {

/// Synthetic audio-visual scene generator settings.
///
/// Each frame independently draws one event: silence (probability
/// silence_prob), off-screen speech (offscreen_prob) or on-screen speech (the
/// remainder). The scene's talker is persistent and hands the turn to another
/// visible person with probability switch_prob per frame.
struct SynthConfig {
  int num_scenes = 100;
  int frames_per_scene = 13;
  int speakers_min = 1;
  int speakers_max = 4;
  int feature_dim = 512;
  int latent_dim = 16;
  double noise_sigma = 0.0;
  double confuser_prob = 0.0;
  double offscreen_prob = 0.0;
  double silence_prob = 0.3;
  double smoothing = 0.8;
  double switch_prob = 0.1;
  std::uint64_t seed = 0;
  // scene ids start here; held-out sets share the seed (and so the
  // embedding matrices) but use a disjoint id range
  int first_scene_id = 0;

  void validate() const;
  bool operator==(const SynthConfig&) const = default;
};

enum class FrameEvent { Silence, Offscreen, Speaking };

struct SceneFrame {
  Frame frame;
  FrameEvent event = FrameEvent::Silence;
  // held out from supervision: true when the audio track carries speech
  bool audio_has_speech = false;

  std::optional<int> active_speaker() const;
  bool operator==(const SceneFrame& o) const {
    return frame.audio == o.frame.audio && frame.videos == o.frame.videos &&
           event == o.event && audio_has_speech == o.audio_has_speech;
  }
};

struct SceneSample {
  int scene_id = 0;
  std::vector<SceneFrame> frames;

  bool has_active_speaker() const;
  bool operator==(const SceneSample&) const = default;
};

/// Fixed per-dataset embeddings: audio = A u, talking face = V u, with A and
/// V (feature_dim x latent_dim) having orthonormal, mutually orthogonal
/// columns. Stored row-major.
struct SynthProjections {
  int feature_dim = 0;
  int latent_dim = 0;
  std::vector<double> audio;
  std::vector<double> video;

  std::vector<double> project_audio(const std::vector<float>& feature) const;
  std::vector<double> project_video(const std::vector<float>& feature) const;
};

SynthProjections make_projections(const SynthConfig& config);

std::vector<SceneSample> generate(const SynthConfig& config);

/// Closed-form detector: cosine between the latent read out of a face and of
/// the frame's audio (0 when either vanishes). Exact on noiseless,
/// confuser-free data.
double oracle_score(const SynthProjections& proj, const FeatureNode& audio,
                    const FeatureNode& video);

std::string synth_config_to_json(const SynthConfig& config);
SynthConfig synth_config_from_json(const std::string& json);

/// JSONL: an optional header line {"header": {...}} then one node per line.
void write_dataset(std::ostream& out, const std::vector<SceneSample>& scenes,
                   const std::optional<SynthConfig>& header = std::nullopt);
void write_dataset(const std::string& path, const std::vector<SceneSample>& scenes,
                   const std::optional<SynthConfig>& header = std::nullopt);

struct Dataset {
  std::optional<SynthConfig> header;
  std::vector<SceneSample> scenes;
};
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::string& path);

struct AugmentOptions {
  double probability = 0.2;
  // label the swapped audio as speech instead of max-of-video-labels
  bool audio_label_speech = false;
};

/// Swaps in a speech-bearing audio track for scenes that show no active
/// speaker. Donors are drawn uniformly from speech-bearing scenes of the
/// batch; with none available the batch is returned untouched. Returns the
/// number of scenes modified.
int offscreen_augment(std::vector<SceneSample>& batch, const AugmentOptions& options,
                      std::mt19937_64& rng);

}  // namespace maas
