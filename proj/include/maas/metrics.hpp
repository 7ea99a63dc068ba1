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

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace maas {

struct PredictionRecord {
  int scene_id = 0;
  int timestamp = 0;
  int speaker_id = 0;
  double score = 0.0;  // probability of "speaking"
  int label = 0;
  int visible_faces = 0;
};

/// Audio node score, averaged over the inference groups of its frame.
struct AudioRecord {
  int scene_id = 0;
  int timestamp = 0;
  double score = 0.0;
  int label = 0;
};

/// Non-interpolated average precision: rank by descending score (ties keep
/// input order) and average precision@r over the ranks r of the positives.
/// Undefined (nullopt) without positives.
std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const int> labels);
std::optional<double> average_precision(std::span<const PredictionRecord> records);

struct MetricsReport {
  std::optional<double> overall_ap;
  // keys "1", "2", "3+" by faces visible in the frame
  std::map<std::string, std::optional<double>> by_num_speakers;
  std::optional<double> audio_ap;
  std::size_t num_records = 0;
  std::size_t num_positives = 0;
};

MetricsReport summarize(std::span<const PredictionRecord> records,
                        std::span<const AudioRecord> audio = {});

/// {"overall_ap", "overall_ap_defined", "by_num_speakers", "audio_ap",
///  "num_records", "num_positives", "config", "seed"}; undefined APs are null.
std::string report_to_json(const MetricsReport& report, const std::string& config_json,
                           std::uint64_t seed);
std::string report_to_text(const MetricsReport& report);

/// CSV header: scene_id,t,speaker_id,score,label
void write_predictions_csv(std::ostream& out, std::span<const PredictionRecord> records);

}  // namespace maas
