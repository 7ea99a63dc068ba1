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

#include "maas/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "maas/errors.hpp"

namespace maas {

std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeError("scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (labels[order[r]] == 1) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<double>(hits);
}

std::optional<double> average_precision(std::span<const PredictionRecord> records) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(records.size());
  labels.reserve(records.size());
  for (const auto& r : records) {
    scores.push_back(r.score);
    labels.push_back(r.label);
  }
  return average_precision(scores, labels);
}

MetricsReport summarize(std::span<const PredictionRecord> records,
                        std::span<const AudioRecord> audio) {
  MetricsReport rep;
  rep.num_records = records.size();
  rep.overall_ap = average_precision(records);
  std::map<std::string, std::vector<PredictionRecord>> buckets;
  for (const char* key : {"1", "2", "3+"}) buckets[key];
  for (const auto& r : records) {
    rep.num_positives += r.label == 1 ? 1 : 0;
    const char* key = r.visible_faces <= 1 ? "1" : r.visible_faces == 2 ? "2" : "3+";
    buckets[key].push_back(r);
  }
  for (const auto& [key, recs] : buckets) rep.by_num_speakers[key] = average_precision(recs);
  if (!audio.empty()) {
    std::vector<double> s;
    std::vector<int> l;
    for (const auto& a : audio) {
      s.push_back(a.score);
      l.push_back(a.label);
    }
    rep.audio_ap = average_precision(s, l);
  }
  return rep;
}

namespace {

nlohmann::ordered_json ap_json(const std::optional<double>& ap) {
  return ap ? nlohmann::ordered_json(*ap) : nlohmann::ordered_json(nullptr);
}

std::string ap_text(const std::optional<double>& ap) {
  if (!ap) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *ap);
  return buf;
}

}  // namespace

std::string report_to_json(const MetricsReport& report, const std::string& config_json,
                           std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["overall_ap"] = ap_json(report.overall_ap);
  j["overall_ap_defined"] = report.overall_ap.has_value();
  nlohmann::ordered_json by;
  for (const auto& [key, ap] : report.by_num_speakers) by[key] = ap_json(ap);
  j["by_num_speakers"] = by;
  j["audio_ap"] = ap_json(report.audio_ap);
  j["num_records"] = report.num_records;
  j["num_positives"] = report.num_positives;
  j["config"] = config_json.empty() ? nlohmann::ordered_json::object()
                                    : nlohmann::ordered_json::parse(config_json);
  j["seed"] = seed;
  return j.dump(2);
}

std::string report_to_text(const MetricsReport& report) {
  std::ostringstream out;
  out << "records          " << report.num_records << " (" << report.num_positives
      << " positive)\n";
  out << "overall AP       " << ap_text(report.overall_ap) << "\n";
  for (const auto& [key, ap] : report.by_num_speakers) {
    out << "  faces=" << key << (key.size() == 1 ? "  " : " ") << "      " << ap_text(ap) << "\n";
  }
  out << "audio AP         " << ap_text(report.audio_ap) << "\n";
  return out.str();
}

void write_predictions_csv(std::ostream& out, std::span<const PredictionRecord> records) {
  out << "scene_id,t,speaker_id,score,label\n";
  char buf[32];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%.9g", r.score);
    out << r.scene_id << ',' << r.timestamp << ',' << r.speaker_id << ',' << buf << ','
        << r.label << '\n';
  }
}

}  // namespace maas
