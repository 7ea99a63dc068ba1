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

#include "maas/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "maas/errors.hpp"

namespace maas {

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("train.lr must be > 0");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (batch_scenes < 1) throw ConfigError("train.batch_scenes must be >= 1");
  if (!(offscreen_p >= 0.0 && offscreen_p <= 1.0)) {
    throw ConfigError("train.offscreen_p must lie in [0,1]");
  }
  window.validate();
}

namespace {

std::size_t feature_dim_of(const std::vector<SceneSample>& data) {
  for (const auto& s : data)
    for (const auto& f : s.frames) return f.frame.audio.feature.size();
  return 0;
}

}  // namespace

TrainResult train(const ModelConfig& model_config, const TrainConfig& config,
                  const std::vector<SceneSample>& dataset, const ProgressFn& progress) {
  config.validate();
  if (dataset.empty()) throw ConfigError("training dataset is empty");
  if (feature_dim_of(dataset) != static_cast<std::size_t>(model_config.input_dim)) {
    throw ConfigError("dataset feature dimension " + std::to_string(feature_dim_of(dataset)) +
                      " differs from model.input_dim " + std::to_string(model_config.input_dim));
  }
  MaasModel<float> model(model_config);
  TrainResult result;
  model.init_params(result.params, mix_seed(config.seed, 0x1417));
  ad::AdamOptions adam;
  adam.lr = config.lr;
  AugmentOptions augment;
  augment.probability = config.offscreen_p;
  augment.audio_label_speech = config.offscreen_audio_label_speech;
  const AudioTarget audio_target = config.offscreen_audio_label_speech ? AudioTarget::NodeLabel
                                                                       : AudioTarget::MaxOfVideos;

  std::vector<std::size_t> order(dataset.size());
  const auto batch = static_cast<std::size_t>(config.batch_scenes);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix_seed(config.seed, 0xE0000 + static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_sum = 0.0;
    int epoch_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      std::vector<SceneSample> scenes;
      for (std::size_t i = start; i < end; ++i) scenes.push_back(dataset[order[i]]);
      if (config.offscreen_p > 0.0) offscreen_augment(scenes, augment, rng);

      std::vector<AssignationGraph> graphs;
      for (const auto& s : scenes) {
        const auto seed = mix_seed(mix_seed(config.seed, static_cast<std::uint64_t>(epoch)),
                                   static_cast<std::uint64_t>(s.scene_id));
        for (auto& w : make_windows(s, config.window, GroupingMode::TrainSample, seed)) {
          graphs.push_back(std::move(w.graph));
        }
      }
      const GraphBatch gb = make_batch(graphs, model_config.supervise_audio,
                                       config.window.self_loops_only, audio_target);
      ad::Tape<float> tape;
      const ad::Var logits = model.forward(tape, result.params, gb, true);
      const ad::Var loss = model.loss(tape, logits, gb);
      const double value = tape.value(loss).data[0];
      const std::string where =
          "epoch " + std::to_string(epoch) + ", batch " + std::to_string(start / batch);
      if (!std::isfinite(value)) throw NumericsError("non-finite loss at " + where);
      tape.backward(loss);
      result.params.zero_grad();
      tape.export_grads(result.params);
      try {
        ad::adam_step(result.params, adam);
      } catch (const NumericsError& e) {
        throw NumericsError(std::string(e.what()) + " at " + where);
      }
      ++result.steps;
      result.batch_loss.push_back(value);
      epoch_sum += value;
      ++epoch_batches;
      if (progress) progress(epoch, result.steps, value);
    }
    result.epoch_loss.push_back(epoch_sum / epoch_batches);
  }
  return result;
}

EvalResult evaluate(const ModelConfig& model_config, ad::ParamStore<float>& params,
                    const WindowConfig& window, const std::vector<SceneSample>& dataset,
                    int batch_scenes) {
  if (batch_scenes < 1) throw ConfigError("eval batch_scenes must be >= 1");
  const auto dim = feature_dim_of(dataset);
  if (dim != 0 && dim != static_cast<std::size_t>(model_config.input_dim)) {
    throw ConfigError("dataset feature dimension " + std::to_string(dim) +
                      " differs from model.input_dim " + std::to_string(model_config.input_dim));
  }
  MaasModel<float> model(model_config);
  EvalResult result;
  // (scene, t) -> (sum of audio scores, passes, label)
  std::map<std::pair<int, int>, std::tuple<double, int, int>> audio;

  const auto step = static_cast<std::size_t>(batch_scenes);
  for (std::size_t start = 0; start < dataset.size(); start += step) {
    const std::size_t end = std::min(dataset.size(), start + step);
    std::vector<WindowGraph> windows;
    for (std::size_t i = start; i < end; ++i) {
      auto w = make_windows(dataset[i], window, GroupingMode::InferSplit);
      std::move(w.begin(), w.end(), std::back_inserter(windows));
    }
    std::vector<AssignationGraph> graphs;
    graphs.reserve(windows.size());
    for (const auto& w : windows) graphs.push_back(w.graph);
    const GraphBatch gb = make_batch(graphs, true, window.self_loops_only);
    const auto probs = ad::softmax_rows(model.predict(params, gb));
    for (std::size_t g = 0; g < windows.size(); ++g) {
      const auto& w = windows[g];
      for (std::size_t i = 0; i < w.graph.nodes.size(); ++i) {
        const auto& n = w.graph.nodes[i];
        const double score = probs.at(gb.offsets[g] + i, 1);
        if (n.modality == Modality::Video) {
          result.records.push_back(PredictionRecord{w.scene_id, n.timestamp, *n.speaker_id, score,
                                                    n.label, w.visible_faces[i]});
        } else {
          auto& [sum, passes, label] = audio[{w.scene_id, n.timestamp}];
          sum += score;
          passes += 1;
          label = n.label;
        }
      }
    }
  }
  for (const auto& [key, value] : audio) {
    const auto& [sum, passes, label] = value;
    result.audio.push_back(AudioRecord{key.first, key.second, sum / passes, label});
  }
  result.report = summarize(result.records, result.audio);
  return result;
}

std::string checkpoint_metadata(const ModelConfig& model, const WindowConfig& window) {
  nlohmann::ordered_json j;
  j["model"] = nlohmann::ordered_json::parse(model_config_to_json(model));
  j["window"] = {{"num_lans", window.num_lans},
                 {"max_video_nodes", window.max_video_nodes},
                 {"self_loops_only", window.self_loops_only}};
  return j.dump();
}

std::pair<ModelConfig, WindowConfig> parse_checkpoint_metadata(const std::string& metadata) {
  try {
    const auto j = nlohmann::json::parse(metadata);
    ModelConfig model = model_config_from_json(j.at("model").dump());
    WindowConfig window;
    window.num_lans = j.at("window").at("num_lans").get<int>();
    window.max_video_nodes = j.at("window").at("max_video_nodes").get<int>();
    window.self_loops_only = j.at("window").at("self_loops_only").get<bool>();
    window.validate();
    return {model, window};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad checkpoint metadata: ") + e.what());
  }
}

EvalResult evaluate(ad::Checkpoint& checkpoint, const std::vector<SceneSample>& dataset,
                    int batch_scenes) {
  const auto [model, window] = parse_checkpoint_metadata(checkpoint.metadata);
  const auto& w = checkpoint.params.value("reduce.video.W");
  if (w.rows() != static_cast<std::size_t>(model.input_dim) ||
      w.cols() != static_cast<std::size_t>(model.hidden)) {
    throw ConfigError("checkpoint tensors do not match its model configuration");
  }
  return evaluate(model, checkpoint.params, window, dataset, batch_scenes);
}

std::vector<AblationRow> ablation_grid(const AblationDims& dims, const ModelConfig& base_model,
                                       const TrainConfig& base_train,
                                       const std::vector<SceneSample>& train_set,
                                       const std::vector<SceneSample>& test_set) {
  std::vector<AblationRow> rows;
  for (int lans : dims.num_lans)
    for (int nodes : dims.video_nodes)
      for (int depth : dims.depth)
        for (int width : dims.width)
          for (int k : dims.k)
            for (Streams streams : dims.streams) {
              ModelConfig m = base_model;
              m.num_layers = depth;
              m.hidden = width;
              m.k_dynamic = k;
              m.streams = streams;
              TrainConfig t = base_train;
              t.window.num_lans = lans;
              t.window.max_video_nodes = nodes;
              auto trained = train(m, t, train_set);
              const auto eval = evaluate(m, trained.params, t.window, test_set);
              rows.push_back({lans, nodes, depth, width, k, streams, eval.report.overall_ap});
            }
  return rows;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-9s %-11s %-6s %-6s %-4s %-8s %s\n", "num_lans", "video_nodes",
                "depth", "width", "k", "streams", "AP");
  out << buf;
  for (const auto& r : rows) {
    char ap[32];
    if (r.ap) {
      std::snprintf(ap, sizeof(ap), "%.4f", *r.ap);
    } else {
      std::snprintf(ap, sizeof(ap), "undefined");
    }
    std::snprintf(buf, sizeof(buf), "%-9d %-11d %-6d %-6d %-4d %-8s %s\n", r.num_lans,
                  r.video_nodes, r.depth, r.width, r.k, to_string(r.streams), ap);
    out << buf;
  }
  return out.str();
}

std::string ablation_json(const std::vector<AblationRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["num_lans"] = r.num_lans;
    j["video_nodes"] = r.video_nodes;
    j["depth"] = r.depth;
    j["width"] = r.width;
    j["k"] = r.k;
    j["streams"] = to_string(r.streams);
    j["ap"] = r.ap ? nlohmann::ordered_json(*r.ap) : nlohmann::ordered_json(nullptr);
    arr.push_back(j);
  }
  return arr.dump(2);
}

}  // namespace maas
