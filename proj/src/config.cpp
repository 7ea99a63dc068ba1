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

#include "maas/config.hpp"

#include "json.hpp"
#include "maas/errors.hpp"

namespace maas {

using nlohmann::ordered_json;

namespace {

ordered_json to_tree(const RunConfig& c) {
  ordered_json j;
  j["synth"] = ordered_json::parse(synth_config_to_json(c.synth));
  j["synth"]["test_scenes"] = c.test_scenes;
  j["model"] = ordered_json::parse(model_config_to_json(c.model));
  j["train"] = {{"lr", c.train.lr},
                {"epochs", c.train.epochs},
                {"batch_scenes", c.train.batch_scenes},
                {"offscreen_p", c.train.offscreen_p},
                {"offscreen_audio_label_speech", c.train.offscreen_audio_label_speech},
                {"num_lans", c.train.window.num_lans},
                {"max_video_nodes", c.train.window.max_video_nodes},
                {"self_loops_only", c.train.window.self_loops_only},
                {"seed", c.train.seed}};
  j["eval"] = {{"batch_scenes", c.eval_batch_scenes}};
  ordered_json streams = ordered_json::array();
  for (auto s : c.ablate.streams) streams.push_back(to_string(s));
  j["ablate"] = {{"num_lans", c.ablate.num_lans}, {"video_nodes", c.ablate.video_nodes},
                 {"depth", c.ablate.depth},       {"width", c.ablate.width},
                 {"k", c.ablate.k},               {"streams", streams}};
  j["paths"] = {{"train_data", c.paths.train_data},
                {"test_data", c.paths.test_data},
                {"checkpoint", c.paths.checkpoint}};
  return j;
}

RunConfig from_tree(const ordered_json& j) {
  RunConfig c;
  auto synth = j.at("synth");
  c.test_scenes = synth.at("test_scenes").get<int>();
  synth.erase("test_scenes");
  c.synth = synth_config_from_json(synth.dump());
  c.model = model_config_from_json(j.at("model").dump());
  const auto& t = j.at("train");
  c.train.lr = t.at("lr").get<double>();
  c.train.epochs = t.at("epochs").get<int>();
  c.train.batch_scenes = t.at("batch_scenes").get<int>();
  c.train.offscreen_p = t.at("offscreen_p").get<double>();
  c.train.offscreen_audio_label_speech = t.at("offscreen_audio_label_speech").get<bool>();
  c.train.window.num_lans = t.at("num_lans").get<int>();
  c.train.window.max_video_nodes = t.at("max_video_nodes").get<int>();
  c.train.window.self_loops_only = t.at("self_loops_only").get<bool>();
  c.train.seed = t.at("seed").get<std::uint64_t>();
  c.train.validate();
  c.eval_batch_scenes = j.at("eval").at("batch_scenes").get<int>();
  const auto& a = j.at("ablate");
  c.ablate.num_lans = a.at("num_lans").get<std::vector<int>>();
  c.ablate.video_nodes = a.at("video_nodes").get<std::vector<int>>();
  c.ablate.depth = a.at("depth").get<std::vector<int>>();
  c.ablate.width = a.at("width").get<std::vector<int>>();
  c.ablate.k = a.at("k").get<std::vector<int>>();
  c.ablate.streams.clear();
  for (const auto& s : a.at("streams")) c.ablate.streams.push_back(parse_streams(s.get<std::string>()));
  const auto& p = j.at("paths");
  c.paths.train_data = p.at("train_data").get<std::string>();
  c.paths.test_data = p.at("test_data").get<std::string>();
  c.paths.checkpoint = p.at("checkpoint").get<std::string>();
  if (c.test_scenes < 0) throw ConfigError("synth.test_scenes must be >= 0");
  if (c.eval_batch_scenes < 1) throw ConfigError("eval.batch_scenes must be >= 1");
  if (c.model.input_dim != c.synth.feature_dim) {
    throw ConfigError("model.input_dim must equal synth.feature_dim");
  }
  return c;
}

// Overlays `src` onto `dst`, refusing keys that `dst` does not define.
void merge_known(ordered_json& dst, const ordered_json& src, const std::string& where) {
  if (!src.is_object()) throw ConfigError("expected an object at '" + where + "'");
  for (auto it = src.begin(); it != src.end(); ++it) {
    const std::string key = where.empty() ? it.key() : where + "." + it.key();
    if (!dst.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    auto& slot = dst[it.key()];
    if (slot.is_object()) {
      merge_known(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

}  // namespace

std::string run_config_to_json(const RunConfig& config) { return to_tree(config).dump(2); }

RunConfig resolve_run_config(const std::optional<std::string>& config_text,
                             const std::vector<std::string>& overrides,
                             std::optional<std::uint64_t> seed) {
  ordered_json tree = to_tree(RunConfig{});
  try {
    if (config_text) {
      ordered_json file;
      try {
        file = ordered_json::parse(*config_text);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
      merge_known(tree, file, "");
    }
    for (const auto& ov : overrides) {
      const auto eq = ov.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + ov + "' is not key=value");
      }
      const std::string key = ov.substr(0, eq);
      const std::string text = ov.substr(eq + 1);
      ordered_json* node = &tree;
      std::size_t pos = 0;
      while (true) {
        const auto dot = key.find('.', pos);
        const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (!node->is_object() || !node->contains(part)) {
          throw ConfigError("unknown config key '" + key + "'");
        }
        node = &(*node)[part];
        if (dot == std::string::npos) break;
        pos = dot + 1;
      }
      if (node->is_object()) throw ConfigError("override '" + key + "' names a section");
      ordered_json value;
      try {
        value = ordered_json::parse(text);
      } catch (const nlohmann::json::exception&) {
        value = text;
      }
      *node = value;
    }
    if (seed) {
      tree["synth"]["seed"] = *seed;
      tree["train"]["seed"] = *seed;
    }
    return from_tree(tree);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

SynthConfig test_synth_config(const RunConfig& config) {
  SynthConfig s = config.synth;
  s.num_scenes = config.test_scenes;
  s.first_scene_id = config.synth.first_scene_id + config.synth.num_scenes;
  return s;
}

}  // namespace maas
