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

#include "maas/synth.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "maas/errors.hpp"

namespace maas {

void SynthConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string("synth.") + name + " must lie in [0,1]");
  };
  prob(confuser_prob, "confuser_prob");
  prob(offscreen_prob, "offscreen_prob");
  prob(silence_prob, "silence_prob");
  prob(switch_prob, "switch_prob");
  prob(smoothing, "smoothing");
  if (offscreen_prob + silence_prob > 1.0 + 1e-12) {
    throw ConfigError("synth.offscreen_prob + synth.silence_prob exceeds 1");
  }
  if (num_scenes < 0) throw ConfigError("synth.num_scenes must be >= 0");
  if (first_scene_id < 0) throw ConfigError("synth.first_scene_id must be >= 0");
  if (frames_per_scene < 1) throw ConfigError("synth.frames_per_scene must be >= 1");
  if (speakers_min < 0 || speakers_max < speakers_min) {
    throw ConfigError("synth.speakers_min/max must satisfy 0 <= min <= max");
  }
  if (latent_dim < 1 || feature_dim < 2 * latent_dim) {
    throw ConfigError("synth.feature_dim must be at least 2 * latent_dim");
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("synth.noise_sigma must be >= 0");
}

std::optional<int> SceneFrame::active_speaker() const {
  for (const auto& v : frame.videos)
    if (v.label == 1) return v.speaker_id;
  return std::nullopt;
}

bool SceneSample::has_active_speaker() const {
  return std::any_of(frames.begin(), frames.end(),
                     [](const SceneFrame& f) { return f.active_speaker().has_value(); });
}

namespace {

std::vector<double> project(const std::vector<double>& basis, int d, int l,
                            const std::vector<float>& feature) {
  std::vector<double> out(static_cast<std::size_t>(l), 0.0);
  if (feature.size() != static_cast<std::size_t>(d)) throw ShapeError("feature/projection size mismatch");
  for (int r = 0; r < d; ++r) {
    const double x = feature[static_cast<std::size_t>(r)];
    if (x == 0.0) continue;
    for (int c = 0; c < l; ++c) out[static_cast<std::size_t>(c)] += basis[static_cast<std::size_t>(r * l + c)] * x;
  }
  return out;
}

std::vector<double> random_unit(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> u(static_cast<std::size_t>(dim));
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& x : u) {
      x = n01(rng);
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& x : u) x /= norm;
  return u;
}

// u <- normalize(alpha u + (1 - alpha) fresh)
void advance_latent(std::vector<double>& u, double alpha, std::mt19937_64& rng) {
  const auto fresh = random_unit(static_cast<int>(u.size()), rng);
  double norm = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = alpha * u[i] + (1.0 - alpha) * fresh[i];
    norm += u[i] * u[i];
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    u = fresh;
    return;
  }
  for (auto& x : u) x /= norm;
}

std::vector<float> embed(const std::vector<double>* basis, const std::vector<double>* latent,
                         int d, int l, double sigma, std::mt19937_64& rng) {
  std::vector<float> f(static_cast<std::size_t>(d), 0.0f);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int r = 0; r < d; ++r) {
    double x = 0.0;
    if (basis) {
      for (int c = 0; c < l; ++c) {
        x += (*basis)[static_cast<std::size_t>(r * l + c)] * (*latent)[static_cast<std::size_t>(c)];
      }
    }
    if (sigma > 0.0) x += sigma * noise(rng);
    f[static_cast<std::size_t>(r)] = static_cast<float>(x);
  }
  return f;
}

SceneSample generate_scene(const SynthConfig& cfg, const SynthProjections& proj, int scene_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(scene_id), 0x5ce7e5u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int d = cfg.feature_dim;
  const int l = cfg.latent_dim;

  const int n = std::uniform_int_distribution<int>(cfg.speakers_min, cfg.speakers_max)(rng);
  int talker = n > 0 ? std::uniform_int_distribution<int>(0, n - 1)(rng) : -1;
  std::vector<bool> confuser(static_cast<std::size_t>(n), false);
  std::vector<std::vector<double>> gesture(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    confuser[static_cast<std::size_t>(k)] = u01(rng) < cfg.confuser_prob;
    gesture[static_cast<std::size_t>(k)] = random_unit(l, rng);
  }
  auto speech = random_unit(l, rng);

  SceneSample scene;
  scene.scene_id = scene_id;
  for (int t = 0; t < cfg.frames_per_scene; ++t) {
    if (t > 0) {
      advance_latent(speech, cfg.smoothing, rng);
      for (auto& g : gesture) advance_latent(g, cfg.smoothing, rng);
      if (n > 1 && u01(rng) < cfg.switch_prob) {
        int next = std::uniform_int_distribution<int>(0, n - 2)(rng);
        talker = next >= talker ? next + 1 : next;
      }
    }
    const double r = u01(rng);
    FrameEvent event = r < cfg.silence_prob                          ? FrameEvent::Silence
                       : r < cfg.silence_prob + cfg.offscreen_prob ? FrameEvent::Offscreen
                                                                     : FrameEvent::Speaking;
    if (event == FrameEvent::Speaking && n == 0) event = FrameEvent::Offscreen;

    SceneFrame sf;
    sf.event = event;
    sf.audio_has_speech = event != FrameEvent::Silence;
    auto& audio = sf.frame.audio;
    audio.modality = Modality::Audio;
    audio.timestamp = t;
    audio.feature = embed(sf.audio_has_speech ? &proj.audio : nullptr, &speech, d, l,
                          cfg.noise_sigma, rng);
    for (int k = 0; k < n; ++k) {
      FeatureNode v;
      v.modality = Modality::Video;
      v.timestamp = t;
      v.speaker_id = k;
      v.node_id = k + 1;
      const bool talking = event == FrameEvent::Speaking && k == talker;
      v.label = talking ? 1 : 0;
      const std::vector<double>* latent = nullptr;
      if (talking) {
        latent = &speech;
      } else if (confuser[static_cast<std::size_t>(k)]) {
        latent = &gesture[static_cast<std::size_t>(k)];
      }
      v.feature = embed(latent ? &proj.video : nullptr, latent, d, l, cfg.noise_sigma, rng);
      sf.frame.videos.push_back(std::move(v));
    }
    audio.label = sf.active_speaker() ? 1 : 0;
    scene.frames.push_back(std::move(sf));
  }
  return scene;
}

}  // namespace

std::vector<double> SynthProjections::project_audio(const std::vector<float>& f) const {
  return project(audio, feature_dim, latent_dim, f);
}

std::vector<double> SynthProjections::project_video(const std::vector<float>& f) const {
  return project(video, feature_dim, latent_dim, f);
}

SynthProjections make_projections(const SynthConfig& cfg) {
  cfg.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    0xa11ce5u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> n01(0.0, 1.0);
  const int d = cfg.feature_dim;
  const int l = cfg.latent_dim;
  Eigen::MatrixXd g(d, 2 * l);
  for (int c = 0; c < 2 * l; ++c)
    for (int r = 0; r < d; ++r) g(r, c) = n01(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, 2 * l);
  SynthProjections p;
  p.feature_dim = d;
  p.latent_dim = l;
  p.audio.resize(static_cast<std::size_t>(d * l));
  p.video.resize(static_cast<std::size_t>(d * l));
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < l; ++c) {
      p.audio[static_cast<std::size_t>(r * l + c)] = q(r, c);
      p.video[static_cast<std::size_t>(r * l + c)] = q(r, l + c);
    }
  return p;
}

std::vector<SceneSample> generate(const SynthConfig& config) {
  config.validate();
  const auto proj = make_projections(config);
  std::vector<SceneSample> scenes;
  scenes.reserve(static_cast<std::size_t>(config.num_scenes));
  for (int s = 0; s < config.num_scenes; ++s) {
    scenes.push_back(generate_scene(config, proj, config.first_scene_id + s));
  }
  return scenes;
}

double oracle_score(const SynthProjections& proj, const FeatureNode& audio,
                    const FeatureNode& video) {
  const auto a = proj.project_audio(audio.feature);
  const auto v = proj.project_video(video.feature);
  double dot = 0.0;
  double na = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * v[i];
    na += a[i] * a[i];
    nv += v[i] * v[i];
  }
  if (na == 0.0 || nv == 0.0) return 0.0;
  return dot / std::sqrt(na * nv);
}

std::string synth_config_to_json(const SynthConfig& c) {
  nlohmann::ordered_json j;
  j["num_scenes"] = c.num_scenes;
  j["frames_per_scene"] = c.frames_per_scene;
  j["speakers_min"] = c.speakers_min;
  j["speakers_max"] = c.speakers_max;
  j["feature_dim"] = c.feature_dim;
  j["latent_dim"] = c.latent_dim;
  j["noise_sigma"] = c.noise_sigma;
  j["confuser_prob"] = c.confuser_prob;
  j["offscreen_prob"] = c.offscreen_prob;
  j["silence_prob"] = c.silence_prob;
  j["smoothing"] = c.smoothing;
  j["switch_prob"] = c.switch_prob;
  j["seed"] = c.seed;
  j["first_scene_id"] = c.first_scene_id;
  return j.dump();
}

SynthConfig synth_config_from_json(const std::string& text) {
  SynthConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.num_scenes = j.at("num_scenes").get<int>();
    c.frames_per_scene = j.at("frames_per_scene").get<int>();
    c.speakers_min = j.at("speakers_min").get<int>();
    c.speakers_max = j.at("speakers_max").get<int>();
    c.feature_dim = j.at("feature_dim").get<int>();
    c.latent_dim = j.at("latent_dim").get<int>();
    c.noise_sigma = j.at("noise_sigma").get<double>();
    c.confuser_prob = j.at("confuser_prob").get<double>();
    c.offscreen_prob = j.at("offscreen_prob").get<double>();
    c.silence_prob = j.at("silence_prob").get<double>();
    c.smoothing = j.at("smoothing").get<double>();
    c.switch_prob = j.at("switch_prob").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.first_scene_id = j.value("first_scene_id", 0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad synth config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

void append_float(std::string& out, float f) {
  char buf[32];
  // shortest representation that parses back to the same float
  auto res = std::to_chars(buf, buf + sizeof(buf), f);
  out.append(buf, res.ptr);
}

void write_node(std::string& line, int scene_id, const FeatureNode& n,
                std::optional<bool> speech) {
  line.clear();
  line += "{\"scene_id\":" + std::to_string(scene_id) + ",\"t\":" + std::to_string(n.timestamp) +
          ",\"modality\":\"" + to_string(n.modality) + "\"";
  if (n.speaker_id) line += ",\"speaker_id\":" + std::to_string(*n.speaker_id);
  line += ",\"label\":" + std::to_string(n.label);
  if (speech) line += std::string(",\"speech\":") + (*speech ? "true" : "false");
  line += ",\"feature\":[";
  for (std::size_t i = 0; i < n.feature.size(); ++i) {
    if (i) line += ',';
    append_float(line, n.feature[i]);
  }
  line += "]}\n";
}

}  // namespace

void write_dataset(std::ostream& out, const std::vector<SceneSample>& scenes,
                   const std::optional<SynthConfig>& header) {
  if (header) {
    out << "{\"header\":{\"format\":\"maas-scenes\",\"version\":1,\"config\":"
        << synth_config_to_json(*header) << "}}\n";
  }
  std::string line;
  for (const auto& s : scenes) {
    for (const auto& f : s.frames) {
      write_node(line, s.scene_id, f.frame.audio, f.audio_has_speech);
      out << line;
      for (const auto& v : f.frame.videos) {
        write_node(line, s.scene_id, v, std::nullopt);
        out << line;
      }
    }
  }
}

void write_dataset(const std::string& path, const std::vector<SceneSample>& scenes,
                   const std::optional<SynthConfig>& header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset " + path);
  write_dataset(out, scenes, header);
  if (!out) throw IoError("short write to " + path);
}

Dataset read_dataset(std::istream& in) {
  Dataset ds;
  std::map<int, std::size_t> scene_index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + "invalid JSON (" + e.what() + ")");
    }
    if (j.contains("header")) {
      try {
        ds.header = synth_config_from_json(j.at("header").at("config").dump());
      } catch (const std::exception& e) {
        throw ParseError(where + "bad header (" + e.what() + ")");
      }
      continue;
    }
    for (const char* key : {"scene_id", "t", "modality", "label", "feature"}) {
      if (!j.contains(key)) throw ParseError(where + "missing field '" + key + "'");
    }
    FeatureNode n;
    int scene_id = 0;
    std::optional<bool> speech;
    try {
      scene_id = j["scene_id"].get<int>();
      n.timestamp = j["t"].get<int>();
      const auto mod = j["modality"].get<std::string>();
      if (mod == "audio") {
        n.modality = Modality::Audio;
      } else if (mod == "video") {
        n.modality = Modality::Video;
      } else {
        throw ParseError(where + "unknown modality '" + mod + "'");
      }
      if (j.contains("speaker_id")) n.speaker_id = j["speaker_id"].get<int>();
      n.label = j["label"].get<int>();
      if (j.contains("speech")) speech = j["speech"].get<bool>();
      const auto& feat = j["feature"];
      n.feature.reserve(feat.size());
      for (const auto& x : feat) n.feature.push_back(static_cast<float>(x.get<double>()));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + "bad field type (" + e.what() + ")");
    }
    if (n.label != 0 && n.label != 1) throw ParseError(where + "label must be 0 or 1");
    if ((n.modality == Modality::Video) != n.speaker_id.has_value()) {
      throw ParseError(where + "speaker_id must be present exactly on video nodes");
    }

    auto [it, inserted] = scene_index.try_emplace(scene_id, ds.scenes.size());
    if (inserted) ds.scenes.push_back(SceneSample{scene_id, {}});
    auto& scene = ds.scenes[it->second];
    if (n.modality == Modality::Audio) {
      if (!scene.frames.empty() && scene.frames.back().frame.audio.timestamp >= n.timestamp) {
        throw ParseError(where + "audio timestamps must increase within a scene");
      }
      SceneFrame sf;
      sf.audio_has_speech = speech.value_or(n.label == 1);
      sf.frame.audio = std::move(n);
      scene.frames.push_back(std::move(sf));
    } else {
      if (scene.frames.empty() || scene.frames.back().frame.audio.timestamp != n.timestamp) {
        throw ParseError(where + "video node does not follow its frame's audio node");
      }
      scene.frames.back().frame.videos.push_back(std::move(n));
    }
  }
  for (auto& s : ds.scenes) {
    for (auto& f : s.frames) {
      f.frame.audio.node_id = 0;
      for (std::size_t k = 0; k < f.frame.videos.size(); ++k) {
        f.frame.videos[k].node_id = static_cast<int>(k) + 1;
      }
      f.event = f.active_speaker()    ? FrameEvent::Speaking
                : f.audio_has_speech ? FrameEvent::Offscreen
                                     : FrameEvent::Silence;
    }
  }
  return ds;
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read dataset " + path);
  return read_dataset(in);
}

int offscreen_augment(std::vector<SceneSample>& batch, const AugmentOptions& options,
                      std::mt19937_64& rng) {
  if (!(options.probability >= 0.0 && options.probability <= 1.0)) {
    throw ConfigError("augmentation probability must lie in [0,1]");
  }
  std::vector<std::size_t> donors;
  for (std::size_t i = 0; i < batch.size(); ++i)
    if (batch[i].has_active_speaker()) donors.push_back(i);
  if (donors.empty() || options.probability == 0.0) return 0;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, donors.size() - 1);
  int modified = 0;
  for (auto& scene : batch) {
    if (scene.has_active_speaker()) continue;
    if (!(u01(rng) < options.probability)) continue;
    const auto& donor = batch[donors[pick(rng)]];
    for (std::size_t t = 0; t < scene.frames.size(); ++t) {
      const auto& src = donor.frames[t % donor.frames.size()];
      auto& dst = scene.frames[t];
      dst.frame.audio.feature = src.frame.audio.feature;
      // no face is active here, so the frame is silent or off-screen speech
      dst.audio_has_speech = src.audio_has_speech;
      dst.event = src.audio_has_speech ? FrameEvent::Offscreen : FrameEvent::Silence;
      if (options.audio_label_speech) dst.frame.audio.label = dst.audio_has_speech ? 1 : 0;
    }
    ++modified;
  }
  return modified;
}

}  // namespace maas
