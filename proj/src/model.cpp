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

#include "maas/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"
#include "maas/errors.hpp"

namespace maas {

const char* to_string(Streams s) {
  switch (s) {
    case Streams::StaticOnly:
      return "static";
    case Streams::DynamicOnly:
      return "dynamic";
    case Streams::Both:
      return "both";
  }
  return "both";
}

Streams parse_streams(const std::string& s) {
  if (s == "static" || s == "StaticOnly") return Streams::StaticOnly;
  if (s == "dynamic" || s == "DynamicOnly") return Streams::DynamicOnly;
  if (s == "both" || s == "Both") return Streams::Both;
  throw ConfigError("unknown streams value '" + s + "'");
}

const char* to_string(Fusion f) { return f == Fusion::Sum ? "sum" : "concat"; }

Fusion parse_fusion(const std::string& s) {
  if (s == "sum") return Fusion::Sum;
  if (s == "concat") return Fusion::Concat;
  throw ConfigError("unknown fusion value '" + s + "'");
}

void ModelConfig::validate() const {
  if (num_layers < 1) throw ConfigError("model.num_layers must be >= 1");
  if (hidden < 1) throw ConfigError("model.hidden must be >= 1");
  if (k_dynamic < 1) throw ConfigError("model.k_dynamic must be >= 1");
  if (input_dim < 1) throw ConfigError("model.input_dim must be >= 1");
}

std::string model_config_to_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["num_layers"] = c.num_layers;
  j["hidden"] = c.hidden;
  j["k_dynamic"] = c.k_dynamic;
  j["input_dim"] = c.input_dim;
  j["supervise_audio"] = c.supervise_audio;
  j["streams"] = to_string(c.streams);
  j["fusion"] = to_string(c.fusion);
  return j.dump();
}

ModelConfig model_config_from_json(const std::string& text) {
  ModelConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.num_layers = j.at("num_layers").get<int>();
    c.hidden = j.at("hidden").get<int>();
    c.k_dynamic = j.at("k_dynamic").get<int>();
    c.input_dim = j.at("input_dim").get<int>();
    c.supervise_audio = j.at("supervise_audio").get<bool>();
    c.streams = parse_streams(j.at("streams").get<std::string>());
    c.fusion = parse_fusion(j.value("fusion", std::string("sum")));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad model config: ") + e.what());
  }
  c.validate();
  return c;
}

NodeTargets node_labels(const AssignationGraph& graph, bool supervise_audio,
                        AudioTarget audio_target) {
  NodeTargets out;
  out.labels.resize(graph.nodes.size(), 0);
  out.weights.resize(graph.nodes.size(), 1.0f);
  // max over video labels per timestamp; an empty frame stays 0
  std::vector<std::pair<int, int>> frame_max;
  for (const auto& n : graph.nodes) {
    if (n.modality != Modality::Video) continue;
    auto it = std::find_if(frame_max.begin(), frame_max.end(),
                           [&](const auto& p) { return p.first == n.timestamp; });
    if (it == frame_max.end()) {
      frame_max.emplace_back(n.timestamp, n.label);
    } else {
      it->second = std::max(it->second, n.label);
    }
  }
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto& n = graph.nodes[i];
    if (n.modality == Modality::Video) {
      out.labels[i] = n.label;
      continue;
    }
    auto it = std::find_if(frame_max.begin(), frame_max.end(),
                           [&](const auto& p) { return p.first == n.timestamp; });
    out.labels[i] = it == frame_max.end() ? 0 : it->second;
    if (audio_target == AudioTarget::NodeLabel) out.labels[i] = n.label;
    if (!supervise_audio) out.weights[i] = 0.0f;
  }
  return out;
}

GraphBatch make_batch(std::span<const AssignationGraph> graphs, bool supervise_audio,
                      bool self_loops_only, AudioTarget audio_target) {
  GraphBatch b;
  b.offsets.push_back(0);
  for (const auto& g : graphs) {
    if (g.nodes.empty()) throw GraphError("cannot batch an empty graph");
    const auto dim = g.feature_dim();
    if (b.input_dim == 0) b.input_dim = dim;
    if (dim != b.input_dim) throw ShapeError("graphs in a batch disagree on feature dimension");
    const int base = static_cast<int>(b.num_nodes);
    for (const auto& n : g.nodes) {
      b.features.insert(b.features.end(), n.feature.begin(), n.feature.end());
      b.modality.push_back(n.modality);
    }
    for (const auto& e : g.edges) {
      if (self_loops_only && e.src != e.dst) continue;
      b.src.push_back(base + e.src);
      b.dst.push_back(base + e.dst);
    }
    const auto t = node_labels(g, supervise_audio, audio_target);
    b.targets.insert(b.targets.end(), t.labels.begin(), t.labels.end());
    b.loss_weights.insert(b.loss_weights.end(), t.weights.begin(), t.weights.end());
    b.num_nodes += g.nodes.size();
    b.offsets.push_back(b.num_nodes);
  }
  return b;
}

template <typename T>
MaasModel<T>::MaasModel(ModelConfig config) : config_(config) {
  config_.validate();
}

namespace {

template <typename T>
ad::Tensor<T> uniform(std::vector<std::size_t> shape, double bound, std::mt19937_64& rng) {
  ad::Tensor<T> t(std::move(shape));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.data) v = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
void add_linear(ad::ParamStore<T>& store, const std::string& prefix, std::size_t in,
                std::size_t out, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  store.add(prefix + ".W", uniform<T>({in, out}, bound, rng));
  store.add(prefix + ".b", uniform<T>({out}, bound, rng));
}

template <typename T>
void add_batchnorm(ad::ParamStore<T>& store, const std::string& prefix, std::size_t width) {
  store.add(prefix + ".gamma", ad::Tensor<T>({width}, T(1)));
  store.add(prefix + ".beta", ad::Tensor<T>({width}, T(0)));
  store.add(prefix + ".running_mean", ad::Tensor<T>({width}, T(0)), false);
  store.add(prefix + ".running_var", ad::Tensor<T>({width}, T(1)), false);
}

std::string layer_prefix(const char* stream, int layer) {
  return std::string(stream) + ".layer" + std::to_string(layer + 1);
}

}  // namespace

template <typename T>
void MaasModel<T>::init_params(ad::ParamStore<T>& store, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  const auto in = static_cast<std::size_t>(config_.input_dim);
  const auto h = static_cast<std::size_t>(config_.hidden);
  add_linear(store, "reduce.audio", in, h, rng);
  add_linear(store, "reduce.video", in, h, rng);
  const bool use_static = config_.streams != Streams::DynamicOnly;
  const bool use_dynamic = config_.streams != Streams::StaticOnly;
  for (int l = 0; l < config_.num_layers; ++l) {
    for (const char* stream : {"static", "dynamic"}) {
      const bool on = std::string(stream) == "static" ? use_static : use_dynamic;
      if (!on) continue;
      const auto p = layer_prefix(stream, l);
      add_batchnorm(store, p + ".bn", 2 * h);
      add_linear(store, p + ".lin", 2 * h, h, rng);
    }
    if (use_static && use_dynamic && config_.fusion == Fusion::Concat) {
      add_linear(store, "fuse.layer" + std::to_string(l + 1), 2 * h, h, rng);
    }
  }
  add_linear(store, "head", h, 2, rng);
}

template <typename T>
ad::Var MaasModel<T>::reduce_dims(ad::Tape<T>& tape, ad::ParamStore<T>& store,
                                  const GraphBatch& batch) const {
  if (batch.input_dim != static_cast<std::size_t>(config_.input_dim)) {
    throw ShapeError("node features have dimension " + std::to_string(batch.input_dim) +
                     ", model expects " + std::to_string(config_.input_dim));
  }
  const std::size_t d = batch.input_dim;
  std::vector<int> audio_rows;
  std::vector<int> video_rows;
  for (std::size_t i = 0; i < batch.num_nodes; ++i) {
    (batch.modality[i] == Modality::Audio ? audio_rows : video_rows).push_back(static_cast<int>(i));
  }
  auto rows_of = [&](const std::vector<int>& rows) {
    ad::Tensor<T> t({rows.size(), d});
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const float* src = batch.features.data() + static_cast<std::size_t>(rows[r]) * d;
      std::copy_n(src, d, t.data.data() + r * d);
    }
    return t;
  };
  auto project = [&](const std::vector<int>& rows, const char* which) {
    const std::string p = std::string("reduce.") + which;
    return linear(tape, tape.constant(rows_of(rows)), tape.param(store, p + ".W"),
                  tape.param(store, p + ".b"));
  };
  if (video_rows.empty()) return project(audio_rows, "audio");
  if (audio_rows.empty()) return project(video_rows, "video");
  ad::Var stacked = concat_rows(tape, project(audio_rows, "audio"), project(video_rows, "video"));
  // undo the audio-first stacking
  std::vector<int> order(batch.num_nodes);
  for (std::size_t r = 0; r < audio_rows.size(); ++r) order[static_cast<std::size_t>(audio_rows[r])] = static_cast<int>(r);
  for (std::size_t r = 0; r < video_rows.size(); ++r)
    order[static_cast<std::size_t>(video_rows[r])] = static_cast<int>(audio_rows.size() + r);
  return gather_rows(tape, stacked, std::move(order));
}

template <typename T>
ad::Var MaasModel<T>::edge_conv(ad::Tape<T>& tape, ad::ParamStore<T>& store,
                                const std::string& prefix, ad::Var x, std::span<const int> src,
                                std::span<const int> dst, bool training) const {
  const std::size_t n = tape.value(x).rows();
  ad::Var e = edge_features(tape, x, src, dst);
  auto& bn_mean = store.value(prefix + ".bn.running_mean");
  auto& bn_var = store.value(prefix + ".bn.running_var");
  ad::BatchNormOptions bn_opts;
  bn_opts.training = training;
  ad::Var normed = batchnorm(tape, e, tape.param(store, prefix + ".bn.gamma"),
                             tape.param(store, prefix + ".bn.beta"), bn_mean, bn_var, bn_opts);
  ad::Var msg = linear(tape, relu(tape, normed), tape.param(store, prefix + ".lin.W"),
                       tape.param(store, prefix + ".lin.b"));
  return segment_max(tape, msg, dst, n);
}

template <typename T>
std::vector<Edge> MaasModel<T>::dynamic_edges(const ad::Tensor<T>& features,
                                              const GraphBatch& batch) const {
  std::vector<Edge> edges;
  const std::size_t c = features.cols();
  for (std::size_t g = 0; g + 1 < batch.offsets.size(); ++g) {
    const std::size_t begin = batch.offsets[g];
    const std::size_t rows = batch.offsets[g + 1] - begin;
    std::span<const T> block(features.data.data() + begin * c, rows * c);
    const int base = static_cast<int>(begin);
    for (const auto& e : knn_edges<T>(block, rows, c, config_.k_dynamic)) {
      edges.push_back({base + e.src, base + e.dst});
    }
    for (std::size_t i = 0; i < rows; ++i) {
      edges.push_back({base + static_cast<int>(i), base + static_cast<int>(i)});
    }
  }
  return edges;
}

template <typename T>
ad::Var MaasModel<T>::forward(ad::Tape<T>& tape, ad::ParamStore<T>& store,
                              const GraphBatch& batch, bool training,
                              ForwardTrace* trace) const {
  if (batch.num_nodes == 0) throw EmptyBatch("forward on an empty batch");
  ad::Var h = reduce_dims(tape, store, batch);
  const bool use_static = config_.streams != Streams::DynamicOnly;
  const bool use_dynamic = config_.streams != Streams::StaticOnly;
  std::vector<int> dsrc;
  std::vector<int> ddst;
  for (int l = 0; l < config_.num_layers; ++l) {
    ad::Var s{};
    ad::Var d{};
    if (use_static) {
      s = edge_conv(tape, store, layer_prefix("static", l), h, batch.src, batch.dst, training);
    }
    if (use_dynamic) {
      auto edges = dynamic_edges(tape.value(h), batch);
      dsrc.clear();
      ddst.clear();
      for (const auto& e : edges) {
        dsrc.push_back(e.src);
        ddst.push_back(e.dst);
      }
      if (trace) trace->dynamic_edges.push_back(std::move(edges));
      d = edge_conv(tape, store, layer_prefix("dynamic", l), h, dsrc, ddst, training);
    }
    if (use_static && use_dynamic) {
      if (config_.fusion == Fusion::Sum) {
        h = add(tape, s, d);
      } else {
        const std::string p = "fuse.layer" + std::to_string(l + 1);
        h = linear(tape, concat_cols(tape, s, d), tape.param(store, p + ".W"),
                   tape.param(store, p + ".b"));
      }
    } else {
      h = use_static ? s : d;
    }
  }
  return linear(tape, h, tape.param(store, "head.W"), tape.param(store, "head.b"));
}

template <typename T>
ad::Var MaasModel<T>::loss(ad::Tape<T>& tape, ad::Var logits, const GraphBatch& batch) const {
  std::vector<T> w(batch.loss_weights.begin(), batch.loss_weights.end());
  return softmax_xent<T>(tape, logits, batch.targets, w);
}

template <typename T>
ad::Tensor<T> MaasModel<T>::predict(ad::ParamStore<T>& store, const GraphBatch& batch,
                                    ForwardTrace* trace) const {
  ad::Tape<T> tape;
  return tape.value(forward(tape, store, batch, false, trace));
}

template class MaasModel<float>;
template class MaasModel<double>;

}  // namespace maas
