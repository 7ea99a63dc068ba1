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
#include <span>
#include <string>
#include <vector>

#include "maas/autodiff.hpp"
#include "maas/graph.hpp"
#include "maas/param_store.hpp"

namespace maas {

enum class Streams { StaticOnly, DynamicOnly, Both };
enum class Fusion { Sum, Concat };

const char* to_string(Streams s);
Streams parse_streams(const std::string& s);
const char* to_string(Fusion f);
Fusion parse_fusion(const std::string& s);

struct ModelConfig {
  int num_layers = 4;
  int hidden = 64;
  int k_dynamic = 3;
  int input_dim = 512;
  bool supervise_audio = true;
  Streams streams = Streams::Both;
  // Concat merges the two streams with a learned hidden*2 -> hidden map.
  Fusion fusion = Fusion::Sum;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Several assignation graphs packed as one disjoint union. Node i of graph g
/// lands at offsets[g] + i; dynamic neighbourhoods never cross offsets.
struct GraphBatch {
  std::size_t num_nodes = 0;
  std::size_t input_dim = 0;
  std::vector<float> features;  // num_nodes x input_dim, row-major
  std::vector<Modality> modality;
  std::vector<int> src;  // static edges, batch numbering
  std::vector<int> dst;
  std::vector<std::size_t> offsets;  // num_graphs + 1 entries
  std::vector<int> targets;
  std::vector<float> loss_weights;
};

/// How audio nodes are supervised. MaxOfVideos derives the target from the
/// faces in the graph; NodeLabel trusts the audio node's own label (used when
/// augmented off-screen speech is labelled as speech).
enum class AudioTarget { MaxOfVideos, NodeLabel };

/// Per-node training targets. Video nodes keep their own label; an audio
/// node is positive when any video node at its timestamp is (0 for a frame
/// without faces). With supervise_audio=false audio nodes get weight 0.
struct NodeTargets {
  std::vector<int> labels;
  std::vector<float> weights;
};
NodeTargets node_labels(const AssignationGraph& graph, bool supervise_audio,
                        AudioTarget audio_target = AudioTarget::MaxOfVideos);

/// Packs graphs into a batch. self_loops_only drops every static edge except
/// the per-node self-loops (the no-edge baseline).
GraphBatch make_batch(std::span<const AssignationGraph> graphs, bool supervise_audio,
                      bool self_loops_only = false,
                      AudioTarget audio_target = AudioTarget::MaxOfVideos);

/// Layer-wise record of what the dynamic stream connected.
struct ForwardTrace {
  std::vector<std::vector<Edge>> dynamic_edges;  // per layer, batch numbering
};

/// Two-stream edge-convolution network over assignation graphs.
template <typename T>
class MaasModel {
 public:
  explicit MaasModel(ModelConfig config);

  const ModelConfig& config() const { return config_; }

  /// Creates every parameter and buffer with a seeded uniform init.
  void init_params(ad::ParamStore<T>& store, std::uint64_t seed) const;

  /// Modality-specific input_dim -> hidden reduction.
  ad::Var reduce_dims(ad::Tape<T>& tape, ad::ParamStore<T>& store, const GraphBatch& batch) const;

  /// One edge convolution: per edge (j -> i) the message is
  /// Linear(ReLU(BN([x_i || x_j - x_i]))), aggregated by element-wise max.
  ad::Var edge_conv(ad::Tape<T>& tape, ad::ParamStore<T>& store, const std::string& prefix,
                    ad::Var x, std::span<const int> src, std::span<const int> dst,
                    bool training) const;

  /// Logits [num_nodes x 2]. Training mode uses batch statistics and updates
  /// the batch-norm running buffers.
  ad::Var forward(ad::Tape<T>& tape, ad::ParamStore<T>& store, const GraphBatch& batch,
                  bool training, ForwardTrace* trace = nullptr) const;

  /// Masked cross-entropy of forward() against the batch targets.
  ad::Var loss(ad::Tape<T>& tape, ad::Var logits, const GraphBatch& batch) const;

  /// Eval-mode logits without keeping the tape.
  ad::Tensor<T> predict(ad::ParamStore<T>& store, const GraphBatch& batch,
                        ForwardTrace* trace = nullptr) const;

  /// Dynamic-stream edges for one layer input: per-graph KNN plus a
  /// self-loop per node.
  std::vector<Edge> dynamic_edges(const ad::Tensor<T>& features, const GraphBatch& batch) const;

 private:
  ModelConfig config_;
};

std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& json);

}  // namespace maas
