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

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maas/param_store.hpp"
#include "maas/tensor.hpp"

namespace maas::ad {

/// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
};

/// Reverse-mode tape. Every op appends a node holding its forward value and a
/// closure that pushes the node's gradient into its inputs. Nodes are stored
/// in creation order, which is a valid topological order for backward().
template <typename T>
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor<T>& grad_out)>;

  Var constant(Tensor<T> value) { return push(std::move(value), false, nullptr); }
  Var variable(Tensor<T> value) { return push(std::move(value), true, nullptr); }

  /// Leaf bound to a store entry; export_grads() adds its gradient back.
  Var param(ParamStore<T>& store, const std::string& path);

  Var push(Tensor<T> value, bool requires_grad, Backward backward);

  const Tensor<T>& value(Var v) const { return nodes_[idx(v)].value; }
  bool requires_grad(Var v) const { return nodes_[idx(v)].requires_grad; }

  /// Gradient buffer of a node, allocated (zeroed) on first access.
  Tensor<T>& grad(Var v);
  bool has_grad(Var v) const { return !nodes_[idx(v)].grad.data.empty(); }

  /// Seeds d(loss)/d(loss) = 1 for a scalar and runs every closure in reverse.
  void backward(Var loss);

  /// Adds the gradients of param() leaves into the store's grad tensors.
  void export_grads(ParamStore<T>& store) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::size_t idx(Var v) const { return static_cast<std::size_t>(v.id); }

  std::vector<Node> nodes_;
  std::vector<std::pair<int, std::string>> bindings_;
};

/// y = x W + b with x [n x din], W [din x dout], b [dout].
template <typename T>
Var linear(Tape<T>& tape, Var x, Var w, Var b);

template <typename T>
Var add(Tape<T>& tape, Var a, Var b);

template <typename T>
Var relu(Tape<T>& tape, Var x);

/// Sum of every element, as a [1] tensor.
template <typename T>
Var sum(Tape<T>& tape, Var x);

/// out[r] = x[index[r]].
template <typename T>
Var gather_rows(Tape<T>& tape, Var x, std::vector<int> index);

/// Stacks a on top of b (same column count).
template <typename T>
Var concat_rows(Tape<T>& tape, Var a, Var b);

/// Concatenates a and b side by side (same row count).
template <typename T>
Var concat_cols(Tape<T>& tape, Var a, Var b);

/// Per-edge feature block [x_dst || x_src - x_dst] for edges (src, dst).
template <typename T>
Var edge_features(Tape<T>& tape, Var x, std::span<const int> src, std::span<const int> dst);

/// Element-wise max over rows grouped by segment id; out has num_segments
/// rows. Every segment must receive at least one row (GraphError otherwise).
template <typename T>
Var segment_max(Tape<T>& tape, Var x, std::span<const int> segment, std::size_t num_segments);

struct BatchNormOptions {
  bool training = true;
  double momentum = 0.1;
  double eps = 1e-5;
};

/// Per-column batch normalization with affine gamma/beta. In training mode
/// the batch statistics normalize the input and update the running buffers
/// (running = (1 - momentum) running + momentum batch, unbiased variance);
/// in eval mode the running buffers are used. Throws EmptyBatch on 0 rows.
template <typename T>
Var batchnorm(Tape<T>& tape, Var x, Var gamma, Var beta, Tensor<T>& running_mean,
              Tensor<T>& running_var, const BatchNormOptions& options);

/// Mean over weighted rows of -log softmax(logits)[label]. Rows with weight 0
/// are excluded from both the sum and the normalizer. Throws LabelError for
/// labels outside [0, classes).
template <typename T>
Var softmax_xent(Tape<T>& tape, Var logits, std::span<const int> labels,
                 std::span<const T> weights = {});

/// Row-wise softmax of a plain tensor (no tape).
template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits);

}  // namespace maas::ad
