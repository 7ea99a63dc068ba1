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
#include <map>
#include <string>
#include <vector>

#include "maas/tensor.hpp"

namespace maas::ad {

/// Named parameters plus non-trainable buffers (batch-norm running stats)
/// and the ADAM moments for every trainable entry. Iteration order is the
/// lexicographic order of the paths, which fixes checkpoint layout.
template <typename T>
class ParamStore {
 public:
  struct Entry {
    Tensor<T> value;
    Tensor<T> grad;
    Tensor<T> m;
    Tensor<T> v;
    bool trainable = true;
  };

  /// Registers a trainable parameter (or a buffer when trainable=false).
  Tensor<T>& add(const std::string& path, Tensor<T> init, bool trainable = true);

  bool contains(const std::string& path) const { return entries_.count(path) != 0; }
  Entry& entry(const std::string& path);
  const Entry& entry(const std::string& path) const;
  Tensor<T>& value(const std::string& path) { return entry(path).value; }
  const Tensor<T>& value(const std::string& path) const { return entry(path).value; }
  Tensor<T>& grad(const std::string& path) { return entry(path).grad; }

  std::map<std::string, Entry>& entries() { return entries_; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  void zero_grad();
  std::int64_t step() const { return step_; }
  void set_step(std::int64_t s) { step_ = s; }
  std::size_t num_trainable_scalars() const;

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (const auto& [path, e] : entries_) {
      auto& dst = out.entries()[path];
      dst.value = e.value.template cast<U>();
      dst.grad = e.grad.template cast<U>();
      dst.m = e.m.template cast<U>();
      dst.v = e.v.template cast<U>();
      dst.trainable = e.trainable;
    }
    out.set_step(step_);
    return out;
  }

 private:
  std::map<std::string, Entry> entries_;
  std::int64_t step_ = 0;
};

struct AdamOptions {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected ADAM update of every trainable entry from its stored
/// gradient. Throws NumericsError, leaving the store untouched, when any
/// gradient is not finite.
template <typename T>
void adam_step(ParamStore<T>& params, const AdamOptions& options);

}  // namespace maas::ad
