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

#include "maas/param_store.hpp"

#include <cmath>

namespace maas::ad {

template <typename T>
Tensor<T>& ParamStore<T>::add(const std::string& path, Tensor<T> init, bool trainable) {
  if (entries_.count(path)) throw ConfigError("duplicate parameter path " + path);
  Entry e;
  e.grad = Tensor<T>(init.shape, T(0));
  if (trainable) {
    e.m = Tensor<T>(init.shape, T(0));
    e.v = Tensor<T>(init.shape, T(0));
  }
  e.value = std::move(init);
  e.value.requires_grad = trainable;
  e.trainable = trainable;
  return entries_.emplace(path, std::move(e)).first->second.value;
}

template <typename T>
typename ParamStore<T>::Entry& ParamStore<T>::entry(const std::string& path) {
  auto it = entries_.find(path);
  if (it == entries_.end()) throw ConfigError("unknown parameter path " + path);
  return it->second;
}

template <typename T>
const typename ParamStore<T>::Entry& ParamStore<T>::entry(const std::string& path) const {
  auto it = entries_.find(path);
  if (it == entries_.end()) throw ConfigError("unknown parameter path " + path);
  return it->second;
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& [path, e] : entries_) std::fill(e.grad.data.begin(), e.grad.data.end(), T(0));
}

template <typename T>
std::size_t ParamStore<T>::num_trainable_scalars() const {
  std::size_t n = 0;
  for (const auto& [path, e] : entries_)
    if (e.trainable) n += e.value.numel();
  return n;
}

template <typename T>
void adam_step(ParamStore<T>& params, const AdamOptions& options) {
  for (const auto& [path, e] : params.entries()) {
    if (!e.trainable) continue;
    for (T g : e.grad.data) {
      if (!std::isfinite(g)) throw NumericsError("non-finite gradient in " + path);
    }
  }
  const std::int64_t step = params.step() + 1;
  const double bc1 = 1.0 - std::pow(options.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(options.beta2, static_cast<double>(step));
  const T b1 = static_cast<T>(options.beta1);
  const T b2 = static_cast<T>(options.beta2);
  for (auto& [path, e] : params.entries()) {
    if (!e.trainable) continue;
    for (std::size_t i = 0; i < e.value.data.size(); ++i) {
      const T g = e.grad.data[i];
      e.m.data[i] = b1 * e.m.data[i] + (T(1) - b1) * g;
      e.v.data[i] = b2 * e.v.data[i] + (T(1) - b2) * g * g;
      const double mhat = static_cast<double>(e.m.data[i]) / bc1;
      const double vhat = static_cast<double>(e.v.data[i]) / bc2;
      e.value.data[i] -= static_cast<T>(options.lr * mhat / (std::sqrt(vhat) + options.eps));
    }
  }
  params.set_step(step);
}

template class ParamStore<float>;
template class ParamStore<double>;
template void adam_step<float>(ParamStore<float>&, const AdamOptions&);
template void adam_step<double>(ParamStore<double>&, const AdamOptions&);

}  // namespace maas::ad
