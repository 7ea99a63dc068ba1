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

#include "maas/autodiff.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

namespace maas::ad {

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

template <typename T>
ConstMatMap<T> as_mat(const Tensor<T>& t) {
  return ConstMatMap<T>(t.data.data(), static_cast<Eigen::Index>(t.rows()),
                        static_cast<Eigen::Index>(t.cols()));
}
template <typename T>
MatMap<T> as_mat(Tensor<T>& t) {
  return MatMap<T>(t.data.data(), static_cast<Eigen::Index>(t.rows()),
                   static_cast<Eigen::Index>(t.cols()));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

template <typename T>
void require_matrix(const Tensor<T>& t, const char* op) {
  require(t.rank() == 2, std::string(op) + ": expected a matrix, got " + shape_string(t.shape));
}

}  // namespace

template <typename T>
Var Tape<T>::push(Tensor<T> value, bool requires_grad, Backward backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.value.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::param(ParamStore<T>& store, const std::string& path) {
  const auto& e = store.entry(path);
  Var v = push(e.value, e.trainable, nullptr);
  if (e.trainable) bindings_.emplace_back(v.id, path);
  return v;
}

template <typename T>
Tensor<T>& Tape<T>::grad(Var v) {
  auto& n = nodes_[idx(v)];
  if (n.grad.data.empty()) n.grad = Tensor<T>(n.value.shape, T(0));
  return n.grad;
}

template <typename T>
void Tape<T>::backward(Var loss) {
  require(value(loss).numel() == 1, "backward() needs a scalar loss");
  grad(loss).data[0] = T(1);
  for (int i = static_cast<int>(idx(loss)); i >= 0; --i) {
    auto& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.backward || n.grad.data.empty()) continue;
    n.backward(*this, n.grad);
  }
}

template <typename T>
void Tape<T>::export_grads(ParamStore<T>& store) const {
  for (const auto& [id, path] : bindings_) {
    const auto& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.data.empty()) continue;
    auto& g = store.grad(path);
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += n.grad.data[i];
  }
}

template <typename T>
Var linear(Tape<T>& tape, Var x, Var w, Var b) {
  const auto& X = tape.value(x);
  const auto& W = tape.value(w);
  const auto& B = tape.value(b);
  require_matrix(X, "linear");
  require_matrix(W, "linear");
  require(X.cols() == W.rows(), "linear: input " + shape_string(X.shape) + " vs weight " +
                                    shape_string(W.shape));
  require(B.numel() == W.cols(), "linear: bias " + shape_string(B.shape) + " vs weight " +
                                     shape_string(W.shape));
  Tensor<T> y({X.rows(), W.cols()});
  auto Y = as_mat(y);
  Y.noalias() = as_mat(X) * as_mat(W);
  Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bias(B.data.data(),
                                                             static_cast<Eigen::Index>(B.numel()));
  Y.rowwise() += bias;
  const bool rg = tape.requires_grad(x) || tape.requires_grad(w) || tape.requires_grad(b);
  return tape.push(std::move(y), rg, [x, w, b](Tape<T>& t, const Tensor<T>& gy) {
    const auto GY = as_mat(gy);
    if (t.requires_grad(x)) as_mat(t.grad(x)).noalias() += GY * as_mat(t.value(w)).transpose();
    if (t.requires_grad(w)) as_mat(t.grad(w)).noalias() += as_mat(t.value(x)).transpose() * GY;
    if (t.requires_grad(b)) {
      auto& gb = t.grad(b);
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> GB(gb.data.data(),
                                                         static_cast<Eigen::Index>(gb.numel()));
      GB += GY.colwise().sum();
    }
  });
}

template <typename T>
Var add(Tape<T>& tape, Var a, Var b) {
  const auto& A = tape.value(a);
  const auto& B = tape.value(b);
  require(A.shape == B.shape,
          "add: shape " + shape_string(A.shape) + " vs " + shape_string(B.shape));
  Tensor<T> y = A;
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += B.data[i];
  const bool rg = tape.requires_grad(a) || tape.requires_grad(b);
  return tape.push(std::move(y), rg, [a, b](Tape<T>& t, const Tensor<T>& gy) {
    for (Var v : {a, b}) {
      if (!t.requires_grad(v)) continue;
      auto& g = t.grad(v);
      for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += gy.data[i];
    }
  });
}

template <typename T>
Var relu(Tape<T>& tape, Var x) {
  Tensor<T> y = tape.value(x);
  for (auto& v : y.data) v = v > T(0) ? v : T(0);
  return tape.push(std::move(y), tape.requires_grad(x), [x](Tape<T>& t, const Tensor<T>& gy) {
    const auto& X = t.value(x);
    auto& g = t.grad(x);
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      if (X.data[i] > T(0)) g.data[i] += gy.data[i];
    }
  });
}

template <typename T>
Var sum(Tape<T>& tape, Var x) {
  const auto& X = tape.value(x);
  T s = T(0);
  for (T v : X.data) s += v;
  return tape.push(Tensor<T>({1}, std::vector<T>{s}), tape.requires_grad(x),
                   [x](Tape<T>& t, const Tensor<T>& gy) {
                     auto& g = t.grad(x);
                     for (auto& v : g.data) v += gy.data[0];
                   });
}

template <typename T>
Var gather_rows(Tape<T>& tape, Var x, std::vector<int> index) {
  const auto& X = tape.value(x);
  require_matrix(X, "gather_rows");
  const std::size_t c = X.cols();
  Tensor<T> y({index.size(), c});
  for (std::size_t r = 0; r < index.size(); ++r) {
    const auto src = static_cast<std::size_t>(index[r]);
    require(index[r] >= 0 && src < X.rows(), "gather_rows: index out of range");
    std::copy_n(X.data.data() + src * c, c, y.data.data() + r * c);
  }
  return tape.push(std::move(y), tape.requires_grad(x),
                   [x, index = std::move(index), c](Tape<T>& t, const Tensor<T>& gy) {
                     auto& g = t.grad(x);
                     for (std::size_t r = 0; r < index.size(); ++r) {
                       T* dst = g.data.data() + static_cast<std::size_t>(index[r]) * c;
                       const T* src = gy.data.data() + r * c;
                       for (std::size_t k = 0; k < c; ++k) dst[k] += src[k];
                     }
                   });
}

template <typename T>
Var concat_rows(Tape<T>& tape, Var a, Var b) {
  const auto& A = tape.value(a);
  const auto& B = tape.value(b);
  require_matrix(A, "concat_rows");
  require_matrix(B, "concat_rows");
  require(A.cols() == B.cols(), "concat_rows: column mismatch");
  Tensor<T> y({A.rows() + B.rows(), A.cols()});
  std::copy(A.data.begin(), A.data.end(), y.data.begin());
  std::copy(B.data.begin(), B.data.end(), y.data.begin() + static_cast<std::ptrdiff_t>(A.numel()));
  const bool rg = tape.requires_grad(a) || tape.requires_grad(b);
  const std::size_t split = A.numel();
  return tape.push(std::move(y), rg, [a, b, split](Tape<T>& t, const Tensor<T>& gy) {
    if (t.requires_grad(a)) {
      auto& g = t.grad(a);
      for (std::size_t i = 0; i < split; ++i) g.data[i] += gy.data[i];
    }
    if (t.requires_grad(b)) {
      auto& g = t.grad(b);
      for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += gy.data[split + i];
    }
  });
}

template <typename T>
Var concat_cols(Tape<T>& tape, Var a, Var b) {
  const auto& A = tape.value(a);
  const auto& B = tape.value(b);
  require_matrix(A, "concat_cols");
  require_matrix(B, "concat_cols");
  require(A.rows() == B.rows(), "concat_cols: row mismatch");
  const std::size_t ca = A.cols();
  const std::size_t cb = B.cols();
  Tensor<T> y({A.rows(), ca + cb});
  for (std::size_t r = 0; r < A.rows(); ++r) {
    std::copy_n(A.data.data() + r * ca, ca, y.data.data() + r * (ca + cb));
    std::copy_n(B.data.data() + r * cb, cb, y.data.data() + r * (ca + cb) + ca);
  }
  const bool rg = tape.requires_grad(a) || tape.requires_grad(b);
  return tape.push(std::move(y), rg, [a, b, ca, cb](Tape<T>& t, const Tensor<T>& gy) {
    const std::size_t rows = gy.rows();
    if (t.requires_grad(a)) {
      auto& g = t.grad(a);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = 0; k < ca; ++k) g.data[r * ca + k] += gy.data[r * (ca + cb) + k];
    }
    if (t.requires_grad(b)) {
      auto& g = t.grad(b);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = 0; k < cb; ++k)
          g.data[r * cb + k] += gy.data[r * (ca + cb) + ca + k];
    }
  });
}

template <typename T>
Var edge_features(Tape<T>& tape, Var x, std::span<const int> src, std::span<const int> dst) {
  const auto& X = tape.value(x);
  require_matrix(X, "edge_features");
  require(src.size() == dst.size(), "edge_features: src/dst length mismatch");
  const std::size_t c = X.cols();
  const std::size_t n = X.rows();
  Tensor<T> y({src.size(), 2 * c});
  for (std::size_t e = 0; e < src.size(); ++e) {
    if (src[e] < 0 || dst[e] < 0 || static_cast<std::size_t>(src[e]) >= n ||
        static_cast<std::size_t>(dst[e]) >= n) {
      throw GraphError("edge references a node outside the graph");
    }
    const T* xi = X.data.data() + static_cast<std::size_t>(dst[e]) * c;
    const T* xj = X.data.data() + static_cast<std::size_t>(src[e]) * c;
    T* out = y.data.data() + e * 2 * c;
    for (std::size_t k = 0; k < c; ++k) {
      out[k] = xi[k];
      out[c + k] = xj[k] - xi[k];
    }
  }
  std::vector<int> s(src.begin(), src.end());
  std::vector<int> d(dst.begin(), dst.end());
  return tape.push(std::move(y), tape.requires_grad(x),
                   [x, s = std::move(s), d = std::move(d), c](Tape<T>& t, const Tensor<T>& gy) {
                     auto& g = t.grad(x);
                     for (std::size_t e = 0; e < s.size(); ++e) {
                       T* gi = g.data.data() + static_cast<std::size_t>(d[e]) * c;
                       T* gj = g.data.data() + static_cast<std::size_t>(s[e]) * c;
                       const T* ge = gy.data.data() + e * 2 * c;
                       for (std::size_t k = 0; k < c; ++k) {
                         gi[k] += ge[k] - ge[c + k];
                         gj[k] += ge[c + k];
                       }
                     }
                   });
}

template <typename T>
Var segment_max(Tape<T>& tape, Var x, std::span<const int> segment, std::size_t num_segments) {
  const auto& X = tape.value(x);
  require_matrix(X, "segment_max");
  require(segment.size() == X.rows(), "segment_max: one segment id per row required");
  const std::size_t c = X.cols();
  Tensor<T> y({num_segments, c}, -std::numeric_limits<T>::infinity());
  std::vector<int> arg(num_segments * c, -1);
  for (std::size_t r = 0; r < segment.size(); ++r) {
    const auto s = static_cast<std::size_t>(segment[r]);
    require(segment[r] >= 0 && s < num_segments, "segment_max: segment id out of range");
    const T* row = X.data.data() + r * c;
    T* out = y.data.data() + s * c;
    int* a = arg.data() + s * c;
    for (std::size_t k = 0; k < c; ++k) {
      // strict > keeps the first row on ties
      if (a[k] < 0 || row[k] > out[k]) {
        out[k] = row[k];
        a[k] = static_cast<int>(r);
      }
    }
  }
  for (std::size_t s = 0; s < num_segments; ++s) {
    if (arg[s * c] < 0 && c > 0) {
      throw GraphError("node " + std::to_string(s) + " has no incoming edges");
    }
  }
  return tape.push(std::move(y), tape.requires_grad(x),
                   [x, arg = std::move(arg), c](Tape<T>& t, const Tensor<T>& gy) {
                     auto& g = t.grad(x);
                     for (std::size_t i = 0; i < arg.size(); ++i) {
                       g.data[static_cast<std::size_t>(arg[i]) * c + i % c] += gy.data[i];
                     }
                   });
}

template <typename T>
Var batchnorm(Tape<T>& tape, Var x, Var gamma, Var beta, Tensor<T>& running_mean,
              Tensor<T>& running_var, const BatchNormOptions& options) {
  const auto& X = tape.value(x);
  require_matrix(X, "batchnorm");
  const std::size_t n = X.rows();
  const std::size_t c = X.cols();
  if (n == 0) throw EmptyBatch("batchnorm over an empty batch");
  const auto& G = tape.value(gamma);
  const auto& B = tape.value(beta);
  require(G.numel() == c && B.numel() == c && running_mean.numel() == c &&
              running_var.numel() == c,
          "batchnorm: parameter width does not match input " + shape_string(X.shape));

  std::vector<T> mean(c, T(0));
  std::vector<T> inv_std(c, T(0));
  if (options.training) {
    std::vector<double> mu(c, 0.0);
    std::vector<double> var(c, 0.0);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = 0; k < c; ++k) mu[k] += static_cast<double>(X.data[r * c + k]);
    for (auto& m : mu) m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = 0; k < c; ++k) {
        const double d = static_cast<double>(X.data[r * c + k]) - mu[k];
        var[k] += d * d;
      }
    for (std::size_t k = 0; k < c; ++k) {
      const double biased = var[k] / static_cast<double>(n);
      const double unbiased = n > 1 ? var[k] / static_cast<double>(n - 1) : biased;
      mean[k] = static_cast<T>(mu[k]);
      inv_std[k] = static_cast<T>(1.0 / std::sqrt(biased + options.eps));
      const double mom = options.momentum;
      running_mean.data[k] =
          static_cast<T>((1.0 - mom) * static_cast<double>(running_mean.data[k]) + mom * mu[k]);
      running_var.data[k] =
          static_cast<T>((1.0 - mom) * static_cast<double>(running_var.data[k]) + mom * unbiased);
    }
  } else {
    for (std::size_t k = 0; k < c; ++k) {
      mean[k] = running_mean.data[k];
      inv_std[k] = static_cast<T>(
          1.0 / std::sqrt(static_cast<double>(running_var.data[k]) + options.eps));
    }
  }

  Tensor<T> xhat({n, c});
  Tensor<T> y({n, c});
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < c; ++k) {
      const T h = (X.data[r * c + k] - mean[k]) * inv_std[k];
      xhat.data[r * c + k] = h;
      y.data[r * c + k] = G.data[k] * h + B.data[k];
    }

  const bool rg = tape.requires_grad(x) || tape.requires_grad(gamma) || tape.requires_grad(beta);
  const bool training = options.training;
  return tape.push(
      std::move(y), rg,
      [x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std), n, c, training](
          Tape<T>& t, const Tensor<T>& gy) {
        std::vector<T> sum_gy(c, T(0));
        std::vector<T> sum_gy_xhat(c, T(0));
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t k = 0; k < c; ++k) {
            sum_gy[k] += gy.data[r * c + k];
            sum_gy_xhat[k] += gy.data[r * c + k] * xhat.data[r * c + k];
          }
        if (t.requires_grad(gamma)) {
          auto& g = t.grad(gamma);
          for (std::size_t k = 0; k < c; ++k) g.data[k] += sum_gy_xhat[k];
        }
        if (t.requires_grad(beta)) {
          auto& g = t.grad(beta);
          for (std::size_t k = 0; k < c; ++k) g.data[k] += sum_gy[k];
        }
        if (!t.requires_grad(x)) return;
        const auto& G = t.value(gamma);
        auto& gx = t.grad(x);
        const T inv_n = T(1) / static_cast<T>(n);
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t k = 0; k < c; ++k) {
            const T g = gy.data[r * c + k];
            if (training) {
              gx.data[r * c + k] += G.data[k] * inv_std[k] *
                                    (g - inv_n * sum_gy[k] -
                                     xhat.data[r * c + k] * inv_n * sum_gy_xhat[k]);
            } else {
              gx.data[r * c + k] += G.data[k] * inv_std[k] * g;
            }
          }
      });
}

template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits) {
  Tensor<T> p = logits;
  const std::size_t c = logits.cols();
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    T* row = p.data.data() + r * c;
    const T mx = *std::max_element(row, row + c);
    T z = T(0);
    for (std::size_t k = 0; k < c; ++k) {
      row[k] = std::exp(row[k] - mx);
      z += row[k];
    }
    for (std::size_t k = 0; k < c; ++k) row[k] /= z;
  }
  return p;
}

template <typename T>
Var softmax_xent(Tape<T>& tape, Var logits, std::span<const int> labels,
                 std::span<const T> weights) {
  const auto& L = tape.value(logits);
  require_matrix(L, "softmax_xent");
  const std::size_t n = L.rows();
  const std::size_t c = L.cols();
  require(labels.size() == n, "softmax_xent: one label per row required");
  require(weights.empty() || weights.size() == n, "softmax_xent: one weight per row required");
  std::vector<T> w(n, T(1));
  if (!weights.empty()) w.assign(weights.begin(), weights.end());
  T denom = T(0);
  for (T v : w) denom += v;
  for (std::size_t r = 0; r < n; ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= c) {
      throw LabelError("label " + std::to_string(labels[r]) + " at row " + std::to_string(r) +
                       " is outside [0, " + std::to_string(c) + ")");
    }
  }
  Tensor<T> prob = softmax_rows(L);
  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (w[r] == T(0)) continue;
    const T* row = L.data.data() + r * c;
    const T mx = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t k = 0; k < c; ++k) z += std::exp(static_cast<double>(row[k] - mx));
    const double logp = static_cast<double>(row[labels[r]] - mx) - std::log(z);
    loss -= static_cast<double>(w[r]) * logp;
  }
  const T scale = denom > T(0) ? T(1) / denom : T(0);
  loss *= static_cast<double>(scale);
  std::vector<int> lab(labels.begin(), labels.end());
  return tape.push(
      Tensor<T>({1}, std::vector<T>{static_cast<T>(loss)}), tape.requires_grad(logits),
      [logits, prob = std::move(prob), lab = std::move(lab), w = std::move(w), scale, c](
          Tape<T>& t, const Tensor<T>& gy) {
        auto& g = t.grad(logits);
        const T up = gy.data[0] * scale;
        for (std::size_t r = 0; r < lab.size(); ++r) {
          if (w[r] == T(0)) continue;
          for (std::size_t k = 0; k < c; ++k) {
            const T onehot = static_cast<int>(k) == lab[r] ? T(1) : T(0);
            g.data[r * c + k] += up * w[r] * (prob.data[r * c + k] - onehot);
          }
        }
      });
}

#define MAAS_INSTANTIATE(T)                                                                   \
  template class Tape<T>;                                                                     \
  template Var linear<T>(Tape<T>&, Var, Var, Var);                                            \
  template Var add<T>(Tape<T>&, Var, Var);                                                    \
  template Var relu<T>(Tape<T>&, Var);                                                        \
  template Var sum<T>(Tape<T>&, Var);                                                         \
  template Var gather_rows<T>(Tape<T>&, Var, std::vector<int>);                               \
  template Var concat_rows<T>(Tape<T>&, Var, Var);                                            \
  template Var concat_cols<T>(Tape<T>&, Var, Var);                                            \
  template Var edge_features<T>(Tape<T>&, Var, std::span<const int>, std::span<const int>);   \
  template Var segment_max<T>(Tape<T>&, Var, std::span<const int>, std::size_t);              \
  template Var batchnorm<T>(Tape<T>&, Var, Var, Var, Tensor<T>&, Tensor<T>&,                  \
                            const BatchNormOptions&);                                         \
  template Var softmax_xent<T>(Tape<T>&, Var, std::span<const int>, std::span<const T>);      \
  template Tensor<T> softmax_rows<T>(const Tensor<T>&);

MAAS_INSTANTIATE(float)
MAAS_INSTANTIATE(double)

#undef MAAS_INSTANTIATE

}  // namespace maas::ad
