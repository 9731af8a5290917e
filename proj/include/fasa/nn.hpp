// Copyright 2026 The fasa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FASA_NN_HPP_
#define FASA_NN_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fasa/autograd.hpp"
#include "fasa/hash.hpp"
#include "fasa/rng.hpp"

namespace fasa {

struct Init {
  enum class Kind { kZeros, kOnes, kConstant, kNormal, kUniform };
  Kind kind = Kind::kZeros;
  double a = 0.0;  // constant value, stddev, or uniform half-width

  static Init zeros() { return {Kind::kZeros, 0.0}; }
  static Init ones() { return {Kind::kOnes, 0.0}; }
  static Init constant(double v) { return {Kind::kConstant, v}; }
  static Init normal(double stddev) { return {Kind::kNormal, stddev}; }
  static Init uniform(double half_width) { return {Kind::kUniform, half_width}; }
  /// Kaiming-uniform style bound 1/sqrt(fan_in).
  static Init fan_in(Index fan) { return uniform(1.0 / std::sqrt(static_cast<double>(fan))); }
};

/// Named parameters in registration order. Every parameter is initialized
/// from a seed derived from (store seed, name), so a parameter's initial
/// value does not depend on which other modules exist.
template <typename S>
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t seed = 0, bool trainable = true)
      : seed_(seed), trainable_(trainable) {}

  Var<S> create(const std::string& name, Shape shape, Init init) {
    return add(name, initial_value(name, std::move(shape), init));
  }

  /// Registers a parameter with an explicit initial value.
  Var<S> add(const std::string& name, Tensor<S> value) {
    if (index_.count(name)) throw ValidationError("duplicate parameter name: " + name);
    Var<S> v(std::move(value), trainable_);
    index_[name] = entries_.size();
    entries_.emplace_back(name, v);
    return v;
  }

  /// Deterministic initial tensor for `name`, without registering it.
  Tensor<S> initial_value(const std::string& name, Shape shape, Init init) const {
    Tensor<S> t(std::move(shape));
    Rng rng(mix_seed(seed_, fnv1a(name)));
    for (Index i = 0; i < t.size(); ++i) {
      double v = 0.0;
      switch (init.kind) {
        case Init::Kind::kZeros: v = 0.0; break;
        case Init::Kind::kOnes: v = 1.0; break;
        case Init::Kind::kConstant: v = init.a; break;
        case Init::Kind::kNormal: v = rng.normal() * init.a; break;
        case Init::Kind::kUniform: v = rng.uniform(-init.a, init.a); break;
      }
      t[i] = static_cast<S>(v);
    }
    return t;
  }

  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  Var<S> get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("unknown parameter: " + name);
    return entries_[it->second].second;
  }

  const std::vector<std::pair<std::string, Var<S>>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  Index numel() const {
    Index n = 0;
    for (const auto& e : entries_) n += e.second.value().size();
    return n;
  }
  std::uint64_t seed() const { return seed_; }
  bool trainable() const { return trainable_; }

  void zero_grad() {
    for (auto& e : entries_) e.second.zero_grad();
  }

  /// Hash over names, shapes and raw value bytes.
  std::uint64_t hash() const {
    Fnv1a h;
    for (const auto& [name, v] : entries_) {
      h.update(name);
      for (Index d : v.shape().dims()) h.update(&d, sizeof(d));
      h.update(v.value().data(), sizeof(S) * static_cast<std::size_t>(v.value().size()));
    }
    return h.digest();
  }

 private:
  std::uint64_t seed_;
  bool trainable_;
  std::vector<std::pair<std::string, Var<S>>> entries_;
  std::map<std::string, std::size_t> index_;
};

template <typename S>
struct Linear {
  Var<S> weight;  // [out, in]
  Var<S> bias;    // [out] or undefined

  Linear() = default;
  Linear(ParameterStore<S>& store, const std::string& name, Index in, Index out, bool with_bias = true,
         bool zero_init = false) {
    weight = store.create(name + ".weight", Shape{out, in}, zero_init ? Init::zeros() : Init::fan_in(in));
    if (with_bias) bias = store.create(name + ".bias", Shape{out}, Init::zeros());
  }
  Var<S> operator()(const Var<S>& x) const { return linear(x, weight, bias); }
};

template <typename S>
struct Conv2d {
  Var<S> weight;  // [out, in, k, k]
  Var<S> bias;
  int stride = 1;
  int padding = 0;

  Conv2d() = default;
  Conv2d(ParameterStore<S>& store, const std::string& name, Index in, Index out, int kernel, int stride_,
         int padding_, bool zero_init = false)
      : stride(stride_), padding(padding_) {
    weight = store.create(name + ".weight", Shape{out, in, kernel, kernel},
                          zero_init ? Init::zeros() : Init::fan_in(in * kernel * kernel));
    bias = store.create(name + ".bias", Shape{out}, Init::zeros());
  }
  Var<S> operator()(const Var<S>& x) const { return conv2d(x, weight, bias, stride, padding); }
};

template <typename S>
struct LayerNorm {
  Var<S> gain;
  Var<S> shift;

  LayerNorm() = default;
  LayerNorm(ParameterStore<S>& store, const std::string& name, Index dim) {
    gain = store.create(name + ".gain", Shape{dim}, Init::ones());
    shift = store.create(name + ".shift", Shape{dim}, Init::zeros());
  }
  /// Over the last axis.
  Var<S> operator()(const Var<S>& x) const { return layer_norm(x, gain, shift); }
  /// Over channels of an NCHW map.
  Var<S> channels(const Var<S>& x) const { return layer_norm_channels(x, gain, shift); }
};

/// Multi-head attention over token sequences [N, T, d].
template <typename S>
struct MultiHeadAttention {
  Linear<S> query, key, value, output;
  Index heads = 1;
  Index dim = 0;

  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterStore<S>& store, const std::string& name, Index dim_, Index heads_,
                     Index kv_dim = 0)
      : heads(heads_), dim(dim_) {
    if (heads <= 0 || dim % heads != 0)
      throw ValidationError(name + ": embedding dim " + std::to_string(dim) +
                            " is not divisible by head count " + std::to_string(heads));
    const Index src = kv_dim > 0 ? kv_dim : dim;
    query = Linear<S>(store, name + ".query", dim, dim);
    key = Linear<S>(store, name + ".key", src, dim);
    value = Linear<S>(store, name + ".value", src, dim);
    output = Linear<S>(store, name + ".output", dim, dim);
  }

  /// Splits [N, T, d] into [N*heads, T, d/heads].
  Var<S> split_heads(const Var<S>& x) const {
    const Index n = x.dim(0), t = x.dim(1), dh = dim / heads;
    return reshape(permute(reshape(x, Shape{n, t, heads, dh}), {0, 2, 1, 3}), Shape{n * heads, t, dh});
  }
  Var<S> merge_heads(const Var<S>& x, Index n) const {
    const Index t = x.dim(1), dh = dim / heads;
    return reshape(permute(reshape(x, Shape{n, heads, t, dh}), {0, 2, 1, 3}), Shape{n, t, dim});
  }

  /// Pre-softmax scores [N*heads, Tq, Tk].
  Var<S> scores(const Var<S>& q_in, const Var<S>& kv_in) const {
    const S inv = S(1) / std::sqrt(static_cast<S>(dim / heads));
    return scale(bmm(split_heads(query(q_in)), split_heads(key(kv_in)), true), inv);
  }

  struct Result {
    Var<S> out;      // [N, Tq, d]
    Var<S> weights;  // [N*heads, Tq, Tk], rows sum to one
    Var<S> logits;   // pre-softmax scores
  };

  Result attend(const Var<S>& q_in, const Var<S>& kv_in) const {
    Result r;
    r.logits = scores(q_in, kv_in);
    r.weights = softmax(r.logits);
    const Var<S> ctx = bmm(r.weights, split_heads(value(kv_in)));
    r.out = output(merge_heads(ctx, q_in.dim(0)));
    return r;
  }

  Var<S> operator()(const Var<S>& x) const { return attend(x, x).out; }
};

}  // namespace fasa

#endif  // FASA_NN_HPP_
