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

#include "fasa/freq_backbone.hpp"

namespace fasa {

template <typename S>
Tensor<S> stem_inflate(const Tensor<S>& stem3) {
  if (stem3.rank() != 4 || stem3.dim(1) != 3)
    throw ValidationError("stem_inflate: expected a [out, 3, k, k] kernel, got " + stem3.shape().str());
  const Index out = stem3.dim(0), kk = stem3.dim(2) * stem3.dim(3);
  Tensor<S> w9(Shape{out, 9, stem3.dim(2), stem3.dim(3)});
  for (Index o = 0; o < out; ++o) {
    const S* src = stem3.data() + o * 3 * kk;
    S* dst = w9.data() + o * 9 * kk;
    for (Index i = 0; i < 3 * kk; ++i) dst[i] = src[i];
    for (Index p = 0; p < kk; ++p) {
      const S extra = (src[p] + src[kk + p] + src[2 * kk + p]) / S(3) / S(3);
      for (Index c = 3; c < 9; ++c) dst[c * kk + p] = extra;
    }
  }
  return w9;
}

template <typename S>
ConvBackbone<S>::ConvBackbone(ParameterStore<S>& store, const BackboneConfig& config) : config_(config) {
  if (config.in_channels != 3 && config.in_channels != 9)
    throw ConfigError("backbone input must have 3 or 9 channels");
  const Index c0 = config.channels[0];
  // The stem is always drawn as an RGB kernel; the 9-channel variant inflates it.
  Tensor<S> stem3 = store.initial_value("backbone.stem.weight", Shape{c0, 3, 4, 4}, Init::fan_in(3 * 16));
  stem_.weight = store.add("backbone.stem.weight", config.in_channels == 9 ? stem_inflate(stem3) : stem3);
  stem_.bias = store.create("backbone.stem.bias", Shape{c0}, Init::zeros());
  stem_.stride = 4;
  stem_.padding = 0;
  stem_norm_ = LayerNorm<S>(store, "backbone.stem.norm", c0);
  for (int k = 0; k < kStageCount; ++k) {
    const std::string name = "backbone.stage" + std::to_string(k + 1);
    const Index c = config.channels[k];
    if (c < 1) throw ConfigError("backbone channels must be positive");
    Stage stage;
    if (k > 0) {
      stage.down_norm = LayerNorm<S>(store, name + ".down_norm", config.channels[k - 1]);
      stage.down = Conv2d<S>(store, name + ".down", config.channels[k - 1], c, 2, 2, 0);
    }
    for (int b = 0; b < config.depths[k]; ++b) {
      const std::string bn = name + ".block" + std::to_string(b + 1);
      Block blk;
      blk.dw_weight = store.create(bn + ".dw.weight", Shape{c, 1, 7, 7}, Init::fan_in(49));
      blk.dw_bias = store.create(bn + ".dw.bias", Shape{c}, Init::zeros());
      blk.norm = LayerNorm<S>(store, bn + ".norm", c);
      blk.pw1 = Conv2d<S>(store, bn + ".pw1", c, 4 * c, 1, 1, 0);
      blk.pw2 = Conv2d<S>(store, bn + ".pw2", 4 * c, c, 1, 1, 0);
      stage.blocks.push_back(std::move(blk));
    }
    stages_.push_back(std::move(stage));
  }
}

template <typename S>
std::vector<Var<S>> ConvBackbone<S>::forward_stages(const Var<S>& input) const {
  if (input.shape().rank() != 4 || input.dim(1) != config_.in_channels)
    throw ValidationError("backbone expects [N," + std::to_string(config_.in_channels) + ",H,W] input, got " +
                          input.shape().str());
  const Index h = input.dim(2), w = input.dim(3);
  if (h % 32 != 0 || w % 32 != 0 || h == 0 || w == 0)
    throw ValidationError("backbone input " + std::to_string(h) + "x" + std::to_string(w) +
                          " is not divisible by 32; pad by " + std::to_string((32 - h % 32) % 32) + " rows and " +
                          std::to_string((32 - w % 32) % 32) + " columns");
  std::vector<Var<S>> out;
  Var<S> x = stem_norm_.channels(stem_(input));
  for (int k = 0; k < kStageCount; ++k) {
    const Stage& stage = stages_[k];
    if (k > 0) x = stage.down(stage.down_norm.channels(x));
    for (const Block& b : stage.blocks) {
      Var<S> y = depthwise_conv2d(x, b.dw_weight, b.dw_bias, 3);
      y = b.pw2(gelu(b.pw1(b.norm.channels(y))));
      x = add(x, y);
    }
    out.push_back(x);
  }
  return out;
}

int upsample_steps(Index grid, Index target) {
  if (grid < 1 || target < 1) throw ValidationError("upsample_steps: sizes must be positive");
  int n = 0;
  for (Index side = grid; side < target; side *= 2) ++n;
  return n;
}

template <typename S>
SideAdapter<S>::SideAdapter(ParameterStore<S>& store, const std::string& name, Index in_dim, Index grid,
                            Index target_side, Index out_channels)
    : grid_(grid), target_(target_side) {
  const int n = upsample_steps(grid, target_side);
  for (int i = 0; i < n; ++i) {
    const std::string un = name + ".up" + std::to_string(i + 1);
    Up u;
    u.weight = store.create(un + ".weight", Shape{in_dim, in_dim, 2, 2}, Init::fan_in(in_dim));
    u.bias = store.create(un + ".bias", Shape{in_dim}, Init::zeros());
    u.norm = LayerNorm<S>(store, un + ".norm", in_dim);
    up_.push_back(std::move(u));
  }
  conv1_ = Conv2d<S>(store, name + ".conv1", in_dim, out_channels, 1, 1, 0);
  norm_ = LayerNorm<S>(store, name + ".norm", out_channels);
  conv3_ = Conv2d<S>(store, name + ".conv3", out_channels, out_channels, 3, 1, 1, /*zero_init=*/true);
}

template <typename S>
Var<S> SideAdapter<S>::operator()(const Var<S>& feature_map) const {
  if (feature_map.shape().rank() != 4 || feature_map.dim(2) != grid_ || feature_map.dim(3) != grid_)
    throw ValidationError("side adapter expects a " + std::to_string(grid_) + "x" + std::to_string(grid_) +
                          " feature map, got " + feature_map.shape().str());
  Var<S> x = feature_map;
  for (const Up& u : up_) x = u.norm.channels(conv_transpose2x2(x, u.weight, u.bias));
  if (x.dim(2) != target_ || x.dim(3) != target_) x = resize_bilinear(x, target_, target_);
  return conv3_(norm_.channels(conv1_(x)));
}

template <typename S>
std::vector<Var<S>> adapt_and_inject(const std::vector<Var<S>>& stages, const Var<S>& feature_map,
                                     const std::vector<SideAdapter<S>>& adapters) {
  if (stages.size() != adapters.size())
    throw ValidationError("adapt_and_inject: " + std::to_string(stages.size()) + " stages but " +
                          std::to_string(adapters.size()) + " adapters");
  std::vector<Var<S>> out;
  for (std::size_t k = 0; k < stages.size(); ++k) {
    Var<S> a = adapters[k](feature_map);
    if (a.shape() != stages[k].shape())
      throw ValidationError("adapter " + std::to_string(k + 1) + " produced " + a.shape().str() + " for stage " +
                            stages[k].shape().str());
    out.push_back(add(stages[k], a));
  }
  return out;
}

template <typename S>
std::vector<SideAdapter<S>> make_side_adapters(ParameterStore<S>& store, Index embed_dim, Index grid,
                                               Index input_side, const BackboneConfig& config) {
  std::vector<SideAdapter<S>> adapters;
  for (int k = 0; k < kStageCount; ++k)
    adapters.emplace_back(store, "sfsa.stage" + std::to_string(k + 1), embed_dim, grid,
                          input_side / stage_stride(k), config.channels[k]);
  return adapters;
}

#define FASA_INSTANTIATE_BACKBONE(S)                                                                      \
  template Tensor<S> stem_inflate<S>(const Tensor<S>&);                                                   \
  template class ConvBackbone<S>;                                                                         \
  template class SideAdapter<S>;                                                                          \
  template std::vector<Var<S>> adapt_and_inject<S>(const std::vector<Var<S>>&, const Var<S>&,             \
                                                   const std::vector<SideAdapter<S>>&);                   \
  template std::vector<SideAdapter<S>> make_side_adapters<S>(ParameterStore<S>&, Index, Index, Index,     \
                                                             const BackboneConfig&);

FASA_INSTANTIATE_BACKBONE(float)
FASA_INSTANTIATE_BACKBONE(double)

}  // namespace fasa
