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

// Four-stage convolutional side pathway over the frequency-enhanced input
// and the per-stage adapters that inject the semantic feature map into it.

#ifndef FASA_FREQ_BACKBONE_HPP_
#define FASA_FREQ_BACKBONE_HPP_

#include <array>
#include <string>
#include <vector>

#include "fasa/nn.hpp"

namespace fasa {

inline constexpr int kStageCount = 4;

/// Expands a [out, 3, k, k] stem kernel to [out, 9, k, k]. The first three
/// input slices are copied; each new slice holds the per-position mean of
/// the RGB slices divided by three.
template <typename S>
Tensor<S> stem_inflate(const Tensor<S>& stem3);

struct BackboneConfig {
  std::array<Index, kStageCount> channels = {96, 192, 384, 768};
  std::array<int, kStageCount> depths = {1, 1, 1, 1};
  Index in_channels = 9;  // 3 (RGB only) or 9 (frequency-enhanced)
};

/// Stride of stage k (0-based) relative to the backbone input: 4 * 2^k.
inline Index stage_stride(int k) { return Index{4} << k; }

/// ConvNeXt-style hierarchy: a 4x4 stride-4 patchify stem, then per stage
/// (a 2x2 stride-2 downsampling for stages 2..4 and) residual blocks of
/// depthwise 7x7, channel layer norm, 4x pointwise expansion, GELU and
/// pointwise projection.
template <typename S>
class ConvBackbone {
 public:
  ConvBackbone() = default;
  ConvBackbone(ParameterStore<S>& store, const BackboneConfig& config);

  /// input [N, C_in, H, W] with H, W divisible by 32.
  std::vector<Var<S>> forward_stages(const Var<S>& input) const;

  const BackboneConfig& config() const { return config_; }
  const Var<S>& stem_weight() const { return stem_.weight; }

 private:
  struct Block {
    Var<S> dw_weight, dw_bias;
    LayerNorm<S> norm;
    Conv2d<S> pw1, pw2;
  };
  struct Stage {
    LayerNorm<S> down_norm;
    Conv2d<S> down;
    std::vector<Block> blocks;
  };

  BackboneConfig config_;
  Conv2d<S> stem_;
  LayerNorm<S> stem_norm_;
  std::vector<Stage> stages_;
};

/// Number of x2 transposed convolutions that take a grid of side g to at
/// least `target`: ceil(log2(target / g)), zero when g >= target.
int upsample_steps(Index grid, Index target);

/// One stage's adapter: x2 transposed convolutions (each followed by channel
/// layer norm) until the grid reaches the stage side, a bilinear snap when
/// the side is not reached exactly, then 1x1 conv, layer norm, 3x3 conv.
/// The 3x3 conv starts at zero so the injection is initially the identity.
template <typename S>
class SideAdapter {
 public:
  SideAdapter() = default;
  SideAdapter(ParameterStore<S>& store, const std::string& name, Index in_dim, Index grid, Index target_side,
              Index out_channels);

  /// feature_map [N, d, g, g] -> [N, C_k, target, target].
  Var<S> operator()(const Var<S>& feature_map) const;

  int steps() const { return static_cast<int>(up_.size()); }
  Index target_side() const { return target_; }
  const Conv2d<S>& final_conv() const { return conv3_; }

 private:
  struct Up {
    Var<S> weight, bias;
    LayerNorm<S> norm;
  };
  std::vector<Up> up_;
  Index grid_ = 0, target_ = 0;
  Conv2d<S> conv1_;
  LayerNorm<S> norm_;
  Conv2d<S> conv3_;
};

/// Adds A_k(F_c) to every stage map.
template <typename S>
std::vector<Var<S>> adapt_and_inject(const std::vector<Var<S>>& stages, const Var<S>& feature_map,
                                     const std::vector<SideAdapter<S>>& adapters);

/// Builds the four adapters for a backbone input of side `input_side`.
template <typename S>
std::vector<SideAdapter<S>> make_side_adapters(ParameterStore<S>& store, Index embed_dim, Index grid,
                                               Index input_side, const BackboneConfig& config);

}  // namespace fasa

#endif  // FASA_FREQ_BACKBONE_HPP_
