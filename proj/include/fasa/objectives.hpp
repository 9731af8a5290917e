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

#ifndef FASA_OBJECTIVES_HPP_
#define FASA_OBJECTIVES_HPP_

#include <string>

#include "fasa/autograd.hpp"

namespace fasa {

inline constexpr double kProbabilityEpsilon = 1e-7;

struct LossWeights {
  double mask = 1.0;
  double edge = 20.0;
  double contrastive = 1.0;

  void validate() const;
};

enum class EdgeLossKind { kBandBce, kBandDice };
EdgeLossKind parse_edge_loss_kind(const std::string& name);

/// Mean BCE over pixels per sample, then mean over the batch. prob is
/// clamped to [1e-7, 1 - 1e-7]; gt must be binary and shape-identical.
template <typename S>
Var<S> mask_loss(const Var<S>& prob, const Tensor<S>& gt);

/// Pixels whose Chebyshev radius-rho window (clipped to the image) holds
/// both mask values: dilate(gt) XOR erode(gt). Works on [..., H, W] stacks
/// plane by plane.
template <typename S>
Tensor<S> edge_band(const Tensor<S>& gt, int rho = 3);

/// BCE over band pixels, averaged per sample (zero for an empty band), then
/// over the batch.
template <typename S>
Var<S> edge_loss(const Var<S>& prob, const Tensor<S>& gt, const Tensor<S>& band);

/// 1 - soft Dice on band pixels per sample (zero for an empty band).
template <typename S>
Var<S> edge_dice_loss(const Var<S>& prob, const Tensor<S>& gt, const Tensor<S>& band);

template <typename S>
struct LossBreakdown {
  double l_mask = 0, l_edge = 0, l_pc = 0, total = 0;
  Var<S> objective;  // differentiable total
};

/// total = w_m * l_mask + w_e * l_edge + w_pc * l_pc. An undefined l_pc
/// counts as zero.
template <typename S>
LossBreakdown<S> total_loss(const Var<S>& l_mask, const Var<S>& l_edge, const Var<S>& l_pc,
                            const LossWeights& weights);

}  // namespace fasa

#endif  // FASA_OBJECTIVES_HPP_
