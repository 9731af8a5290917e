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

// Full-image orthonormal DCT-II and the learnable dual-band decomposition
// that turns an RGB image into a 9-channel frequency-enhanced input.

#ifndef FASA_FREQ_DCT_HPP_
#define FASA_FREQ_DCT_HPP_

#include <string>

#include "fasa/autograd.hpp"
#include "fasa/nn.hpp"

namespace fasa {

/// Orthonormal DCT-II basis, row k is frequency k: C * x transforms a column.
Eigen::MatrixXd dct_matrix(Index n);

/// Per-plane orthonormal 2D DCT-II of a [..., H, W] tensor. Rejects
/// non-finite input. Accumulation is in double regardless of Scalar.
template <typename S> Tensor<S> dct2(const Tensor<S>& image);
/// Inverse of dct2 (the DCT-III with the same scaling).
template <typename S> Tensor<S> idct2(const Tensor<S>& coeffs);

/// Differentiable versions over [N, C, H, W].
template <typename S> Var<S> dct2(const Var<S>& image);
template <typename S> Var<S> idct2(const Var<S>& coeffs);

enum class BandKind { kHigh, kLow };

/// "high" or "low"; anything else is a ValidationError.
BandKind parse_band_kind(const std::string& name);

/// r(u, v) = sqrt(u^2 + v^2) / sqrt((H-1)^2 + (W-1)^2) over DCT indices;
/// DC is at r = 0, the highest frequency at r = 1. A 1x1 grid is all zero.
template <typename S> Tensor<S> radial_frequency(Index h, Index w);

/// Unconstrained cutoff logits plus the fixed sharpness of the soft masks.
template <typename S>
struct BandMaskParams {
  Var<S> alpha_high;  // one element
  Var<S> alpha_low;   // one element
  S sharpness = S(50);

  /// sigmoid(alpha), strictly inside (0, 1).
  S cutoff_high() const;
  S cutoff_low() const;
  void validate() const;
};

/// Soft radial mask [H, W]. High: sigmoid(s (r - c)); low: sigmoid(s (c - r)),
/// with c = sigmoid(alpha). Differentiable in alpha.
template <typename S>
Var<S> band_mask(const Var<S>& alpha, S sharpness, Index h, Index w, BandKind kind);

template <typename S>
struct BandDecomposition {
  Var<S> high;  // [N, C, H, W]
  Var<S> low;
};

/// IDCT(DCT(x) * mask) for two explicit masks of shape [H, W].
template <typename S>
BandDecomposition<S> decompose_with_masks(const Var<S>& image, const Var<S>& high_mask,
                                          const Var<S>& low_mask);

template <typename S>
BandDecomposition<S> decompose(const Var<S>& image, const BandMaskParams<S>& params);

/// [RGB | high | low] along channels. All three must share one shape.
template <typename S>
Var<S> build_input(const Var<S>& image, const Var<S>& high, const Var<S>& low);

/// Owns the two cutoff parameters. Both start at logit 0 (cutoff 0.5).
template <typename S>
class DualBandDct {
 public:
  DualBandDct(ParameterStore<S>& store, S sharpness = S(50));

  const BandMaskParams<S>& params() const { return params_; }
  BandDecomposition<S> decompose(const Var<S>& image) const;
  /// 9-channel frequency-enhanced input.
  Var<S> operator()(const Var<S>& image) const;

 private:
  BandMaskParams<S> params_;
};

}  // namespace fasa

#endif  // FASA_FREQ_DCT_HPP_
