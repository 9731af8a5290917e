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

#include "fasa/freq_dct.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>

namespace fasa {
namespace {

using RowMatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Applies rows * plane * cols^T to every trailing [H, W] plane.
template <typename S>
Tensor<S> transform_planes(const Tensor<S>& x, const Eigen::MatrixXd& rows, const Eigen::MatrixXd& cols) {
  const int r = x.rank();
  if (r < 2) throw ValidationError("dct: expected at least a 2D tensor, got " + x.shape().str());
  const Index h = x.dim(r - 2), w = x.dim(r - 1);
  if (h < 1 || w < 1) throw ValidationError("dct: empty plane " + x.shape().str());
  const Index planes = x.size() / (h * w);
  Tensor<S> out(x.shape());
  RowMatD plane(h, w);
  for (Index p = 0; p < planes; ++p) {
    for (Index i = 0; i < h * w; ++i) plane.data()[i] = static_cast<double>(x[p * h * w + i]);
    RowMatD y = rows * plane * cols.transpose();
    for (Index i = 0; i < h * w; ++i) out[p * h * w + i] = static_cast<S>(y.data()[i]);
  }
  return out;
}

template <typename S>
void require_finite(const Tensor<S>& x, const char* what) {
  if (!x.array().isFinite().all()) throw ValidationError(std::string(what) + ": non-finite input");
}

template <typename S>
S logistic(S a) {
  return a >= S(0) ? S(1) / (S(1) + std::exp(-a)) : std::exp(a) / (S(1) + std::exp(a));
}

/// logistic(alpha) kept strictly inside (0, 1) once it saturates in S.
template <typename S>
S cutoff_of(S alpha) {
  constexpr S eps = std::numeric_limits<S>::epsilon();
  return std::clamp(logistic(alpha), eps, S(1) - eps);
}

}  // namespace

Eigen::MatrixXd dct_matrix(Index n) {
  if (n < 1) throw ValidationError("dct_matrix: size must be positive");
  Eigen::MatrixXd c(n, n);
  const double dn = static_cast<double>(n);
  for (Index k = 0; k < n; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / dn) : std::sqrt(2.0 / dn);
    for (Index i = 0; i < n; ++i)
      c(k, i) = scale * std::cos(std::numbers::pi * (2.0 * static_cast<double>(i) + 1.0) *
                                 static_cast<double>(k) / (2.0 * dn));
  }
  return c;
}

template <typename S>
Tensor<S> dct2(const Tensor<S>& image) {
  require_finite(image, "dct2");
  const int r = image.rank();
  if (r < 2) throw ValidationError("dct2: expected at least a 2D tensor");
  return transform_planes(image, dct_matrix(image.dim(r - 2)), dct_matrix(image.dim(r - 1)));
}

template <typename S>
Tensor<S> idct2(const Tensor<S>& coeffs) {
  require_finite(coeffs, "idct2");
  const int r = coeffs.rank();
  if (r < 2) throw ValidationError("idct2: expected at least a 2D tensor");
  return transform_planes(coeffs, Eigen::MatrixXd(dct_matrix(coeffs.dim(r - 2)).transpose()),
                          Eigen::MatrixXd(dct_matrix(coeffs.dim(r - 1)).transpose()));
}

template <typename S>
Var<S> dct2(const Var<S>& image) {
  Tensor<S> out = dct2(image.value());
  return make_result<S>(std::move(out), {image}, [](Node<S>& self) {
    self.parents[0]->grad_buffer().array() += idct2(self.grad).array();
  });
}

template <typename S>
Var<S> idct2(const Var<S>& coeffs) {
  Tensor<S> out = idct2(coeffs.value());
  return make_result<S>(std::move(out), {coeffs}, [](Node<S>& self) {
    self.parents[0]->grad_buffer().array() += dct2(self.grad).array();
  });
}

BandKind parse_band_kind(const std::string& name) {
  if (name == "high") return BandKind::kHigh;
  if (name == "low") return BandKind::kLow;
  throw ValidationError("unknown band kind '" + name + "' (expected high or low)");
}

template <typename S>
Tensor<S> radial_frequency(Index h, Index w) {
  if (h < 1 || w < 1) throw ValidationError("radial_frequency: empty grid");
  Tensor<S> r(Shape{h, w});
  const double norm = std::sqrt(static_cast<double>((h - 1) * (h - 1) + (w - 1) * (w - 1)));
  for (Index u = 0; u < h; ++u)
    for (Index v = 0; v < w; ++v)
      r[u * w + v] = norm > 0 ? static_cast<S>(std::sqrt(static_cast<double>(u * u + v * v)) / norm) : S(0);
  return r;
}

template <typename S>
S BandMaskParams<S>::cutoff_high() const {
  return cutoff_of(alpha_high.value()[0]);
}

template <typename S>
S BandMaskParams<S>::cutoff_low() const {
  return cutoff_of(alpha_low.value()[0]);
}

template <typename S>
void BandMaskParams<S>::validate() const {
  if (!alpha_high.defined() || !alpha_low.defined() || alpha_high.value().size() != 1 ||
      alpha_low.value().size() != 1)
    throw ValidationError("band mask params: cutoffs must be single scalars");
  if (!(sharpness > S(0)) || !std::isfinite(static_cast<double>(sharpness)))
    throw ValidationError("band mask params: sharpness must be positive");
  if (!std::isfinite(static_cast<double>(alpha_high.value()[0])) ||
      !std::isfinite(static_cast<double>(alpha_low.value()[0])))
    throw ValidationError("band mask params: non-finite cutoff");
}

template <typename S>
Var<S> band_mask(const Var<S>& alpha, S sharpness, Index h, Index w, BandKind kind) {
  if (alpha.value().size() != 1) throw ValidationError("band_mask: alpha must be a scalar");
  if (!(sharpness > S(0))) throw ValidationError("band_mask: sharpness must be positive");
  const S cutoff = cutoff_of(alpha.value()[0]);
  const Tensor<S> r = radial_frequency<S>(h, w);
  const S sign = kind == BandKind::kHigh ? S(1) : S(-1);
  Tensor<S> mask(Shape{h, w});
  for (Index i = 0; i < mask.size(); ++i) mask[i] = logistic(sign * sharpness * (r[i] - cutoff));
  return make_result<S>(std::move(mask), {alpha}, [sign, sharpness, cutoff](Node<S>& self) {
    // d mask / d alpha = m (1 - m) * (-sign * s) * c (1 - c)
    const auto& m = self.value.array();
    const S dcut = cutoff * (S(1) - cutoff);
    self.parents[0]->grad_buffer()[0] +=
        (self.grad.array() * m * (S(1) - m)).sum() * (-sign * sharpness) * dcut;
  });
}

template <typename S>
BandDecomposition<S> decompose_with_masks(const Var<S>& image, const Var<S>& high_mask,
                                          const Var<S>& low_mask) {
  if (image.shape().rank() != 4) throw ValidationError("decompose: expected NCHW image");
  [[maybe_unused]] const Index h = image.dim(2), w = image.dim(3);
  // Masks are produced for exactly this grid; a mismatch is a programming error.
  assert(high_mask.value().size() == h * w && low_mask.value().size() == h * w);
  const Var<S> coeffs = dct2(image);
  return {idct2(mul_plane(coeffs, high_mask)), idct2(mul_plane(coeffs, low_mask))};
}

template <typename S>
BandDecomposition<S> decompose(const Var<S>& image, const BandMaskParams<S>& params) {
  params.validate();
  if (image.shape().rank() != 4) throw ValidationError("decompose: expected NCHW image");
  const Index h = image.dim(2), w = image.dim(3);
  return decompose_with_masks(image, band_mask(params.alpha_high, params.sharpness, h, w, BandKind::kHigh),
                              band_mask(params.alpha_low, params.sharpness, h, w, BandKind::kLow));
}

template <typename S>
Var<S> build_input(const Var<S>& image, const Var<S>& high, const Var<S>& low) {
  if (image.shape() != high.shape() || image.shape() != low.shape())
    throw ValidationError("build_input: shape mismatch " + image.shape().str() + ", " + high.shape().str() +
                          ", " + low.shape().str());
  if (image.shape().rank() != 4) throw ValidationError("build_input: expected NCHW tensors");
  return concat<S>({image, high, low}, 1);
}

template <typename S>
DualBandDct<S>::DualBandDct(ParameterStore<S>& store, S sharpness) {
  params_.alpha_high = store.create("freq.alpha_high", Shape{1}, Init::zeros());
  params_.alpha_low = store.create("freq.alpha_low", Shape{1}, Init::zeros());
  params_.sharpness = sharpness;
  params_.validate();
}

template <typename S>
BandDecomposition<S> DualBandDct<S>::decompose(const Var<S>& image) const {
  return fasa::decompose(image, params_);
}

template <typename S>
Var<S> DualBandDct<S>::operator()(const Var<S>& image) const {
  const auto bands = decompose(image);
  return build_input(image, bands.high, bands.low);
}

#define FASA_INSTANTIATE_DCT(S)                                                                   \
  template Tensor<S> dct2<S>(const Tensor<S>&);                                                   \
  template Tensor<S> idct2<S>(const Tensor<S>&);                                                  \
  template Var<S> dct2<S>(const Var<S>&);                                                         \
  template Var<S> idct2<S>(const Var<S>&);                                                        \
  template Tensor<S> radial_frequency<S>(Index, Index);                                           \
  template struct BandMaskParams<S>;                                                              \
  template Var<S> band_mask<S>(const Var<S>&, S, Index, Index, BandKind);                         \
  template BandDecomposition<S> decompose_with_masks<S>(const Var<S>&, const Var<S>&, const Var<S>&); \
  template BandDecomposition<S> decompose<S>(const Var<S>&, const BandMaskParams<S>&);            \
  template Var<S> build_input<S>(const Var<S>&, const Var<S>&, const Var<S>&);                    \
  template class DualBandDct<S>;

FASA_INSTANTIATE_DCT(float)
FASA_INSTANTIATE_DCT(double)

}  // namespace fasa
