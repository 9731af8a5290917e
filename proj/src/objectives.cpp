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

#include "fasa/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

namespace fasa {
namespace {

template <typename S>
void require_binary(const Tensor<S>& gt, const char* what) {
  for (Index i = 0; i < gt.size(); ++i)
    if (gt[i] != S(0) && gt[i] != S(1)) throw ValidationError(std::string(what) + ": ground truth is not binary");
}

template <typename S>
void require_same(const Var<S>& prob, const Tensor<S>& t, const char* what) {
  if (prob.value().size() != t.size() || prob.shape().numel() == 0)
    throw ValidationError(std::string(what) + ": prediction " + prob.shape().str() + " vs " + t.shape().str());
}

}  // namespace

void LossWeights::validate() const {
  if (!(mask >= 0) || !(edge >= 0) || !(contrastive >= 0))
    throw ValidationError("loss weights must be non-negative");
}

EdgeLossKind parse_edge_loss_kind(const std::string& name) {
  if (name == "bce") return EdgeLossKind::kBandBce;
  if (name == "dice") return EdgeLossKind::kBandDice;
  throw ValidationError("unknown edge loss '" + name + "' (expected bce or dice)");
}

template <typename S>
Var<S> mask_loss(const Var<S>& prob, const Tensor<S>& gt) {
  require_same(prob, gt, "mask_loss");
  require_binary(gt, "mask_loss");
  return binary_cross_entropy<S>(prob, gt, nullptr, static_cast<S>(kProbabilityEpsilon));
}

template <typename S>
Tensor<S> edge_band(const Tensor<S>& gt, int rho) {
  if (rho < 1) throw ValidationError("edge_band: radius must be at least 1");
  if (gt.rank() < 2) throw ValidationError("edge_band: expected [..., H, W]");
  require_binary(gt, "edge_band");
  const Index h = gt.dim(-2), w = gt.dim(-1), planes = gt.size() / std::max<Index>(h * w, 1);
  Tensor<S> band(gt.shape());
  // Separable running min/max: first along rows, then along columns.
  std::vector<S> lo(static_cast<std::size_t>(h * w)), hi(static_cast<std::size_t>(h * w));
  for (Index p = 0; p < planes; ++p) {
    const S* g = gt.data() + p * h * w;
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x) {
        S mn = 1, mx = 0;
        for (Index xx = std::max<Index>(0, x - rho); xx <= std::min<Index>(w - 1, x + rho); ++xx) {
          mn = std::min(mn, g[y * w + xx]);
          mx = std::max(mx, g[y * w + xx]);
        }
        lo[static_cast<std::size_t>(y * w + x)] = mn;
        hi[static_cast<std::size_t>(y * w + x)] = mx;
      }
    S* b = band.data() + p * h * w;
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x) {
        S mn = 1, mx = 0;
        for (Index yy = std::max<Index>(0, y - rho); yy <= std::min<Index>(h - 1, y + rho); ++yy) {
          mn = std::min(mn, lo[static_cast<std::size_t>(yy * w + x)]);
          mx = std::max(mx, hi[static_cast<std::size_t>(yy * w + x)]);
        }
        b[y * w + x] = (mx != mn) ? S(1) : S(0);
      }
  }
  return band;
}

template <typename S>
Var<S> edge_loss(const Var<S>& prob, const Tensor<S>& gt, const Tensor<S>& band) {
  require_same(prob, gt, "edge_loss");
  require_same(prob, band, "edge_loss");
  require_binary(gt, "edge_loss");
  return binary_cross_entropy(prob, gt, &band, static_cast<S>(kProbabilityEpsilon));
}

template <typename S>
Var<S> edge_dice_loss(const Var<S>& prob, const Tensor<S>& gt, const Tensor<S>& band) {
  require_same(prob, gt, "edge_dice_loss");
  require_same(prob, band, "edge_dice_loss");
  require_binary(gt, "edge_dice_loss");
  constexpr double kSmooth = 1e-6;
  const Index n = prob.dim(0), per = prob.value().size() / n;
  // Per sample: inter = sum p g b, denom = sum p b + sum g b + smooth.
  auto inter = std::make_shared<std::vector<S>>(n, S(0));
  auto denom = std::make_shared<std::vector<S>>(n, S(0));
  auto active = std::make_shared<std::vector<bool>>(n, false);
  S total = 0;
  const auto& p = prob.value().array();
  for (Index i = 0; i < n; ++i) {
    S it = 0, ps = 0, gs = 0;
    for (Index j = i * per; j < (i + 1) * per; ++j) {
      if (band[j] == S(0)) continue;
      (*active)[i] = true;
      it += p[j] * gt[j];
      ps += p[j];
      gs += gt[j];
    }
    if (!(*active)[i]) continue;
    (*inter)[i] = it;
    (*denom)[i] = ps + gs + static_cast<S>(kSmooth);
    total += S(1) - (S(2) * it + static_cast<S>(kSmooth)) / (*denom)[i];
  }
  auto g = std::make_shared<Tensor<S>>(gt);
  auto b = std::make_shared<Tensor<S>>(band);
  return make_result<S>(Tensor<S>::scalar(total / static_cast<S>(n)), {prob},
                        [n, per, inter, denom, active, g, b](Node<S>& self) {
                          auto& grad = self.parents[0]->grad_buffer();
                          const S up = self.grad[0] / static_cast<S>(n);
                          for (Index i = 0; i < n; ++i) {
                            if (!(*active)[i]) continue;
                            const S d = (*denom)[i];
                            const S num = S(2) * (*inter)[i] + static_cast<S>(kSmooth);
                            for (Index j = i * per; j < (i + 1) * per; ++j) {
                              if ((*b)[j] == S(0)) continue;
                              // d/dp of -(2 I + s) / D with dI/dp = g, dD/dp = 1.
                              grad[j] += up * (-(S(2) * (*g)[j]) / d + num / (d * d));
                            }
                          }
                        });
}

template <typename S>
LossBreakdown<S> total_loss(const Var<S>& l_mask, const Var<S>& l_edge, const Var<S>& l_pc,
                            const LossWeights& weights) {
  weights.validate();
  LossBreakdown<S> out;
  out.l_mask = static_cast<double>(l_mask.value()[0]);
  out.l_edge = static_cast<double>(l_edge.value()[0]);
  out.l_pc = l_pc.defined() ? static_cast<double>(l_pc.value()[0]) : 0.0;
  Var<S> total = add(scale(l_mask, static_cast<S>(weights.mask)), scale(l_edge, static_cast<S>(weights.edge)));
  if (l_pc.defined()) total = add(total, scale(l_pc, static_cast<S>(weights.contrastive)));
  out.objective = total;
  out.total = static_cast<double>(total.value()[0]);
  return out;
}

#define FASA_INSTANTIATE_OBJECTIVES(S)                                                           \
  template Var<S> mask_loss<S>(const Var<S>&, const Tensor<S>&);                                 \
  template Tensor<S> edge_band<S>(const Tensor<S>&, int);                                        \
  template Var<S> edge_loss<S>(const Var<S>&, const Tensor<S>&, const Tensor<S>&);               \
  template Var<S> edge_dice_loss<S>(const Var<S>&, const Tensor<S>&, const Tensor<S>&);          \
  template LossBreakdown<S> total_loss<S>(const Var<S>&, const Var<S>&, const Var<S>&, const LossWeights&);

FASA_INSTANTIATE_OBJECTIVES(float)
FASA_INSTANTIATE_OBJECTIVES(double)

}  // namespace fasa
