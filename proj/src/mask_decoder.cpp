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

#include "fasa/mask_decoder.hpp"

#include <algorithm>
#include <cmath>

namespace fasa {

BasisMode parse_basis_mode(const std::string& name) {
  if (name == "query_dot") return BasisMode::kQueryDot;
  if (name == "attention_map") return BasisMode::kAttentionMap;
  throw ValidationError("unknown basis mode '" + name + "' (expected query_dot or attention_map)");
}

template <typename S>
Var<S> fuse(const Var<S>& basis, const Var<S>& gates, const Conv2d<S>& phi) {
  if (basis.shape() != gates.shape() || basis.shape().rank() != 4 || basis.dim(1) != kStageCount)
    throw ValidationError("fuse: basis " + basis.shape().str() + " and gates " + gates.shape().str() +
                          " must both be [N,4,h,w]");
  const Var<S> ones = constant(Tensor<S>::constant(Shape{1, kStageCount, 1, 1}, S(1)));
  const Var<S> gated = conv2d(mul(gates, basis), ones, Var<S>(), 1, 0);
  return add(gated, phi(basis));
}

template <typename S>
Var<S> predict(const Var<S>& logits, Index out_h, Index out_w) {
  if (logits.shape().rank() != 4) throw ValidationError("predict: expected [N,1,h,w] logits");
  if (out_h < logits.dim(2) || out_w < logits.dim(3))
    throw ValidationError("predict: target resolution is below the decoder resolution");
  const Var<S> up = (out_h == logits.dim(2) && out_w == logits.dim(3)) ? logits : resize_bilinear(logits, out_h, out_w);
  return sigmoid(up);
}

template <typename S>
std::vector<S> image_score(const Tensor<S>& prob) {
  if (prob.empty()) throw ValidationError("image_score: empty probability map");
  if (prob.rank() <= 2) return {prob.array().maxCoeff()};
  const Index n = prob.dim(0), per = prob.size() / n;
  if (per == 0) throw ValidationError("image_score: empty probability map");
  std::vector<S> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = prob.array().segment(i * per, per).maxCoeff();
  return out;
}

template <typename S>
GateNet<S>::GateNet(ParameterStore<S>& store, const std::string& name, Index in_channels, Index hidden) {
  c1_ = Conv2d<S>(store, name + ".conv1", in_channels, hidden, 3, 2, 1);
  c2_ = Conv2d<S>(store, name + ".conv2", hidden, hidden, 3, 2, 1);
  out_ = Conv2d<S>(store, name + ".out", hidden, kStageCount, 1, 1, 0);
}

template <typename S>
Var<S> GateNet<S>::operator()(const Var<S>& input) const {
  return sigmoid(out_(gelu(c2_(gelu(c1_(input))))));
}

template <typename S>
BasisHead<S>::BasisHead(ParameterStore<S>& store, const std::string& name, Index prototype_dim,
                        Index stage_channels, Index query_dim, Index heads)
    : query_dim_(query_dim) {
  query_ = Linear<S>(store, name + ".query", prototype_dim, query_dim);
  attention_ = MultiHeadAttention<S>(store, name + ".cross", query_dim, heads, stage_channels);
  pixel_ = Linear<S>(store, name + ".pixel", stage_channels, query_dim);
}

template <typename S>
BasisResult<S> BasisHead<S>::operator()(const Var<S>& prototype, const Var<S>& stage, Index out_side,
                                        BasisMode mode) const {
  if (stage.shape().rank() != 4) throw ValidationError("basis head expects an NCHW stage map");
  const Index n = stage.dim(0), c = stage.dim(1), h = stage.dim(2), w = stage.dim(3);
  const Index d = prototype.value().size();
  const Var<S> tokens = reshape(permute(stage, {0, 2, 3, 1}), Shape{n, h * w, c});
  const Var<S> q = repeat_batch(query_(reshape(prototype, Shape{1, 1, d})), n);
  auto att = attention_.attend(q, tokens);
  Var<S> flat;
  if (mode == BasisMode::kQueryDot) {
    const Var<S> updated = add(q, att.out);
    flat = scale(bmm(pixel_(tokens), updated, true), S(1) / std::sqrt(static_cast<S>(query_dim_)));
  } else {
    const Index heads = attention_.heads;
    const Var<S> avg = constant(Tensor<S>::constant(Shape{n, 1, heads}, S(1) / static_cast<S>(heads)));
    flat = bmm(avg, reshape(att.logits, Shape{n, heads, h * w}));
  }
  Var<S> map = reshape(flat, Shape{n, 1, h, w});
  if (h != out_side || w != out_side) map = resize_bilinear(map, out_side, out_side);
  return {map, att.weights};
}

template <typename S>
MaskDecoder<S>::MaskDecoder(ParameterStore<S>& store, const DecoderConfig& config, const BackboneConfig& backbone,
                            Index prototype_dim, Index gate_in_channels)
    : config_(config) {
  if (config.simple) {
    for (int k = 0; k < kStageCount; ++k)
      simple_heads_.emplace_back(store, "decoder.simple.stage" + std::to_string(k + 1), backbone.channels[k], 1, 1,
                                 1, 0);
  } else {
    for (int k = 0; k < kStageCount; ++k)
      heads_.emplace_back(store, "decoder.scale" + std::to_string(k + 1), prototype_dim, backbone.channels[k],
                          config.query_dim, config.heads);
    gates_ = GateNet<S>(store, "decoder.gates", gate_in_channels, config.gate_hidden);
  }
  phi_ = Conv2d<S>(store, "decoder.phi", kStageCount, 1, 1, 1, 0);
}

template <typename S>
MaskPrediction<S> MaskDecoder<S>::operator()(const std::vector<Var<S>>& stages, const Var<S>& prototype,
                                             const Var<S>& gate_input) const {
  if (stages.size() != static_cast<std::size_t>(kStageCount))
    throw ValidationError("mask decoder needs four stage maps");
  const Index side = stages[0].dim(2);
  std::vector<Var<S>> parts;
  MaskPrediction<S> out;
  if (config_.simple) {
    for (int k = 0; k < kStageCount; ++k) {
      Var<S> b = simple_heads_[k](stages[k]);
      if (b.dim(2) != side) b = resize_bilinear(b, side, side);
      parts.push_back(b);
    }
    out.basis = concat(parts, 1);
    out.logits = phi_(out.basis);
  } else {
    for (int k = 0; k < kStageCount; ++k) parts.push_back(heads_[k](prototype, stages[k], side, config_.basis_mode).basis);
    out.basis = concat(parts, 1);
    out.gates = gates_(gate_input);
    if (out.gates.dim(2) != side || out.gates.dim(3) != side)
      throw ValidationError("gate resolution " + out.gates.shape().str() + " does not match decoder side " +
                            std::to_string(side));
    out.logits = fuse(out.basis, out.gates, phi_);
  }
  out.prob = predict(out.logits, gate_input.dim(2), gate_input.dim(3));
  out.score = image_score(out.prob.value());
  return out;
}

#define FASA_INSTANTIATE_DECODER(S)                                   \
  template Var<S> fuse<S>(const Var<S>&, const Var<S>&, const Conv2d<S>&); \
  template Var<S> predict<S>(const Var<S>&, Index, Index);            \
  template std::vector<S> image_score<S>(const Tensor<S>&);           \
  template class GateNet<S>;                                          \
  template class BasisHead<S>;                                        \
  template class MaskDecoder<S>;

FASA_INSTANTIATE_DECODER(float)
FASA_INSTANTIATE_DECODER(double)

}  // namespace fasa
