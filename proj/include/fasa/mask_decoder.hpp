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

// Prototype-guided, frequency-gated mask decoding: the fake prototype
// queries every aligned stage map to form basis masks, a small conv net over
// the frequency-enhanced input gates them, and a 1x1 conv over the stacked
// basis keeps a gate-independent path.

#ifndef FASA_MASK_DECODER_HPP_
#define FASA_MASK_DECODER_HPP_

#include <array>
#include <string>
#include <vector>

#include "fasa/freq_backbone.hpp"
#include "fasa/nn.hpp"

namespace fasa {

enum class BasisMode {
  kQueryDot,      // <updated query, pixel embedding> / sqrt(d_q)
  kAttentionMap,  // head-averaged cross-attention logits
};

BasisMode parse_basis_mode(const std::string& name);

inline constexpr double kDefaultThreshold = 0.5;

/// Sum over k of G_k * B_k plus phi(B). basis and gates are [N, 4, h, w];
/// phi is a 1x1 conv 4 -> 1 with bias.
template <typename S>
Var<S> fuse(const Var<S>& basis, const Var<S>& gates, const Conv2d<S>& phi);

/// sigmoid(bilinear_upsample(O)); O is [N, 1, h, w].
template <typename S>
Var<S> predict(const Var<S>& logits, Index out_h, Index out_w);

/// Per-sample maximum of a probability map [N, 1, H, W] (or [H, W]).
template <typename S>
std::vector<S> image_score(const Tensor<S>& prob);

/// Manipulated iff score > threshold.
inline bool classify(double score, double threshold = kDefaultThreshold) { return score > threshold; }

/// Spatial gating network: two 3x3 stride-2 convs with GELU, a 1x1 conv to
/// four channels, and a sigmoid. Output is at input / 4.
template <typename S>
class GateNet {
 public:
  GateNet() = default;
  GateNet(ParameterStore<S>& store, const std::string& name, Index in_channels, Index hidden = 16);

  Var<S> operator()(const Var<S>& input) const;
  const Conv2d<S>& output_conv() const { return out_; }
  Conv2d<S>& mutable_output_conv() { return out_; }

 private:
  Conv2d<S> c1_, c2_, out_;
};

template <typename S>
struct BasisResult {
  Var<S> basis;                   // [N, 1, h, w] at decoder resolution
  Var<S> attention;               // [N*heads, 1, HW] weights
};

/// One scale of the query path.
template <typename S>
class BasisHead {
 public:
  BasisHead() = default;
  BasisHead(ParameterStore<S>& store, const std::string& name, Index prototype_dim, Index stage_channels,
            Index query_dim, Index heads);

  /// prototype [d], stage map [N, C, H, W]; output resized to out_side.
  BasisResult<S> operator()(const Var<S>& prototype, const Var<S>& stage, Index out_side, BasisMode mode) const;

  const Linear<S>& query_projection() const { return query_; }
  const Linear<S>& pixel_embedding() const { return pixel_; }
  Linear<S>& mutable_pixel_embedding() { return pixel_; }

 private:
  Linear<S> query_;
  MultiHeadAttention<S> attention_;
  Linear<S> pixel_;
  Index query_dim_ = 0;
};

struct DecoderConfig {
  Index query_dim = 256;
  Index heads = 8;
  Index gate_hidden = 16;
  BasisMode basis_mode = BasisMode::kQueryDot;
  bool simple = false;  // per-stage 1x1 heads and phi only, no prototype query, no gates
};

template <typename S>
struct MaskPrediction {
  Var<S> basis;   // [N, 4, h, w]
  Var<S> gates;   // [N, 4, h, w], undefined for the simple decoder
  Var<S> logits;  // O, [N, 1, h, w]
  Var<S> prob;    // M_hat, [N, 1, H, W]
  std::vector<S> score;
};

template <typename S>
class MaskDecoder {
 public:
  MaskDecoder() = default;
  MaskDecoder(ParameterStore<S>& store, const DecoderConfig& config, const BackboneConfig& backbone,
              Index prototype_dim, Index gate_in_channels);

  /// stages: four aligned maps; prototype: e_f (unused by the simple
  /// decoder); gate_input: the [N, C, H, W] frequency-enhanced image.
  MaskPrediction<S> operator()(const std::vector<Var<S>>& stages, const Var<S>& prototype,
                               const Var<S>& gate_input) const;

  const DecoderConfig& config() const { return config_; }
  const Conv2d<S>& phi() const { return phi_; }
  const GateNet<S>& gate_net() const { return gates_; }
  GateNet<S>& mutable_gate_net() { return gates_; }
  const std::vector<BasisHead<S>>& heads() const { return heads_; }
  std::vector<BasisHead<S>>& mutable_heads() { return heads_; }

 private:
  DecoderConfig config_;
  std::vector<BasisHead<S>> heads_;
  std::vector<Conv2d<S>> simple_heads_;
  GateNet<S> gates_;
  Conv2d<S> phi_;
};

}  // namespace fasa

#endif  // FASA_MASK_DECODER_HPP_
