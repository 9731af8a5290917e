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

// The full localization network and its ablation switches.

#ifndef FASA_MODEL_HPP_
#define FASA_MODEL_HPP_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fasa/encoder.hpp"
#include "fasa/freq_backbone.hpp"
#include "fasa/freq_dct.hpp"
#include "fasa/mask_decoder.hpp"
#include "fasa/objectives.hpp"
#include "fasa/semantic_align.hpp"

namespace fasa {

/// Fixed per-channel normalization applied to images before the frequency
/// module and the backbone: (x - kInputMean) / kInputStd. The encoder
/// receives the raw [0, 1] images.
inline constexpr double kInputMean = 0.5;
inline constexpr double kInputStd = 0.25;

struct AblationFlags {
  bool no_adbdct = false;
  bool no_psa = false;
  bool no_sfsa = false;
  bool simple_decoder = false;

  bool operator==(const AblationFlags&) const = default;
  std::string str() const;
};

/// The five ladder rungs in order: Baseline, +ADB-DCT, +PSA, +SF-SA, +PG-FMD.
struct LadderVariant {
  std::string name;
  AblationFlags flags;
};
std::vector<LadderVariant> ablation_ladder();

struct ModelConfig {
  Index image_size = 64;  // backbone side; inputs of another size are resized
  std::uint64_t seed = 1;
  double dct_sharpness = 50.0;
  /// Fixed factor on the high-band reconstruction before it joins the
  /// frequency-enhanced input. 1 leaves the reconstruction untouched.
  double high_band_gain = 1.0;
  SemanticAlignConfig semantic;
  BackboneConfig backbone;
  DecoderConfig decoder;
  PatchLabelRule patch_rule = PatchLabelRule::kMajority;
  int edge_radius = 3;
  EdgeLossKind edge_loss = EdgeLossKind::kBandBce;
  AblationFlags flags;

  void validate() const;
};

template <typename S>
struct ModelOutput {
  Var<S> input;  // backbone input: RGB or the 9-channel stack
  std::vector<Var<S>> stages;
  std::optional<SemanticOutput<S>> semantic;
  MaskPrediction<S> mask;
};

template <typename S>
class FasaModel {
 public:
  FasaModel(const ModelConfig& config, std::shared_ptr<const EncoderAdapter<S>> encoder);

  /// images [N, 3, H, W] in [0, 1].
  ModelOutput<S> forward(const Tensor<S>& images) const;

  /// masks [N, 1, H, W] binary, at the image resolution.
  LossBreakdown<S> loss(const ModelOutput<S>& out, const Tensor<S>& masks, const LossWeights& weights) const;

  ParameterStore<S>& parameters() { return store_; }
  const ParameterStore<S>& parameters() const { return store_; }
  const ModelConfig& config() const { return config_; }
  const EncoderAdapter<S>* encoder() const { return encoder_.get(); }
  std::uint64_t encoder_hash() const { return encoder_ ? encoder_->parameter_hash() : 0; }

  const DualBandDct<S>* dct() const { return dct_ ? &*dct_ : nullptr; }
  const SemanticAligner<S>* semantic() const { return semantic_ ? &*semantic_ : nullptr; }
  const ConvBackbone<S>& backbone() const { return backbone_; }
  const std::vector<SideAdapter<S>>& adapters() const { return adapters_; }
  const MaskDecoder<S>& decoder() const { return decoder_; }
  MaskDecoder<S>& mutable_decoder() { return decoder_; }

 private:
  ModelConfig config_;
  std::shared_ptr<const EncoderAdapter<S>> encoder_;
  ParameterStore<S> store_;
  std::optional<DualBandDct<S>> dct_;
  std::optional<SemanticAligner<S>> semantic_;
  ConvBackbone<S> backbone_;
  std::vector<SideAdapter<S>> adapters_;
  MaskDecoder<S> decoder_;
};

/// Bilinear resize of a plain [N, C, H, W] tensor.
template <typename S>
Tensor<S> resize_tensor(const Tensor<S>& x, Index out_h, Index out_w);

}  // namespace fasa

#endif  // FASA_MODEL_HPP_
