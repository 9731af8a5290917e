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

#include "fasa/model.hpp"

#include <cmath>

namespace fasa {

std::string AblationFlags::str() const {
  std::string s;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!s.empty()) s += ",";
    s += name;
  };
  add(no_adbdct, "no_adbdct");
  add(no_psa, "no_psa");
  add(no_sfsa, "no_sfsa");
  add(simple_decoder, "simple_decoder");
  return s.empty() ? "full" : s;
}

std::vector<LadderVariant> ablation_ladder() {
  return {
      {"Baseline", {true, true, true, true}},
      {"+ADB-DCT", {false, true, true, true}},
      {"+PSA", {false, false, true, true}},
      {"+SF-SA", {false, false, false, true}},
      {"+PG-FMD", {false, false, false, false}},
  };
}

void ModelConfig::validate() const {
  if (image_size < 32 || image_size % 32 != 0)
    throw ConfigError("image_size must be a positive multiple of 32, got " + std::to_string(image_size));
  if (!(dct_sharpness > 0)) throw ConfigError("dct_sharpness must be positive");
  if (!(high_band_gain > 0) || !std::isfinite(high_band_gain)) throw ConfigError("high_band_gain must be positive");
  if (semantic.embed_dim < 1 || semantic.heads < 1 || semantic.embed_dim % semantic.heads != 0)
    throw ConfigError("embed_dim must be a positive multiple of psa_heads");
  if (!(semantic.tau_init >= kMinTemperature && semantic.tau_init <= kMaxTemperature))
    throw ConfigError("tau_init must lie in [1e-3, 1]");
  if (decoder.query_dim < 1 || decoder.heads < 1 || decoder.query_dim % decoder.heads != 0)
    throw ConfigError("query_dim must be a positive multiple of decoder_heads");
  if (edge_radius < 1) throw ConfigError("edge_radius must be at least 1");
  for (int d : backbone.depths)
    if (d < 0) throw ConfigError("backbone depths must be non-negative");
  if (flags.no_psa && !flags.no_sfsa)
    throw ConfigError("the semantic side adapter needs the semantic branch (set no_sfsa or clear no_psa)");
  if (flags.no_psa && !flags.simple_decoder)
    throw ConfigError("the prototype-guided decoder needs the semantic branch (set simple_decoder or clear no_psa)");
}

template <typename S>
Tensor<S> resize_tensor(const Tensor<S>& x, Index out_h, Index out_w) {
  if (x.dim(2) == out_h && x.dim(3) == out_w) return x;
  return resize_bilinear(constant(x), out_h, out_w).value();
}

template <typename S>
FasaModel<S>::FasaModel(const ModelConfig& config, std::shared_ptr<const EncoderAdapter<S>> encoder)
    : config_(config), encoder_(std::move(encoder)), store_(config.seed) {
  config.validate();
  if (!config.flags.no_adbdct) dct_.emplace(store_, static_cast<S>(config.dct_sharpness));
  if (!config.flags.no_psa) {
    if (!encoder_) throw ConfigError("the semantic branch needs an encoder");
    semantic_.emplace(store_, encoder_, config.semantic);
  }
  BackboneConfig bb = config.backbone;
  bb.in_channels = config.flags.no_adbdct ? 3 : 9;
  config_.backbone = bb;
  backbone_ = ConvBackbone<S>(store_, bb);
  if (!config.flags.no_sfsa)
    adapters_ = make_side_adapters(store_, config.semantic.embed_dim, encoder_->patch_grid(), config.image_size, bb);
  DecoderConfig dc = config.decoder;
  dc.simple = config.flags.simple_decoder;
  decoder_ = MaskDecoder<S>(store_, dc, bb, config.semantic.embed_dim, bb.in_channels);
}

template <typename S>
ModelOutput<S> FasaModel<S>::forward(const Tensor<S>& images) const {
  if (images.rank() != 4 || images.dim(1) != 3 || images.dim(2) != config_.image_size ||
      images.dim(3) != config_.image_size)
    throw ValidationError("model expects [N,3," + std::to_string(config_.image_size) + "," +
                          std::to_string(config_.image_size) + "] images, got " + images.shape().str());
  ModelOutput<S> out;
  Tensor<S> normalized = images;
  normalized.array() = (normalized.array() - S(kInputMean)) / S(kInputStd);
  const Var<S> rgb = constant(normalized);
  if (dct_) {
    const auto bands = dct_->decompose(rgb);
    const Var<S> high = config_.high_band_gain == 1.0 ? bands.high : scale(bands.high, S(config_.high_band_gain));
    out.input = build_input(rgb, high, bands.low);
  } else {
    out.input = rgb;
  }
  out.stages = backbone_.forward_stages(out.input);
  Var<S> prototype;
  if (semantic_) {
    const Index side = encoder_->input_size();
    out.semantic = (*semantic_)(resize_tensor(images, side, side));
    prototype = semantic_->fake_prototype();
    if (!adapters_.empty()) out.stages = adapt_and_inject(out.stages, out.semantic->feature_map, adapters_);
  }
  out.mask = decoder_(out.stages, prototype, out.input);
  return out;
}

template <typename S>
LossBreakdown<S> FasaModel<S>::loss(const ModelOutput<S>& out, const Tensor<S>& masks,
                                    const LossWeights& weights) const {
  const Var<S> l_mask = mask_loss(out.mask.prob, masks);
  const Tensor<S> band = edge_band(masks, config_.edge_radius);
  const Var<S> l_edge = config_.edge_loss == EdgeLossKind::kBandBce ? edge_loss(out.mask.prob, masks, band)
                                                                     : edge_dice_loss(out.mask.prob, masks, band);
  Var<S> l_pc;
  if (semantic_ && out.semantic) {
    const Index n = masks.dim(0), h = masks.dim(-2), w = masks.dim(-1);
    std::vector<int> labels;
    for (Index i = 0; i < n; ++i) {
      Tensor<S> plane(Shape{h, w}, masks.array().segment(i * h * w, h * w));
      const auto y = patch_labels(plane, semantic_->grid(), config_.patch_rule);
      labels.insert(labels.end(), y.begin(), y.end());
    }
    l_pc = contrastive_loss(out.semantic->embeddings, labels, semantic_->real_prototype(),
                            semantic_->fake_prototype(), semantic_->tau());
  }
  return total_loss(l_mask, l_edge, l_pc, weights);
}

template class FasaModel<float>;
template class FasaModel<double>;
template Tensor<float> resize_tensor<float>(const Tensor<float>&, Index, Index);
template Tensor<double> resize_tensor<double>(const Tensor<double>&, Index, Index);

}  // namespace fasa
