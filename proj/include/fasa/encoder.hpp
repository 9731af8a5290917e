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

#ifndef FASA_ENCODER_HPP_
#define FASA_ENCODER_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fasa/nn.hpp"

namespace fasa {

/// Frozen semantic encoder plug-in.
///
/// Implementations map images [N, 3, S, S] (values in [0, 1], S =
/// input_size()) to patch tokens of selected layers. Tokens are returned as
/// plain tensors, never as graph nodes, so nothing downstream can push a
/// gradient into the encoder. encode() must be deterministic and safe to
/// call concurrently. manifest() names the backing weights; evaluation
/// refuses a checkpoint trained against a different manifest.
template <typename S>
class EncoderAdapter {
 public:
  virtual ~EncoderAdapter() = default;

  virtual Index input_size() const = 0;
  /// Patches per side, g.
  virtual Index patch_grid() const = 0;
  virtual Index token_dim() const = 0;
  virtual int layer_count() const = 0;

  /// Patch tokens [N, layers.size(), g*g, token_dim] in raster order. Layers
  /// are 1-based block indices. The CLS token is never included.
  virtual Tensor<S> encode(const Tensor<S>& images, const std::vector<int>& layers) const = 0;

  virtual bool has_text() const = 0;
  /// token_dim vector for a prompt; throws ConfigError without text support.
  virtual Tensor<S> text_embed(const std::string& prompt) const = 0;

  virtual std::string manifest() const = 0;
  virtual std::uint64_t parameter_hash() const = 0;
};

struct EncoderSpec {
  Index input_size = 32;
  Index patch_grid = 8;
  Index token_dim = 64;
  int layers = 6;
  Index heads = 4;
  std::uint64_t seed = 0x5eed;
};

/// Default selected layers {ceil(L/2), ceil(3L/4), L}, deduplicated.
std::vector<int> default_layer_set(int layer_count);

/// Patchifying pre-norm transformer. With make_standin() the weights are a
/// fixed-seed random draw; load_encoder() reads converted weights.
template <typename S>
class TransformerEncoder : public EncoderAdapter<S> {
 public:
  TransformerEncoder(const EncoderSpec& spec, std::string manifest);

  Index input_size() const override { return spec_.input_size; }
  Index patch_grid() const override { return spec_.patch_grid; }
  Index token_dim() const override { return spec_.token_dim; }
  int layer_count() const override { return spec_.layers; }

  Tensor<S> encode(const Tensor<S>& images, const std::vector<int>& layers) const override;

  bool has_text() const override { return text_enabled_; }
  Tensor<S> text_embed(const std::string& prompt) const override;

  std::string manifest() const override { return manifest_; }
  std::uint64_t parameter_hash() const override { return params_.hash(); }

  const ParameterStore<S>& parameters() const { return params_; }
  ParameterStore<S>& mutable_parameters() { return params_; }
  const EncoderSpec& spec() const { return spec_; }

  /// Hash-seeded prompt embedding; this is the stand-in's text capability.
  void enable_hashed_text(bool on) { text_enabled_ = on; }
  /// Explicit prompt table (used by converted checkpoints).
  void set_text_table(std::vector<std::pair<std::string, Tensor<S>>> table);

 private:
  struct Block {
    LayerNorm<S> norm1, norm2;
    MultiHeadAttention<S> attention;
    Linear<S> fc1, fc2;
  };

  Var<S> patchify(const Tensor<S>& images) const;

  EncoderSpec spec_;
  std::string manifest_;
  ParameterStore<S> params_;
  Linear<S> patch_embed_;
  Var<S> position_;
  std::vector<Block> blocks_;
  bool text_enabled_ = true;
  std::vector<std::pair<std::string, Tensor<S>>> text_table_;
};

template <typename S>
std::shared_ptr<TransformerEncoder<S>> make_standin_encoder(const EncoderSpec& spec);

/// "standin" or "file:<path>" (a tensor archive written by save_encoder).
template <typename S>
std::shared_ptr<EncoderAdapter<S>> load_encoder(const std::string& choice, const EncoderSpec& standin_spec);

/// Writes the encoder weights plus optional prompt table to a tensor archive.
template <typename S>
void save_encoder(const TransformerEncoder<S>& encoder, const std::string& path,
                  const std::vector<std::string>& prompts);

}  // namespace fasa

#endif  // FASA_ENCODER_HPP_
