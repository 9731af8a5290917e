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

#include "fasa/encoder.hpp"

#include <algorithm>

#include "fasa/archive.hpp"

namespace fasa {

std::vector<int> default_layer_set(int layer_count) {
  if (layer_count < 1) throw ValidationError("encoder must have at least one layer");
  std::vector<int> s = {(layer_count + 1) / 2, (3 * layer_count + 3) / 4, layer_count};
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

template <typename S>
TransformerEncoder<S>::TransformerEncoder(const EncoderSpec& spec, std::string manifest)
    : spec_(spec), manifest_(std::move(manifest)), params_(spec.seed, /*trainable=*/false) {
  if (spec.patch_grid < 1 || spec.input_size % spec.patch_grid != 0)
    throw ValidationError("encoder input size " + std::to_string(spec.input_size) +
                          " must be a multiple of the patch grid " + std::to_string(spec.patch_grid));
  if (spec.layers < 1) throw ValidationError("encoder needs at least one layer");
  const Index p = spec.input_size / spec.patch_grid;
  const Index d = spec.token_dim;
  patch_embed_ = Linear<S>(params_, "encoder.patch_embed", 3 * p * p, d);
  position_ = params_.create("encoder.position", Shape{1, spec.patch_grid * spec.patch_grid, d},
                             Init::normal(0.02));
  for (int l = 0; l < spec.layers; ++l) {
    const std::string name = "encoder.block" + std::to_string(l + 1);
    Block b;
    b.norm1 = LayerNorm<S>(params_, name + ".norm1", d);
    b.attention = MultiHeadAttention<S>(params_, name + ".attn", d, spec.heads);
    b.norm2 = LayerNorm<S>(params_, name + ".norm2", d);
    b.fc1 = Linear<S>(params_, name + ".fc1", d, 4 * d);
    b.fc2 = Linear<S>(params_, name + ".fc2", 4 * d, d);
    blocks_.push_back(std::move(b));
  }
}

template <typename S>
Var<S> TransformerEncoder<S>::patchify(const Tensor<S>& images) const {
  if (images.rank() != 4 || images.dim(1) != 3 || images.dim(2) != spec_.input_size ||
      images.dim(3) != spec_.input_size)
    throw ValidationError("encoder expects [N,3," + std::to_string(spec_.input_size) + "," +
                          std::to_string(spec_.input_size) + "] images, got " + images.shape().str());
  const Index n = images.dim(0), g = spec_.patch_grid, p = spec_.input_size / g;
  Tensor<S> patches(Shape{n, g * g, 3 * p * p});
  for (Index i = 0; i < n; ++i)
    for (Index r = 0; r < g; ++r)
      for (Index c = 0; c < g; ++c) {
        S* dst = patches.data() + (i * g * g + r * g + c) * 3 * p * p;
        for (Index ch = 0; ch < 3; ++ch)
          for (Index y = 0; y < p; ++y)
            for (Index x = 0; x < p; ++x) *dst++ = images.at(i, ch, r * p + y, c * p + x);
      }
  return constant(std::move(patches));
}

template <typename S>
Tensor<S> TransformerEncoder<S>::encode(const Tensor<S>& images, const std::vector<int>& layers) const {
  if (layers.empty()) throw ValidationError("encode: empty layer selection");
  for (int l : layers)
    if (l < 1 || l > spec_.layers)
      throw ValidationError("encode: layer " + std::to_string(l) + " outside 1.." + std::to_string(spec_.layers));
  const Index n = images.dim(0), t = spec_.patch_grid * spec_.patch_grid, d = spec_.token_dim;
  Var<S> x = patch_embed_(patchify(images));
  x = add(x, repeat_batch(position_, n));
  Tensor<S> out(Shape{n, static_cast<Index>(layers.size()), t, d});
  const int last = *std::max_element(layers.begin(), layers.end());
  for (int l = 1; l <= last; ++l) {
    const Block& b = blocks_[l - 1];
    x = add(x, b.attention(b.norm1(x)));
    x = add(x, b.fc2(gelu(b.fc1(b.norm2(x)))));
    for (std::size_t k = 0; k < layers.size(); ++k) {
      if (layers[k] != l) continue;
      for (Index i = 0; i < n; ++i)
        out.array().segment((i * static_cast<Index>(layers.size()) + static_cast<Index>(k)) * t * d, t * d) =
            x.value().array().segment(i * t * d, t * d);
    }
  }
  return out;
}

template <typename S>
void TransformerEncoder<S>::set_text_table(std::vector<std::pair<std::string, Tensor<S>>> table) {
  text_table_ = std::move(table);
  text_enabled_ = true;
}

template <typename S>
Tensor<S> TransformerEncoder<S>::text_embed(const std::string& prompt) const {
  if (!text_enabled_) throw ConfigError("encoder '" + manifest_ + "' has no text embedding capability");
  if (!text_table_.empty()) {
    for (const auto& [p, v] : text_table_)
      if (p == prompt) return v;
    throw ConfigError("encoder '" + manifest_ + "' has no embedding for prompt '" + prompt + "'");
  }
  Rng rng(mix_seed(spec_.seed, fnv1a("text:" + prompt)));
  Tensor<S> v(Shape{spec_.token_dim});
  for (Index i = 0; i < v.size(); ++i) v[i] = static_cast<S>(rng.normal());
  return v;
}

template <typename S>
std::shared_ptr<TransformerEncoder<S>> make_standin_encoder(const EncoderSpec& spec) {
  const std::string manifest = "standin:size=" + std::to_string(spec.input_size) +
                               ":grid=" + std::to_string(spec.patch_grid) +
                               ":dim=" + std::to_string(spec.token_dim) + ":layers=" + std::to_string(spec.layers) +
                               ":heads=" + std::to_string(spec.heads) + ":seed=" + std::to_string(spec.seed);
  return std::make_shared<TransformerEncoder<S>>(spec, manifest);
}

template <typename S>
std::shared_ptr<EncoderAdapter<S>> load_encoder(const std::string& choice, const EncoderSpec& standin_spec) {
  if (choice == "standin") return make_standin_encoder<S>(standin_spec);
  if (choice.rfind("file:", 0) != 0)
    throw ConfigError("unknown encoder choice '" + choice + "' (expected standin or file:<path>)");
  const std::string path = choice.substr(5);
  const TensorArchive a = TensorArchive::load(path);
  EncoderSpec spec;
  spec.input_size = std::stoll(a.meta("input_size"));
  spec.patch_grid = std::stoll(a.meta("patch_grid"));
  spec.token_dim = std::stoll(a.meta("token_dim"));
  spec.layers = std::stoi(a.meta("layers"));
  spec.heads = std::stoll(a.meta("heads"));
  auto enc = std::make_shared<TransformerEncoder<S>>(spec, a.meta("manifest"));
  for (auto& [name, v] : enc->mutable_parameters().entries()) {
    Tensor<S> loaded = a.get<S>(name);
    if (loaded.shape() != v.shape())
      throw ValidationError(path + ": parameter " + name + " has shape " + loaded.shape().str() + ", expected " +
                            v.shape().str());
    Var<S> handle = v;
    handle.mutable_value() = std::move(loaded);
  }
  std::vector<std::pair<std::string, Tensor<S>>> table;
  for (const auto& name : a.names())
    if (name.rfind("text:", 0) == 0) table.emplace_back(name.substr(5), a.get<S>(name));
  if (table.empty()) {
    enc->enable_hashed_text(false);
  } else {
    enc->set_text_table(std::move(table));
  }
  return enc;
}

template <typename S>
void save_encoder(const TransformerEncoder<S>& encoder, const std::string& path,
                  const std::vector<std::string>& prompts) {
  TensorArchive a;
  const EncoderSpec& s = encoder.spec();
  a.set_meta("input_size", std::to_string(s.input_size));
  a.set_meta("patch_grid", std::to_string(s.patch_grid));
  a.set_meta("token_dim", std::to_string(s.token_dim));
  a.set_meta("layers", std::to_string(s.layers));
  a.set_meta("heads", std::to_string(s.heads));
  a.set_meta("manifest", encoder.manifest());
  for (const auto& [name, v] : encoder.parameters().entries()) a.put(name, v.value());
  for (const auto& p : prompts) a.put("text:" + p, encoder.text_embed(p));
  a.save(path);
}

template class TransformerEncoder<float>;
template class TransformerEncoder<double>;
template std::shared_ptr<TransformerEncoder<float>> make_standin_encoder<float>(const EncoderSpec&);
template std::shared_ptr<TransformerEncoder<double>> make_standin_encoder<double>(const EncoderSpec&);
template std::shared_ptr<EncoderAdapter<float>> load_encoder<float>(const std::string&, const EncoderSpec&);
template std::shared_ptr<EncoderAdapter<double>> load_encoder<double>(const std::string&, const EncoderSpec&);
template void save_encoder<float>(const TransformerEncoder<float>&, const std::string&,
                                  const std::vector<std::string>&);
template void save_encoder<double>(const TransformerEncoder<double>&, const std::string&,
                                   const std::vector<std::string>&);

}  // namespace fasa
