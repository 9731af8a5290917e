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

#include "fasa/semantic_align.hpp"

#include <cmath>

namespace fasa {
namespace {

template <typename S>
std::vector<int> labels_impl(const Tensor<S>& mask, Index grid, PatchLabelRule rule) {
  if (mask.rank() < 2) throw ValidationError("patch_labels: mask must be 2D");
  const Index h = mask.dim(-2), w = mask.dim(-1);
  if (mask.size() != h * w) throw ValidationError("patch_labels: expected a single H x W mask");
  if (grid < 1 || grid > h || grid > w) throw ValidationError("patch_labels: grid must be within 1..min(H,W)");
  for (Index i = 0; i < mask.size(); ++i)
    if (mask[i] != S(0) && mask[i] != S(1)) throw ValidationError("patch_labels: mask is not binary");
  std::vector<int> labels(static_cast<std::size_t>(grid * grid));
  for (Index r = 0; r < grid; ++r) {
    const Index y0 = r * h / grid, y1 = (r + 1) * h / grid;
    for (Index c = 0; c < grid; ++c) {
      const Index x0 = c * w / grid, x1 = (c + 1) * w / grid;
      Index ones = 0;
      for (Index y = y0; y < y1; ++y)
        for (Index x = x0; x < x1; ++x) ones += mask[y * w + x] != S(0);
      const Index cells = (y1 - y0) * (x1 - x0);
      const bool fake = rule == PatchLabelRule::kMajority ? 2 * ones >= cells : ones > 0;
      labels[static_cast<std::size_t>(r * grid + c)] = fake ? 1 : 0;
    }
  }
  return labels;
}

}  // namespace

PatchLabelRule parse_patch_label_rule(const std::string& name) {
  if (name == "majority") return PatchLabelRule::kMajority;
  if (name == "any") return PatchLabelRule::kAnyOverlap;
  throw ValidationError("unknown patch label rule '" + name + "' (expected majority or any)");
}

PrototypeSource parse_prototype_source(const std::string& name) {
  if (name == "text") return PrototypeSource::kTextEmbeddings;
  if (name == "random") return PrototypeSource::kSeededRandom;
  throw ValidationError("unknown prototype source '" + name + "' (expected text or random)");
}

template <typename S>
Var<S> aggregate_tokens(const Tensor<S>& stack, const Var<S>& projection, const Var<S>& bias) {
  if (stack.rank() != 4) throw ValidationError("aggregate_tokens: expected [N, L, T, d_t] stack");
  const Index n = stack.dim(0), layers = stack.dim(1), t = stack.dim(2), dt = stack.dim(3);
  if (projection.shape().rank() != 2 || projection.dim(1) != layers * dt)
    throw ValidationError("aggregate_tokens: projection " + projection.shape().str() + " does not accept " +
                          std::to_string(layers) + " x " + std::to_string(dt) + " concatenated tokens");
  // [N, L, T, d_t] -> [N, T, L, d_t] -> [N, T, L * d_t]
  Var<S> cat = reshape(permute(constant(stack), {0, 2, 1, 3}), Shape{n, t, layers * dt});
  return linear(cat, projection, bias);
}

template <typename S>
Var<S> refine(const Var<S>& tokens, const MultiHeadAttention<S>& attention) {
  if (!tokens.value().array().isFinite().all()) throw ValidationError("refine: non-finite tokens");
  return add(attention(tokens), tokens);
}

template <typename S>
Var<S> to_feature_map(const Var<S>& tokens, Index grid) {
  if (tokens.shape().rank() != 3 || tokens.dim(1) != grid * grid)
    throw ValidationError("to_feature_map: " + tokens.shape().str() + " does not have " +
                          std::to_string(grid * grid) + " rows");
  return reshape(tokens, Shape{tokens.dim(0), grid, grid, tokens.dim(2)});
}

template <typename S>
Var<S> feature_map_to_nchw(const Var<S>& grid_map) {
  return permute(grid_map, {0, 3, 1, 2});
}

std::vector<int> patch_labels(const Tensor<float>& mask, Index grid, PatchLabelRule rule) {
  return labels_impl(mask, grid, rule);
}

std::vector<int> patch_labels(const Tensor<double>& mask, Index grid, PatchLabelRule rule) {
  return labels_impl(mask, grid, rule);
}

template <typename S>
PrototypePair<S> init_prototypes(PrototypeSource source, const EncoderAdapter<S>* encoder, Index dim,
                                 std::uint64_t seed) {
  PrototypePair<S> p{Tensor<S>(Shape{dim}), Tensor<S>(Shape{dim})};
  if (source == PrototypeSource::kSeededRandom) {
    Rng rng(mix_seed(seed, fnv1a("prototypes")));
    for (Index i = 0; i < dim; ++i) p.real[i] = static_cast<S>(rng.normal());
    for (Index i = 0; i < dim; ++i) p.fake[i] = static_cast<S>(rng.normal());
    return p;
  }
  if (!encoder || !encoder->has_text())
    throw ConfigError("text prototype initialization requires an encoder with text embeddings; "
                      "use prototype_init = random instead");
  const Tensor<S> tr = encoder->text_embed(kAuthenticPrompt);
  const Tensor<S> tf = encoder->text_embed(kManipulatedPrompt);
  const Index dt = tr.size();
  if (dt == dim) return {tr.reshaped(Shape{dim}), tf.reshaped(Shape{dim})};
  // Shared fixed projection into the d-dimensional latent space.
  Rng rng(mix_seed(seed, fnv1a("prototypes.text_projection")));
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> proj(dim, dt);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dt));
  for (Index i = 0; i < proj.size(); ++i) proj.data()[i] = static_cast<S>(rng.normal() * scale);
  Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>>(p.real.data(), dim) = proj * tr.array().matrix();
  Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>>(p.fake.data(), dim) = proj * tf.array().matrix();
  return p;
}

template <typename S>
Var<S> temperature(const Var<S>& log_tau) {
  return clamp(exp(log_tau), static_cast<S>(kMinTemperature), static_cast<S>(kMaxTemperature));
}

template <typename S>
Var<S> contrastive_loss(const Var<S>& z, const std::vector<int>& labels, const Var<S>& real_prototype,
                        const Var<S>& fake_prototype, const Var<S>& tau) {
  const Index d = z.shape()[-1];
  const Index rows = z.value().size() / d;
  if (static_cast<Index>(labels.size()) != rows)
    throw ValidationError("contrastive_loss: " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(rows) + " patches");
  if (real_prototype.value().size() != d || fake_prototype.value().size() != d)
    throw ValidationError("contrastive_loss: prototype length must equal embedding dim");
  for (int y : labels)
    if (y != 0 && y != 1) throw ValidationError("contrastive_loss: labels must be 0 (real) or 1 (fake)");
  const Var<S> protos = concat<S>({reshape(real_prototype, Shape{1, d}), reshape(fake_prototype, Shape{1, d})}, 0);
  const Var<S> cos = linear(l2_normalize(reshape(z, Shape{rows, d})), l2_normalize(protos), Var<S>());
  return softmax_cross_entropy(div_scalar_var(cos, tau), labels);
}

template <typename S>
SemanticAligner<S>::SemanticAligner(ParameterStore<S>& store, std::shared_ptr<const EncoderAdapter<S>> encoder,
                                    const SemanticAlignConfig& config)
    : encoder_(std::move(encoder)), config_(config) {
  if (!encoder_) throw ConfigError("semantic alignment needs an encoder");
  layers_ = config.layers.empty() ? default_layer_set(encoder_->layer_count()) : config.layers;
  const Index d = config.embed_dim;
  const Index in = static_cast<Index>(layers_.size()) * encoder_->token_dim();
  w_m_ = store.create("psa.w_m", Shape{d, in}, Init::fan_in(in));
  attention_ = MultiHeadAttention<S>(store, "psa.msa", d, config.heads);
  if (!config.share_projector) projector_ = Linear<S>(store, "psa.projector", d, d);
  const PrototypePair<S> init = init_prototypes(config.prototype_source, encoder_.get(), d, store.seed());
  real_ = store.add("psa.prototype_real", init.real);
  fake_ = store.add("psa.prototype_fake", init.fake);
  log_tau_ = store.add("psa.log_tau", Tensor<S>::scalar(static_cast<S>(std::log(config.tau_init))));
}

template <typename S>
SemanticOutput<S> SemanticAligner<S>::operator()(const Tensor<S>& images) const {
  const Tensor<S> stack = encoder_->encode(images, layers_);
  SemanticOutput<S> out;
  const Var<S> p = aggregate_tokens(stack, w_m_);
  auto attended = attention_.attend(p, p);
  out.tokens = add(attended.out, p);
  out.attention = attended.weights.value();
  out.feature_map = feature_map_to_nchw(to_feature_map(out.tokens, encoder_->patch_grid()));
  out.embeddings = config_.share_projector ? out.tokens : projector_(out.tokens);
  return out;
}

#define FASA_INSTANTIATE_PSA(S)                                                                        \
  template Var<S> aggregate_tokens<S>(const Tensor<S>&, const Var<S>&, const Var<S>&);                 \
  template Var<S> refine<S>(const Var<S>&, const MultiHeadAttention<S>&);                              \
  template Var<S> to_feature_map<S>(const Var<S>&, Index);                                             \
  template Var<S> feature_map_to_nchw<S>(const Var<S>&);                                               \
  template PrototypePair<S> init_prototypes<S>(PrototypeSource, const EncoderAdapter<S>*, Index, std::uint64_t); \
  template Var<S> temperature<S>(const Var<S>&);                                                       \
  template Var<S> contrastive_loss<S>(const Var<S>&, const std::vector<int>&, const Var<S>&, const Var<S>&, \
                                      const Var<S>&);                                                  \
  template class SemanticAligner<S>;

FASA_INSTANTIATE_PSA(float)
FASA_INSTANTIATE_PSA(double)

}  // namespace fasa
