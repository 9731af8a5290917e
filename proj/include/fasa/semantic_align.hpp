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

// Patch-level semantic alignment: multi-layer token aggregation, attention
// refinement, the real/fake prototype pair, and the patch-to-prototype
// contrastive objective.

#ifndef FASA_SEMANTIC_ALIGN_HPP_
#define FASA_SEMANTIC_ALIGN_HPP_

#include <memory>
#include <string>
#include <vector>

#include "fasa/encoder.hpp"
#include "fasa/nn.hpp"

namespace fasa {

inline constexpr const char* kAuthenticPrompt = "an authentic image region";
inline constexpr const char* kManipulatedPrompt = "a manipulated image region";

inline constexpr double kMinTemperature = 1e-3;
inline constexpr double kMaxTemperature = 1.0;

enum class PatchLabelRule { kMajority, kAnyOverlap };
enum class PrototypeSource { kTextEmbeddings, kSeededRandom };

PatchLabelRule parse_patch_label_rule(const std::string& name);
PrototypeSource parse_prototype_source(const std::string& name);

/// Concatenates each patch's tokens across layers and projects them:
/// stack [N, L, T, d_t] -> [N, T, d] with weight [d, L * d_t].
template <typename S>
Var<S> aggregate_tokens(const Tensor<S>& stack, const Var<S>& projection, const Var<S>& bias = Var<S>());

/// P + MSA(P).
template <typename S>
Var<S> refine(const Var<S>& tokens, const MultiHeadAttention<S>& attention);

/// Raster reshape [N, g*g, d] -> [N, g, g, d]; patch i lands at (i / g, i % g).
template <typename S>
Var<S> to_feature_map(const Var<S>& tokens, Index grid);

/// [N, g, g, d] -> [N, d, g, g] for the convolutional side path.
template <typename S>
Var<S> feature_map_to_nchw(const Var<S>& grid_map);

/// Labels (0 = real, 1 = fake) for the g x g patch cells of an H x W binary
/// mask. Cell (r, c) spans rows [floor(r H / g), floor((r + 1) H / g)).
/// Majority: fake iff the cell mean is >= 0.5. AnyOverlap: fake iff any pixel
/// is set. Non-binary masks are rejected.
std::vector<int> patch_labels(const Tensor<float>& mask, Index grid, PatchLabelRule rule = PatchLabelRule::kMajority);
std::vector<int> patch_labels(const Tensor<double>& mask, Index grid, PatchLabelRule rule = PatchLabelRule::kMajority);

template <typename S>
struct PrototypePair {
  Tensor<S> real;
  Tensor<S> fake;
};

/// Text source: the two prompts are embedded and, if d != d_t, mapped to d
/// by a fixed seeded projection. Seeded source: standard normal draws.
template <typename S>
PrototypePair<S> init_prototypes(PrototypeSource source, const EncoderAdapter<S>* encoder, Index dim,
                                 std::uint64_t seed);

/// tau = clamp(exp(log_tau), 1e-3, 1).
template <typename S>
Var<S> temperature(const Var<S>& log_tau);

/// Mean over patches of -log softmax_c(cos(z_i, e_c) / tau)[y_i], classes
/// (real, fake). z is [N, T, d] or [R, d]; labels has one entry per row.
template <typename S>
Var<S> contrastive_loss(const Var<S>& z, const std::vector<int>& labels, const Var<S>& real_prototype,
                        const Var<S>& fake_prototype, const Var<S>& tau);

struct SemanticAlignConfig {
  Index embed_dim = 256;
  Index heads = 8;
  double tau_init = 0.07;
  std::vector<int> layers;  // empty: default_layer_set
  PrototypeSource prototype_source = PrototypeSource::kTextEmbeddings;
  bool share_projector = false;  // z uses W_m's output directly instead of a separate projector
};

template <typename S>
struct SemanticOutput {
  Var<S> tokens;       // refined P_hat, [N, T, d]
  Var<S> feature_map;  // F_c as [N, d, g, g]
  Var<S> embeddings;   // z, [N, T, d]
  Tensor<S> attention; // refinement attention weights [N*heads, T, T]
};

/// The trainable side of the semantic branch over a frozen encoder.
template <typename S>
class SemanticAligner {
 public:
  SemanticAligner(ParameterStore<S>& store, std::shared_ptr<const EncoderAdapter<S>> encoder,
                  const SemanticAlignConfig& config);

  /// images are [N, 3, s, s] at the encoder's input size.
  SemanticOutput<S> operator()(const Tensor<S>& images) const;

  Var<S> tau() const { return temperature(log_tau_); }
  const Var<S>& log_tau() const { return log_tau_; }
  const Var<S>& real_prototype() const { return real_; }
  const Var<S>& fake_prototype() const { return fake_; }
  const Var<S>& projection() const { return w_m_; }
  const MultiHeadAttention<S>& attention() const { return attention_; }
  const std::vector<int>& layers() const { return layers_; }
  Index grid() const { return encoder_->patch_grid(); }
  const EncoderAdapter<S>& encoder() const { return *encoder_; }

 private:
  std::shared_ptr<const EncoderAdapter<S>> encoder_;
  SemanticAlignConfig config_;
  std::vector<int> layers_;
  Var<S> w_m_;
  MultiHeadAttention<S> attention_;
  Linear<S> projector_;
  Var<S> real_, fake_, log_tau_;
};

}  // namespace fasa

#endif  // FASA_SEMANTIC_ALIGN_HPP_
