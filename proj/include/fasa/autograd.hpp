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

#ifndef FASA_AUTOGRAD_HPP_
#define FASA_AUTOGRAD_HPP_

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "fasa/tensor.hpp"

namespace fasa {

template <typename Scalar>
struct Node {
  Tensor<Scalar> value;
  Tensor<Scalar> grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  /// Returns the gradient buffer, allocating zeros on first use.
  Tensor<Scalar>& grad_buffer() {
    if (grad.size() != value.size()) grad = Tensor<Scalar>(value.shape());
    return grad;
  }
};

/// Handle to a node of the reverse-mode graph. Copies share the node.
template <typename Scalar>
class Var {
 public:
  Var() = default;
  explicit Var(Tensor<Scalar> value, bool requires_grad = false)
      : node_(std::make_shared<Node<Scalar>>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
  }
  explicit Var(std::shared_ptr<Node<Scalar>> node) : node_(std::move(node)) {}

  bool defined() const { return static_cast<bool>(node_); }
  const Tensor<Scalar>& value() const { return node_->value; }
  Tensor<Scalar>& mutable_value() { return node_->value; }
  const Tensor<Scalar>& grad() const { return node_->grad; }
  Tensor<Scalar>& grad_buffer() { return node_->grad_buffer(); }
  bool requires_grad() const { return node_->requires_grad; }
  const Shape& shape() const { return node_->value.shape(); }
  Index dim(int axis) const { return node_->value.dim(axis); }
  void zero_grad() { node_->grad = Tensor<Scalar>(); }
  const std::shared_ptr<Node<Scalar>>& node() const { return node_; }

 private:
  std::shared_ptr<Node<Scalar>> node_;
};

/// Creates the result node of an op. The backward closure is dropped when
/// no parent requires a gradient.
template <typename Scalar>
Var<Scalar> make_result(Tensor<Scalar> value, std::vector<Var<Scalar>> parents,
                        std::function<void(Node<Scalar>&)> backward) {
  auto node = std::make_shared<Node<Scalar>>();
  node->value = std::move(value);
  for (const auto& p : parents) {
    if (p.defined() && p.requires_grad()) node->requires_grad = true;
  }
  if (node->requires_grad) {
    for (auto& p : parents) node->parents.push_back(p.node());
    node->backward = std::move(backward);
  }
  return Var<Scalar>(std::move(node));
}

/// Accumulates d(root)/d(node) into every reachable node with requires_grad.
/// `seed` defaults to ones (root is usually a scalar loss).
template <typename Scalar>
void backward(const Var<Scalar>& root, const Tensor<Scalar>* seed = nullptr);

template <typename Scalar>
Var<Scalar> constant(Tensor<Scalar> value) {
  return Var<Scalar>(std::move(value), false);
}

// ---------------------------------------------------------------------------
// Elementwise and broadcast arithmetic.

template <typename S> Var<S> add(const Var<S>& a, const Var<S>& b);
template <typename S> Var<S> sub(const Var<S>& a, const Var<S>& b);
template <typename S> Var<S> mul(const Var<S>& a, const Var<S>& b);
template <typename S> Var<S> scale(const Var<S>& x, S factor);
template <typename S> Var<S> add_scalar(const Var<S>& x, S offset);
/// x * s where s is a one-element Var.
template <typename S> Var<S> mul_scalar_var(const Var<S>& x, const Var<S>& s);
/// x / s where s is a one-element Var.
template <typename S> Var<S> div_scalar_var(const Var<S>& x, const Var<S>& s);

template <typename S> Var<S> sigmoid(const Var<S>& x);
template <typename S> Var<S> gelu(const Var<S>& x);
template <typename S> Var<S> relu(const Var<S>& x);
template <typename S> Var<S> exp(const Var<S>& x);
/// Values outside [lo, hi] are clipped and receive zero gradient.
template <typename S> Var<S> clamp(const Var<S>& x, S lo, S hi);

/// x[N,C,...] + b[C].
template <typename S> Var<S> add_channel_bias(const Var<S>& x, const Var<S>& bias);
/// x[N,C,H,W] * m[H,W], the same plane for every (n, c).
template <typename S> Var<S> mul_plane(const Var<S>& x, const Var<S>& plane);
/// Repeats a [1, ...] tensor n times along axis 0.
template <typename S> Var<S> repeat_batch(const Var<S>& x, Index n);

// ---------------------------------------------------------------------------
// Shape manipulation.

template <typename S> Var<S> reshape(const Var<S>& x, Shape shape);
template <typename S> Var<S> permute(const Var<S>& x, const std::vector<int>& order);
template <typename S> Var<S> concat(const std::vector<Var<S>>& parts, int axis);
template <typename S> Var<S> slice(const Var<S>& x, int axis, Index start, Index length);

// ---------------------------------------------------------------------------
// Linear algebra.

/// x[..., in] W[out, in]^T + b[out]; `bias` may be undefined.
template <typename S> Var<S> linear(const Var<S>& x, const Var<S>& weight, const Var<S>& bias);
/// Batched product a[B,M,K] b[B,K,N] (or b[B,N,K] with transpose_b).
template <typename S> Var<S> bmm(const Var<S>& a, const Var<S>& b, bool transpose_b = false);

// ---------------------------------------------------------------------------
// Normalization and attention building blocks.

/// Softmax over the last axis.
template <typename S> Var<S> softmax(const Var<S>& x);
/// Layer norm over the last axis with affine gain/shift of that length.
template <typename S>
Var<S> layer_norm(const Var<S>& x, const Var<S>& gain, const Var<S>& shift, S eps = S(1e-6));
/// Layer norm across channels at every pixel of an NCHW tensor.
template <typename S>
Var<S> layer_norm_channels(const Var<S>& x, const Var<S>& gain, const Var<S>& shift,
                           S eps = S(1e-6));
/// Rows divided by max(||row||, eps) over the last axis.
template <typename S> Var<S> l2_normalize(const Var<S>& x, S eps = S(1e-8));

// ---------------------------------------------------------------------------
// Convolution and resampling (NCHW).

template <typename S>
Var<S> conv2d(const Var<S>& x, const Var<S>& weight, const Var<S>& bias, int stride, int padding);
/// Per-channel convolution, weight [C,1,k,k], stride 1.
template <typename S>
Var<S> depthwise_conv2d(const Var<S>& x, const Var<S>& weight, const Var<S>& bias, int padding);
/// Kernel 2, stride 2 transposed convolution, weight [Cin,Cout,2,2].
template <typename S>
Var<S> conv_transpose2x2(const Var<S>& x, const Var<S>& weight, const Var<S>& bias);
/// Bilinear resize with half-pixel centers (align_corners = false).
template <typename S> Var<S> resize_bilinear(const Var<S>& x, Index out_h, Index out_w);

// ---------------------------------------------------------------------------
// Reductions and losses.

template <typename S> Var<S> sum(const Var<S>& x);
template <typename S> Var<S> mean(const Var<S>& x);
/// Mean over rows of -log softmax(logits)[label]; logits [R,K], labels in [0,K).
template <typename S>
Var<S> softmax_cross_entropy(const Var<S>& logits, const std::vector<int>& labels);
/// Binary cross-entropy on probabilities clamped to [eps, 1 - eps].
/// prob/target are [N,...]. Each sample is averaged over the pixels where
/// `weight` is nonzero (all pixels when weight is null); samples with no
/// such pixel contribute zero. The result is the mean over samples.
template <typename S>
Var<S> binary_cross_entropy(const Var<S>& prob, const Tensor<S>& target,
                            const Tensor<S>* weight = nullptr, S eps = S(1e-7));

template <typename S> Var<S> operator+(const Var<S>& a, const Var<S>& b) { return add(a, b); }
template <typename S> Var<S> operator-(const Var<S>& a, const Var<S>& b) { return sub(a, b); }
template <typename S> Var<S> operator*(const Var<S>& a, const Var<S>& b) { return mul(a, b); }

}  // namespace fasa

#endif  // FASA_AUTOGRAD_HPP_
