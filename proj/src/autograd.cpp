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

#include "fasa/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

namespace fasa {
namespace {

template <typename S>
using NodePtr = std::shared_ptr<Node<S>>;

template <typename S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
using RowMap = Eigen::Map<RowMat<S>>;

template <typename S>
using ConstRowMap = Eigen::Map<const RowMat<S>>;

template <typename S>
bool needs(const NodePtr<S>& p) {
  return p && p->requires_grad;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

void require_same(const Shape& a, const Shape& b, const char* op) {
  if (a != b) throw ValidationError(std::string(op) + ": shape mismatch " + a.str() + " vs " + b.str());
}

template <typename S>
Tensor<S> permute_tensor(const Tensor<S>& x, const std::vector<int>& order) {
  const int r = x.rank();
  std::vector<Index> out_dims(r), in_strides(r), out_strides(r);
  for (int i = 0; i < r; ++i) out_dims[i] = x.dim(order[i]);
  Index stride = 1;
  for (int i = r - 1; i >= 0; --i) {
    in_strides[i] = stride;
    stride *= x.dim(i);
  }
  // stride of output axis i measured in the input buffer
  std::vector<Index> src_stride(r);
  for (int i = 0; i < r; ++i) src_stride[i] = in_strides[order[i]];
  Tensor<S> out{Shape(out_dims)};
  std::vector<Index> idx(r, 0);
  const Index n = x.size();
  Index src = 0;
  for (Index k = 0; k < n; ++k) {
    out[k] = x[src];
    for (int axis = r - 1; axis >= 0; --axis) {
      ++idx[axis];
      src += src_stride[axis];
      if (idx[axis] < out_dims[axis]) break;
      src -= src_stride[axis] * out_dims[axis];
      idx[axis] = 0;
    }
  }
  return out;
}

struct Interp {
  std::vector<Index> lo, hi;
  std::vector<double> frac;
};

Interp bilinear_axis(Index in, Index out) {
  Interp t;
  t.lo.resize(out);
  t.hi.resize(out);
  t.frac.resize(out);
  const double ratio = static_cast<double>(in) / static_cast<double>(out);
  for (Index i = 0; i < out; ++i) {
    double src = (static_cast<double>(i) + 0.5) * ratio - 0.5;
    if (src < 0) src = 0;
    Index lo = static_cast<Index>(std::floor(src));
    if (lo > in - 1) lo = in - 1;
    t.lo[i] = lo;
    t.hi[i] = std::min(lo + 1, in - 1);
    t.frac[i] = src - static_cast<double>(lo);
  }
  return t;
}

template <typename S>
void im2col(const S* x, Index c, Index h, Index w, int k, int stride, int pad, Index ho, Index wo,
            S* cols) {
  for (Index ci = 0; ci < c; ++ci) {
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        S* row = cols + ((ci * k + ki) * k + kj) * ho * wo;
        for (Index oy = 0; oy < ho; ++oy) {
          const Index iy = oy * stride - pad + ki;
          for (Index ox = 0; ox < wo; ++ox) {
            const Index ix = ox * stride - pad + kj;
            row[oy * wo + ox] =
                (iy >= 0 && iy < h && ix >= 0 && ix < w) ? x[(ci * h + iy) * w + ix] : S(0);
          }
        }
      }
    }
  }
}

template <typename S>
void col2im(const S* cols, Index c, Index h, Index w, int k, int stride, int pad, Index ho, Index wo,
            S* x) {
  for (Index ci = 0; ci < c; ++ci) {
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        const S* row = cols + ((ci * k + ki) * k + kj) * ho * wo;
        for (Index oy = 0; oy < ho; ++oy) {
          const Index iy = oy * stride - pad + ki;
          if (iy < 0 || iy >= h) continue;
          for (Index ox = 0; ox < wo; ++ox) {
            const Index ix = ox * stride - pad + kj;
            if (ix >= 0 && ix < w) x[(ci * h + iy) * w + ix] += row[oy * wo + ox];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename S>
void backward(const Var<S>& root, const Tensor<S>* seed) {
  if (!root.requires_grad()) return;
  // Iterative post-order DFS gives a topological order.
  std::vector<Node<S>*> order;
  std::unordered_set<Node<S>*> seen;
  std::vector<std::pair<Node<S>*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<S>* p = node->parents[next++].get();
      if (p && p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  Node<S>& r = *root.node();
  Tensor<S>& g = r.grad_buffer();
  if (seed) {
    require_same(seed->shape(), r.value.shape(), "backward seed");
    g.array() += seed->array();
  } else {
    g.array() += S(1);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<S>* node = *it;
    if (node->backward && node->grad.size() == node->value.size()) node->backward(*node);
  }
}

// ---------------------------------------------------------------------------

template <typename S>
Var<S> add(const Var<S>& a, const Var<S>& b) {
  require_same(a.shape(), b.shape(), "add");
  Tensor<S> out(a.shape(), a.value().array() + b.value().array());
  return make_result<S>(std::move(out), {a, b}, [](Node<S>& self) {
    for (auto& p : self.parents)
      if (needs(p)) p->grad_buffer().array() += self.grad.array();
  });
}

template <typename S>
Var<S> sub(const Var<S>& a, const Var<S>& b) {
  require_same(a.shape(), b.shape(), "sub");
  Tensor<S> out(a.shape(), a.value().array() - b.value().array());
  return make_result<S>(std::move(out), {a, b}, [](Node<S>& self) {
    if (needs(self.parents[0])) self.parents[0]->grad_buffer().array() += self.grad.array();
    if (needs(self.parents[1])) self.parents[1]->grad_buffer().array() -= self.grad.array();
  });
}

template <typename S>
Var<S> mul(const Var<S>& a, const Var<S>& b) {
  require_same(a.shape(), b.shape(), "mul");
  Tensor<S> out(a.shape(), a.value().array() * b.value().array());
  return make_result<S>(std::move(out), {a, b}, [](Node<S>& self) {
    auto& pa = self.parents[0];
    auto& pb = self.parents[1];
    if (needs(pa)) pa->grad_buffer().array() += self.grad.array() * pb->value.array();
    if (needs(pb)) pb->grad_buffer().array() += self.grad.array() * pa->value.array();
  });
}

template <typename S>
Var<S> scale(const Var<S>& x, S factor) {
  Tensor<S> out(x.shape(), x.value().array() * factor);
  return make_result<S>(std::move(out), {x}, [factor](Node<S>& self) {
    self.parents[0]->grad_buffer().array() += self.grad.array() * factor;
  });
}

template <typename S>
Var<S> add_scalar(const Var<S>& x, S offset) {
  Tensor<S> out(x.shape(), x.value().array() + offset);
  return make_result<S>(std::move(out), {x}, [](Node<S>& self) {
    self.parents[0]->grad_buffer().array() += self.grad.array();
  });
}

template <typename S>
Var<S> mul_scalar_var(const Var<S>& x, const Var<S>& s) {
  require(s.value().size() == 1, "mul_scalar_var: scalar operand must have one element");
  const S factor = s.value()[0];
  Tensor<S> out(x.shape(), x.value().array() * factor);
  return make_result<S>(std::move(out), {x, s}, [](Node<S>& self) {
    auto& px = self.parents[0];
    auto& ps = self.parents[1];
    if (needs(px)) px->grad_buffer().array() += self.grad.array() * ps->value[0];
    if (needs(ps)) ps->grad_buffer()[0] += (self.grad.array() * px->value.array()).sum();
  });
}

template <typename S>
Var<S> div_scalar_var(const Var<S>& x, const Var<S>& s) {
  require(s.value().size() == 1, "div_scalar_var: scalar operand must have one element");
  const S d = s.value()[0];
  Tensor<S> out(x.shape(), x.value().array() / d);
  return make_result<S>(std::move(out), {x, s}, [](Node<S>& self) {
    auto& px = self.parents[0];
    auto& ps = self.parents[1];
    const S d = ps->value[0];
    if (needs(px)) px->grad_buffer().array() += self.grad.array() / d;
    if (needs(ps))
      ps->grad_buffer()[0] -= (self.grad.array() * px->value.array()).sum() / (d * d);
  });
}

template <typename S>
Var<S> sigmoid(const Var<S>& x) {
  const auto& a = x.value().array();
  Tensor<S> out(x.shape(), a.unaryExpr([](S v) {
    if (v >= S(0)) return S(1) / (S(1) + std::exp(-v));
    const S e = std::exp(v);
    return e / (S(1) + e);
  }));
  return make_result<S>(std::move(out), {x}, [](Node<S>& self) {
    const auto& y = self.value.array();
    self.parents[0]->grad_buffer().array() += self.grad.array() * y * (S(1) - y);
  });
}

template <typename S>
Var<S> gelu(const Var<S>& x) {
  const S inv_sqrt2 = S(1) / std::sqrt(S(2));
  Tensor<S> out(x.shape(), x.value().array().unaryExpr([inv_sqrt2](S v) {
    return S(0.5) * v * (S(1) + std::erf(v * inv_sqrt2));
  }));
  return make_result<S>(std::move(out), {x}, [inv_sqrt2](Node<S>& self) {
    const S inv_sqrt2pi = S(1) / std::sqrt(S(2) * std::numbers::pi_v<S>);
    auto& p = self.parents[0];
    p->grad_buffer().array() +=
        self.grad.array() * p->value.array().unaryExpr([=](S v) {
          return S(0.5) * (S(1) + std::erf(v * inv_sqrt2)) + v * std::exp(S(-0.5) * v * v) * inv_sqrt2pi;
        });
  });
}

template <typename S>
Var<S> relu(const Var<S>& x) {
  Tensor<S> out(x.shape(), x.value().array().max(S(0)));
  return make_result<S>(std::move(out), {x}, [](Node<S>& self) {
    auto& p = self.parents[0];
    p->grad_buffer().array() += (p->value.array() > S(0)).select(self.grad.array(), S(0));
  });
}

template <typename S>
Var<S> exp(const Var<S>& x) {
  Tensor<S> out(x.shape(), x.value().array().exp());
  return make_result<S>(std::move(out), {x}, [](Node<S>& self) {
    self.parents[0]->grad_buffer().array() += self.grad.array() * self.value.array();
  });
}

template <typename S>
Var<S> clamp(const Var<S>& x, S lo, S hi) {
  Tensor<S> out(x.shape(), x.value().array().max(lo).min(hi));
  return make_result<S>(std::move(out), {x}, [lo, hi](Node<S>& self) {
    auto& p = self.parents[0];
    const auto& v = p->value.array();
    p->grad_buffer().array() += (v >= lo && v <= hi).select(self.grad.array(), S(0));
  });
}

template <typename S>
Var<S> add_channel_bias(const Var<S>& x, const Var<S>& bias) {
  require(x.shape().rank() >= 2 && bias.value().size() == x.dim(1),
          "add_channel_bias: bias length must equal channel count of " + x.shape().str());
  const Index n = x.dim(0), c = x.dim(1), inner = x.shape().span(2, x.shape().rank());
  Tensor<S> out = x.value();
  for (Index i = 0; i < n; ++i)
    for (Index ch = 0; ch < c; ++ch) out.array().segment((i * c + ch) * inner, inner) += bias.value()[ch];
  return make_result<S>(std::move(out), {x, bias}, [n, c, inner](Node<S>& self) {
    if (needs(self.parents[0])) self.parents[0]->grad_buffer().array() += self.grad.array();
    if (needs(self.parents[1])) {
      auto& gb = self.parents[1]->grad_buffer();
      for (Index i = 0; i < n; ++i)
        for (Index ch = 0; ch < c; ++ch) gb[ch] += self.grad.array().segment((i * c + ch) * inner, inner).sum();
    }
  });
}

template <typename S>
Var<S> mul_plane(const Var<S>& x, const Var<S>& plane) {
  require(x.shape().rank() == 4, "mul_plane: expected NCHW input");
  const Index hw = x.dim(2) * x.dim(3);
  require(plane.value().size() == hw, "mul_plane: plane size must equal H*W of " + x.shape().str());
  const Index planes = x.dim(0) * x.dim(1);
  Tensor<S> out(x.shape());
  for (Index k = 0; k < planes; ++k)
    out.array().segment(k * hw, hw) = x.value().array().segment(k * hw, hw) * plane.value().array();
  return make_result<S>(std::move(out), {x, plane}, [planes, hw](Node<S>& self) {
    auto& px = self.parents[0];
    auto& pm = self.parents[1];
    if (needs(px)) {
      auto& g = px->grad_buffer();
      for (Index k = 0; k < planes; ++k)
        g.array().segment(k * hw, hw) += self.grad.array().segment(k * hw, hw) * pm->value.array();
    }
    if (needs(pm)) {
      auto& g = pm->grad_buffer();
      for (Index k = 0; k < planes; ++k)
        g.array() += self.grad.array().segment(k * hw, hw) * px->value.array().segment(k * hw, hw);
    }
  });
}

template <typename S>
Var<S> repeat_batch(const Var<S>& x, Index n) {
  require(x.dim(0) == 1, "repeat_batch: leading axis must be 1, got " + x.shape().str());
  Shape shape = x.shape();
  shape[0] = n;
  const Index inner = x.value().size();
  Tensor<S> out(shape);
  for (Index i = 0; i < n; ++i) out.array().segment(i * inner, inner) = x.value().array();
  return make_result<S>(std::move(out), {x}, [n, inner](Node<S>& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (Index i = 0; i < n; ++i) g.array() += self.grad.array().segment(i * inner, inner);
  });
}

// ---------------------------------------------------------------------------

template <typename S>
Var<S> reshape(const Var<S>& x, Shape shape) {
  Tensor<S> out = x.value().reshaped(std::move(shape));
  return make_result<S>(std::move(out), {x}, [](Node<S>& self) {
    self.parents[0]->grad_buffer().array() += self.grad.array();
  });
}

template <typename S>
Var<S> permute(const Var<S>& x, const std::vector<int>& order) {
  require(static_cast<int>(order.size()) == x.shape().rank(), "permute: order rank mismatch");
  std::vector<int> inverse(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) inverse[order[i]] = static_cast<int>(i);
  Tensor<S> out = permute_tensor(x.value(), order);
  return make_result<S>(std::move(out), {x}, [inverse](Node<S>& self) {
    self.parents[0]->grad_buffer().array() += permute_tensor(self.grad, inverse).array();
  });
}

template <typename S>
Var<S> concat(const std::vector<Var<S>>& parts, int axis) {
  require(!parts.empty(), "concat: no inputs");
  const Shape& first = parts[0].shape();
  const int r = first.rank();
  if (axis < 0) axis += r;
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    require(p.shape().rank() == r, "concat: rank mismatch");
    for (int i = 0; i < r; ++i)
      if (i != axis && p.dim(i) != first[i])
        throw ValidationError("concat: incompatible shapes " + first.str() + " and " + p.shape().str());
    out_shape[axis] += p.dim(axis);
  }
  const Index outer = first.span(0, axis), inner = first.span(axis + 1, r);
  const Index total = out_shape[axis];
  Tensor<S> out(out_shape);
  std::vector<Index> offsets;
  Index offset = 0;
  for (const auto& p : parts) {
    const Index len = p.dim(axis);
    for (Index o = 0; o < outer; ++o)
      out.array().segment((o * total + offset) * inner, len * inner) =
          p.value().array().segment(o * len * inner, len * inner);
    offsets.push_back(offset);
    offset += len;
  }
  return make_result<S>(std::move(out), parts, [outer, inner, total, axis, offsets](Node<S>& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      auto& p = self.parents[k];
      if (!needs(p)) continue;
      const Index len = p->value.dim(axis);
      auto& g = p->grad_buffer();
      for (Index o = 0; o < outer; ++o)
        g.array().segment(o * len * inner, len * inner) +=
            self.grad.array().segment((o * total + offsets[k]) * inner, len * inner);
    }
  });
}

template <typename S>
Var<S> slice(const Var<S>& x, int axis, Index start, Index length) {
  const int r = x.shape().rank();
  if (axis < 0) axis += r;
  require(start >= 0 && length >= 0 && start + length <= x.dim(axis),
          "slice: range out of bounds for " + x.shape().str());
  Shape out_shape = x.shape();
  out_shape[axis] = length;
  const Index outer = x.shape().span(0, axis), inner = x.shape().span(axis + 1, r);
  const Index total = x.dim(axis);
  Tensor<S> out(out_shape);
  for (Index o = 0; o < outer; ++o)
    out.array().segment(o * length * inner, length * inner) =
        x.value().array().segment((o * total + start) * inner, length * inner);
  return make_result<S>(std::move(out), {x}, [outer, inner, total, start, length](Node<S>& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (Index o = 0; o < outer; ++o)
      g.array().segment((o * total + start) * inner, length * inner) +=
          self.grad.array().segment(o * length * inner, length * inner);
  });
}

// ---------------------------------------------------------------------------

template <typename S>
Var<S> linear(const Var<S>& x, const Var<S>& weight, const Var<S>& bias) {
  require(weight.shape().rank() == 2, "linear: weight must be [out, in]");
  const Index out_dim = weight.dim(0), in_dim = weight.dim(1);
  require(x.shape()[-1] == in_dim, "linear: input " + x.shape().str() + " incompatible with weight " +
                                       weight.shape().str());
  if (bias.defined()) require(bias.value().size() == out_dim, "linear: bias length mismatch");
  const Index rows = x.value().size() / in_dim;
  Shape out_shape = x.shape();
  out_shape[-1] = out_dim;
  Tensor<S> out(out_shape);
  ConstRowMap<S> xm(x.value().data(), rows, in_dim);
  ConstRowMap<S> wm(weight.value().data(), out_dim, in_dim);
  RowMap<S> ym(out.data(), rows, out_dim);
  ym.noalias() = xm * wm.transpose();
  if (bias.defined()) ym.rowwise() += bias.value().array().matrix().transpose();
  return make_result<S>(std::move(out), {x, weight, bias}, [rows, in_dim, out_dim](Node<S>& self) {
    auto& px = self.parents[0];
    auto& pw = self.parents[1];
    auto& pb = self.parents[2];
    ConstRowMap<S> gy(self.grad.data(), rows, out_dim);
    if (needs(px)) {
      RowMap<S> gx(px->grad_buffer().data(), rows, in_dim);
      ConstRowMap<S> wm(pw->value.data(), out_dim, in_dim);
      gx.noalias() += gy * wm;
    }
    if (needs(pw)) {
      RowMap<S> gw(pw->grad_buffer().data(), out_dim, in_dim);
      ConstRowMap<S> xm(px->value.data(), rows, in_dim);
      gw.noalias() += gy.transpose() * xm;
    }
    if (needs(pb)) pb->grad_buffer().array() += gy.colwise().sum().transpose().array();
  });
}

template <typename S>
Var<S> bmm(const Var<S>& a, const Var<S>& b, bool transpose_b) {
  require(a.shape().rank() == 3 && b.shape().rank() == 3 && a.dim(0) == b.dim(0),
          "bmm: expected [B,M,K] operands, got " + a.shape().str() + " and " + b.shape().str());
  const Index batch = a.dim(0), m = a.dim(1), k = a.dim(2);
  const Index n = transpose_b ? b.dim(1) : b.dim(2);
  require((transpose_b ? b.dim(2) : b.dim(1)) == k, "bmm: inner dimension mismatch");
  Tensor<S> out(Shape{batch, m, n});
  for (Index i = 0; i < batch; ++i) {
    ConstRowMap<S> am(a.value().data() + i * m * k, m, k);
    RowMap<S> cm(out.data() + i * m * n, m, n);
    if (transpose_b) {
      ConstRowMap<S> bm(b.value().data() + i * n * k, n, k);
      cm.noalias() = am * bm.transpose();
    } else {
      ConstRowMap<S> bm(b.value().data() + i * k * n, k, n);
      cm.noalias() = am * bm;
    }
  }
  return make_result<S>(std::move(out), {a, b}, [batch, m, k, n, transpose_b](Node<S>& self) {
    auto& pa = self.parents[0];
    auto& pb = self.parents[1];
    for (Index i = 0; i < batch; ++i) {
      ConstRowMap<S> gc(self.grad.data() + i * m * n, m, n);
      ConstRowMap<S> am(pa->value.data() + i * m * k, m, k);
      if (transpose_b) {
        ConstRowMap<S> bm(pb->value.data() + i * n * k, n, k);
        if (needs(pa)) RowMap<S>(pa->grad_buffer().data() + i * m * k, m, k).noalias() += gc * bm;
        if (needs(pb)) RowMap<S>(pb->grad_buffer().data() + i * n * k, n, k).noalias() += gc.transpose() * am;
      } else {
        ConstRowMap<S> bm(pb->value.data() + i * k * n, k, n);
        if (needs(pa)) RowMap<S>(pa->grad_buffer().data() + i * m * k, m, k).noalias() += gc * bm.transpose();
        if (needs(pb)) RowMap<S>(pb->grad_buffer().data() + i * k * n, k, n).noalias() += am.transpose() * gc;
      }
    }
  });
}

// ---------------------------------------------------------------------------

template <typename S>
Var<S> softmax(const Var<S>& x) {
  const Index cols = x.shape()[-1];
  const Index rows = x.value().size() / cols;
  Tensor<S> out(x.shape());
  ConstRowMap<S> xm(x.value().data(), rows, cols);
  RowMap<S> ym(out.data(), rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const S mx = xm.row(r).maxCoeff();
    ym.row(r) = (xm.row(r).array() - mx).exp().matrix();
    ym.row(r) /= ym.row(r).sum();
  }
  return make_result<S>(std::move(out), {x}, [rows, cols](Node<S>& self) {
    ConstRowMap<S> y(self.value.data(), rows, cols);
    ConstRowMap<S> g(self.grad.data(), rows, cols);
    RowMap<S> gx(self.parents[0]->grad_buffer().data(), rows, cols);
    for (Index r = 0; r < rows; ++r) {
      const S dot = y.row(r).dot(g.row(r));
      gx.row(r).array() += y.row(r).array() * (g.row(r).array() - dot);
    }
  });
}

template <typename S>
Var<S> layer_norm(const Var<S>& x, const Var<S>& gain, const Var<S>& shift, S eps) {
  const Index cols = x.shape()[-1];
  require(gain.value().size() == cols && shift.value().size() == cols,
          "layer_norm: affine length must equal last axis of " + x.shape().str());
  const Index rows = x.value().size() / cols;
  Tensor<S> out(x.shape());
  auto xhat = std::make_shared<Tensor<S>>(x.shape());
  auto rstd = std::make_shared<std::vector<S>>(rows);
  ConstRowMap<S> xm(x.value().data(), rows, cols);
  RowMap<S> hm(xhat->data(), rows, cols);
  RowMap<S> ym(out.data(), rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const S mu = xm.row(r).mean();
    const S var = (xm.row(r).array() - mu).square().mean();
    const S inv = S(1) / std::sqrt(var + eps);
    (*rstd)[r] = inv;
    hm.row(r) = ((xm.row(r).array() - mu) * inv).matrix();
    ym.row(r) = (hm.row(r).array() * gain.value().array().transpose() +
                 shift.value().array().transpose()).matrix();
  }
  return make_result<S>(std::move(out), {x, gain, shift}, [rows, cols, xhat, rstd](Node<S>& self) {
    auto& px = self.parents[0];
    auto& pg = self.parents[1];
    auto& pb = self.parents[2];
    ConstRowMap<S> g(self.grad.data(), rows, cols);
    ConstRowMap<S> h(xhat->data(), rows, cols);
    if (needs(pg)) pg->grad_buffer().array() += (g.array() * h.array()).colwise().sum().transpose();
    if (needs(pb)) pb->grad_buffer().array() += g.array().colwise().sum().transpose();
    if (needs(px)) {
      RowMap<S> gx(px->grad_buffer().data(), rows, cols);
      const auto gamma = pg->value.array().transpose();
      for (Index r = 0; r < rows; ++r) {
        Eigen::Array<S, 1, Eigen::Dynamic> dh = g.row(r).array() * gamma;
        const S m1 = dh.mean();
        const S m2 = (dh * h.row(r).array()).mean();
        gx.row(r).array() += (*rstd)[r] * (dh - m1 - h.row(r).array() * m2);
      }
    }
  });
}

template <typename S>
Var<S> layer_norm_channels(const Var<S>& x, const Var<S>& gain, const Var<S>& shift, S eps) {
  require(x.shape().rank() == 4, "layer_norm_channels: expected NCHW input");
  const Index n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
  require(gain.value().size() == c && shift.value().size() == c,
          "layer_norm_channels: affine length must equal channel count");
  Tensor<S> out(x.shape());
  auto xhat = std::make_shared<Tensor<S>>(x.shape());
  auto rstd = std::make_shared<Tensor<S>>(Shape{n, hw});
  // Each sample is a [C, HW] matrix; normalize each column.
  for (Index i = 0; i < n; ++i) {
    ConstRowMap<S> xm(x.value().data() + i * c * hw, c, hw);
    RowMap<S> hm(xhat->data() + i * c * hw, c, hw);
    RowMap<S> ym(out.data() + i * c * hw, c, hw);
    Eigen::Array<S, 1, Eigen::Dynamic> mu = xm.array().colwise().mean();
    RowMat<S> centered = (xm.array().rowwise() - mu).matrix();
    Eigen::Array<S, 1, Eigen::Dynamic> inv =
        (centered.array().square().colwise().mean() + eps).sqrt().inverse();
    rstd->array().segment(i * hw, hw) = inv.transpose();
    hm = (centered.array().rowwise() * inv).matrix();
    ym = ((hm.array().colwise() * gain.value().array()).colwise() + shift.value().array()).matrix();
  }
  return make_result<S>(std::move(out), {x, gain, shift}, [n, c, hw, xhat, rstd](Node<S>& self) {
    auto& px = self.parents[0];
    auto& pg = self.parents[1];
    auto& pb = self.parents[2];
    for (Index i = 0; i < n; ++i) {
      ConstRowMap<S> g(self.grad.data() + i * c * hw, c, hw);
      ConstRowMap<S> h(xhat->data() + i * c * hw, c, hw);
      if (needs(pg)) pg->grad_buffer().array() += (g.array() * h.array()).rowwise().sum();
      if (needs(pb)) pb->grad_buffer().array() += g.array().rowwise().sum();
      if (needs(px)) {
        RowMap<S> gx(px->grad_buffer().data() + i * c * hw, c, hw);
        RowMat<S> dh = (g.array().colwise() * pg->value.array()).matrix();
        Eigen::Array<S, 1, Eigen::Dynamic> m1 = dh.array().colwise().mean();
        Eigen::Array<S, 1, Eigen::Dynamic> m2 = (dh.array() * h.array()).colwise().mean();
        Eigen::Array<S, 1, Eigen::Dynamic> inv = rstd->array().segment(i * hw, hw).transpose();
        gx.array() += ((dh.array().rowwise() - m1) - h.array().rowwise() * m2).rowwise() * inv;
      }
    }
  });
}

template <typename S>
Var<S> l2_normalize(const Var<S>& x, S eps) {
  const Index cols = x.shape()[-1];
  const Index rows = x.value().size() / cols;
  Tensor<S> out(x.shape());
  auto norms = std::make_shared<std::vector<S>>(rows);
  ConstRowMap<S> xm(x.value().data(), rows, cols);
  RowMap<S> ym(out.data(), rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const S nrm = xm.row(r).norm();
    (*norms)[r] = nrm;
    ym.row(r) = xm.row(r) / std::max(nrm, eps);
  }
  return make_result<S>(std::move(out), {x}, [rows, cols, norms, eps](Node<S>& self) {
    ConstRowMap<S> y(self.value.data(), rows, cols);
    ConstRowMap<S> g(self.grad.data(), rows, cols);
    RowMap<S> gx(self.parents[0]->grad_buffer().data(), rows, cols);
    for (Index r = 0; r < rows; ++r) {
      const S nrm = (*norms)[r];
      if (nrm > eps) {
        gx.row(r) += (g.row(r) - y.row(r) * y.row(r).dot(g.row(r))) / nrm;
      } else {
        gx.row(r) += g.row(r) / eps;
      }
    }
  });
}

// ---------------------------------------------------------------------------

template <typename S>
Var<S> conv2d(const Var<S>& x, const Var<S>& weight, const Var<S>& bias, int stride, int padding) {
  require(x.shape().rank() == 4 && weight.shape().rank() == 4, "conv2d: expected NCHW input and OIHW weight");
  const Index n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const Index cout = weight.dim(0);
  const int k = static_cast<int>(weight.dim(2));
  require(weight.dim(1) == cin && weight.dim(3) == k,
          "conv2d: weight " + weight.shape().str() + " incompatible with input " + x.shape().str());
  require(stride >= 1 && padding >= 0, "conv2d: invalid stride/padding");
  const Index ho = (h + 2 * padding - k) / stride + 1;
  const Index wo = (w + 2 * padding - k) / stride + 1;
  require(ho >= 1 && wo >= 1, "conv2d: kernel larger than padded input " + x.shape().str());
  if (bias.defined()) require(bias.value().size() == cout, "conv2d: bias length mismatch");
  const Index kk = cin * k * k, pix = ho * wo;
  const bool pointwise = (k == 1 && stride == 1 && padding == 0);
  Tensor<S> out(Shape{n, cout, ho, wo});
  ConstRowMap<S> wm(weight.value().data(), cout, kk);
  RowMat<S> cols;
  if (!pointwise) cols.resize(kk, pix);
  for (Index i = 0; i < n; ++i) {
    const S* xi = x.value().data() + i * cin * h * w;
    RowMap<S> ym(out.data() + i * cout * pix, cout, pix);
    if (pointwise) {
      ym.noalias() = wm * ConstRowMap<S>(xi, cin, pix);
    } else {
      im2col(xi, cin, h, w, k, stride, padding, ho, wo, cols.data());
      ym.noalias() = wm * cols;
    }
    if (bias.defined()) ym.colwise() += bias.value().array().matrix();
  }
  return make_result<S>(std::move(out), {x, weight, bias},
                        [=](Node<S>& self) {
    auto& px = self.parents[0];
    auto& pw = self.parents[1];
    auto& pb = self.parents[2];
    ConstRowMap<S> wm(pw->value.data(), cout, kk);
    RowMat<S> cols;
    if (!pointwise) cols.resize(kk, pix);
    for (Index i = 0; i < n; ++i) {
      ConstRowMap<S> gy(self.grad.data() + i * cout * pix, cout, pix);
      const S* xi = px->value.data() + i * cin * h * w;
      if (needs(pw)) {
        RowMap<S> gw(pw->grad_buffer().data(), cout, kk);
        if (pointwise) {
          gw.noalias() += gy * ConstRowMap<S>(xi, cin, pix).transpose();
        } else {
          im2col(xi, cin, h, w, k, stride, padding, ho, wo, cols.data());
          gw.noalias() += gy * cols.transpose();
        }
      }
      if (needs(pb)) pb->grad_buffer().array() += gy.rowwise().sum().array();
      if (needs(px)) {
        S* gxi = px->grad_buffer().data() + i * cin * h * w;
        if (pointwise) {
          RowMap<S>(gxi, cin, pix).noalias() += wm.transpose() * gy;
        } else {
          cols.noalias() = wm.transpose() * gy;
          col2im(cols.data(), cin, h, w, k, stride, padding, ho, wo, gxi);
        }
      }
    }
  });
}

template <typename S>
Var<S> depthwise_conv2d(const Var<S>& x, const Var<S>& weight, const Var<S>& bias, int padding) {
  require(x.shape().rank() == 4 && weight.shape().rank() == 4 && weight.dim(0) == x.dim(1) &&
              weight.dim(1) == 1,
          "depthwise_conv2d: weight " + weight.shape().str() + " incompatible with " + x.shape().str());
  const Index n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int k = static_cast<int>(weight.dim(2));
  const Index ho = h + 2 * padding - k + 1, wo = w + 2 * padding - k + 1;
  require(ho >= 1 && wo >= 1, "depthwise_conv2d: kernel larger than padded input");
  if (bias.defined()) require(bias.value().size() == c, "depthwise_conv2d: bias length mismatch");
  Tensor<S> out(Shape{n, c, ho, wo});
  for (Index i = 0; i < n; ++i) {
    for (Index ch = 0; ch < c; ++ch) {
      const S* xp = x.value().data() + (i * c + ch) * h * w;
      const S* kp = weight.value().data() + ch * k * k;
      S* yp = out.data() + (i * c + ch) * ho * wo;
      const S b = bias.defined() ? bias.value()[ch] : S(0);
      for (Index oy = 0; oy < ho; ++oy) {
        for (Index ox = 0; ox < wo; ++ox) {
          S acc = b;
          for (int ki = 0; ki < k; ++ki) {
            const Index iy = oy - padding + ki;
            if (iy < 0 || iy >= h) continue;
            for (int kj = 0; kj < k; ++kj) {
              const Index ix = ox - padding + kj;
              if (ix >= 0 && ix < w) acc += kp[ki * k + kj] * xp[iy * w + ix];
            }
          }
          yp[oy * wo + ox] = acc;
        }
      }
    }
  }
  return make_result<S>(std::move(out), {x, weight, bias}, [=](Node<S>& self) {
    auto& px = self.parents[0];
    auto& pw = self.parents[1];
    auto& pb = self.parents[2];
    S* gx = needs(px) ? px->grad_buffer().data() : nullptr;
    S* gw = needs(pw) ? pw->grad_buffer().data() : nullptr;
    S* gb = needs(pb) ? pb->grad_buffer().data() : nullptr;
    for (Index i = 0; i < n; ++i) {
      for (Index ch = 0; ch < c; ++ch) {
        const S* xp = px->value.data() + (i * c + ch) * h * w;
        const S* kp = pw->value.data() + ch * k * k;
        const S* gy = self.grad.data() + (i * c + ch) * ho * wo;
        for (Index oy = 0; oy < ho; ++oy) {
          for (Index ox = 0; ox < wo; ++ox) {
            const S g = gy[oy * wo + ox];
            if (gb) gb[ch] += g;
            for (int ki = 0; ki < k; ++ki) {
              const Index iy = oy - padding + ki;
              if (iy < 0 || iy >= h) continue;
              for (int kj = 0; kj < k; ++kj) {
                const Index ix = ox - padding + kj;
                if (ix < 0 || ix >= w) continue;
                if (gw) gw[ch * k * k + ki * k + kj] += g * xp[iy * w + ix];
                if (gx) gx[(i * c + ch) * h * w + iy * w + ix] += g * kp[ki * k + kj];
              }
            }
          }
        }
      }
    }
  });
}

template <typename S>
Var<S> conv_transpose2x2(const Var<S>& x, const Var<S>& weight, const Var<S>& bias) {
  require(x.shape().rank() == 4 && weight.shape().rank() == 4 && weight.dim(0) == x.dim(1) &&
              weight.dim(2) == 2 && weight.dim(3) == 2,
          "conv_transpose2x2: weight " + weight.shape().str() + " incompatible with " + x.shape().str());
  const Index n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const Index cout = weight.dim(1), hw = h * w, kout = cout * 4;
  if (bias.defined()) require(bias.value().size() == cout, "conv_transpose2x2: bias length mismatch");
  Tensor<S> out(Shape{n, cout, 2 * h, 2 * w});
  ConstRowMap<S> wm(weight.value().data(), cin, kout);
  RowMat<S> blocks(kout, hw);
  for (Index i = 0; i < n; ++i) {
    ConstRowMap<S> xm(x.value().data() + i * cin * hw, cin, hw);
    blocks.noalias() = wm.transpose() * xm;
    for (Index co = 0; co < cout; ++co) {
      const S b = bias.defined() ? bias.value()[co] : S(0);
      for (int di = 0; di < 2; ++di)
        for (int dj = 0; dj < 2; ++dj) {
          const Index row = co * 4 + di * 2 + dj;
          for (Index y = 0; y < h; ++y)
            for (Index xx = 0; xx < w; ++xx)
              out.at(i, co, 2 * y + di, 2 * xx + dj) = blocks(row, y * w + xx) + b;
        }
    }
  }
  return make_result<S>(std::move(out), {x, weight, bias}, [=](Node<S>& self) {
    auto& px = self.parents[0];
    auto& pw = self.parents[1];
    auto& pb = self.parents[2];
    RowMat<S> gblocks(kout, hw);
    ConstRowMap<S> wm(pw->value.data(), cin, kout);
    for (Index i = 0; i < n; ++i) {
      for (Index co = 0; co < cout; ++co)
        for (int di = 0; di < 2; ++di)
          for (int dj = 0; dj < 2; ++dj) {
            const Index row = co * 4 + di * 2 + dj;
            for (Index y = 0; y < h; ++y)
              for (Index xx = 0; xx < w; ++xx)
                gblocks(row, y * w + xx) = self.grad.at(i, co, 2 * y + di, 2 * xx + dj);
          }
      if (needs(pb)) {
        auto& gb = pb->grad_buffer();
        for (Index co = 0; co < cout; ++co) gb[co] += gblocks.middleRows(co * 4, 4).sum();
      }
      if (needs(pw)) {
        ConstRowMap<S> xm(px->value.data() + i * cin * hw, cin, hw);
        RowMap<S>(pw->grad_buffer().data(), cin, kout).noalias() += xm * gblocks.transpose();
      }
      if (needs(px)) RowMap<S>(px->grad_buffer().data() + i * cin * hw, cin, hw).noalias() += wm * gblocks;
    }
  });
}

template <typename S>
Var<S> resize_bilinear(const Var<S>& x, Index out_h, Index out_w) {
  require(x.shape().rank() == 4, "resize_bilinear: expected NCHW input");
  require(out_h >= 1 && out_w >= 1, "resize_bilinear: empty target size");
  const Index planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h == out_h && w == out_w) return reshape(x, x.shape());
  auto ty = std::make_shared<Interp>(bilinear_axis(h, out_h));
  auto tx = std::make_shared<Interp>(bilinear_axis(w, out_w));
  Tensor<S> out(Shape{x.dim(0), x.dim(1), out_h, out_w});
  for (Index p = 0; p < planes; ++p) {
    const S* src = x.value().data() + p * h * w;
    S* dst = out.data() + p * out_h * out_w;
    for (Index oy = 0; oy < out_h; ++oy) {
      const S fy = static_cast<S>(ty->frac[oy]);
      const S* r0 = src + ty->lo[oy] * w;
      const S* r1 = src + ty->hi[oy] * w;
      for (Index ox = 0; ox < out_w; ++ox) {
        const S fx = static_cast<S>(tx->frac[ox]);
        const Index x0 = tx->lo[ox], x1 = tx->hi[ox];
        const S top = r0[x0] * (S(1) - fx) + r0[x1] * fx;
        const S bot = r1[x0] * (S(1) - fx) + r1[x1] * fx;
        dst[oy * out_w + ox] = top * (S(1) - fy) + bot * fy;
      }
    }
  }
  return make_result<S>(std::move(out), {x}, [=](Node<S>& self) {
    S* gx = self.parents[0]->grad_buffer().data();
    for (Index p = 0; p < planes; ++p) {
      const S* g = self.grad.data() + p * out_h * out_w;
      S* dst = gx + p * h * w;
      for (Index oy = 0; oy < out_h; ++oy) {
        const S fy = static_cast<S>(ty->frac[oy]);
        S* r0 = dst + ty->lo[oy] * w;
        S* r1 = dst + ty->hi[oy] * w;
        for (Index ox = 0; ox < out_w; ++ox) {
          const S fx = static_cast<S>(tx->frac[ox]);
          const Index x0 = tx->lo[ox], x1 = tx->hi[ox];
          const S v = g[oy * out_w + ox];
          r0[x0] += v * (S(1) - fy) * (S(1) - fx);
          r0[x1] += v * (S(1) - fy) * fx;
          r1[x0] += v * fy * (S(1) - fx);
          r1[x1] += v * fy * fx;
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------

template <typename S>
Var<S> sum(const Var<S>& x) {
  Tensor<S> out = Tensor<S>::scalar(x.value().array().sum());
  return make_result<S>(std::move(out), {x}, [](Node<S>& self) {
    self.parents[0]->grad_buffer().array() += self.grad[0];
  });
}

template <typename S>
Var<S> mean(const Var<S>& x) {
  const Index n = x.value().size();
  require(n > 0, "mean: empty tensor");
  Tensor<S> out = Tensor<S>::scalar(x.value().array().sum() / static_cast<S>(n));
  return make_result<S>(std::move(out), {x}, [n](Node<S>& self) {
    self.parents[0]->grad_buffer().array() += self.grad[0] / static_cast<S>(n);
  });
}

template <typename S>
Var<S> softmax_cross_entropy(const Var<S>& logits, const std::vector<int>& labels) {
  require(logits.shape().rank() == 2, "softmax_cross_entropy: expected [R,K] logits");
  const Index rows = logits.dim(0), cols = logits.dim(1);
  require(static_cast<Index>(labels.size()) == rows, "softmax_cross_entropy: label count mismatch");
  auto probs = std::make_shared<RowMat<S>>(rows, cols);
  ConstRowMap<S> lm(logits.value().data(), rows, cols);
  S total = 0;
  for (Index r = 0; r < rows; ++r) {
    require(labels[r] >= 0 && labels[r] < cols, "softmax_cross_entropy: label out of range");
    const S mx = lm.row(r).maxCoeff();
    const S lse = mx + std::log((lm.row(r).array() - mx).exp().sum());
    probs->row(r) = (lm.row(r).array() - lse).exp().matrix();
    total += lse - lm(r, labels[r]);
  }
  Tensor<S> out = Tensor<S>::scalar(total / static_cast<S>(rows));
  return make_result<S>(std::move(out), {logits}, [rows, cols, probs, labels](Node<S>& self) {
    RowMap<S> g(self.parents[0]->grad_buffer().data(), rows, cols);
    const S scale = self.grad[0] / static_cast<S>(rows);
    for (Index r = 0; r < rows; ++r) {
      g.row(r) += probs->row(r) * scale;
      g(r, labels[r]) -= scale;
    }
  });
}

template <typename S>
Var<S> binary_cross_entropy(const Var<S>& prob, const Tensor<S>& target, const Tensor<S>* weight,
                            S eps) {
  require(prob.value().size() == target.size(),
          "binary_cross_entropy: prediction " + prob.shape().str() + " vs target " + target.shape().str());
  if (weight) require(weight->size() == target.size(), "binary_cross_entropy: weight size mismatch");
  const Index n = prob.dim(0);
  const Index per = prob.value().size() / n;
  auto scales = std::make_shared<std::vector<S>>(n, S(0));
  S total = 0;
  const auto& p = prob.value().array();
  const auto& y = target.array();
  for (Index i = 0; i < n; ++i) {
    S acc = 0;
    Index count = 0;
    for (Index j = i * per; j < (i + 1) * per; ++j) {
      if (weight && (*weight)[j] == S(0)) continue;
      const S pc = std::clamp(p[j], eps, S(1) - eps);
      acc -= y[j] * std::log(pc) + (S(1) - y[j]) * std::log(S(1) - pc);
      ++count;
    }
    if (count > 0) {
      total += acc / static_cast<S>(count);
      (*scales)[i] = S(1) / static_cast<S>(count);
    }
  }
  Tensor<S> out = Tensor<S>::scalar(total / static_cast<S>(n));
  auto tgt = std::make_shared<Tensor<S>>(target);
  auto wgt = weight ? std::make_shared<Tensor<S>>(*weight) : nullptr;
  return make_result<S>(std::move(out), {prob}, [n, per, scales, tgt, wgt, eps](Node<S>& self) {
    auto& pp = self.parents[0];
    auto& g = pp->grad_buffer();
    const S upstream = self.grad[0] / static_cast<S>(n);
    for (Index i = 0; i < n; ++i) {
      const S sc = (*scales)[i] * upstream;
      if (sc == S(0)) continue;
      for (Index j = i * per; j < (i + 1) * per; ++j) {
        if (wgt && (*wgt)[j] == S(0)) continue;
        const S pv = pp->value[j];
        if (pv < eps || pv > S(1) - eps) continue;
        const S yv = (*tgt)[j];
        g[j] += sc * (-(yv / pv) + (S(1) - yv) / (S(1) - pv));
      }
    }
  });
}

// ---------------------------------------------------------------------------

#define FASA_INSTANTIATE_AUTOGRAD(S)                                                             \
  template void backward<S>(const Var<S>&, const Tensor<S>*);                                   \
  template Var<S> add<S>(const Var<S>&, const Var<S>&);                                         \
  template Var<S> sub<S>(const Var<S>&, const Var<S>&);                                         \
  template Var<S> mul<S>(const Var<S>&, const Var<S>&);                                         \
  template Var<S> scale<S>(const Var<S>&, S);                                                   \
  template Var<S> add_scalar<S>(const Var<S>&, S);                                              \
  template Var<S> mul_scalar_var<S>(const Var<S>&, const Var<S>&);                              \
  template Var<S> div_scalar_var<S>(const Var<S>&, const Var<S>&);                              \
  template Var<S> sigmoid<S>(const Var<S>&);                                                    \
  template Var<S> gelu<S>(const Var<S>&);                                                       \
  template Var<S> relu<S>(const Var<S>&);                                                       \
  template Var<S> exp<S>(const Var<S>&);                                                        \
  template Var<S> clamp<S>(const Var<S>&, S, S);                                                \
  template Var<S> add_channel_bias<S>(const Var<S>&, const Var<S>&);                            \
  template Var<S> mul_plane<S>(const Var<S>&, const Var<S>&);                                   \
  template Var<S> repeat_batch<S>(const Var<S>&, Index);                                        \
  template Var<S> reshape<S>(const Var<S>&, Shape);                                             \
  template Var<S> permute<S>(const Var<S>&, const std::vector<int>&);                           \
  template Var<S> concat<S>(const std::vector<Var<S>>&, int);                                   \
  template Var<S> slice<S>(const Var<S>&, int, Index, Index);                                   \
  template Var<S> linear<S>(const Var<S>&, const Var<S>&, const Var<S>&);                       \
  template Var<S> bmm<S>(const Var<S>&, const Var<S>&, bool);                                   \
  template Var<S> softmax<S>(const Var<S>&);                                                    \
  template Var<S> layer_norm<S>(const Var<S>&, const Var<S>&, const Var<S>&, S);                \
  template Var<S> layer_norm_channels<S>(const Var<S>&, const Var<S>&, const Var<S>&, S);       \
  template Var<S> l2_normalize<S>(const Var<S>&, S);                                            \
  template Var<S> conv2d<S>(const Var<S>&, const Var<S>&, const Var<S>&, int, int);             \
  template Var<S> depthwise_conv2d<S>(const Var<S>&, const Var<S>&, const Var<S>&, int);        \
  template Var<S> conv_transpose2x2<S>(const Var<S>&, const Var<S>&, const Var<S>&);            \
  template Var<S> resize_bilinear<S>(const Var<S>&, Index, Index);                              \
  template Var<S> sum<S>(const Var<S>&);                                                        \
  template Var<S> mean<S>(const Var<S>&);                                                       \
  template Var<S> softmax_cross_entropy<S>(const Var<S>&, const std::vector<int>&);             \
  template Var<S> binary_cross_entropy<S>(const Var<S>&, const Tensor<S>&, const Tensor<S>*, S);

FASA_INSTANTIATE_AUTOGRAD(float)
FASA_INSTANTIATE_AUTOGRAD(double)

#undef FASA_INSTANTIATE_AUTOGRAD

}  // namespace fasa
