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

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "fasa/archive.hpp"
#include "fasa/gradcheck.hpp"
#include "fasa/optim.hpp"
#include "test_support.hpp"

namespace {

using fasa::Index;
using fasa::Shape;
using fasa::Tensor;
using fasa::Var;
using fasa::testing::random_tensor;

Var<double> param(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  return Var<double>(random_tensor<double>(std::move(shape), seed, lo, hi), true);
}

/// sum(f(...) * w) for a fixed random w, so every output element matters.
Var<double> weighted_sum(const Var<double>& y, std::uint64_t seed) {
  return fasa::sum(fasa::mul(y, fasa::constant(random_tensor<double>(y.shape(), seed))));
}

void ExpectGradientsMatch(const std::function<Var<double>()>& loss,
                          const std::vector<std::pair<std::string, Var<double>>>& params) {
  fasa::GradcheckOptions options;
  options.max_entries = 24;
  for (const auto& r : fasa::gradcheck(loss, params, options)) {
    EXPECT_TRUE(r.passed) << r.name << " rel " << r.max_rel_error;
    EXPECT_GT(r.checked, 0) << r.name;
  }
}

TEST(AutogradGradients, ElementwiseOps) {
  auto x = param({2, 3, 4}, 1);
  auto y = param({2, 3, 4}, 2);
  ExpectGradientsMatch(
      [&] {
        auto a = fasa::add(fasa::mul(fasa::sigmoid(x), fasa::gelu(y)), fasa::sub(fasa::exp(x), y));
        return weighted_sum(fasa::add_scalar(fasa::scale(a, 0.7), 0.3), 3);
      },
      {{"x", x}, {"y", y}});
}

TEST(AutogradGradients, ScalarVariableOps) {
  auto x = param({3, 5}, 4);
  auto s = param({1}, 5, 0.5, 1.5);
  ExpectGradientsMatch([&] { return weighted_sum(fasa::div_scalar_var(fasa::mul_scalar_var(x, s), s), 6); },
                       {{"x", x}, {"s", s}});
}

TEST(AutogradGradients, ShapeOps) {
  auto x = param({2, 3, 4}, 7);
  auto y = param({2, 2, 4}, 8);
  ExpectGradientsMatch(
      [&] {
        auto c = fasa::concat<double>({x, y}, 1);
        auto p = fasa::permute(c, {2, 0, 1});
        auto r = fasa::reshape(p, Shape{4, 10});
        return weighted_sum(fasa::slice(r, 1, 2, 6), 9);
      },
      {{"x", x}, {"y", y}});
}

TEST(AutogradGradients, LinearAndBatchedProducts) {
  auto x = param({2, 3, 5}, 10);
  auto w = param({4, 5}, 11);
  auto b = param({4}, 12);
  auto k = param({2, 6, 4}, 13);
  ExpectGradientsMatch(
      [&] {
        auto h = fasa::linear(x, w, b);
        return fasa::add(weighted_sum(fasa::bmm(h, k, true), 14),
                         weighted_sum(fasa::bmm(fasa::softmax(h), fasa::permute(k, {0, 2, 1})), 15));
      },
      {{"x", x}, {"w", w}, {"b", b}, {"k", k}});
}

TEST(AutogradGradients, Normalizations) {
  auto x = param({2, 4, 3, 3}, 16);
  auto g = param({4}, 17, 0.5, 1.5);
  auto s = param({4}, 18);
  auto t = param({3, 5}, 19);
  auto g5 = param({5}, 20, 0.5, 1.5);
  auto s5 = param({5}, 21);
  ExpectGradientsMatch(
      [&] {
        return fasa::add(fasa::add(weighted_sum(fasa::layer_norm_channels(x, g, s), 22),
                                   weighted_sum(fasa::layer_norm(t, g5, s5), 23)),
                         weighted_sum(fasa::l2_normalize(t), 24));
      },
      {{"x", x}, {"g", g}, {"s", s}, {"t", t}, {"g5", g5}, {"s5", s5}});
}

TEST(AutogradGradients, Convolutions) {
  auto x = param({2, 3, 8, 8}, 25);
  auto w = param({4, 3, 3, 3}, 26);
  auto b = param({4}, 27);
  auto dw = param({3, 1, 7, 7}, 28);
  auto db = param({3}, 29);
  auto tw = param({3, 2, 2, 2}, 30);
  auto tb = param({2}, 31);
  ExpectGradientsMatch(
      [&] {
        auto a = weighted_sum(fasa::conv2d(x, w, b, 2, 1), 32);
        auto c = weighted_sum(fasa::depthwise_conv2d(x, dw, db, 3), 33);
        auto d = weighted_sum(fasa::conv_transpose2x2(x, tw, tb), 34);
        return fasa::add(fasa::add(a, c), d);
      },
      {{"x", x}, {"w", w}, {"b", b}, {"dw", dw}, {"db", db}, {"tw", tw}, {"tb", tb}});
}

TEST(AutogradGradients, ResamplingAndPlanes) {
  auto x = param({1, 2, 4, 6}, 35);
  auto m = param({4, 6}, 36);
  auto bias = param({2}, 37);
  ExpectGradientsMatch(
      [&] {
        auto up = fasa::resize_bilinear(x, 7, 5);
        auto planes = fasa::mul_plane(fasa::add_channel_bias(x, bias), m);
        return fasa::add(weighted_sum(up, 38), weighted_sum(fasa::repeat_batch(planes, 3), 39));
      },
      {{"x", x}, {"m", m}, {"bias", bias}});
}

TEST(AutogradGradients, Losses) {
  auto logits = param({5, 3}, 40);
  auto p = param({2, 1, 3, 3}, 41, 0.05, 0.95);
  Tensor<double> target(Shape{2, 1, 3, 3});
  Tensor<double> weight(Shape{2, 1, 3, 3});
  for (Index i = 0; i < target.size(); ++i) {
    target[i] = i % 3 == 0 ? 1.0 : 0.0;
    weight[i] = i % 2 == 0 ? 1.0 : 0.0;
  }
  ExpectGradientsMatch(
      [&] {
        auto ce = fasa::softmax_cross_entropy(logits, {0, 2, 1, 1, 0});
        return fasa::add(ce, fasa::add(fasa::binary_cross_entropy(p, target),
                                       fasa::binary_cross_entropy(p, target, &weight)));
      },
      {{"logits", logits}, {"p", p}});
}

TEST(AutogradForward, Conv2dMatchesDirectSum) {
  const auto x = random_tensor<double>({2, 3, 7, 6}, 50);
  const auto w = random_tensor<double>({4, 3, 3, 3}, 51);
  const auto b = random_tensor<double>({4}, 52);
  for (int stride : {1, 2}) {
    for (int pad : {0, 1}) {
      const auto y = fasa::conv2d(fasa::constant(x), fasa::constant(w), fasa::constant(b), stride, pad).value();
      const Index oh = (7 + 2 * pad - 3) / stride + 1, ow = (6 + 2 * pad - 3) / stride + 1;
      ASSERT_EQ(y.shape(), (Shape{2, 4, oh, ow}));
      for (Index n = 0; n < 2; ++n)
        for (Index o = 0; o < 4; ++o)
          for (Index i = 0; i < oh; ++i)
            for (Index j = 0; j < ow; ++j) {
              double acc = b[o];
              for (Index c = 0; c < 3; ++c)
                for (Index ki = 0; ki < 3; ++ki)
                  for (Index kj = 0; kj < 3; ++kj) {
                    const Index yy = i * stride + ki - pad, xx = j * stride + kj - pad;
                    if (yy < 0 || yy >= 7 || xx < 0 || xx >= 6) continue;
                    acc += x.at(n, c, yy, xx) * w.at(o, c, ki, kj);
                  }
              EXPECT_NEAR(y.at(n, o, i, j), acc, 1e-12);
            }
    }
  }
}

TEST(AutogradForward, ConvTransposeScattersEachInputPixel) {
  const auto x = random_tensor<double>({1, 2, 3, 3}, 53);
  const auto w = random_tensor<double>({2, 3, 2, 2}, 54);
  const auto b = random_tensor<double>({3}, 55);
  const auto y = fasa::conv_transpose2x2(fasa::constant(x), fasa::constant(w), fasa::constant(b)).value();
  ASSERT_EQ(y.shape(), (Shape{1, 3, 6, 6}));
  for (Index o = 0; o < 3; ++o)
    for (Index i = 0; i < 6; ++i)
      for (Index j = 0; j < 6; ++j) {
        double acc = b[o];
        for (Index c = 0; c < 2; ++c) acc += x.at(0, c, i / 2, j / 2) * w.at(c, o, i % 2, j % 2);
        EXPECT_NEAR(y.at(0, o, i, j), acc, 1e-12);
      }
}

TEST(AutogradForward, BilinearResizeUsesHalfPixelCenters) {
  const auto x = random_tensor<double>({1, 1, 3, 4}, 56);
  const auto y = fasa::resize_bilinear(fasa::constant(x), 5, 7).value();
  auto sample = [&](double sy, double sx) {
    auto clampi = [](Index v, Index hi) { return std::max<Index>(0, std::min(v, hi)); };
    sy = std::max(0.0, sy);
    sx = std::max(0.0, sx);
    const Index y0 = clampi(static_cast<Index>(std::floor(sy)), 2), x0 = clampi(static_cast<Index>(std::floor(sx)), 3);
    const Index y1 = clampi(y0 + 1, 2), x1 = clampi(x0 + 1, 3);
    const double fy = sy - static_cast<double>(y0), fx = sx - static_cast<double>(x0);
    return (1 - fy) * ((1 - fx) * x.at(0, 0, y0, x0) + fx * x.at(0, 0, y0, x1)) +
           fy * ((1 - fx) * x.at(0, 0, y1, x0) + fx * x.at(0, 0, y1, x1));
  };
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 7; ++j)
      EXPECT_NEAR(y.at(0, 0, i, j), sample((i + 0.5) * 3.0 / 5.0 - 0.5, (j + 0.5) * 4.0 / 7.0 - 0.5), 1e-12);
}

TEST(AutogradForward, SoftmaxRowsSumToOne) {
  const auto x = random_tensor<double>({4, 9}, 57, -30, 30);
  const auto y = fasa::softmax(fasa::constant(x)).value();
  for (Index r = 0; r < 4; ++r) EXPECT_NEAR(y.array().segment(r * 9, 9).sum(), 1.0, 1e-12);
}

TEST(AutogradForward, BinaryCrossEntropyOfUniformPredictionIsLn2) {
  Tensor<double> target(Shape{1, 1, 4, 4});
  for (Index i = 0; i < target.size(); ++i) target[i] = i % 2;
  const auto p = fasa::constant(Tensor<double>::constant(Shape{1, 1, 4, 4}, 0.5));
  EXPECT_NEAR(fasa::binary_cross_entropy(p, target).value()[0], std::log(2.0), 1e-15);
}

TEST(AutogradBackward, GradientsAccumulateAcrossUses) {
  auto x = param({3}, 58);
  backward(fasa::sum(fasa::add(x, x)));
  for (Index i = 0; i < 3; ++i) EXPECT_EQ(x.grad()[i], 2.0);
}

TEST(AutogradBackward, ConstantsReceiveNoGradient) {
  auto x = fasa::constant(random_tensor<double>({3}, 59));
  auto y = param({3}, 60);
  backward(fasa::sum(fasa::mul(x, y)));
  EXPECT_EQ(x.grad().size(), 0);
  EXPECT_EQ(y.grad().size(), 3);
}

TEST(TensorArchiveTest, RoundTripIsBitExact) {
  fasa::testing::TempDir dir("archive");
  fasa::TensorArchive a;
  const auto f = random_tensor<float>({2, 3}, 61);
  const auto d = random_tensor<double>({4}, 62);
  a.put("f", f);
  a.put("d", d);
  a.set_meta("note", "tab\there\nnewline");
  a.save(dir.file("a.bin"));
  const auto b = fasa::TensorArchive::load(dir.file("a.bin"));
  EXPECT_EQ(b.meta("note"), "tab\there\nnewline");
  const auto f2 = b.get<float>("f");
  const auto d2 = b.get<double>("d");
  ASSERT_EQ(f2.shape(), f.shape());
  for (Index i = 0; i < f.size(); ++i) EXPECT_EQ(f2[i], f[i]);
  for (Index i = 0; i < d.size(); ++i) EXPECT_EQ(d2[i], d[i]);
}

TEST(TensorArchiveTest, MissingFileIsAnIoError) {
  EXPECT_THROW(fasa::TensorArchive::load("/nonexistent/fasa.bin"), fasa::IoError);
}

TEST(AdamWTest, FirstStepMovesEachParameterByLearningRate) {
  fasa::ParameterStore<double> store(1);
  auto p = store.create("p", Shape{3}, fasa::Init::constant(1.0));
  fasa::AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  fasa::AdamW<double> opt(store, cfg);
  p.grad_buffer().array() << 2.0, -3.0, 0.5;
  opt.step(0.1);
  // Bias-corrected first step: m_hat / sqrt(v_hat) = sign(g).
  EXPECT_NEAR(p.value()[0], 0.9, 1e-7);
  EXPECT_NEAR(p.value()[1], 1.1, 1e-7);
  EXPECT_NEAR(p.value()[2], 0.9, 1e-7);
}

TEST(AdamWTest, DecayIsDecoupledFromGradient) {
  fasa::ParameterStore<double> store(1);
  auto p = store.create("p", Shape{1}, fasa::Init::constant(2.0));
  fasa::AdamWConfig cfg;
  cfg.weight_decay = 0.5;
  fasa::AdamW<double> opt(store, cfg);
  opt.step(0.1);
  EXPECT_NEAR(p.value()[0], 2.0 * (1 - 0.1 * 0.5), 1e-12);
}

TEST(CosineScheduleTest, EndpointsAndMidpoint) {
  EXPECT_DOUBLE_EQ(fasa::cosine_lr(1e-4, 0, 100), 1e-4);
  EXPECT_NEAR(fasa::cosine_lr(1e-4, 50, 100), 5e-5, 1e-18);
  EXPECT_NEAR(fasa::cosine_lr(1e-4, 100, 100), 0.0, 1e-18);
}

}  // namespace
