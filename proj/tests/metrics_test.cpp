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

#include "fasa/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "fasa/error.hpp"
#include "fasa/rng.hpp"

namespace {

using ::fasa::ConfusionCounts;
using ::fasa::DegradationSpec;
using ::fasa::Image;
using ::fasa::Index;
using ::fasa::Shape;

Image binary_mask(Index h, Index w, fasa::Rng& rng, double density) {
  Image m(Shape{1, h, w});
  for (Index i = 0; i < m.size(); ++i) m[i] = rng.uniform(0, 1) < density ? 1.0f : 0.0f;
  return m;
}

ConfusionCounts loop_counts(const Image& pred, const Image& gt) {
  ConfusionCounts c;
  for (Index i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] > 0, g = gt[i] > 0;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double oracle_f1(const ConfusionCounts& c) {
  if (c.tp + c.fp + c.fn == 0) return 1.0;
  return 2.0 * c.tp / (2.0 * c.tp + c.fp + c.fn);
}

double oracle_iou(const ConfusionCounts& c) {
  if (c.tp + c.fp + c.fn == 0) return 1.0;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp + c.fn);
}

double pairwise_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (!y[i] || y[j]) continue;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      ++pairs;
    }
  return wins / pairs;
}

TEST(BinarizeTest, StrictThreshold) {
  Image p(Shape{1, 1, 4});
  p[0] = 0.5f;
  p[1] = 0.50001f;
  p[2] = 0.0f;
  p[3] = 1.0f;
  const Image b = fasa::binarize(p);
  EXPECT_EQ(b[0], 0.0f);
  EXPECT_EQ(b[1], 1.0f);
  EXPECT_EQ(b[2], 0.0f);
  EXPECT_EQ(b[3], 1.0f);
  Image all(Shape{1, 3, 3});
  all.array() = 0.7f;
  EXPECT_TRUE((fasa::binarize(all).array() == 1.0f).all());
  EXPECT_EQ(fasa::kBinarizeThreshold, 0.5);
  EXPECT_TRUE((fasa::binarize(all, 0.7).array() == 0.0f).all());
}

TEST(PixelScoreTest, PerfectAndEmptyConventions) {
  fasa::Rng rng(1);
  const Image gt = binary_mask(8, 8, rng, 0.3);
  EXPECT_EQ(fasa::pixel_f1(gt, gt), 1.0);
  EXPECT_EQ(fasa::pixel_iou(gt, gt), 1.0);
  const Image empty(Shape{1, 8, 8});
  EXPECT_EQ(fasa::pixel_f1(empty, empty), 1.0);
  EXPECT_EQ(fasa::pixel_iou(empty, empty), 1.0);
  EXPECT_EQ(fasa::pixel_f1(gt, empty), 0.0);
  EXPECT_EQ(fasa::pixel_iou(empty, gt), 0.0);
}

TEST(PixelScoreTest, FormulaExample) {
  const ConfusionCounts c{50, 50, 0, 0};
  EXPECT_DOUBLE_EQ(fasa::f1_score(c), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(fasa::iou_score(c), 0.5);
}

TEST(PixelScoreTest, RandomMasksMatchLoopOracle) {
  fasa::Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const double dp = rng.uniform(0, 0.6), dg = rng.uniform(0, 0.6);
    const Image pred = binary_mask(16, 16, rng, dp), gt = binary_mask(16, 16, rng, dg);
    const ConfusionCounts c = fasa::confusion(pred, gt);
    ASSERT_EQ(c, loop_counts(pred, gt));
    EXPECT_EQ(c.total(), 256);
    EXPECT_EQ(fasa::pixel_f1(pred, gt), oracle_f1(c));
    EXPECT_EQ(fasa::pixel_iou(pred, gt), oracle_iou(c));
  }
}

TEST(PixelScoreTest, ExhaustiveThreeByThree) {
  for (int a = 0; a < 512; ++a)
    for (int b = 0; b < 512; ++b) {
      Image pred(Shape{1, 3, 3}), gt(Shape{1, 3, 3});
      for (int i = 0; i < 9; ++i) {
        pred[i] = static_cast<float>((a >> i) & 1);
        gt[i] = static_cast<float>((b >> i) & 1);
      }
      const int tp = __builtin_popcount(a & b), fp = __builtin_popcount(a & ~b & 511),
                fn = __builtin_popcount(~a & b & 511);
      const ConfusionCounts c{tp, fp, fn, 9 - tp - fp - fn};
      ASSERT_EQ(fasa::confusion(pred, gt), c);
      const double f1 = fasa::pixel_f1(pred, gt), iou = fasa::pixel_iou(pred, gt);
      ASSERT_EQ(f1, oracle_f1(c));
      ASSERT_EQ(iou, oracle_iou(c));
      ASSERT_LE(iou, f1);
      ASSERT_NEAR(f1, 2 * iou / (1 + iou), 1e-12);
    }
}

TEST(PixelScoreTest, ShapeMismatchRejected) {
  EXPECT_THROW(fasa::confusion(Image(Shape{1, 4, 4}), Image(Shape{1, 4, 5})), fasa::ValidationError);
}

TEST(AucTest, SeparatedTiedAndSingleClass) {
  const std::vector<double> s = {0.1, 0.2, 0.8, 0.9};
  const std::vector<std::uint8_t> y = {0, 0, 1, 1};
  EXPECT_EQ(fasa::auc(s, y), 1.0);
  const std::vector<double> flat(4, 0.3);
  EXPECT_EQ(fasa::auc(flat, y), 0.5);
  const std::vector<std::uint8_t> ones(4, 1);
  EXPECT_FALSE(fasa::auc(s, ones).has_value());
}

TEST(AucTest, MatchesPairwiseOracleAndIsRankInvariant) {
  fasa::Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.integer(0, 60));
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse scores force plenty of ties.
      s[i] = std::round(rng.uniform(0, 1) * 8) / 8;
      y[i] = static_cast<std::uint8_t>(rng.bernoulli(0.4));
    }
    y[0] = 0;
    y[1] = 1;
    const auto a = fasa::auc(s, y);
    ASSERT_TRUE(a.has_value());
    EXPECT_NEAR(*a, pairwise_auc(s, y), 1e-12);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(3 * s[i]) - 7;
    EXPECT_NEAR(*fasa::auc(t, y), *a, 1e-12);
  }
}

TEST(ImageMetricsTest, AllCorrectAndAllManipulated) {
  const std::vector<std::uint8_t> y = {1, 0, 1, 0, 1, 0};
  const std::vector<double> right = {0.9, 0.1, 0.8, 0.2, 0.51, 0.5};
  const auto m = fasa::image_metrics(right, y);
  EXPECT_EQ(m.f1, 1.0);
  EXPECT_EQ(m.accuracy, 1.0);
  const std::vector<double> all(6, 0.9);
  const auto a = fasa::image_metrics(all, y);
  EXPECT_DOUBLE_EQ(a.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(*a.f1, 2.0 / 3.0);
  EXPECT_EQ(a.counts, (ConfusionCounts{3, 3, 0, 0}));
}

TEST(ImageMetricsTest, RandomCorporaMatchOracle) {
  fasa::Rng rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.integer(0, 40));
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    ConfusionCounts c;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::round(rng.uniform(0, 1) * 10) / 10;
      y[i] = static_cast<std::uint8_t>(rng.bernoulli(0.5));
      const bool p = s[i] > 0.5;
      if (p && y[i]) ++c.tp;
      else if (p) ++c.fp;
      else if (y[i]) ++c.fn;
      else ++c.tn;
    }
    const auto m = fasa::image_metrics(s, y);
    ASSERT_EQ(m.counts, c);
    EXPECT_DOUBLE_EQ(m.accuracy, static_cast<double>(c.tp + c.tn) / static_cast<double>(n));
    if (c.tp + c.fn == 0) {
      EXPECT_FALSE(m.f1.has_value());
    } else {
      ASSERT_TRUE(m.f1.has_value());
      EXPECT_DOUBLE_EQ(*m.f1, 2.0 * c.tp / (2.0 * c.tp + c.fp + c.fn));
    }
  }
}

TEST(ImageMetricsTest, EmptyCorpusRejected) {
  EXPECT_THROW(fasa::image_metrics(std::vector<double>{}, std::vector<std::uint8_t>{}), fasa::ValidationError);
  EXPECT_THROW(fasa::image_metrics(std::vector<double>{0.5}, std::vector<std::uint8_t>{}), fasa::ValidationError);
}

TEST(PixelMetricsTest, MacroAndMicroAveraging) {
  fasa::Rng rng(5);
  std::vector<Image> probs, gts;
  for (int i = 0; i < 6; ++i) {
    Image p(Shape{1, 8, 8});
    for (Index k = 0; k < p.size(); ++k) p[k] = static_cast<float>(rng.uniform(0, 1));
    probs.push_back(p);
    gts.push_back(binary_mask(8, 8, rng, i == 0 ? 0.0 : 0.3));
  }
  double macro_f1 = 0, macro_iou = 0;
  ConfusionCounts pooled;
  std::vector<double> all_scores;
  std::vector<std::uint8_t> all_labels;
  for (int i = 0; i < 6; ++i) {
    const ConfusionCounts c = loop_counts(fasa::binarize(probs[i]), gts[i]);
    macro_f1 += oracle_f1(c) / 6;
    macro_iou += oracle_iou(c) / 6;
    pooled += c;
    for (Index k = 0; k < 64; ++k) {
      all_scores.push_back(probs[i][k]);
      all_labels.push_back(gts[i][k] > 0);
    }
  }
  const auto macro = fasa::pixel_metrics(probs, gts);
  EXPECT_NEAR(macro.f1, macro_f1, 1e-12);
  EXPECT_NEAR(macro.iou, macro_iou, 1e-12);
  EXPECT_EQ(macro.counts, pooled);
  ASSERT_TRUE(macro.auc.has_value());
  EXPECT_NEAR(*macro.auc, pairwise_auc(all_scores, all_labels), 1e-12);
  const auto micro = fasa::pixel_metrics(probs, gts, 0.5, fasa::Averaging::kMicro);
  EXPECT_NEAR(micro.f1, oracle_f1(pooled), 1e-12);
  EXPECT_NEAR(micro.iou, oracle_iou(pooled), 1e-12);
  EXPECT_EQ(fasa::parse_averaging(fasa::to_string(fasa::Averaging::kMicro)), fasa::Averaging::kMicro);
  EXPECT_THROW(fasa::parse_averaging("weighted"), fasa::ValidationError);
}

fasa::EvalReport sample_report(std::uint64_t seed) {
  fasa::Rng rng(seed);
  std::vector<Image> probs, gts;
  std::vector<double> scores;
  for (int i = 0; i < 4; ++i) {
    Image p(Shape{1, 6, 6});
    for (Index k = 0; k < p.size(); ++k) p[k] = static_cast<float>(rng.uniform(0, 1));
    scores.push_back(p.array().maxCoeff());
    probs.push_back(p);
    gts.push_back(binary_mask(6, 6, rng, i % 2 ? 0.4 : 0.0));
  }
  auto r = fasa::make_report("unit", probs, gts, scores, 0.5, fasa::Averaging::kMacro);
  r.manifest_hash = 0xabc;
  return r;
}

TEST(ReportTest, FormatIsStableAndComplete) {
  const auto r = sample_report(6);
  EXPECT_EQ(r.images, 4);
  EXPECT_EQ(r.positives, 2);
  const std::string text = fasa::format_report(r);
  EXPECT_EQ(text, fasa::format_report(sample_report(6)));
  std::istringstream lines(text);
  std::string line;
  std::vector<std::string> keys;
  while (std::getline(lines, line)) keys.push_back(line.substr(0, line.find('\t')));
  const std::vector<std::string> expected = {
      "fasa-eval-report", "dataset",   "images",       "positives",     "degradation",   "pixel_threshold",
      "image_threshold",  "averaging", "pixel_f1",     "pixel_iou",     "pixel_auc",     "pixel_counts",
      "image_f1",         "image_acc", "image_counts", "manifest_hash", "config_hash",   "weights_hash",
      "encoder_hash"};
  EXPECT_EQ(keys, expected);
  EXPECT_NE(text.find("manifest_hash\t0000000000000abc\n"), std::string::npos);
  EXPECT_NE(text.find("pixel_threshold\t0.500000\n"), std::string::npos);
}

TEST(ReportTest, UndefinedValuesPrintNotApplicable) {
  std::vector<Image> probs(2, Image(Shape{1, 4, 4}));
  std::vector<Image> gts(2, Image(Shape{1, 4, 4}));
  const std::vector<double> scores = {0.1, 0.2};
  const auto r = fasa::make_report("clean", probs, gts, scores, 0.5, fasa::Averaging::kMacro);
  const std::string text = fasa::format_report(r);
  EXPECT_NE(text.find("image_f1\tn/a\n"), std::string::npos);
  EXPECT_NE(text.find("pixel_auc\tn/a\n"), std::string::npos);
  EXPECT_NE(text.find("pixel_f1\t1.000000\n"), std::string::npos);
}

TEST(RobustnessTest, RowsFollowGridAndCarrySpec) {
  const auto clean = sample_report(7);
  std::vector<DegradationSpec> grid = {DegradationSpec{}, DegradationSpec::parse("jpeg=80"),
                                       DegradationSpec::parse("blur=1")};
  int calls = 0;
  const auto rows = fasa::robustness_curve(
      [&](const DegradationSpec& d) {
        ++calls;
        return d.identity() ? clean : sample_report(8 + calls);
      },
      grid);
  ASSERT_EQ(rows.size(), grid.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].degradation, grid[i]);
    EXPECT_EQ(rows[i].report.degradation, grid[i]);
  }
  EXPECT_EQ(rows[0].report.pixel.f1, clean.pixel.f1);
  const std::string tsv = fasa::format_robustness_tsv(rows);
  std::istringstream lines(tsv);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "degradation\tblur_sigma\tjpeg_quality\tpixel_f1\tpixel_iou\tpixel_auc\timage_f1\timage_acc");
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("none\t0.000000\tnone\t", 0), 0u) << line;
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("jpeg=80\t0.000000\t80\t", 0), 0u) << line;
}

TEST(RobustnessTest, ErrorsCarrySeverity) {
  const std::vector<DegradationSpec> grid = {DegradationSpec::parse("jpeg=30")};
  try {
    fasa::robustness_curve([](const DegradationSpec&) -> fasa::EvalReport { throw std::runtime_error("boom"); },
                           grid);
    FAIL();
  } catch (const fasa::RuntimeFailure& e) {
    EXPECT_NE(std::string(e.what()).find("jpeg=30"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
  }
  EXPECT_THROW(fasa::robustness_curve([](const DegradationSpec&) { return fasa::EvalReport{}; }, {}),
               fasa::ValidationError);
}

}  // namespace
