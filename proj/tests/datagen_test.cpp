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

#include "fasa/datagen.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "fasa/error.hpp"
#include "test_support.hpp"

namespace {

using ::fasa::DegradationSpec;
using ::fasa::Image;
using ::fasa::Index;
using ::fasa::ManipulationKind;
using ::fasa::ManipulationSpec;
using ::fasa::Region;
using ::fasa::RegionShape;
using ::fasa::Shape;
using ::fasa::testing::TempDir;

Image noise_image(Index size, std::uint64_t seed) {
  return fasa::quantize8(fasa::testing::random_tensor<float>(Shape{3, size, size}, seed, 0, 1));
}

Region rect(double cx, double cy, double w, double h) { return {RegionShape::kRect, cx, cy, w, h}; }

// Separable erf box in pixel units, evaluated at the pixel center.
double rect_weight(const Region& r, double sigma, Index n, Index y, Index x) {
  const double s = std::sqrt(2.0) * sigma;
  const auto box = [&](double p, double lo, double hi) { return 0.5 * (std::erf((p - lo) / s) - std::erf((p - hi) / s)); };
  return box(x + 0.5, (r.cx - r.w / 2) * n, (r.cx + r.w / 2) * n) * box(y + 0.5, (r.cy - r.h / 2) * n, (r.cy + r.h / 2) * n);
}

TEST(RegionTest, ValidateBoundsAndMask) {
  EXPECT_NO_THROW(rect(0.5, 0.5, 1.0, 1.0).validate());
  EXPECT_THROW(rect(0.9, 0.5, 0.4, 0.2).validate(), fasa::ValidationError);
  EXPECT_THROW(rect(0.5, 0.5, -0.1, 0.2).validate(), fasa::ValidationError);
  const Image m = fasa::region_mask(rect(0.5, 0.5, 0.5, 0.25), 8, 8);
  // Pixel centers inside x in [2, 6), y in [3, 5).
  for (Index y = 0; y < 8; ++y)
    for (Index x = 0; x < 8; ++x) EXPECT_EQ(m[y * 8 + x], (x >= 2 && x < 6 && y >= 3 && y < 5) ? 1.0f : 0.0f);
}

TEST(SpliceTest, HardRectangleMaskIsTheRectangle) {
  const Image dst = noise_image(16, 1), src = noise_image(16, 2);
  ManipulationSpec spec;
  spec.region = rect(0.375, 0.5, 0.5, 0.25);
  const auto out = fasa::splice(dst, src, spec);
  EXPECT_TRUE(out.manipulated);
  ASSERT_TRUE(out.tag.has_value());
  EXPECT_EQ(out.tag->kind, ManipulationKind::kSplice);
  const Image expected = fasa::region_mask(spec.region, 16, 16);
  EXPECT_TRUE((out.mask.array() == expected.array()).all());
  for (Index c = 0; c < 3; ++c)
    for (Index i = 0; i < 256; ++i) EXPECT_EQ(out.image[c * 256 + i], expected[i] > 0 ? src[c * 256 + i] : dst[c * 256 + i]);
}

TEST(SpliceTest, ZeroAreaRegionLeavesDestination) {
  const Image dst = noise_image(16, 3), src = noise_image(16, 4);
  ManipulationSpec spec;
  spec.region = rect(0.5, 0.5, 0.0, 0.3);
  const auto out = fasa::splice(dst, src, spec);
  EXPECT_FALSE(out.manipulated);
  EXPECT_TRUE((out.image.array() == dst.array()).all());
  EXPECT_EQ(out.mask.array().sum(), 0.0f);
}

TEST(SpliceTest, FeatheredMaskFollowsHalfBlendWeight) {
  const Index n = 32;
  const Image dst = noise_image(n, 5), src = noise_image(n, 6);
  ManipulationSpec spec;
  spec.region = rect(0.45, 0.55, 0.5, 0.4);
  spec.feather = 2.0;
  const auto out = fasa::splice(dst, src, spec);
  for (Index y = 0; y < n; ++y)
    for (Index x = 0; x < n; ++x) {
      const double a = rect_weight(spec.region, 2.0, n, y, x);
      EXPECT_NEAR(fasa::blend_weight(spec.region, 2.0, n, n, y, x), a, 1e-12);
      EXPECT_EQ(out.mask[y * n + x], a > 0.5 ? 1.0f : 0.0f) << y << "," << x;
      for (Index c = 0; c < 3; ++c) {
        const Index j = (c * n + y) * n + x;
        EXPECT_NEAR(out.image[j], a * src[j] + (1 - a) * dst[j], 1e-6);
      }
    }
}

TEST(SpliceTest, EllipseFeatherAtBoundaryIsHalf) {
  Region e{RegionShape::kEllipse, 0.5, 0.5, 0.5, 0.5};
  // Pixel (16, 24) has its center just outside the ellipse boundary.
  const double w = fasa::blend_weight(e, 1.0, 32, 32, 16, 24);
  const double d = (std::hypot(24.5 - 16, 16.5 - 16) / 8 - 1) * 8;
  EXPECT_NEAR(w, 0.5 * std::erfc(d / std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(fasa::blend_weight(e, 1.0, 32, 32, 16, 16), 1.0, 1e-12);
}

TEST(SpliceTest, RejectsBadInputs) {
  const Image dst = noise_image(8, 7);
  ManipulationSpec spec;
  spec.region = rect(0.5, 0.5, 0.5, 0.5);
  EXPECT_THROW(fasa::splice(dst, dst, spec), fasa::ValidationError);
  spec.region = rect(0.9, 0.5, 0.5, 0.5);
  EXPECT_THROW(fasa::splice(dst, noise_image(8, 8), spec), fasa::ValidationError);
}

TEST(CopyMoveTest, TargetCopiesSourceAndMaskMarksTargetOnly) {
  const Index n = 16;
  const Image img = noise_image(n, 9);
  ManipulationSpec spec;
  spec.region = rect(0.25, 0.25, 0.25, 0.25);
  spec.dx = 0.5;
  spec.dy = 0.25;
  const auto out = fasa::copy_move(img, spec);
  const Image source = fasa::region_mask(spec.region, n, n);
  EXPECT_EQ(out.mask.array().sum(), source.array().sum());
  for (Index y = 0; y < n; ++y)
    for (Index x = 0; x < n; ++x) {
      if (source[y * n + x] == 0) continue;
      EXPECT_EQ(out.mask[y * n + x], 0.0f);
      EXPECT_EQ(out.mask[(y + 4) * n + x + 8], 1.0f);
      for (Index c = 0; c < 3; ++c) EXPECT_EQ(out.image[(c * n + y + 4) * n + x + 8], img[(c * n + y) * n + x]);
    }
  for (Index i = 0; i < out.image.size(); ++i) {
    if (out.mask[i % (n * n)] == 0) {
      EXPECT_EQ(out.image[i], img[i]);
    }
  }
}

TEST(CopyMoveTest, OverlapAndOutOfBoundsRejected) {
  const Image img = noise_image(16, 10);
  ManipulationSpec spec;
  spec.region = rect(0.25, 0.25, 0.25, 0.25);
  spec.dx = 0.125;
  EXPECT_THROW(fasa::copy_move(img, spec), fasa::ValidationError);
  spec.dx = 0.9;
  EXPECT_THROW(fasa::copy_move(img, spec), fasa::ValidationError);
}

TEST(CopyMoveTest, SequentialMovesComposeToMaskUnion) {
  const Index n = 16;
  const Image img = noise_image(n, 11);
  ManipulationSpec a;
  a.region = rect(0.25, 0.25, 0.25, 0.25);
  a.dx = 0.5;
  ManipulationSpec b;
  b.region = rect(0.25, 0.75, 0.25, 0.25);
  b.dx = 0.5;
  const auto first = fasa::copy_move(img, a);
  const auto second = fasa::copy_move(first.image, b);
  const Image ta = fasa::region_mask(rect(0.75, 0.25, 0.25, 0.25), n, n);
  const Image tb = fasa::region_mask(rect(0.75, 0.75, 0.25, 0.25), n, n);
  Image unioned = first.mask;
  for (Index i = 0; i < unioned.size(); ++i) unioned[i] = std::max(first.mask[i], second.mask[i]);
  for (Index i = 0; i < n * n; ++i) EXPECT_EQ(unioned[i], std::max(ta[i], tb[i]));
}

TEST(EraseFillTest, ConstantBoundaryConverges) {
  const Index n = 24;
  Image img = Image(Shape{3, n, n});
  img.array() = 0.3f;
  ManipulationSpec spec;
  spec.region = rect(0.5, 0.5, 0.5, 0.5);
  const Image mask = fasa::region_mask(spec.region, n, n);
  // Random content inside the region, constant outside.
  const Image inner = noise_image(n, 12);
  for (Index c = 0; c < 3; ++c)
    for (Index i = 0; i < n * n; ++i)
      if (mask[i] > 0) img[c * n * n + i] = inner[c * n * n + i];
  const auto out = fasa::erase_fill(img, spec);
  EXPECT_TRUE((out.mask.array() == mask.array()).all());
  EXPECT_LT((out.image.array() - 0.3f).abs().maxCoeff(), 1e-3);
}

TEST(EraseFillTest, LinearBoundaryGivesSmoothFill) {
  const Index n = 20;
  Image img(Shape{3, n, n});
  for (Index c = 0; c < 3; ++c)
    for (Index y = 0; y < n; ++y)
      for (Index x = 0; x < n; ++x) img[(c * n + y) * n + x] = static_cast<float>(x) / n;
  ManipulationSpec spec;
  spec.region = rect(0.5, 0.5, 0.4, 0.4);
  const auto out = fasa::erase_fill(img, spec);
  // A linear ramp is harmonic, so the fill reproduces it up to the finite
  // iteration count.
  for (Index i = 0; i < img.size(); ++i) EXPECT_NEAR(out.image[i], img[i], 2e-3);
  EXPECT_EQ(fasa::kFillIterations, 200);
}

TEST(AuthenticTest, ZeroMask) {
  const auto a = fasa::authentic(noise_image(8, 13));
  EXPECT_FALSE(a.manipulated);
  EXPECT_FALSE(a.tag.has_value());
  EXPECT_EQ(a.mask.shape(), (Shape{1, 8, 8}));
  EXPECT_EQ(a.mask.array().abs().sum(), 0.0f);
}

TEST(DegradationTest, ParseAndFormat) {
  EXPECT_TRUE(DegradationSpec::parse("none").identity());
  const auto d = DegradationSpec::parse("blur=1.5;jpeg=70");
  EXPECT_EQ(d.blur_sigma, 1.5);
  EXPECT_EQ(d.jpeg_quality, 70);
  EXPECT_EQ(d.str(), "blur=1.5;jpeg=70");
  EXPECT_EQ(DegradationSpec::parse(d.str()), d);
  EXPECT_EQ(DegradationSpec::parse("jpeg=40").str(), "jpeg=40");
  EXPECT_THROW(DegradationSpec::parse("jpeg=5"), fasa::ValidationError);
  EXPECT_THROW(DegradationSpec::parse("jpeg=101"), fasa::ValidationError);
  EXPECT_THROW(DegradationSpec::parse("blur=-1"), fasa::ValidationError);
  EXPECT_THROW(DegradationSpec::parse("sharpen=2"), fasa::ValidationError);
  EXPECT_THROW(DegradationSpec::parse("jpeg=abc"), fasa::ValidationError);
}

TEST(DegradationTest, IdentityIsExact) {
  const Image img = noise_image(16, 14);
  EXPECT_TRUE((fasa::degrade(img, DegradationSpec{}).array() == img.array()).all());
}

TEST(DegradationTest, BlurThenJpegOrder) {
  const Image img = noise_image(16, 15);
  DegradationSpec d;
  d.blur_sigma = 1.0;
  d.jpeg_quality = 75;
  const Image expected = fasa::jpeg_roundtrip(fasa::gaussian_blur(img, 1.0), 75);
  EXPECT_TRUE((fasa::degrade(img, d).array() == expected.array()).all());
}

TEST(DegradationTest, JpegPsnrOnGeneratedSamples) {
  const ManipulationKind kinds[4] = {ManipulationKind::kNone, ManipulationKind::kSplice, ManipulationKind::kCopyMove,
                                     ManipulationKind::kEraseFill};
  for (std::uint64_t i = 0; i < 100; ++i) {
    const Image img = fasa::generate_sample(kinds[i % 4], 1000 + i, 64).sample.image;
    DegradationSpec d;
    d.jpeg_quality = 100;
    EXPECT_GE(fasa::psnr(img, fasa::degrade(img, d)), 40.0) << "sample " << i;
    double prev = 1e9;
    for (int q : {100, 80, 60, 40}) {
      d.jpeg_quality = q;
      const double p = fasa::psnr(img, fasa::degrade(img, d));
      EXPECT_LE(p, prev) << "sample " << i << " quality " << q;
      prev = p;
    }
  }
}

TEST(AugmentTest, FlipTwiceIsIdentity) {
  const auto g = fasa::generate_sample(ManipulationKind::kSplice, 16, 32);
  fasa::Geometry flip;
  flip.flip = true;
  const Image img2 = fasa::apply_geometry(fasa::apply_geometry(g.sample.image, flip, false), flip, false);
  const Image mask2 = fasa::apply_geometry(fasa::apply_geometry(g.sample.mask, flip, true), flip, true);
  EXPECT_TRUE((img2.array() == g.sample.image.array()).all());
  EXPECT_TRUE((mask2.array() == g.sample.mask.array()).all());
}

TEST(AugmentTest, MaskFollowsTheSameGeometry) {
  const auto g = fasa::generate_sample(ManipulationKind::kEraseFill, 17, 32);
  const fasa::AugmentConfig config;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto draw = fasa::draw_augmentation(seed, 32, 32, config);
    const auto out = fasa::augment(g.sample, seed, config);
    EXPECT_TRUE((out.mask.array() == fasa::apply_geometry(g.sample.mask, draw.geometry, true).array()).all());
    EXPECT_TRUE(((out.mask.array() == 0.0f) || (out.mask.array() == 1.0f)).all());
    EXPECT_EQ(out.manipulated, (out.mask.array() != 0.0f).any());
    const Image geo = fasa::apply_geometry(g.sample.image, draw.geometry, false);
    EXPECT_TRUE((out.image.array() == fasa::degrade(geo, draw.photometric).array()).all());
  }
}

TEST(AugmentTest, DeterministicForFixedSeed) {
  const auto g = fasa::generate_sample(ManipulationKind::kCopyMove, 18, 32);
  const fasa::AugmentConfig config;
  const auto a = fasa::augment(g.sample, 99, config);
  const auto b = fasa::augment(g.sample, 99, config);
  EXPECT_TRUE((a.image.array() == b.image.array()).all());
  EXPECT_TRUE((a.mask.array() == b.mask.array()).all());
}

TEST(AugmentTest, DisabledIsIdentityAndOversizedCropRejected) {
  const auto g = fasa::generate_sample(ManipulationKind::kSplice, 19, 32);
  fasa::AugmentConfig off;
  off.enabled = false;
  const auto out = fasa::augment(g.sample, 5, off);
  EXPECT_TRUE((out.image.array() == g.sample.image.array()).all());
  EXPECT_THROW(fasa::crop(g.sample.image, 0, 0, 33, 16), fasa::ValidationError);
  EXPECT_THROW(fasa::crop(g.sample.image, 20, 0, 16, 16), fasa::ValidationError);
  fasa::AugmentConfig bad;
  bad.crop_min = 1.5;
  EXPECT_THROW(bad.validate(), fasa::ValidationError);
}

TEST(GeneratorTest, PureFunctionOfSeed) {
  for (auto kind : {ManipulationKind::kNone, ManipulationKind::kSplice, ManipulationKind::kCopyMove,
                    ManipulationKind::kEraseFill}) {
    const auto a = fasa::generate_sample(kind, 20, 32);
    const auto b = fasa::generate_sample(kind, 20, 32);
    EXPECT_TRUE((a.sample.image.array() == b.sample.image.array()).all());
    EXPECT_TRUE((a.sample.mask.array() == b.sample.mask.array()).all());
    EXPECT_TRUE((a.sample.image.array() == fasa::quantize8(a.sample.image).array()).all());
  }
}

TEST(GeneratorTest, MaskMatchesDifferenceFromCounterfactual) {
  Index covered = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto kind = static_cast<ManipulationKind>(1 + seed % 3);
    const auto g = fasa::generate_sample(kind, 500 + seed, 48);
    if (!g.sample.manipulated) continue;
    const Index n = 48;
    const auto& tag = *g.sample.tag;
    for (Index y = 0; y < n; ++y)
      for (Index x = 0; x < n; ++x) {
        bool differs = false;
        for (Index c = 0; c < 3; ++c) {
          const Index j = (c * n + y) * n + x;
          differs = differs || g.sample.image[j] != g.counterfactual[j];
        }
        const bool in_mask = g.sample.mask[y * n + x] != 0;
        // Outside the mask only the sub-0.5 feather tail may differ.
        if (!in_mask && differs) {
          ASSERT_EQ(kind, ManipulationKind::kSplice);
          const double a = fasa::blend_weight(tag.region, tag.feather, n, n, y, x);
          EXPECT_GT(a, 0.0);
          EXPECT_LE(a, 0.5);
        }
        if (in_mask) {
          ++total;
          covered += differs;
        }
      }
  }
  ASSERT_GT(total, 0);
  // A masked pixel can coincide with the original only by 8-bit accident.
  EXPECT_GT(static_cast<double>(covered) / static_cast<double>(total), 0.95);
}

TEST(DatasetTest, KindCountsFollowTheMix) {
  fasa::DatasetConfig c;
  const auto counts = fasa::kind_counts(c);
  EXPECT_EQ(counts[0], 100);
  EXPECT_EQ(counts[0] + counts[1] + counts[2] + counts[3], 200);
  for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(counts[k + 1] - 100 * c.mix[k]), 1.0) << k;
  c.count = 7;
  c.mix = {1, 1, 1};
  const auto small = fasa::kind_counts(c);
  EXPECT_EQ(small[0] + small[1] + small[2] + small[3], 7);
  c.mix = {0, 0, 0};
  EXPECT_THROW(c.validate(), fasa::ValidationError);
}

TEST(DatasetTest, CorpusIsDeterministicAndConsistent) {
  TempDir a("corpus_a"), b("corpus_b");
  fasa::DatasetConfig c;
  const std::string manifest = fasa::make_dataset(c, a.str());
  EXPECT_EQ(fasa::make_dataset(c, b.str()), manifest);
  EXPECT_EQ(fasa::testing::read_file(a.file("manifest.tsv")), manifest);
  EXPECT_EQ(fasa::testing::read_file(a.file("images/s00017.png")), fasa::testing::read_file(b.file("images/s00017.png")));

  std::istringstream lines(manifest);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "# fasa-corpus v1 size=64 count=200 seed=7");
  std::getline(lines, line);
  EXPECT_EQ(line, "id\tlabel\tkind\tseed\tdegradation");

  const fasa::Corpus corpus = fasa::load_corpus(a.str());
  ASSERT_EQ(corpus.records.size(), 200u);
  EXPECT_EQ(corpus.size, 64);
  std::map<ManipulationKind, Index> seen;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const auto& r = corpus.records[i];
    EXPECT_EQ(r.manipulated, (corpus.masks[i].array() != 0.0f).any()) << r.id;
    EXPECT_EQ(r.manipulated, r.kind != ManipulationKind::kNone) << r.id;
    ++seen[r.kind];
  }
  const auto planned = fasa::kind_counts(c);
  EXPECT_EQ(seen[ManipulationKind::kNone], planned[0]);
  for (int k = 0; k < 3; ++k)
    EXPECT_LE(std::abs(seen[static_cast<ManipulationKind>(k + 1)] - 100 * c.mix[k]), 1.0) << k;
}

TEST(DatasetTest, DegradationLeavesMasksAndLabels) {
  TempDir clean("clean"), degraded("degraded");
  fasa::DatasetConfig c;
  c.count = 20;
  c.size = 32;
  fasa::make_dataset(c, clean.str());
  c.degradation = DegradationSpec::parse("blur=1;jpeg=50");
  fasa::make_dataset(c, degraded.str());
  const auto a = fasa::load_corpus(clean.str());
  const auto b = fasa::load_corpus(degraded.str());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_TRUE((a.masks[i].array() == b.masks[i].array()).all());
    EXPECT_EQ(a.records[i].manipulated, b.records[i].manipulated);
    EXPECT_EQ(b.records[i].degradation.str(), "blur=1;jpeg=50");
  }
  EXPECT_NE(a.manifest_hash, b.manifest_hash);
}

TEST(DatasetTest, LoadErrorsCarryPaths) {
  TempDir dir("broken");
  try {
    fasa::load_corpus(dir.str());
    FAIL();
  } catch (const fasa::IoError& e) {
    EXPECT_NE(std::string(e.what()).find(dir.str()), std::string::npos);
  }
  fasa::DatasetConfig c;
  c.count = 4;
  c.size = 16;
  fasa::make_dataset(c, dir.str());
  std::filesystem::remove(dir.file("masks/s00002.png"));
  EXPECT_THROW(fasa::load_corpus(dir.str()), fasa::IoError);
}

}  // namespace
