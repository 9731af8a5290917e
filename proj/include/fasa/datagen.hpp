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

// Synthetic manipulation corpus: procedural base images, splice / copy-move
// / erase-fill edits with exact masks, blur + JPEG degradation, training
// augmentation, and the on-disk corpus layout.

#ifndef FASA_DATAGEN_HPP_
#define FASA_DATAGEN_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fasa/image_io.hpp"

namespace fasa {

enum class RegionShape { kRect, kEllipse };

/// Axis-aligned rectangle or ellipse in normalized coordinates: center
/// (cx, cy) and full extents (w, h), all relative to the image side.
struct Region {
  RegionShape shape = RegionShape::kRect;
  double cx = 0.5, cy = 0.5, w = 0.0, h = 0.0;

  /// Throws when the region leaves [0, 1]^2 or has negative extent.
  void validate() const;
};

/// Blend weight of pixel (y, x) for a region feathered by sigma pixels.
/// sigma = 0 is the hard indicator of the pixel center. For sigma > 0 a
/// rectangle uses the product of two erf-smoothed boxes and an ellipse uses
/// 0.5 erfc(d / (sqrt(2) sigma)) with d = (rho - 1) * min(rx, ry) pixels.
double blend_weight(const Region& region, double sigma, Index height, Index width, Index y, Index x);

/// [1, H, W] hard indicator of the region.
Image region_mask(const Region& region, Index height, Index width);

enum class ManipulationKind { kNone, kSplice, kCopyMove, kEraseFill };
std::string to_string(ManipulationKind kind);
ManipulationKind parse_manipulation_kind(const std::string& name);

struct ManipulationSpec {
  ManipulationKind kind = ManipulationKind::kNone;
  Region region;
  double feather = 0.0;           // splice blend sigma in pixels
  double dx = 0.0, dy = 0.0;      // copy-move target offset, normalized
};

struct SamplePair {
  Image image;  // [3, H, W]
  Image mask;   // [1, H, W], binary
  bool manipulated = false;
  std::optional<ManipulationSpec> tag;
};

/// dst inside the region replaced by src with the region's blend weights;
/// mask is blend weight > 0.5. A region that covers no pixel returns dst
/// unchanged and authentic.
SamplePair splice(const Image& dst, const Image& src, const ManipulationSpec& spec);

/// Copies the region to region + (dx, dy) (rounded to whole pixels). The
/// source and target pixel sets must be disjoint; the mask marks the target.
SamplePair copy_move(const Image& image, const ManipulationSpec& spec);

inline constexpr int kFillIterations = 200;

/// Replaces the region with a smooth fill: every region pixel starts at the
/// mean of the pixels bordering the region and then takes 200 Jacobi steps
/// of the 4-neighbour average with the outside held fixed.
SamplePair erase_fill(const Image& image, const ManipulationSpec& spec);

SamplePair authentic(const Image& image);

struct DegradationSpec {
  double blur_sigma = 0.0;
  std::optional<int> jpeg_quality;

  void validate() const;
  bool identity() const { return blur_sigma == 0.0 && !jpeg_quality; }
  /// "none", "blur=<sigma>", "jpeg=<q>" or "blur=<sigma>;jpeg=<q>".
  std::string str() const;
  static DegradationSpec parse(const std::string& text);
  bool operator==(const DegradationSpec&) const = default;
};

/// Gaussian blur, then JPEG at the given quality.
Image degrade(const Image& image, const DegradationSpec& spec);

struct AugmentConfig {
  bool enabled = true;
  double flip_prob = 0.5;
  double scale_prob = 0.5;
  double scale_min = 0.8, scale_max = 1.2;
  double crop_prob = 0.5;
  double crop_min = 0.8;  // crop window side as a fraction of the image side
  double blur_prob = 0.2;
  double blur_max = 2.0;
  double jpeg_prob = 0.2;
  int jpeg_min = 60, jpeg_max = 100;

  void validate() const;
};

/// Geometric part of one augmentation draw, applied identically to image
/// and mask: flip, then scale (resize by `scale`, center-cropped or
/// zero-padded back to the original size), then crop (a window resized back
/// to the original size).
struct Geometry {
  bool flip = false;
  double scale = 1.0;
  bool crop = false;
  Index crop_y = 0, crop_x = 0, crop_h = 0, crop_w = 0;
};

/// Window [y, y + h) x [x, x + w); throws when it leaves the image.
Image crop(const Image& image, Index y, Index x, Index h, Index w);

/// nearest = true for masks (values stay binary), bilinear otherwise.
Image apply_geometry(const Image& image, const Geometry& geometry, bool nearest);

struct AugmentDraw {
  Geometry geometry;
  DegradationSpec photometric;
};

AugmentDraw draw_augmentation(std::uint64_t seed, Index height, Index width, const AugmentConfig& config);

/// Flip / scale / crop on image and mask, blur / JPEG on the image only.
SamplePair augment(const SamplePair& sample, std::uint64_t seed, const AugmentConfig& config);

/// Procedural scene: a two-color gradient, low-frequency ripples, random
/// flat-colored shapes, and i.i.d. Gaussian sensor noise of `noise_sigma`.
Image render_base(std::uint64_t seed, Index size, double noise_sigma);

struct GeneratedSample {
  SamplePair sample;
  Image counterfactual;  // the same scene without the edit
  ManipulationKind kind = ManipulationKind::kNone;
};

struct GeneratorOptions {
  double noise_min = 0.04, noise_max = 0.06;          // authentic sensor noise
  double splice_noise_max = 0.005;                     // spliced source noise
  double region_min = 0.2, region_max = 0.45;          // region side fraction
  double feather_prob = 0.5;
  double feather_min = 0.5, feather_max = 1.5;
};

/// One sample of `kind` as a pure function of `seed`. Images are quantized
/// to 8 bits so the in-memory sample equals its PNG.
GeneratedSample generate_sample(ManipulationKind kind, std::uint64_t seed, Index size,
                                const GeneratorOptions& options = {});

struct DatasetConfig {
  Index count = 200;
  Index size = 64;
  std::uint64_t seed = 7;
  double authentic_fraction = 0.5;
  /// Shares of splice, copy-move and erase-fill among manipulated samples.
  std::array<double, 3> mix = {0.45, 0.10, 0.45};
  DegradationSpec degradation;
  GeneratorOptions generator;

  void validate() const;
};

struct ManifestRecord {
  std::string id;
  bool manipulated = false;
  ManipulationKind kind = ManipulationKind::kNone;
  std::uint64_t seed = 0;
  DegradationSpec degradation;
};

/// Exact per-kind counts: authentic = round(count * authentic_fraction),
/// manipulated split by largest remainder over `mix`.
std::array<Index, 4> kind_counts(const DatasetConfig& config);

/// Records of the corpus in id order (kinds shuffled by the corpus seed).
std::vector<ManifestRecord> plan_dataset(const DatasetConfig& config);

std::string format_manifest(const DatasetConfig& config, const std::vector<ManifestRecord>& records);

/// Writes images/, masks/ and manifest.tsv under `dir`; returns the manifest.
std::string make_dataset(const DatasetConfig& config, const std::string& dir);

struct Corpus {
  std::string dir;
  Index size = 0;
  std::vector<ManifestRecord> records;
  std::vector<Image> images;  // [3, S, S]
  std::vector<Image> masks;   // [1, S, S]
  std::uint64_t manifest_hash = 0;
};

/// Reads a corpus and checks label / mask consistency for every record.
Corpus load_corpus(const std::string& dir);

}  // namespace fasa

#endif  // FASA_DATAGEN_HPP_
