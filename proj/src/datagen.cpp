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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fasa/hash.hpp"
#include "fasa/rng.hpp"

namespace fasa {
namespace {

namespace fs = std::filesystem;

constexpr const char* kManifestName = "manifest.tsv";
constexpr const char* kManifestMagic = "# fasa-corpus v1";
constexpr const char* kManifestColumns = "id\tlabel\tkind\tseed\tdegradation";

void require_rgb(const Image& image, const char* what) {
  if (image.rank() != 3 || image.dim(0) != 3)
    throw ValidationError(std::string(what) + ": expected a [3, H, W] image, got " + image.shape().str());
}

double pixel_center(Index i, Index n) { return (static_cast<double>(i) + 0.5) / static_cast<double>(n); }

bool inside(const Region& r, Index h, Index w, Index y, Index x) {
  const double px = pixel_center(x, w), py = pixel_center(y, h);
  if (r.w <= 0 || r.h <= 0) return false;
  if (r.shape == RegionShape::kRect)
    return px >= r.cx - r.w / 2 && px < r.cx + r.w / 2 && py >= r.cy - r.h / 2 && py < r.cy + r.h / 2;
  const double u = (px - r.cx) / (r.w / 2), v = (py - r.cy) / (r.h / 2);
  return u * u + v * v <= 1.0;
}

Image mask_from_weights(const std::vector<double>& weights, Index h, Index w) {
  Image mask(Shape{1, h, w});
  for (Index i = 0; i < h * w; ++i) mask[i] = weights[static_cast<std::size_t>(i)] > 0.5 ? 1.0f : 0.0f;
  return mask;
}

bool any_set(const Image& mask) { return (mask.array() != 0.0f).any(); }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string sample_id(Index i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%05lld", static_cast<long long>(i));
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

Region random_region(Rng& rng, double side_min, double side_max) {
  Region r;
  r.shape = rng.bernoulli(0.5) ? RegionShape::kRect : RegionShape::kEllipse;
  r.w = rng.uniform(side_min, side_max);
  r.h = rng.uniform(side_min, side_max);
  r.cx = rng.uniform(r.w / 2, 1.0 - r.w / 2);
  r.cy = rng.uniform(r.h / 2, 1.0 - r.h / 2);
  return r;
}

}  // namespace

void Region::validate() const {
  constexpr double kTol = 1e-9;
  if (!(w >= 0) || !(h >= 0) || !std::isfinite(cx) || !std::isfinite(cy))
    throw ValidationError("region extents must be finite and non-negative");
  if (cx - w / 2 < -kTol || cx + w / 2 > 1 + kTol || cy - h / 2 < -kTol || cy + h / 2 > 1 + kTol)
    throw ValidationError("region leaves the image bounds");
}

double blend_weight(const Region& r, double sigma, Index height, Index width, Index y, Index x) {
  if (sigma < 0) throw ValidationError("feather sigma must be >= 0");
  if (sigma == 0) return inside(r, height, width, y, x) ? 1.0 : 0.0;
  if (r.w <= 0 || r.h <= 0) return 0.0;
  const double px = x + 0.5, py = y + 0.5;  // pixel units
  const double s = std::sqrt(2.0) * sigma;
  if (r.shape == RegionShape::kRect) {
    const double x0 = (r.cx - r.w / 2) * width, x1 = (r.cx + r.w / 2) * width;
    const double y0 = (r.cy - r.h / 2) * height, y1 = (r.cy + r.h / 2) * height;
    const double wx = 0.5 * (std::erf((px - x0) / s) - std::erf((px - x1) / s));
    const double wy = 0.5 * (std::erf((py - y0) / s) - std::erf((py - y1) / s));
    return wx * wy;
  }
  const double rx = r.w / 2 * width, ry = r.h / 2 * height;
  const double u = (px - r.cx * width) / rx, v = (py - r.cy * height) / ry;
  const double d = (std::sqrt(u * u + v * v) - 1.0) * std::min(rx, ry);
  return 0.5 * std::erfc(d / s);
}

Image region_mask(const Region& region, Index height, Index width) {
  Image mask(Shape{1, height, width});
  for (Index y = 0; y < height; ++y)
    for (Index x = 0; x < width; ++x) mask[y * width + x] = inside(region, height, width, y, x) ? 1.0f : 0.0f;
  return mask;
}

std::string to_string(ManipulationKind kind) {
  switch (kind) {
    case ManipulationKind::kNone: return "none";
    case ManipulationKind::kSplice: return "splice";
    case ManipulationKind::kCopyMove: return "copy_move";
    case ManipulationKind::kEraseFill: return "erase_fill";
  }
  return "none";
}

ManipulationKind parse_manipulation_kind(const std::string& name) {
  if (name == "none") return ManipulationKind::kNone;
  if (name == "splice") return ManipulationKind::kSplice;
  if (name == "copy_move") return ManipulationKind::kCopyMove;
  if (name == "erase_fill") return ManipulationKind::kEraseFill;
  throw ValidationError("unknown manipulation kind '" + name + "'");
}

SamplePair authentic(const Image& image) {
  require_rgb(image, "authentic");
  return {image, Image(Shape{1, image.dim(1), image.dim(2)}), false, std::nullopt};
}

SamplePair splice(const Image& dst, const Image& src, const ManipulationSpec& spec) {
  require_rgb(dst, "splice");
  if (src.shape() != dst.shape()) throw ValidationError("splice: source and destination shapes differ");
  spec.region.validate();
  if (!(spec.feather >= 0)) throw ValidationError("splice: feather sigma must be >= 0");
  if ((src.array() == dst.array()).all()) throw ValidationError("splice: source and destination are the same image");
  const Index h = dst.dim(1), w = dst.dim(2);
  std::vector<double> weights(static_cast<std::size_t>(h * w));
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x)
      weights[static_cast<std::size_t>(y * w + x)] = blend_weight(spec.region, spec.feather, h, w, y, x);
  Image mask = mask_from_weights(weights, h, w);
  if (!any_set(mask)) return authentic(dst);
  Image out(dst.shape());
  for (Index c = 0; c < 3; ++c)
    for (Index i = 0; i < h * w; ++i) {
      const double a = weights[static_cast<std::size_t>(i)];
      const Index j = c * h * w + i;
      out[j] = a == 0.0 ? dst[j] : static_cast<float>(a * src[j] + (1.0 - a) * dst[j]);
    }
  ManipulationSpec tag = spec;
  tag.kind = ManipulationKind::kSplice;
  return {out, mask, true, tag};
}

SamplePair copy_move(const Image& image, const ManipulationSpec& spec) {
  require_rgb(image, "copy_move");
  spec.region.validate();
  const Index h = image.dim(1), w = image.dim(2);
  const Index ox = static_cast<Index>(std::lround(spec.dx * w)), oy = static_cast<Index>(std::lround(spec.dy * h));
  const Image source = region_mask(spec.region, h, w);
  Image mask(Shape{1, h, w});
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      if (source[y * w + x] == 0.0f) continue;
      const Index ty = y + oy, tx = x + ox;
      if (ty < 0 || ty >= h || tx < 0 || tx >= w) throw ValidationError("copy_move: target region leaves the image");
      mask[ty * w + tx] = 1.0f;
    }
  if (((source.array() != 0.0f) && (mask.array() != 0.0f)).any())
    throw ValidationError("copy_move: source and target regions overlap");
  if (!any_set(mask)) return authentic(image);
  Image out = image;
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      if (source[y * w + x] == 0.0f) continue;
      for (Index c = 0; c < 3; ++c) out[(c * h + y + oy) * w + x + ox] = image[(c * h + y) * w + x];
    }
  ManipulationSpec tag = spec;
  tag.kind = ManipulationKind::kCopyMove;
  return {out, mask, true, tag};
}

SamplePair erase_fill(const Image& image, const ManipulationSpec& spec) {
  require_rgb(image, "erase_fill");
  spec.region.validate();
  const Index h = image.dim(1), w = image.dim(2);
  const Image mask = region_mask(spec.region, h, w);
  if (!any_set(mask)) return authentic(image);
  auto in = [&](Index y, Index x) { return mask[y * w + x] != 0.0f; };
  const Index dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
  Image out = image;
  for (Index c = 0; c < 3; ++c) {
    std::vector<double> cur(static_cast<std::size_t>(h * w));
    for (Index i = 0; i < h * w; ++i) cur[static_cast<std::size_t>(i)] = image[c * h * w + i];
    double border = 0;
    Index border_count = 0;
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x) {
        if (in(y, x)) continue;
        for (int k = 0; k < 4; ++k) {
          const Index yy = y + dy[k], xx = x + dx[k];
          if (yy >= 0 && yy < h && xx >= 0 && xx < w && in(yy, xx)) {
            border += cur[static_cast<std::size_t>(y * w + x)];
            ++border_count;
            break;
          }
        }
      }
    const double start = border_count > 0 ? border / static_cast<double>(border_count) : 0.5;
    for (Index i = 0; i < h * w; ++i)
      if (mask[i] != 0.0f) cur[static_cast<std::size_t>(i)] = start;
    std::vector<double> next = cur;
    for (int it = 0; it < kFillIterations; ++it) {
      for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
          if (!in(y, x)) continue;
          double acc = 0;
          int n = 0;
          for (int k = 0; k < 4; ++k) {
            const Index yy = y + dy[k], xx = x + dx[k];
            if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
            acc += cur[static_cast<std::size_t>(yy * w + xx)];
            ++n;
          }
          next[static_cast<std::size_t>(y * w + x)] = acc / n;
        }
      std::swap(cur, next);
    }
    for (Index i = 0; i < h * w; ++i)
      if (mask[i] != 0.0f) out[c * h * w + i] = static_cast<float>(cur[static_cast<std::size_t>(i)]);
  }
  ManipulationSpec tag = spec;
  tag.kind = ManipulationKind::kEraseFill;
  return {out, mask, true, tag};
}

void DegradationSpec::validate() const {
  if (!(blur_sigma >= 0) || !std::isfinite(blur_sigma)) throw ValidationError("blur sigma must be finite and >= 0");
  if (jpeg_quality && (*jpeg_quality < 10 || *jpeg_quality > 100))
    throw ValidationError("JPEG quality must lie in 10..100, got " + std::to_string(*jpeg_quality));
}

std::string DegradationSpec::str() const {
  if (identity()) return "none";
  std::string s;
  if (blur_sigma != 0.0) s = "blur=" + format_double(blur_sigma);
  if (jpeg_quality) s += (s.empty() ? "" : ";") + std::string("jpeg=") + std::to_string(*jpeg_quality);
  return s;
}

DegradationSpec DegradationSpec::parse(const std::string& text) {
  DegradationSpec d;
  if (text == "none" || text.empty()) return d;
  for (const auto& part : split(text, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ValidationError("bad degradation term '" + part + "'");
    const std::string key = part.substr(0, eq), value = part.substr(eq + 1);
    try {
      if (key == "blur") {
        d.blur_sigma = std::stod(value);
      } else if (key == "jpeg") {
        d.jpeg_quality = std::stoi(value);
      } else {
        throw ValidationError("unknown degradation '" + key + "'");
      }
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const ValidationError*>(&e)) throw;
      throw ValidationError("bad degradation value in '" + part + "'");
    }
  }
  d.validate();
  return d;
}

Image degrade(const Image& image, const DegradationSpec& spec) {
  spec.validate();
  Image out = gaussian_blur(image, spec.blur_sigma);
  if (spec.jpeg_quality) out = jpeg_roundtrip(out, *spec.jpeg_quality);
  return out;
}

void AugmentConfig::validate() const {
  auto prob = [](double p) { return p >= 0 && p <= 1; };
  if (!prob(flip_prob) || !prob(scale_prob) || !prob(crop_prob) || !prob(blur_prob) || !prob(jpeg_prob))
    throw ValidationError("augmentation probabilities must lie in [0, 1]");
  if (!(scale_min > 0) || !(scale_max >= scale_min)) throw ValidationError("invalid augmentation scale range");
  if (!(crop_min > 0 && crop_min <= 1)) throw ValidationError("crop_min must lie in (0, 1]");
  if (!(blur_max >= 0)) throw ValidationError("blur_max must be >= 0");
  if (jpeg_min < 10 || jpeg_max > 100 || jpeg_min > jpeg_max) throw ValidationError("invalid JPEG quality range");
}

Image crop(const Image& image, Index y, Index x, Index h, Index w) {
  if (image.rank() != 3) throw ValidationError("crop: expected [C, H, W]");
  const Index c = image.dim(0), ih = image.dim(1), iw = image.dim(2);
  if (h < 1 || w < 1 || y < 0 || x < 0 || y + h > ih || x + w > iw)
    throw ValidationError("crop window " + std::to_string(h) + "x" + std::to_string(w) + " at (" + std::to_string(y) +
                          "," + std::to_string(x) + ") does not fit a " + std::to_string(ih) + "x" +
                          std::to_string(iw) + " image");
  Image out(Shape{c, h, w});
  for (Index ch = 0; ch < c; ++ch)
    for (Index r = 0; r < h; ++r)
      for (Index col = 0; col < w; ++col) out[(ch * h + r) * w + col] = image[(ch * ih + y + r) * iw + x + col];
  return out;
}

Image apply_geometry(const Image& image, const Geometry& g, bool nearest) {
  const Index c = image.dim(0), h = image.dim(1), w = image.dim(2);
  auto resize = [nearest](const Image& im, Index oh, Index ow) {
    return nearest ? resize_nearest(im, oh, ow) : resize_bilinear(im, oh, ow);
  };
  Image out = g.flip ? flip_horizontal(image) : image;
  if (g.scale != 1.0) {
    const Index sh = std::max<Index>(1, std::lround(g.scale * h)), sw = std::max<Index>(1, std::lround(g.scale * w));
    const Image scaled = resize(out, sh, sw);
    Image fit(Shape{c, h, w});
    // Center the scaled image: crop when larger, zero-pad when smaller.
    const Index oy = (sh - h) / 2, ox = (sw - w) / 2;
    for (Index ch = 0; ch < c; ++ch)
      for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
          const Index sy = y + oy, sx = x + ox;
          if (sy >= 0 && sy < sh && sx >= 0 && sx < sw) fit[(ch * h + y) * w + x] = scaled[(ch * sh + sy) * sw + sx];
        }
    out = std::move(fit);
  }
  if (g.crop) out = resize(crop(out, g.crop_y, g.crop_x, g.crop_h, g.crop_w), h, w);
  return out;
}

AugmentDraw draw_augmentation(std::uint64_t seed, Index height, Index width, const AugmentConfig& config) {
  config.validate();
  AugmentDraw d;
  if (!config.enabled) return d;
  Rng rng(seed);
  d.geometry.flip = rng.bernoulli(config.flip_prob);
  if (rng.bernoulli(config.scale_prob)) d.geometry.scale = rng.uniform(config.scale_min, config.scale_max);
  if (rng.bernoulli(config.crop_prob)) {
    const double f = rng.uniform(config.crop_min, 1.0);
    d.geometry.crop = true;
    d.geometry.crop_h = std::max<Index>(1, std::lround(f * height));
    d.geometry.crop_w = std::max<Index>(1, std::lround(f * width));
    d.geometry.crop_y = rng.integer(0, height - d.geometry.crop_h);
    d.geometry.crop_x = rng.integer(0, width - d.geometry.crop_w);
  }
  if (rng.bernoulli(config.blur_prob)) d.photometric.blur_sigma = rng.uniform(0.0, config.blur_max);
  if (rng.bernoulli(config.jpeg_prob))
    d.photometric.jpeg_quality = static_cast<int>(rng.integer(config.jpeg_min, config.jpeg_max));
  return d;
}

SamplePair augment(const SamplePair& sample, std::uint64_t seed, const AugmentConfig& config) {
  const AugmentDraw d = draw_augmentation(seed, sample.image.dim(1), sample.image.dim(2), config);
  SamplePair out = sample;
  out.image = degrade(apply_geometry(sample.image, d.geometry, false), d.photometric);
  out.mask = apply_geometry(sample.mask, d.geometry, true);
  out.manipulated = any_set(out.mask);
  return out;
}

Image render_base(std::uint64_t seed, Index size, double noise_sigma) {
  if (size < 1) throw ValidationError("render_base: size must be positive");
  Rng rng(seed);
  Image img(Shape{3, size, size});
  double c1[3], c2[3];
  for (int c = 0; c < 3; ++c) {
    c1[c] = rng.uniform(0.15, 0.85);
    c2[c] = rng.uniform(0.15, 0.85);
  }
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double gx = std::cos(angle), gy = std::sin(angle);
  const double fx = rng.uniform(0.5, 2.5), fy = rng.uniform(0.5, 2.5), phase = rng.uniform(0.0, 6.28);
  const double ripple = rng.uniform(0.02, 0.06);
  for (Index y = 0; y < size; ++y)
    for (Index x = 0; x < size; ++x) {
      const double u = pixel_center(x, size), v = pixel_center(y, size);
      const double t = std::clamp(0.5 + (u - 0.5) * gx + (v - 0.5) * gy, 0.0, 1.0);
      const double r = ripple * std::sin(2 * std::numbers::pi * (fx * u + fy * v) + phase);
      for (int c = 0; c < 3; ++c) img[(c * size + y) * size + x] = static_cast<float>(c1[c] * (1 - t) + c2[c] * t + r);
    }
  const int shapes = static_cast<int>(rng.integer(3, 6));
  for (int s = 0; s < shapes; ++s) {
    Region r = random_region(rng, 0.12, 0.5);
    double color[3];
    for (double& c : color) c = rng.uniform(0.05, 0.95);
    const double shade = rng.uniform(-0.15, 0.15);
    for (Index y = 0; y < size; ++y)
      for (Index x = 0; x < size; ++x) {
        if (!inside(r, size, size, y, x)) continue;
        const double t = (pixel_center(y, size) - (r.cy - r.h / 2)) / r.h;
        for (int c = 0; c < 3; ++c) img[(c * size + y) * size + x] = static_cast<float>(color[c] + shade * (t - 0.5));
      }
  }
  for (Index i = 0; i < img.size(); ++i)
    img[i] = std::clamp(static_cast<float>(img[i] + noise_sigma * rng.normal()), 0.0f, 1.0f);
  return img;
}

GeneratedSample generate_sample(ManipulationKind kind, std::uint64_t seed, Index size, const GeneratorOptions& o) {
  Rng rng(seed);
  const double noise = rng.uniform(o.noise_min, o.noise_max);
  const Image base = quantize8(render_base(mix_seed(seed, 1), size, noise));
  GeneratedSample g;
  g.counterfactual = base;
  g.kind = kind;
  ManipulationSpec spec;
  spec.kind = kind;
  switch (kind) {
    case ManipulationKind::kNone:
      g.sample = authentic(base);
      break;
    case ManipulationKind::kSplice: {
      const Image src =
          quantize8(render_base(mix_seed(seed, 2), size, rng.uniform(0.0, o.splice_noise_max)));
      spec.region = random_region(rng, o.region_min, o.region_max);
      if (rng.bernoulli(o.feather_prob)) spec.feather = rng.uniform(o.feather_min, o.feather_max);
      g.sample = splice(base, src, spec);
      break;
    }
    case ManipulationKind::kCopyMove: {
      // Draw source and target until their pixel sets are disjoint.
      for (int attempt = 0;; ++attempt) {
        if (attempt == 1000) throw RuntimeFailure("copy_move: could not place disjoint regions");
        spec.region = random_region(rng, o.region_min, std::min(o.region_max, 0.4));
        Region target = spec.region;
        target.cx = rng.uniform(target.w / 2, 1.0 - target.w / 2);
        target.cy = rng.uniform(target.h / 2, 1.0 - target.h / 2);
        spec.dx = std::round((target.cx - spec.region.cx) * size) / size;
        spec.dy = std::round((target.cy - spec.region.cy) * size) / size;
        try {
          g.sample = copy_move(base, spec);
          break;
        } catch (const ValidationError&) {
        }
      }
      break;
    }
    case ManipulationKind::kEraseFill:
      spec.region = random_region(rng, o.region_min, o.region_max);
      g.sample = erase_fill(base, spec);
      break;
  }
  g.sample.image = quantize8(g.sample.image);
  return g;
}

void DatasetConfig::validate() const {
  if (count < 1) throw ValidationError("dataset count must be positive");
  if (size < 8) throw ValidationError("dataset image size must be at least 8");
  if (!(authentic_fraction >= 0 && authentic_fraction <= 1))
    throw ValidationError("authentic_fraction must lie in [0, 1]");
  double total = 0;
  for (double m : mix) {
    if (!(m >= 0)) throw ValidationError("manipulation mix entries must be >= 0");
    total += m;
  }
  if (!(total > 0)) throw ValidationError("manipulation mix must have a positive entry");
  degradation.validate();
}

std::array<Index, 4> kind_counts(const DatasetConfig& config) {
  config.validate();
  const Index authentic_count = static_cast<Index>(std::llround(config.count * config.authentic_fraction));
  const Index manipulated = config.count - authentic_count;
  const double total = config.mix[0] + config.mix[1] + config.mix[2];
  std::array<Index, 4> counts = {authentic_count, 0, 0, 0};
  std::array<double, 3> rem{};
  Index assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = manipulated * config.mix[k] / total;
    counts[k + 1] = static_cast<Index>(std::floor(exact));
    rem[k] = exact - counts[k + 1];
    assigned += counts[k + 1];
  }
  while (assigned < manipulated) {
    const int k = static_cast<int>(std::max_element(rem.begin(), rem.end()) - rem.begin());
    ++counts[k + 1];
    rem[k] = -1;
    ++assigned;
  }
  return counts;
}

std::vector<ManifestRecord> plan_dataset(const DatasetConfig& config) {
  const auto counts = kind_counts(config);
  const ManipulationKind kinds[4] = {ManipulationKind::kNone, ManipulationKind::kSplice, ManipulationKind::kCopyMove,
                                     ManipulationKind::kEraseFill};
  std::vector<ManipulationKind> plan;
  for (int k = 0; k < 4; ++k) plan.insert(plan.end(), static_cast<std::size_t>(counts[k]), kinds[k]);
  Rng rng(mix_seed(config.seed, fnv1a("corpus.kinds")));
  for (std::size_t i = plan.size(); i > 1; --i)
    std::swap(plan[i - 1], plan[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(i) - 1))]);
  std::vector<ManifestRecord> records;
  for (Index i = 0; i < config.count; ++i) {
    ManifestRecord r;
    r.id = sample_id(i);
    r.kind = plan[static_cast<std::size_t>(i)];
    r.manipulated = r.kind != ManipulationKind::kNone;
    r.seed = mix_seed(config.seed, static_cast<std::uint64_t>(i));
    r.degradation = config.degradation;
    records.push_back(r);
  }
  return records;
}

std::string format_manifest(const DatasetConfig& config, const std::vector<ManifestRecord>& records) {
  std::ostringstream os;
  os << kManifestMagic << " size=" << config.size << " count=" << records.size() << " seed=" << config.seed << "\n";
  os << kManifestColumns << "\n";
  for (const auto& r : records)
    os << r.id << '\t' << (r.manipulated ? "manipulated" : "authentic") << '\t' << to_string(r.kind) << '\t' << r.seed
       << '\t' << r.degradation.str() << "\n";
  return os.str();
}

std::string make_dataset(const DatasetConfig& config, const std::string& dir) {
  config.validate();
  std::vector<ManifestRecord> records = plan_dataset(config);
  try {
    fs::create_directories(fs::path(dir) / "images");
    fs::create_directories(fs::path(dir) / "masks");
  } catch (const fs::filesystem_error& e) {
    throw IoError(dir + ": cannot create corpus directories (" + e.what() + ")");
  }
  for (auto& r : records) {
    GeneratedSample g = generate_sample(r.kind, r.seed, config.size, config.generator);
    // A degenerate draw can leave a planned edit empty; the record follows the mask.
    r.manipulated = g.sample.manipulated;
    if (!r.manipulated) r.kind = ManipulationKind::kNone;
    const Image image = degrade(g.sample.image, config.degradation);
    write_png((fs::path(dir) / "images" / (r.id + ".png")).string(), image);
    write_png((fs::path(dir) / "masks" / (r.id + ".png")).string(), g.sample.mask);
  }
  const std::string manifest = format_manifest(config, records);
  const std::string path = (fs::path(dir) / kManifestName).string();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError(path + ": cannot open for writing");
  os << manifest;
  if (!os) throw IoError(path + ": write failed");
  return manifest;
}

Corpus load_corpus(const std::string& dir) {
  const std::string path = (fs::path(dir) / kManifestName).string();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path + ": cannot open corpus manifest");
  std::stringstream buf;
  buf << is.rdbuf();
  const std::string text = buf.str();
  Corpus corpus;
  corpus.dir = dir;
  corpus.manifest_hash = fnv1a(text);
  std::istringstream lines(text);
  std::string line;
  if (!std::getline(lines, line) || line.rfind(kManifestMagic, 0) != 0)
    throw ValidationError(path + ": not a fasa corpus manifest");
  const auto pos = line.find("size=");
  if (pos == std::string::npos) throw ValidationError(path + ": header has no size");
  corpus.size = std::stoll(line.substr(pos + 5));
  if (!std::getline(lines, line) || line != kManifestColumns) throw ValidationError(path + ": bad column header");
  int lineno = 2;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, '\t');
    const std::string where = path + ":" + std::to_string(lineno);
    if (f.size() != 5) throw ValidationError(where + ": expected 5 tab-separated fields");
    ManifestRecord r;
    r.id = f[0];
    if (f[1] != "authentic" && f[1] != "manipulated") throw ValidationError(where + ": bad label '" + f[1] + "'");
    r.manipulated = f[1] == "manipulated";
    r.kind = parse_manipulation_kind(f[2]);
    const auto res = std::from_chars(f[3].data(), f[3].data() + f[3].size(), r.seed);
    if (res.ec != std::errc()) throw ValidationError(where + ": bad seed");
    r.degradation = DegradationSpec::parse(f[4]);
    Image image = read_png((fs::path(dir) / "images" / (r.id + ".png")).string());
    Image mask = read_png((fs::path(dir) / "masks" / (r.id + ".png")).string());
    if (image.shape() != Shape{3, corpus.size, corpus.size} || mask.shape() != Shape{1, corpus.size, corpus.size})
      throw ValidationError(where + ": image or mask size does not match the manifest");
    for (Index i = 0; i < mask.size(); ++i)
      if (mask[i] != 0.0f && mask[i] != 1.0f) throw ValidationError(where + ": mask is not binary");
    if (any_set(mask) != r.manipulated) throw ValidationError(where + ": label disagrees with the mask");
    corpus.records.push_back(std::move(r));
    corpus.images.push_back(std::move(image));
    corpus.masks.push_back(std::move(mask));
  }
  if (corpus.records.empty()) throw ValidationError(path + ": corpus has no samples");
  return corpus;
}

}  // namespace fasa
