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

#include "fasa/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <memory>

#include <jpeglib.h>

namespace fasa {
namespace {

void require_planar(const Image& image, const char* what) {
  if (image.rank() != 3 || (image.dim(0) != 1 && image.dim(0) != 3) || image.dim(1) < 1 || image.dim(2) < 1)
    throw ValidationError(std::string(what) + ": expected a [1|3, H, W] image, got " + image.shape().str());
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

}  // namespace

std::uint8_t to_byte(float v) {
  const float s = std::round(v * 255.0f);
  return static_cast<std::uint8_t>(std::clamp(s, 0.0f, 255.0f));
}

Image quantize8(const Image& image) {
  Image out(image.shape());
  for (Index i = 0; i < image.size(); ++i) out[i] = static_cast<float>(to_byte(image[i])) / 255.0f;
  return out;
}

void write_png(const std::string& path, const Image& image) {
  require_planar(image, "write_png");
  const Index c = image.dim(0), h = image.dim(1), w = image.dim(2);
  File fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError(path + ": cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path + ": libpng initialization failed");
  }
  std::vector<png_byte> rows(static_cast<std::size_t>(h * w * c));
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x)
      for (Index ch = 0; ch < c; ++ch)
        rows[static_cast<std::size_t>((y * w + x) * c + ch)] = to_byte(image[(ch * h + y) * w + x]);
  std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(h));
  for (Index y = 0; y < h; ++y) row_ptrs[static_cast<std::size_t>(y)] = rows.data() + y * w * c;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path + ": PNG encoding failed");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               c == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(fp.get()) != 0) throw IoError(path + ": write failed");
}

Image read_png(const std::string& path) {
  File fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError(path + ": cannot open for reading");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) throw IoError(path + ": not a PNG file");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": libpng initialization failed");
  }
  std::vector<png_byte> rows;
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": corrupt PNG data");
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info), h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info), type = png_get_color_type(png, info);
  if (depth != 8 || (type != PNG_COLOR_TYPE_RGB && type != PNG_COLOR_TYPE_GRAY)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": expected an 8-bit RGB or grayscale PNG");
  }
  const Index c = type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  rows.resize(static_cast<std::size_t>(h) * w * static_cast<std::size_t>(c));
  row_ptrs.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) row_ptrs[y] = rows.data() + static_cast<std::size_t>(y) * w * c;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  Image out(Shape{c, static_cast<Index>(h), static_cast<Index>(w)});
  for (Index y = 0; y < static_cast<Index>(h); ++y)
    for (Index x = 0; x < static_cast<Index>(w); ++x)
      for (Index ch = 0; ch < c; ++ch)
        out[(ch * h + y) * w + x] = static_cast<float>(rows[static_cast<std::size_t>((y * w + x) * c + ch)]) / 255.0f;
  return out;
}

Image jpeg_roundtrip(const Image& image, int quality) {
  require_planar(image, "jpeg_roundtrip");
  if (quality < 1 || quality > 100) throw ValidationError("JPEG quality must lie in 1..100");
  const Index c = image.dim(0), h = image.dim(1), w = image.dim(2);
  std::vector<JSAMPLE> pixels(static_cast<std::size_t>(h * w * c));
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x)
      for (Index ch = 0; ch < c; ++ch)
        pixels[static_cast<std::size_t>((y * w + x) * c + ch)] = to_byte(image[(ch * h + y) * w + x]);

  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  {
    jpeg_compress_struct cinfo;
    JpegError err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
      jpeg_destroy_compress(&cinfo);
      std::free(buffer);
      throw RuntimeFailure(std::string("JPEG encode failed: ") + err.message);
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &buffer, &size);
    cinfo.image_width = static_cast<JDIMENSION>(w);
    cinfo.image_height = static_cast<JDIMENSION>(h);
    cinfo.input_components = static_cast<int>(c);
    cinfo.in_color_space = c == 3 ? JCS_RGB : JCS_GRAYSCALE;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    cinfo.dct_method = JDCT_ISLOW;
    for (int i = 0; i < cinfo.num_components; ++i) {
      cinfo.comp_info[i].h_samp_factor = 1;
      cinfo.comp_info[i].v_samp_factor = 1;
    }
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
      JSAMPROW row = pixels.data() + static_cast<std::size_t>(cinfo.next_scanline) * w * c;
      jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
  }

  Image out(image.shape());
  {
    jpeg_decompress_struct dinfo;
    JpegError err;
    dinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
      jpeg_destroy_decompress(&dinfo);
      std::free(buffer);
      throw RuntimeFailure(std::string("JPEG decode failed: ") + err.message);
    }
    jpeg_create_decompress(&dinfo);
    jpeg_mem_src(&dinfo, buffer, size);
    jpeg_read_header(&dinfo, TRUE);
    dinfo.dct_method = JDCT_ISLOW;
    dinfo.out_color_space = c == 3 ? JCS_RGB : JCS_GRAYSCALE;
    jpeg_start_decompress(&dinfo);
    std::vector<JSAMPLE> row(static_cast<std::size_t>(w * c));
    while (dinfo.output_scanline < dinfo.output_height) {
      const Index y = dinfo.output_scanline;
      JSAMPROW ptr = row.data();
      jpeg_read_scanlines(&dinfo, &ptr, 1);
      for (Index x = 0; x < w; ++x)
        for (Index ch = 0; ch < c; ++ch)
          out[(ch * h + y) * w + x] = static_cast<float>(row[static_cast<std::size_t>(x * c + ch)]) / 255.0f;
    }
    jpeg_finish_decompress(&dinfo);
    jpeg_destroy_decompress(&dinfo);
  }
  std::free(buffer);
  return out;
}

Image gaussian_blur(const Image& image, double sigma) {
  if (!(sigma >= 0) || !std::isfinite(sigma)) throw ValidationError("blur sigma must be finite and >= 0");
  if (sigma == 0) return image;
  if (image.rank() != 3) throw ValidationError("gaussian_blur: expected [C, H, W]");
  const Index c = image.dim(0), h = image.dim(1), w = image.dim(2);
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double norm = 0;
  for (int i = -radius; i <= radius; ++i) norm += k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& v : k) v /= norm;
  std::vector<double> tmp(static_cast<std::size_t>(h * w));
  Image out(image.shape());
  for (Index ch = 0; ch < c; ++ch) {
    const float* src = image.data() + ch * h * w;
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x) {
        double acc = 0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[static_cast<std::size_t>(i + radius)] * src[y * w + std::clamp<Index>(x + i, 0, w - 1)];
        tmp[static_cast<std::size_t>(y * w + x)] = acc;
      }
    float* dst = out.data() + ch * h * w;
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x) {
        double acc = 0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[static_cast<std::size_t>(i + radius)] * tmp[static_cast<std::size_t>(std::clamp<Index>(y + i, 0, h - 1) * w + x)];
        dst[y * w + x] = static_cast<float>(acc);
      }
  }
  return out;
}

Image resize_bilinear(const Image& image, Index out_h, Index out_w) {
  if (image.rank() != 3 || out_h < 1 || out_w < 1) throw ValidationError("resize_bilinear: bad arguments");
  const Index c = image.dim(0), h = image.dim(1), w = image.dim(2);
  if (h == out_h && w == out_w) return image;
  Image out(Shape{c, out_h, out_w});
  const double sy = static_cast<double>(h) / out_h, sx = static_cast<double>(w) / out_w;
  for (Index y = 0; y < out_h; ++y) {
    const double fy = std::max(0.0, (y + 0.5) * sy - 0.5);
    const Index y0 = std::min<Index>(static_cast<Index>(fy), h - 1), y1 = std::min<Index>(y0 + 1, h - 1);
    const double ty = fy - y0;
    for (Index x = 0; x < out_w; ++x) {
      const double fx = std::max(0.0, (x + 0.5) * sx - 0.5);
      const Index x0 = std::min<Index>(static_cast<Index>(fx), w - 1), x1 = std::min<Index>(x0 + 1, w - 1);
      const double tx = fx - x0;
      for (Index ch = 0; ch < c; ++ch) {
        const float* p = image.data() + ch * h * w;
        const double top = p[y0 * w + x0] * (1 - tx) + p[y0 * w + x1] * tx;
        const double bot = p[y1 * w + x0] * (1 - tx) + p[y1 * w + x1] * tx;
        out[(ch * out_h + y) * out_w + x] = static_cast<float>(top * (1 - ty) + bot * ty);
      }
    }
  }
  return out;
}

Image resize_nearest(const Image& image, Index out_h, Index out_w) {
  if (image.rank() != 3 || out_h < 1 || out_w < 1) throw ValidationError("resize_nearest: bad arguments");
  const Index c = image.dim(0), h = image.dim(1), w = image.dim(2);
  if (h == out_h && w == out_w) return image;
  Image out(Shape{c, out_h, out_w});
  for (Index y = 0; y < out_h; ++y) {
    const Index sy = std::min<Index>(static_cast<Index>((y + 0.5) * h / out_h), h - 1);
    for (Index x = 0; x < out_w; ++x) {
      const Index sx = std::min<Index>(static_cast<Index>((x + 0.5) * w / out_w), w - 1);
      for (Index ch = 0; ch < c; ++ch) out[(ch * out_h + y) * out_w + x] = image[(ch * h + sy) * w + sx];
    }
  }
  return out;
}

Image flip_horizontal(const Image& image) {
  if (image.rank() != 3) throw ValidationError("flip_horizontal: expected [C, H, W]");
  const Index c = image.dim(0), h = image.dim(1), w = image.dim(2);
  Image out(image.shape());
  for (Index ch = 0; ch < c; ++ch)
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x) out[(ch * h + y) * w + x] = image[(ch * h + y) * w + (w - 1 - x)];
  return out;
}

double psnr(const Image& a, const Image& b) {
  if (a.shape() != b.shape() || a.empty()) throw ValidationError("psnr: shape mismatch");
  double se = 0;
  for (Index i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    se += d * d;
  }
  if (se == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / (se / static_cast<double>(a.size())));
}

}  // namespace fasa
