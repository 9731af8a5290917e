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

// Planar float images [C, H, W] with values in [0, 1], and the 8-bit codecs
// and filters that operate on them.

#ifndef FASA_IMAGE_IO_HPP_
#define FASA_IMAGE_IO_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "fasa/tensor.hpp"

namespace fasa {

using Image = Tensor<float>;

/// round(v * 255) clamped to [0, 255].
std::uint8_t to_byte(float v);
/// Snaps every value to the nearest k / 255.
Image quantize8(const Image& image);

/// Writes an 8-bit PNG: RGB for C = 3, grayscale for C = 1.
void write_png(const std::string& path, const Image& image);
/// Reads an 8-bit RGB or grayscale PNG into [C, H, W] with values k / 255.
Image read_png(const std::string& path);

/// Baseline JPEG encode then decode at `quality` (1..100), 4:4:4 sampling,
/// integer DCT. The input is quantized to 8 bits first.
Image jpeg_roundtrip(const Image& image, int quality);

/// Separable Gaussian blur with radius ceil(3 sigma) and clamped borders.
/// sigma = 0 returns the input unchanged.
Image gaussian_blur(const Image& image, double sigma);

/// Bilinear resize with half-pixel centers.
Image resize_bilinear(const Image& image, Index out_h, Index out_w);
/// Nearest-neighbour resize with half-pixel centers (keeps masks binary).
Image resize_nearest(const Image& image, Index out_h, Index out_w);

/// Horizontal mirror.
Image flip_horizontal(const Image& image);

/// Peak signal-to-noise ratio in dB for peak 1; +inf for identical images.
double psnr(const Image& a, const Image& b);

}  // namespace fasa

#endif  // FASA_IMAGE_IO_HPP_
