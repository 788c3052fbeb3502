// Copyright 2026 The zscir Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ZSCIR_COMMON_IMAGE_HPP_
#define ZSCIR_COMMON_IMAGE_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace zscir {

// Row-major H x W x C pixel buffer with values in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int h, int w, int c) : height(h), width(w), channels(c), pixels(size_t(h) * w * c, 0.0) {}

  double& at(int y, int x, int ch) { return pixels[(size_t(y) * width + x) * channels + ch]; }
  double at(int y, int x, int ch) const { return pixels[(size_t(y) * width + x) * channels + ch]; }

  bool operator==(const Image&) const = default;
};

// 8-bit quantization, lossless for images whose values are multiples of 1/255.
std::vector<uint8_t> ToBytes(const Image& image);
Image FromBytes(const std::vector<uint8_t>& bytes, int height, int width, int channels);

// Encodes an 8-bit RGB or grayscale PNG.
std::string EncodePng(const Image& image);

// Nearest-neighbour upscale by an integer factor, for thumbnails.
Image Upscale(const Image& image, int factor);

}  // namespace zscir

#endif  // ZSCIR_COMMON_IMAGE_HPP_
