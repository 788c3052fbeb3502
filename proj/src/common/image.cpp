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

#include "zscir/common/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>

#include "zscir/common/error.hpp"

namespace zscir {

std::vector<uint8_t> ToBytes(const Image& image) {
  std::vector<uint8_t> out(image.pixels.size());
  for (size_t i = 0; i < out.size(); ++i) {
    const double v = std::clamp(image.pixels[i], 0.0, 1.0);
    out[i] = static_cast<uint8_t>(std::lround(v * 255.0));
  }
  return out;
}

Image FromBytes(const std::vector<uint8_t>& bytes, int height, int width, int channels) {
  Require(bytes.size() == size_t(height) * width * channels, ErrorCode::kShapeMismatch,
          "pixel byte count does not match image shape");
  Image image(height, width, channels);
  for (size_t i = 0; i < bytes.size(); ++i) image.pixels[i] = bytes[i] / 255.0;
  return image;
}

std::string EncodePng(const Image& image) {
  Require(image.channels == 1 || image.channels == 3, ErrorCode::kShapeMismatch,
          "PNG export supports 1 or 3 channels");
  const std::vector<uint8_t> bytes = ToBytes(image);
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, bytes.data(), 0, nullptr)) {
    Fail(ErrorCode::kIo, std::string("PNG encoding failed: ") + png.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, bytes.data(), 0, nullptr)) {
    Fail(ErrorCode::kIo, std::string("PNG encoding failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

Image Upscale(const Image& image, int factor) {
  Image out(image.height * factor, image.width * factor, image.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < image.channels; ++c) out.at(y, x, c) = image.at(y / factor, x / factor, c);
  return out;
}

}  // namespace zscir
