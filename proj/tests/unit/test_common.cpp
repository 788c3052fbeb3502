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


#include <png.h>

#include <atomic>
#include <filesystem>
#include <stdexcept>

#include <gtest/gtest.h>

#include "support/test_support.hpp"
#include "zscir/common/error.hpp"
#include "zscir/common/image.hpp"
#include "zscir/common/io.hpp"
#include "zscir/common/parallel.hpp"
#include "zscir/common/random.hpp"

namespace zscir {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const uint64_t x = a.NextU64();
    EXPECT_EQ(x, b.NextU64());
    differs = differs || x != c.NextU64();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformAndBelowStayInRange) {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.Uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(rng.Below(13), 13u);
  }
}

TEST(Rng, NormalHasUnitMoments) {
  Rng rng(11);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.Normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng rng(3);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  rng.Shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Io, Sha256KnownVectors) {
  EXPECT_EQ(Sha256Hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(Sha256Hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Io, Base64KnownVectors) {
  EXPECT_EQ(Base64Encode(""), "");
  EXPECT_EQ(Base64Encode("f"), "Zg==");
  EXPECT_EQ(Base64Encode("fo"), "Zm8=");
  EXPECT_EQ(Base64Encode("foo"), "Zm9v");
  EXPECT_EQ(Base64Encode("foobar"), "Zm9vYmFy");
}

TEST(Io, AtomicWriteRoundTripsAndLeavesNoTemp) {
  testing::TempDir dir("io");
  const auto path = dir.path() / "sub" / "file.txt";
  std::filesystem::create_directories(path.parent_path());
  WriteFileAtomic(path, "hello");
  WriteFileAtomic(path, "world");
  EXPECT_EQ(ReadFile(path), "world");
  EXPECT_EQ(Sha256File(path), Sha256Hex("world"));
  size_t entries = 0;
  for (const auto& e : std::filesystem::directory_iterator(path.parent_path())) {
    (void)e;
    ++entries;
  }
  EXPECT_EQ(entries, 1u);
}

TEST(Io, MissingFileIsIoError) {
  try {
    ReadFile("/nonexistent/zscir/file");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
    EXPECT_FALSE(e.is_config_error());
  }
}

TEST(Image, BytesRoundTripForQuantizedValues) {
  Image img(3, 4, 3);
  for (size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<double>(i * 7 % 256) / 255.0;
  EXPECT_EQ(FromBytes(ToBytes(img), 3, 4, 3), img);
  EXPECT_THROW(FromBytes(ToBytes(img), 4, 4, 3), Error);
}

TEST(Image, PngDecodesToTheSamePixels) {
  Image img(5, 6, 3);
  for (size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<double>(i * 13 % 256) / 255.0;
  const std::string png = EncodePng(img);
  ASSERT_GE(png.size(), 8u);
  EXPECT_EQ(png.substr(0, 8), std::string("\x89PNG\r\n\x1a\n", 8));
  png_image decoded{};
  decoded.version = PNG_IMAGE_VERSION;
  ASSERT_TRUE(png_image_begin_read_from_memory(&decoded, png.data(), png.size()));
  decoded.format = PNG_FORMAT_RGB;
  std::vector<uint8_t> buffer(PNG_IMAGE_SIZE(decoded));
  ASSERT_TRUE(png_image_finish_read(&decoded, nullptr, buffer.data(), 0, nullptr));
  EXPECT_EQ(decoded.width, 6u);
  EXPECT_EQ(decoded.height, 5u);
  EXPECT_EQ(buffer, ToBytes(img));
}

TEST(Image, UpscaleRepeatsPixels) {
  Image img(1, 2, 1);
  img.pixels = {0.25, 0.75};
  const Image up = Upscale(img, 2);
  EXPECT_EQ(up.height, 2);
  EXPECT_EQ(up.width, 4);
  EXPECT_EQ(up.pixels, (std::vector<double>{0.25, 0.25, 0.75, 0.75, 0.25, 0.25, 0.75, 0.75}));
}

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(100);
  ParallelFor(100, 4, [&](size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Parallel, RethrowsWorkerException) {
  EXPECT_THROW(ParallelFor(10, 3,
                           [](size_t i) {
                             if (i == 5) throw std::runtime_error("boom");
                           }),
               std::runtime_error);
}

TEST(Error, CarriesCodeAndName) {
  const Error e(ErrorCode::kInvalidConfig, "x");
  EXPECT_TRUE(e.is_config_error());
  EXPECT_NE(std::string(e.what()).find("x"), std::string::npos);
  EXPECT_FALSE(ErrorCodeName(ErrorCode::kDanglingId).empty());
}

}  // namespace
}  // namespace zscir
