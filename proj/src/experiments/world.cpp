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

#include "zscir/experiments/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "zscir/common/error.hpp"
#include "zscir/common/random.hpp"

namespace zscir {

namespace {

using Rgb = std::array<int, 3>;

constexpr std::array<Rgb, 8> kFill = {{{230, 30, 30},
                                       {30, 60, 230},
                                       {30, 200, 60},
                                       {240, 225, 30},
                                       {150, 30, 200},
                                       {240, 240, 240},
                                       {240, 130, 20},
                                       {20, 200, 200}}};

constexpr std::array<Rgb, 6> kBackground = {{{0, 0, 0}, {40, 80, 80}, {90, 40, 40}, {70, 70, 20}, {60, 60, 60}, {20, 20, 90}}};

constexpr int kShapes = 5;
constexpr int kTextures = 4;

// Silhouettes on a unit square centred in the image.
bool InShape(int shape, double u, double v) {
  switch (shape) {
    case 0:  // dress: widening trapezoid
      return v > 0.05 && v < 0.95 && std::abs(u - 0.5) < 0.12 + 0.33 * v;
    case 1:  // jacket: block with an open front
      return u > 0.1 && u < 0.9 && v > 0.1 && v < 0.9 && !(std::abs(u - 0.5) < 0.06 && v > 0.3);
    case 2:  // pants: two legs joined at the top
      return v > 0.05 && v < 0.95 && ((u > 0.2 && u < 0.45) || (u > 0.55 && u < 0.8) || (u > 0.2 && u < 0.8 && v < 0.3));
    case 3:  // skirt: short trapezoid in the lower half
      return v > 0.45 && v < 0.95 && std::abs(u - 0.5) < 0.15 + 0.35 * (v - 0.45) / 0.5;
    default:  // top: wide band in the upper half with sleeves
      return (v > 0.1 && v < 0.55 && u > 0.25 && u < 0.75) || (v > 0.1 && v < 0.3 && u > 0.05 && u < 0.95);
  }
}

// Multiplier applied to the fill colour.
double Texture(int texture, int x, int y) {
  switch (texture) {
    case 0: return 1.0;
    case 1: return (y / 2) % 2 == 0 ? 1.0 : 0.35;           // horizontal stripes
    case 2: return (x % 4 == 1 && y % 4 == 1) || (x % 4 == 2 && y % 4 == 1) ||
                           (x % 4 == 1 && y % 4 == 2) || (x % 4 == 2 && y % 4 == 2)
                       ? 0.3
                       : 1.0;                                // dots
    default: return ((x / 4) + (y / 4)) % 2 == 0 ? 1.0 : 0.45;  // checks
  }
}

}  // namespace

void to_json(nlohmann::json& j, const SyntheticWorldConfig& c) {
  nlohmann::json attrs = nlohmann::json::array();
  for (const auto& a : c.schema.attributes()) attrs.push_back({{"name", a.name}, {"values", a.values}});
  j = nlohmann::json{{"attributes", attrs},
                     {"object_attribute", c.schema.object_attribute()},
                     {"absent_value", c.schema.absent_value()},
                     {"image_size", c.image_size},
                     {"seed", c.seed},
                     {"n_images", c.n_images},
                     {"max_tuples", c.max_tuples},
                     {"query_fraction", c.query_fraction}};
}

Image RenderTuple(const AttributeSchema& schema, const AttributeTuple& tuple, int image_size) {
  const std::vector<int> code = schema.Encode(tuple);
  Require(code.size() <= 4, ErrorCode::kInvalidConfig, "the renderer supports at most four attributes");
  const int shape = code.size() > 0 ? code[0] : 0;
  const int fill = code.size() > 1 ? code[1] : 0;
  const int texture = code.size() > 2 ? code[2] : 0;
  const int background = code.size() > 3 ? code[3] : 0;
  Require(shape < kShapes && fill < static_cast<int>(kFill.size()) && texture < kTextures &&
              background < static_cast<int>(kBackground.size()),
          ErrorCode::kInvalidConfig, "attribute has more values than the renderer has motifs");

  Image img(image_size, image_size, 3);
  const double margin = 0.1 * image_size;
  const double span = image_size - 2.0 * margin;
  for (int y = 0; y < image_size; ++y) {
    for (int x = 0; x < image_size; ++x) {
      const double u = (x + 0.5 - margin) / span;
      const double v = (y + 0.5 - margin) / span;
      const bool inside = u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0 && InShape(shape, u, v);
      for (int c = 0; c < 3; ++c) {
        const int byte = inside ? static_cast<int>(std::lround(kFill[fill][c] * Texture(texture, x, y)))
                                : kBackground[background][c];
        img.at(y, x, c) = byte / 255.0;
      }
    }
  }
  return img;
}

Collection GenerateWorld(const SyntheticWorldConfig& cfg) {
  const size_t total = cfg.schema.TupleCount();
  Require(cfg.max_tuples > 0 && total <= static_cast<size_t>(cfg.max_tuples), ErrorCode::kSchemaTooLarge,
          "schema has " + std::to_string(total) + " tuples, cap is " + std::to_string(cfg.max_tuples));
  Require(cfg.n_images >= 0 && static_cast<size_t>(cfg.n_images) <= total, ErrorCode::kInvalidConfig,
          "n_images exceeds the number of attribute tuples");
  Require(cfg.image_size >= 8, ErrorCode::kInvalidConfig, "image_size must be at least 8");
  Require(cfg.query_fraction >= 0.0 && cfg.query_fraction < 1.0, ErrorCode::kInvalidConfig,
          "query_fraction must lie in [0, 1)");

  std::vector<size_t> chosen(total);
  for (size_t i = 0; i < total; ++i) chosen[i] = i;
  if (cfg.n_images > 0) {
    Rng rng(cfg.seed);
    rng.Shuffle(chosen);
    chosen.resize(static_cast<size_t>(cfg.n_images));
    std::sort(chosen.begin(), chosen.end());
  }

  std::vector<ImageRecord> images;
  images.reserve(chosen.size());
  for (size_t index : chosen) {
    ImageRecord rec;
    char id[32];
    std::snprintf(id, sizeof(id), "img_%05zu", index);
    rec.id = id;
    rec.attributes = cfg.schema.TupleAt(index);
    rec.meta_class = rec.attributes->at(cfg.schema.object_attribute());
    rec.pixels = RenderTuple(cfg.schema, *rec.attributes, cfg.image_size);
    const uint64_t h = Rng::Mix(cfg.seed ^ Rng::Mix(static_cast<uint64_t>(index) + 1));
    rec.split = static_cast<double>(h >> 11) * 0x1.0p-53 < cfg.query_fraction ? Split::kQuery : Split::kIndex;
    images.push_back(std::move(rec));
  }
  return Collection(std::move(images));
}

}  // namespace zscir
