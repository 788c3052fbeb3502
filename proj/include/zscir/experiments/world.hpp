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

#ifndef ZSCIR_EXPERIMENTS_WORLD_HPP_
#define ZSCIR_EXPERIMENTS_WORLD_HPP_

#include <cstdint>

#include <json.hpp>

#include "zscir/pipeline/image_record.hpp"
#include "zscir/pipeline/schema.hpp"

namespace zscir {

// Desk-scale stand-in for a product photo collection. Attributes render by
// schema position: the first picks the silhouette, the second the fill
// colour, the third a texture inside the silhouette, the fourth the
// background.
struct SyntheticWorldConfig {
  AttributeSchema schema = AttributeSchema::Default();
  int image_size = 32;
  uint64_t seed = 0;
  int64_t n_images = 0;  // 0 renders every tuple; otherwise a seeded sample
  int64_t max_tuples = 100000;
  double query_fraction = 0.2;
};

void to_json(nlohmann::json& j, const SyntheticWorldConfig& c);

// Renders one tuple. Pixel values are multiples of 1/255.
Image RenderTuple(const AttributeSchema& schema, const AttributeTuple& tuple, int image_size);

// meta_class = object attribute; split = query for a seeded-hash fraction of
// ids, index otherwise. Throws SchemaTooLarge above max_tuples.
Collection GenerateWorld(const SyntheticWorldConfig& cfg);

}  // namespace zscir

#endif  // ZSCIR_EXPERIMENTS_WORLD_HPP_
