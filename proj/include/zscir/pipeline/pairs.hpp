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

#ifndef ZSCIR_PIPELINE_PAIRS_HPP_
#define ZSCIR_PIPELINE_PAIRS_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zscir/pipeline/image_record.hpp"

namespace zscir {

enum class PairStrategy { kSameMetaClass, kGlobalRandom };

std::string_view PairStrategyName(PairStrategy strategy);
PairStrategy ParsePairStrategy(std::string_view name);

struct PairSamplingConfig {
  PairStrategy strategy = PairStrategy::kSameMetaClass;
  int64_t n_pairs = 2000;
  uint64_t seed = 0;
  bool dedupe = true;
};

using ImagePair = std::pair<std::string, std::string>;  // (reference, target)

// Samples ordered pairs (a, b) with a != b. With `dedupe`, no ordered pair
// repeats. The result depends only on the image order and the config.
std::vector<ImagePair> SamplePairs(const std::vector<const ImageRecord*>& images,
                                   const PairSamplingConfig& cfg);
std::vector<ImagePair> SamplePairs(const Collection& collection, const PairSamplingConfig& cfg);

}  // namespace zscir

#endif  // ZSCIR_PIPELINE_PAIRS_HPP_
