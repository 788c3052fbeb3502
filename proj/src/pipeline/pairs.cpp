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

#include "zscir/pipeline/pairs.hpp"

#include <map>
#include <unordered_set>

#include "zscir/common/error.hpp"
#include "zscir/common/random.hpp"

namespace zscir {

std::string_view PairStrategyName(PairStrategy strategy) {
  return strategy == PairStrategy::kSameMetaClass ? "same_meta_class" : "global_random";
}

PairStrategy ParsePairStrategy(std::string_view name) {
  if (name == "same_meta_class") return PairStrategy::kSameMetaClass;
  if (name == "global_random") return PairStrategy::kGlobalRandom;
  Fail(ErrorCode::kInvalidConfig, "unknown pair strategy '" + std::string(name) + "'");
}

namespace {

// The ordered pairs available under a strategy, addressed by a flat index
// without materializing them: group g with m members owns m * (m - 1)
// consecutive indices.
class PairSpace {
 public:
  explicit PairSpace(std::vector<std::vector<const ImageRecord*>> groups) : groups_(std::move(groups)) {
    for (const auto& g : groups_) {
      offsets_.push_back(total_);
      total_ += static_cast<uint64_t>(g.size()) * (g.size() > 0 ? g.size() - 1 : 0);
    }
  }

  uint64_t size() const { return total_; }

  ImagePair At(uint64_t k) const {
    size_t g = 0;
    while (g + 1 < offsets_.size() && offsets_[g + 1] <= k) ++g;
    const auto& members = groups_[g];
    const uint64_t local = k - offsets_[g];
    const uint64_t m1 = members.size() - 1;
    const uint64_t a = local / m1;
    uint64_t b = local % m1;
    if (b >= a) ++b;
    return {members[a]->id, members[b]->id};
  }

 private:
  std::vector<std::vector<const ImageRecord*>> groups_;
  std::vector<uint64_t> offsets_;
  uint64_t total_ = 0;
};

}  // namespace

std::vector<ImagePair> SamplePairs(const std::vector<const ImageRecord*>& images,
                                   const PairSamplingConfig& cfg) {
  Require(cfg.n_pairs > 0, ErrorCode::kInvalidConfig, "n_pairs must be positive");
  Require(images.size() >= 2, ErrorCode::kInsufficientPairs, "need at least two images to form a pair");

  std::vector<std::vector<const ImageRecord*>> groups;
  if (cfg.strategy == PairStrategy::kSameMetaClass) {
    std::map<std::string, std::vector<const ImageRecord*>> by_class;
    for (const ImageRecord* rec : images) {
      Require(rec->meta_class.has_value(), ErrorCode::kMissingMetaClass,
              "image " + rec->id + " has no meta_class");
      by_class[*rec->meta_class].push_back(rec);
    }
    for (auto& [name, members] : by_class)
      if (members.size() >= 2) groups.push_back(std::move(members));
  } else {
    groups.push_back(images);
  }

  const PairSpace space(std::move(groups));
  const uint64_t wanted = static_cast<uint64_t>(cfg.n_pairs);
  if (space.size() == 0 || (cfg.dedupe && wanted > space.size())) {
    Fail(ErrorCode::kInsufficientPairs, "requested " + std::to_string(wanted) + " pairs but only " +
                                            std::to_string(space.size()) + " distinct ordered pairs exist");
  }

  Rng rng(cfg.seed);
  std::vector<ImagePair> pairs;
  pairs.reserve(wanted);
  if (!cfg.dedupe) {
    for (uint64_t i = 0; i < wanted; ++i) pairs.push_back(space.At(rng.Below(space.size())));
  } else if (wanted * 4 >= space.size()) {
    // Dense request: partial Fisher-Yates over the whole index range.
    std::vector<uint64_t> order(space.size());
    for (uint64_t i = 0; i < order.size(); ++i) order[i] = i;
    for (uint64_t i = 0; i < wanted; ++i) {
      const uint64_t j = i + rng.Below(order.size() - i);
      std::swap(order[i], order[j]);
      pairs.push_back(space.At(order[i]));
    }
  } else {
    std::unordered_set<uint64_t> seen;
    while (pairs.size() < wanted) {
      const uint64_t k = rng.Below(space.size());
      if (seen.insert(k).second) pairs.push_back(space.At(k));
    }
  }
  return pairs;
}

std::vector<ImagePair> SamplePairs(const Collection& collection, const PairSamplingConfig& cfg) {
  std::vector<const ImageRecord*> images;
  images.reserve(collection.size());
  for (const auto& rec : collection.images()) images.push_back(&rec);
  return SamplePairs(images, cfg);
}

}  // namespace zscir
