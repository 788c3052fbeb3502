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

#ifndef ZSCIR_PIPELINE_IMAGE_RECORD_HPP_
#define ZSCIR_PIPELINE_IMAGE_RECORD_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "zscir/common/image.hpp"

namespace zscir {

enum class Split { kTrain, kQuery, kIndex };

std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

using AttributeTuple = std::map<std::string, std::string>;

struct ImageRecord {
  std::string id;
  Image pixels;
  std::optional<AttributeTuple> attributes;
  std::optional<std::string> meta_class;
  Split split = Split::kIndex;
};

// An image collection with id lookup. Ids are unique; all images share one
// shape and every pixel is finite and in [0, 1].
class Collection {
 public:
  Collection() = default;
  explicit Collection(std::vector<ImageRecord> images);

  const std::vector<ImageRecord>& images() const { return images_; }
  size_t size() const { return images_.size(); }
  bool contains(std::string_view id) const;
  const ImageRecord& at(std::string_view id) const;
  std::vector<const ImageRecord*> WithSplit(Split split) const;

 private:
  std::vector<ImageRecord> images_;
  std::unordered_map<std::string, size_t> by_id_;
};

// One JSON object per line: id, split, meta_class, attributes, shape, and the
// 8-bit pixels as base64.
void WriteCollection(const std::filesystem::path& path, const Collection& collection);
Collection ReadCollection(const std::filesystem::path& path);

std::vector<std::string> SplitWords(std::string_view text);
size_t WordCount(std::string_view text);

}  // namespace zscir

#endif  // ZSCIR_PIPELINE_IMAGE_RECORD_HPP_
