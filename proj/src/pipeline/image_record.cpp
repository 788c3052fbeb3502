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

#include "zscir/pipeline/image_record.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "zscir/common/error.hpp"
#include "zscir/common/io.hpp"

namespace zscir {

using nlohmann::ordered_json;

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kQuery: return "query";
    case Split::kIndex: return "index";
  }
  return "index";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "query") return Split::kQuery;
  if (name == "index") return Split::kIndex;
  Fail(ErrorCode::kParse, "unknown split '" + std::string(name) + "'");
}

Collection::Collection(std::vector<ImageRecord> images) : images_(std::move(images)) {
  for (size_t i = 0; i < images_.size(); ++i) {
    const ImageRecord& rec = images_[i];
    if (!by_id_.emplace(rec.id, i).second) Fail(ErrorCode::kDuplicateId, "duplicate image id " + rec.id);
    const Image& first = images_.front().pixels;
    Require(rec.pixels.height == first.height && rec.pixels.width == first.width &&
                rec.pixels.channels == first.channels,
            ErrorCode::kShapeMismatch, "image " + rec.id + " differs in shape from the collection");
    for (double v : rec.pixels.pixels) {
      Require(std::isfinite(v) && v >= 0.0 && v <= 1.0, ErrorCode::kShapeMismatch,
              "image " + rec.id + " has a pixel outside [0, 1]");
    }
  }
}

bool Collection::contains(std::string_view id) const { return by_id_.count(std::string(id)) > 0; }

const ImageRecord& Collection::at(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) Fail(ErrorCode::kDanglingId, "unknown image id " + std::string(id));
  return images_[it->second];
}

std::vector<const ImageRecord*> Collection::WithSplit(Split split) const {
  std::vector<const ImageRecord*> out;
  for (const auto& rec : images_)
    if (rec.split == split) out.push_back(&rec);
  return out;
}

void WriteCollection(const std::filesystem::path& path, const Collection& collection) {
  std::string out;
  for (const auto& rec : collection.images()) {
    ordered_json j;
    j["id"] = rec.id;
    j["split"] = SplitName(rec.split);
    j["meta_class"] = rec.meta_class ? ordered_json(*rec.meta_class) : ordered_json(nullptr);
    if (rec.attributes) {
      j["attributes"] = *rec.attributes;
    } else {
      j["attributes"] = nullptr;
    }
    j["shape"] = {rec.pixels.height, rec.pixels.width, rec.pixels.channels};
    const std::vector<uint8_t> bytes = ToBytes(rec.pixels);
    j["pixels"] = Base64Encode(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    out += j.dump();
    out += '\n';
  }
  WriteFileAtomic(path, out);
}

namespace {

std::vector<uint8_t> Base64Decode(std::string_view text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<uint8_t> out;
  uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    const int v = value(c);
    if (v < 0) Fail(ErrorCode::kParse, "invalid base64 character");
    acc = (acc << 6) | static_cast<uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<uint8_t>((acc >> bits) & 0xff));
    }
  }
  return out;
}

}  // namespace

Collection ReadCollection(const std::filesystem::path& path) {
  std::istringstream in(ReadFile(path));
  std::vector<ImageRecord> images;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = ordered_json::parse(line);
    ImageRecord rec;
    rec.id = j.at("id").get<std::string>();
    rec.split = ParseSplit(j.at("split").get<std::string>());
    if (!j.at("meta_class").is_null()) rec.meta_class = j.at("meta_class").get<std::string>();
    if (!j.at("attributes").is_null()) rec.attributes = j.at("attributes").get<AttributeTuple>();
    const auto shape = j.at("shape").get<std::vector<int>>();
    Require(shape.size() == 3, ErrorCode::kParse, "shape must have 3 entries");
    rec.pixels = FromBytes(Base64Decode(j.at("pixels").get<std::string>()), shape[0], shape[1], shape[2]);
    images.push_back(std::move(rec));
  }
  return Collection(std::move(images));
}

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) words.push_back(std::move(current)), current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

size_t WordCount(std::string_view text) { return SplitWords(text).size(); }

}  // namespace zscir
