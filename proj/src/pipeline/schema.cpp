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

#include "zscir/pipeline/schema.hpp"

#include <algorithm>

#include "zscir/common/error.hpp"

namespace zscir {

AttributeSchema::AttributeSchema(std::vector<Attribute> attributes, std::string object_attribute,
                                 std::string absent_value)
    : attributes_(std::move(attributes)),
      object_attribute_(std::move(object_attribute)),
      absent_value_(std::move(absent_value)) {
  Require(!attributes_.empty(), ErrorCode::kInvalidConfig, "attribute schema is empty");
  bool has_object = false;
  for (const auto& attr : attributes_) {
    Require(!attr.values.empty(), ErrorCode::kInvalidConfig, "attribute " + attr.name + " has no values");
    if (attr.name == object_attribute_) {
      has_object = true;
      Require(std::find(attr.values.begin(), attr.values.end(), absent_value_) == attr.values.end(),
              ErrorCode::kInvalidConfig, "the object attribute cannot be absent");
    }
    for (const auto& value : attr.values) {
      Require(!value.empty() && WordCount(value) == 1, ErrorCode::kInvalidConfig,
              "attribute values must be single words: '" + value + "'");
      if (value == absent_value_) continue;
      Require(word_index_.emplace(value, std::make_pair(attr.name, value)).second,
              ErrorCode::kInvalidConfig, "attribute value '" + value + "' is not unique across the schema");
    }
  }
  Require(has_object, ErrorCode::kInvalidConfig, "schema lacks the object attribute " + object_attribute_);
}

AttributeSchema AttributeSchema::Default() {
  return AttributeSchema({
      {"object", {"dress", "jacket", "pants", "skirt", "top"}},
      {"color", {"red", "blue", "green", "yellow", "purple", "white"}},
      {"pattern", {"none", "striped", "dotted", "checked"}},
      {"style", {"none", "strapless", "fitted", "loose"}},
  });
}

size_t AttributeSchema::TupleCount() const {
  size_t n = 1;
  for (const auto& attr : attributes_) n *= attr.values.size();
  return n;
}

AttributeTuple AttributeSchema::TupleAt(size_t index) const {
  AttributeTuple tuple;
  for (auto it = attributes_.rbegin(); it != attributes_.rend(); ++it) {
    tuple[it->name] = it->values[index % it->values.size()];
    index /= it->values.size();
  }
  return tuple;
}

std::vector<int> AttributeSchema::Encode(const AttributeTuple& tuple) const {
  std::vector<int> out;
  out.reserve(attributes_.size());
  for (const auto& attr : attributes_) {
    auto found = tuple.find(attr.name);
    Require(found != tuple.end(), ErrorCode::kInvalidConfig, "tuple lacks attribute " + attr.name);
    auto pos = std::find(attr.values.begin(), attr.values.end(), found->second);
    Require(pos != attr.values.end(), ErrorCode::kInvalidConfig,
            "value '" + found->second + "' is not in attribute " + attr.name);
    out.push_back(static_cast<int>(pos - attr.values.begin()));
  }
  return out;
}

std::optional<std::pair<std::string, std::string>> AttributeSchema::LookupWord(std::string_view word) const {
  auto it = word_index_.find(std::string(word));
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

int AttributeDistance(const AttributeTuple& a, const AttributeTuple& b) {
  int distance = 0;
  for (const auto& [name, value] : a) {
    auto it = b.find(name);
    if (it == b.end() || it->second != value) ++distance;
  }
  for (const auto& [name, value] : b)
    if (!a.count(name)) ++distance;
  return distance;
}

}  // namespace zscir
