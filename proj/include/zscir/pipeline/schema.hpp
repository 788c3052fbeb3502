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

#ifndef ZSCIR_PIPELINE_SCHEMA_HPP_
#define ZSCIR_PIPELINE_SCHEMA_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "zscir/pipeline/image_record.hpp"

namespace zscir {

struct Attribute {
  std::string name;
  std::vector<std::string> values;
};

// Ordered attribute schema shared by the synthetic world and the oracle
// backends. The attribute named `object_attribute` is the noun of a caption
// and the meta class of an image; a value equal to `absent_value` is left out
// of captions.
class AttributeSchema {
 public:
  AttributeSchema() = default;
  AttributeSchema(std::vector<Attribute> attributes, std::string object_attribute = "object",
                  std::string absent_value = "none");

  // object x color x pattern x style = 5 x 6 x 4 x 4 = 480 tuples.
  static AttributeSchema Default();

  const std::vector<Attribute>& attributes() const { return attributes_; }
  const std::string& object_attribute() const { return object_attribute_; }
  const std::string& absent_value() const { return absent_value_; }
  size_t TupleCount() const;

  // Tuple number `index` in mixed-radix order (last attribute fastest).
  AttributeTuple TupleAt(size_t index) const;

  // Value index of each attribute in schema order.
  std::vector<int> Encode(const AttributeTuple& tuple) const;

  // Resolves a caption word to (attribute, value), if the word is a value.
  std::optional<std::pair<std::string, std::string>> LookupWord(std::string_view word) const;

 private:
  std::vector<Attribute> attributes_;
  std::string object_attribute_;
  std::string absent_value_;
  std::unordered_map<std::string, std::pair<std::string, std::string>> word_index_;
};

// Number of attributes on which two tuples differ.
int AttributeDistance(const AttributeTuple& a, const AttributeTuple& b);

}  // namespace zscir

#endif  // ZSCIR_PIPELINE_SCHEMA_HPP_
