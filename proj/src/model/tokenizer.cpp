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

#include "zscir/model/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "zscir/common/error.hpp"

namespace zscir {

size_t TokenSequence::length() const { return static_cast<size_t>(std::count(mask.begin(), mask.end(), true)); }

Tokenizer::Tokenizer(std::vector<std::string> words) {
  vocab_ = {"<null>", "<unk>", "<eos>"};
  for (auto& w : words) vocab_.push_back(std::move(w));
  for (size_t i = 0; i < vocab_.size(); ++i) {
    Require(ids_.emplace(vocab_[i], static_cast<int>(i)).second, ErrorCode::kInvalidConfig,
            "duplicate vocabulary entry " + vocab_[i]);
  }
}

Tokenizer Tokenizer::ForSchema(const AttributeSchema& schema) {
  std::set<std::string> words = {"a", "an", "change", "from", "to", "and", "keep", "the", "item", "same"};
  for (const auto& attr : schema.attributes()) {
    words.insert(attr.name);
    for (const auto& v : attr.values) words.insert(v);
  }
  return Tokenizer(std::vector<std::string>(words.begin(), words.end()));
}

TokenSequence Tokenizer::Encode(std::string_view text, int max_len) const {
  Require(max_len >= 2, ErrorCode::kInvalidConfig, "max_len must be at least 2");
  TokenSequence seq;
  for (std::string word : SplitWords(text)) {
    if (static_cast<int>(seq.ids.size()) == max_len - 1) break;
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    auto it = ids_.find(word);
    seq.ids.push_back(it == ids_.end() ? kUnkId : it->second);
  }
  seq.ids.push_back(kEosId);
  seq.mask.assign(seq.ids.size(), true);
  return seq;
}

TokenSequence Tokenizer::NullText() { return TokenSequence{{kNullId}, {true}}; }

void ValidateTokens(const TokenSequence& tokens, int vocab_size, int max_len) {
  Require(tokens.ids.size() == tokens.mask.size(), ErrorCode::kTokenOutOfRange,
          "token mask length differs from id length");
  Require(!tokens.ids.empty() && tokens.mask.front(), ErrorCode::kTokenOutOfRange,
          "token sequence has no real token");
  Require(static_cast<int>(tokens.ids.size()) <= max_len, ErrorCode::kTokenOutOfRange,
          "token sequence longer than max_text_len");
  bool in_padding = false;
  for (size_t i = 0; i < tokens.ids.size(); ++i) {
    if (!tokens.mask[i]) in_padding = true;
    Require(!(in_padding && tokens.mask[i]), ErrorCode::kTokenOutOfRange, "padding must be trailing");
    Require(tokens.ids[i] >= 0 && tokens.ids[i] < vocab_size, ErrorCode::kTokenOutOfRange,
            "token id " + std::to_string(tokens.ids[i]) + " outside the vocabulary");
  }
}

}  // namespace zscir
