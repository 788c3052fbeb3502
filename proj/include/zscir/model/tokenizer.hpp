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

#ifndef ZSCIR_MODEL_TOKENIZER_HPP_
#define ZSCIR_MODEL_TOKENIZER_HPP_

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "zscir/pipeline/schema.hpp"

namespace zscir {

struct TokenSequence {
  std::vector<int> ids;
  std::vector<bool> mask;  // true for real tokens; padding is trailing

  size_t length() const;  // number of real tokens
};

// Lower-cased, whitespace-split word tokenizer. Reserved ids: 0 is the null
// text token, 1 is <unk>, 2 is <eos> (appended to every non-null text).
class Tokenizer {
 public:
  static constexpr int kNullId = 0;
  static constexpr int kUnkId = 1;
  static constexpr int kEosId = 2;

  explicit Tokenizer(std::vector<std::string> words = {});

  // Vocabulary covering the oracle caption and reformulation grammars.
  static Tokenizer ForSchema(const AttributeSchema& schema);

  int vocab_size() const { return static_cast<int>(vocab_.size()); }
  const std::vector<std::string>& vocabulary() const { return vocab_; }

  // At most max_len tokens: the first max_len - 1 words, then <eos>.
  TokenSequence Encode(std::string_view text, int max_len) const;
  static TokenSequence NullText();

 private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> ids_;
};

// Validates a sequence against a vocabulary size and a length limit. Throws
// TokenOutOfRange.
void ValidateTokens(const TokenSequence& tokens, int vocab_size, int max_len);

}  // namespace zscir

#endif  // ZSCIR_MODEL_TOKENIZER_HPP_
