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

#ifndef ZSCIR_PIPELINE_BACKENDS_HPP_
#define ZSCIR_PIPELINE_BACKENDS_HPP_

#include <memory>
#include <string>
#include <string_view>

#include "zscir/pipeline/image_record.hpp"
#include "zscir/pipeline/schema.hpp"

namespace zscir {

inline constexpr size_t kDefaultWordCap = 12;

struct CaptionRecord {
  std::string image_id;
  std::string text;
  std::string backend_id;
};

class CaptionBackend {
 public:
  virtual ~CaptionBackend() = default;
  virtual std::string id() const = 0;
  // Raw model output; validation happens in Caption().
  virtual std::string Describe(const ImageRecord& image) = 0;
};

class ReformulationBackend {
 public:
  virtual ~ReformulationBackend() = default;
  virtual std::string id() const = 0;
  // Oracle backends are exact and never exceed the word cap; external ones
  // may, and get truncated by Reformulate().
  virtual bool is_oracle() const = 0;
  virtual std::string Describe(std::string_view caption_a, std::string_view caption_b) = 0;
};

CaptionRecord Caption(const ImageRecord& image, CaptionBackend& backend);

// Validated reformulation: non-empty, at most `word_cap` words. Over-long
// external output is cut at a word boundary and logged.
std::string Reformulate(std::string_view caption_a, std::string_view caption_b,
                        ReformulationBackend& backend, size_t word_cap = kDefaultWordCap);

// Deterministic captioner: "a {color} {pattern} {style} {object}" with the
// non-object attributes in schema order and absent values dropped.
class OracleCaptionBackend : public CaptionBackend {
 public:
  explicit OracleCaptionBackend(AttributeSchema schema) : schema_(std::move(schema)) {}
  std::string id() const override { return "oracle-caption"; }
  std::string Describe(const ImageRecord& image) override;
  std::string CaptionFor(const AttributeTuple& tuple) const;

 private:
  AttributeSchema schema_;
};

// Deterministic reformulator. Parses both captions back into attribute
// tuples and describes the difference: the first differing attribute as
// "change {name} from {old} to {new}", each further one as
// "and {name} from {old} to {new}". Clauses that would exceed the word cap
// are dropped whole. Identical tuples give "keep the item the same".
class OracleReformulationBackend : public ReformulationBackend {
 public:
  explicit OracleReformulationBackend(AttributeSchema schema, size_t word_cap = kDefaultWordCap)
      : schema_(std::move(schema)), word_cap_(word_cap) {}
  std::string id() const override { return "oracle-reform"; }
  bool is_oracle() const override { return true; }
  std::string Describe(std::string_view caption_a, std::string_view caption_b) override;
  AttributeTuple ParseCaption(std::string_view caption) const;

 private:
  AttributeSchema schema_;
  size_t word_cap_;
};

struct HttpBackendConfig {
  std::string endpoint;  // e.g. http://localhost:8000/v1/chat/completions
  std::string model;
  double timeout_seconds = 60.0;
  int max_retries = 3;
};

// Client for an OpenAI-compatible chat-completions endpoint. Used as both a
// captioning backend (image sent as a PNG data URL) and a reformulation
// backend (the rendered template sent as the user message).
class HttpChatBackend : public CaptionBackend, public ReformulationBackend {
 public:
  explicit HttpChatBackend(HttpBackendConfig cfg);
  std::string id() const override { return "http:" + cfg_.model; }
  bool is_oracle() const override { return false; }
  std::string Describe(const ImageRecord& image) override;
  std::string Describe(std::string_view caption_a, std::string_view caption_b) override;

 private:
  std::string Complete(const std::string& request_body);

  HttpBackendConfig cfg_;
  std::string scheme_host_port_;
  std::string path_;
};

}  // namespace zscir

#endif  // ZSCIR_PIPELINE_BACKENDS_HPP_
