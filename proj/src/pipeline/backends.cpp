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

#include "zscir/pipeline/backends.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "zscir/common/error.hpp"
#include "zscir/common/io.hpp"
#include "zscir/pipeline/prompt.hpp"

namespace zscir {

using nlohmann::json;

namespace {

std::string Trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string JoinWords(const std::vector<std::string>& words, size_t count) {
  std::string out;
  for (size_t i = 0; i < count && i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

}  // namespace

CaptionRecord Caption(const ImageRecord& image, CaptionBackend& backend) {
  std::string text = Trim(backend.Describe(image));
  Require(!text.empty(), ErrorCode::kEmptyCaption,
          "backend " + backend.id() + " returned a blank caption for " + image.id);
  return {image.id, std::move(text), backend.id()};
}

std::string Reformulate(std::string_view caption_a, std::string_view caption_b,
                        ReformulationBackend& backend, size_t word_cap) {
  Require(WordCount(caption_a) > 0 && WordCount(caption_b) > 0, ErrorCode::kEmptyCaption,
          "reformulation needs two non-empty captions");
  const std::string raw = backend.Describe(caption_a, caption_b);
  const std::vector<std::string> words = SplitWords(raw);
  Require(!words.empty(), ErrorCode::kEmptyReformulation, "backend " + backend.id() + " returned nothing");
  if (words.size() > word_cap) {
    spdlog::warn("reformulation from {} has {} words, truncating to {}", backend.id(), words.size(), word_cap);
  }
  return JoinWords(words, word_cap);
}

std::string OracleCaptionBackend::Describe(const ImageRecord& image) {
  Require(image.attributes.has_value(), ErrorCode::kEmptyCaption,
          "oracle captioner needs attributes on image " + image.id);
  return CaptionFor(*image.attributes);
}

std::string OracleCaptionBackend::CaptionFor(const AttributeTuple& tuple) const {
  const std::vector<int> codes = schema_.Encode(tuple);
  std::string caption = "a";
  std::string object;
  for (size_t i = 0; i < codes.size(); ++i) {
    const Attribute& attr = schema_.attributes()[i];
    const std::string& value = attr.values[codes[i]];
    if (attr.name == schema_.object_attribute()) {
      object = value;
    } else if (value != schema_.absent_value()) {
      caption += ' ';
      caption += value;
    }
  }
  return caption + ' ' + object;
}

AttributeTuple OracleReformulationBackend::ParseCaption(std::string_view caption) const {
  AttributeTuple tuple;
  for (const auto& attr : schema_.attributes())
    if (attr.name != schema_.object_attribute()) tuple[attr.name] = schema_.absent_value();
  bool has_object = false;
  for (const std::string& word : SplitWords(caption)) {
    if (word == "a" || word == "an") continue;
    auto hit = schema_.LookupWord(word);
    Require(hit.has_value(), ErrorCode::kParse, "oracle cannot parse caption word '" + word + "'");
    tuple[hit->first] = hit->second;
    has_object |= hit->first == schema_.object_attribute();
  }
  Require(has_object, ErrorCode::kParse, "caption names no object: '" + std::string(caption) + "'");
  return tuple;
}

std::string OracleReformulationBackend::Describe(std::string_view caption_a, std::string_view caption_b) {
  const AttributeTuple a = ParseCaption(caption_a);
  const AttributeTuple b = ParseCaption(caption_b);
  std::string text;
  size_t words = 0;
  for (const auto& attr : schema_.attributes()) {
    const std::string& from = a.at(attr.name);
    const std::string& to = b.at(attr.name);
    if (from == to) continue;
    const std::string clause = attr.name + " from " + from + " to " + to;
    const std::string full = text.empty() ? "change " + clause : " and " + clause;
    const size_t clause_words = WordCount(full);
    if (words + clause_words > word_cap_) break;
    text += full;
    words += clause_words;
  }
  return text.empty() ? "keep the item the same" : text;
}

HttpChatBackend::HttpChatBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
  const auto scheme_end = cfg_.endpoint.find("://");
  Require(scheme_end != std::string::npos, ErrorCode::kInvalidConfig,
          "backend endpoint must be an absolute URL: " + cfg_.endpoint);
  const auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
  scheme_host_port_ = cfg_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);
  Require(cfg_.max_retries >= 0, ErrorCode::kInvalidConfig, "max_retries must be >= 0");
  Require(cfg_.timeout_seconds > 0, ErrorCode::kInvalidConfig, "timeout must be positive");
}

std::string HttpChatBackend::Complete(const std::string& request_body) {
  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::duration<double>(cfg_.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(50 << std::min(attempt, 6)));
    auto res = client.Post(path_, request_body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      const json reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      last_error = std::string("malformed reply: ") + e.what();
    }
  }
  Fail(ErrorCode::kBackendUnavailable,
       id() + " failed after " + std::to_string(cfg_.max_retries + 1) + " attempts: " + last_error);
}

std::string HttpChatBackend::Describe(const ImageRecord& image) {
  const std::string png = EncodePng(image.pixels);
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", kCaptionPrompt}});
  content.push_back(
      {{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + Base64Encode(png)}}}});
  const json body = {{"model", cfg_.model},
                     {"messages", json::array({{{"role", "user"}, {"content", content}}})},
                     {"temperature", 0}};
  return Complete(body.dump());
}

std::string HttpChatBackend::Describe(std::string_view caption_a, std::string_view caption_b) {
  const json body = {
      {"model", cfg_.model},
      {"messages",
       json::array({{{"role", "user"}, {"content", RenderReformulationPrompt(caption_a, caption_b)}}})},
      {"temperature", 0}};
  return Complete(body.dump());
}

}  // namespace zscir
