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


#include <atomic>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "zscir/common/error.hpp"
#include "zscir/pipeline/backends.hpp"
#include "zscir/pipeline/prompt.hpp"

namespace zscir {
namespace {

using nlohmann::json;

// Local chat-completions stub. The first `failures` requests get HTTP 503.
class StubServer {
 public:
  StubServer(int failures, std::string reply) : failures_(failures), reply_(std::move(reply)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_body_ = req.body;
      if (calls_++ < failures_) {
        res.status = 503;
        return;
      }
      const json body = {{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", reply_}}}}})}};
      res.set_content(body.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
  int calls() const { return calls_; }
  json last_body() const { return json::parse(last_body_); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  int failures_;
  std::string reply_;
  std::atomic<int> calls_{0};
  std::string last_body_;
};

TEST(HttpBackend, SendsTemplateAndReadsReply) {
  StubServer stub(0, "change color from red to blue");
  HttpChatBackend backend({stub.endpoint(), "stub-model", 5.0, 0});
  EXPECT_EQ(Reformulate("a red dress", "a blue dress", backend), "change color from red to blue");
  const json body = stub.last_body();
  EXPECT_EQ(body.at("model"), "stub-model");
  EXPECT_EQ(body.at("messages").at(0).at("content"), RenderReformulationPrompt("a red dress", "a blue dress"));
  EXPECT_EQ(backend.id(), "http:stub-model");
}

TEST(HttpBackend, CaptionRequestCarriesPngDataUrl) {
  StubServer stub(0, "a red dress");
  HttpChatBackend backend({stub.endpoint(), "m", 5.0, 0});
  ImageRecord r;
  r.id = "x";
  r.pixels = Image(4, 4, 3);
  EXPECT_EQ(Caption(r, backend).text, "a red dress");
  const json content = stub.last_body().at("messages").at(0).at("content");
  EXPECT_EQ(content.at(0).at("text"), std::string(kCaptionPrompt));
  EXPECT_EQ(content.at(1).at("image_url").at("url").get<std::string>().rfind("data:image/png;base64,", 0), 0u);
}

TEST(HttpBackend, RetriesTransientFailures) {
  StubServer stub(2, "ok");
  HttpChatBackend backend({stub.endpoint(), "m", 5.0, 2});
  EXPECT_EQ(backend.Describe("a", "b"), "ok");
  EXPECT_EQ(stub.calls(), 3);
}

TEST(HttpBackend, GivesUpAfterRetries) {
  StubServer stub(10, "ok");
  HttpChatBackend backend({stub.endpoint(), "m", 5.0, 1});
  try {
    backend.Describe("a", "b");
    FAIL() << "expected BackendUnavailable";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendUnavailable);
  }
  EXPECT_EQ(stub.calls(), 2);
}

TEST(HttpBackend, UnreachableEndpoint) {
  HttpChatBackend backend({"http://127.0.0.1:1/v1/chat/completions", "m", 1.0, 0});
  try {
    backend.Describe("a", "b");
    FAIL() << "expected BackendUnavailable";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendUnavailable);
  }
}

TEST(HttpBackend, RejectsRelativeEndpoint) {
  EXPECT_THROW(HttpChatBackend({"localhost:8000", "m", 1.0, 0}), Error);
}

}  // namespace
}  // namespace zscir
