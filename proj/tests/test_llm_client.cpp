/*
 * Copyright 2026 The lcda-cim Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <httplib.h>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "lcda/llm_client.hpp"

namespace lcda {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

LlmRequest request(const std::string& user) {
  LlmRequest r;
  r.model_id = "gpt-4";
  r.messages = {{Role::kSystem, "sys"}, {Role::kUser, user}};
  r.max_tokens = 64;
  return r;
}

std::string reply_json(const std::string& content) {
  return json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

std::string temp_path(const std::string& name) {
  return (fs::temp_directory_path() / ("lcda_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Request, BodyFields) {
  const auto body = json::parse(request_body(request("hi")));
  EXPECT_EQ(body["model"], "gpt-4");
  EXPECT_EQ(body["max_tokens"], 64);
  EXPECT_EQ(body["temperature"], 0.0);
  ASSERT_EQ(body["messages"].size(), 2u);
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["content"], "hi");
}

TEST(Request, CheckRejectsBadShapes) {
  LlmRequest r = request("x");
  EXPECT_NO_THROW(r.check());
  r.messages = {{Role::kUser, "x"}};
  EXPECT_THROW(r.check(), std::invalid_argument);
  r.messages = {{Role::kSystem, "s"}, {Role::kUser, "x"}, {Role::kUser, "y"}};
  EXPECT_THROW(r.check(), std::invalid_argument);
}

TEST(Digest, StableAndSensitive) {
  const auto a = request_digest(request("hi"), 0);
  EXPECT_EQ(a.size(), 64u);
  EXPECT_EQ(a.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_EQ(a, request_digest(request("hi"), 0));
  EXPECT_NE(a, request_digest(request("hi"), 1));
  EXPECT_NE(a, request_digest(request("ho"), 0));
}

TEST(Digest, MatchesSha256OfIndexAndBody) {
  // Reference digest of "0\n" + body, computed with coreutils sha256sum.
  LlmRequest r;
  r.model_id = "m";
  r.messages = {{Role::kSystem, "s"}, {Role::kUser, "u"}};
  r.max_tokens = 16;
  ASSERT_EQ(request_body(r),
            R"({"max_tokens":16,"messages":[{"content":"s","role":"system"},)"
            R"({"content":"u","role":"user"}],"model":"m","temperature":0.0})");
  EXPECT_EQ(request_digest(r, 0),
            "adc0695ff9541b6219a6e4be0729802a4cca2f7f4178a0449bfa385e525abf42");
}

TEST(Reply, ParsesContentAndRejectsJunk) {
  EXPECT_EQ(parse_completion_reply(reply_json("[[1,1]]")), "[[1,1]]");
  EXPECT_THROW(parse_completion_reply("not json"), MalformedReply);
  EXPECT_THROW(parse_completion_reply(R"({"choices":[]})"), MalformedReply);
  EXPECT_THROW(parse_completion_reply(R"({"choices":[{"message":{"content":3}}]})"),
               MalformedReply);
}

TEST(Transcript, RoundTrip) {
  Transcript t;
  t.entries.push_back({"ab", "line one\nline \"two\"", "2026-01-01T00:00:00Z"});
  t.entries.push_back({"cd", "", "2026-01-01T00:00:01Z"});
  const auto path = temp_path("roundtrip.jsonl");
  save_transcript(path, t);
  EXPECT_EQ(load_transcript(path), t);
  const auto text = slurp(path);
  EXPECT_EQ(text.substr(0, text.find('\n')), R"({"format":"lcda-transcript","version":1})");
}

TEST(Transcript, FormatErrors) {
  const auto path = temp_path("bad.jsonl");
  {
    std::ofstream(path) << R"({"format":"lcda-transcript","version":2})" << "\n";
  }
  EXPECT_THROW(load_transcript(path), TranscriptFormatError);
  {
    std::ofstream(path) << R"({"format":"other","version":1})" << "\n";
  }
  EXPECT_THROW(load_transcript(path), TranscriptFormatError);
  {
    std::ofstream(path) << R"({"format":"lcda-transcript","version":1})" << "\n{broken\n";
  }
  EXPECT_THROW(load_transcript(path), TranscriptFormatError);
  {
    std::ofstream(path) << "";
  }
  EXPECT_TRUE(load_transcript(path).entries.empty());
  EXPECT_THROW(load_transcript(temp_path("missing.jsonl")), TranscriptFormatError);
}

TEST(Client, RecordsEveryCallAndWritesSink) {
  int n = 0;
  FunctionLlmClient client([&](const LlmRequest&) { return "reply " + std::to_string(n++); });
  const auto path = temp_path("sink.jsonl");
  fs::remove(path);
  client.attach_sink(path);
  EXPECT_EQ(client.complete(request("a")), "reply 0");
  EXPECT_EQ(client.complete(request("a")), "reply 1");
  EXPECT_EQ(client.calls(), 2u);
  ASSERT_EQ(client.transcript().entries.size(), 2u);
  EXPECT_EQ(client.transcript().entries[0].request_digest, request_digest(request("a"), 0));
  EXPECT_EQ(client.transcript().entries[1].request_digest, request_digest(request("a"), 1));
  const auto loaded = load_transcript(path);
  EXPECT_EQ(loaded, client.transcript());
}

TEST(Replay, ServesRecordedResponses) {
  FunctionLlmClient live([](const LlmRequest& r) { return "echo " + r.messages[1].content; });
  live.complete(request("a"));
  live.complete(request("b"));
  ReplayLlmClient replay(live.transcript());
  EXPECT_EQ(replay.complete(request("a")), "echo a");
  EXPECT_EQ(replay.remaining(), 1u);
  EXPECT_EQ(replay.complete(request("b")), "echo b");
  EXPECT_THROW(replay.complete(request("c")), ReplayDivergence);
}

TEST(Replay, DivergesOnDifferentRequest) {
  FunctionLlmClient live([](const LlmRequest&) { return "x"; });
  live.complete(request("a"));
  ReplayLlmClient replay(live.transcript());
  try {
    replay.complete(request("changed"));
    FAIL();
  } catch (const ReplayDivergence& e) {
    EXPECT_EQ(e.call_index(), 0u);
    EXPECT_FALSE(e.episode().has_value());
  }
}

struct FakeTransport {
  std::vector<HttpReply> replies;
  std::vector<std::optional<std::string>> keys;
  std::vector<std::chrono::milliseconds> sleeps;
  size_t calls = 0;

  HttpLlmClient make(EndpointConfig cfg) {
    return HttpLlmClient(
        cfg,
        [this](const std::string&, const std::optional<std::string>& key) {
          keys.push_back(key);
          return replies.at(std::min(calls++, replies.size() - 1));
        },
        [this](std::chrono::milliseconds d) { sleeps.push_back(d); });
  }
};

EndpointConfig offline_endpoint() {
  EndpointConfig cfg;
  cfg.url = "http://127.0.0.1:1/v1/chat/completions";
  cfg.api_key_env = "LCDA_TEST_KEY";
  cfg.max_retries = 3;
  cfg.initial_backoff = std::chrono::milliseconds(10);
  return cfg;
}

TEST(Http, RetriesWithExponentialBackoff) {
  FakeTransport t;
  t.replies = {{0, "refused"}, {503, ""}, {429, ""}, {200, reply_json("ok")}};
  auto client = t.make(offline_endpoint());
  EXPECT_EQ(client.complete(request("a")), "ok");
  EXPECT_EQ(t.calls, 4u);
  EXPECT_EQ(t.sleeps, (std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(10),
                                                              std::chrono::milliseconds(20),
                                                              std::chrono::milliseconds(40)}));
}

TEST(Http, GivesUpAfterMaxRetries) {
  FakeTransport t;
  t.replies = {{500, ""}};
  auto client = t.make(offline_endpoint());
  EXPECT_THROW(client.complete(request("a")), RetriesExhausted);
  EXPECT_EQ(t.calls, 4u);
  EXPECT_TRUE(client.transcript().entries.empty());
}

TEST(Http, AuthenticationFailureIsImmediate) {
  for (int status : {401, 403}) {
    FakeTransport t;
    t.replies = {{status, ""}};
    auto client = t.make(offline_endpoint());
    EXPECT_THROW(client.complete(request("a")), AuthenticationError);
    EXPECT_EQ(t.calls, 1u);
  }
}

TEST(Http, ClientErrorIsNotRetried) {
  FakeTransport t;
  t.replies = {{400, "bad"}};
  auto client = t.make(offline_endpoint());
  EXPECT_THROW(client.complete(request("a")), LlmError);
  EXPECT_EQ(t.calls, 1u);
}

TEST(Http, CredentialComesFromEnvironment) {
  FakeTransport t;
  t.replies = {{200, reply_json("ok")}};
  auto cfg = offline_endpoint();
  ::unsetenv("LCDA_TEST_KEY");
  auto a = t.make(cfg);
  a.complete(request("a"));
  ::setenv("LCDA_TEST_KEY", "sk-secret-123", 1);
  auto b = t.make(cfg);
  b.complete(request("a"));
  ::unsetenv("LCDA_TEST_KEY");
  ASSERT_EQ(t.keys.size(), 2u);
  EXPECT_FALSE(t.keys[0].has_value());
  EXPECT_EQ(t.keys[1], "sk-secret-123");
}

TEST(Http, LocalServerEndToEnd) {
  httplib::Server server;
  std::string seen_auth, seen_body;
  int hits = 0;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    if (hits == 1) {
      res.status = 502;
      return;
    }
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    res.set_content(reply_json("[[16,3]]"), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  EndpointConfig cfg = offline_endpoint();
  cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.initial_backoff = std::chrono::milliseconds(1);
  ::setenv("LCDA_TEST_KEY", "sk-local-456", 1);
  HttpLlmClient client(cfg);
  const auto path = temp_path("http_transcript.jsonl");
  fs::remove(path);
  client.attach_sink(path);
  const auto text = client.complete(request("propose"));
  ::unsetenv("LCDA_TEST_KEY");
  server.stop();
  th.join();

  EXPECT_EQ(text, "[[16,3]]");
  EXPECT_EQ(hits, 2);
  EXPECT_EQ(seen_auth, "Bearer sk-local-456");
  EXPECT_EQ(seen_body, request_body(request("propose")));
  EXPECT_EQ(slurp(path).find("sk-local-456"), std::string::npos);
}

TEST(Http, UnreachableEndpointExhaustsRetries) {
  EndpointConfig cfg = offline_endpoint();
  cfg.max_retries = 1;
  cfg.initial_backoff = std::chrono::milliseconds(1);
  cfg.timeout = std::chrono::seconds(2);
  HttpLlmClient client(cfg);
  EXPECT_THROW(client.complete(request("a")), RetriesExhausted);
}

}  // namespace
}  // namespace lcda
