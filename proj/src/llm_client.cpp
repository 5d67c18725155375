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
#include "lcda/llm_client.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <ctime>
#include <httplib.h>
#include <json.hpp>
#include <thread>

namespace lcda {

using nlohmann::json;

const char* role_name(Role role) {
  switch (role) {
    case Role::kSystem:
      return "system";
    case Role::kUser:
      return "user";
    case Role::kAssistant:
      return "assistant";
  }
  return "user";
}

void LlmRequest::check() const {
  if (messages.empty() || messages.front().role != Role::kSystem) {
    throw std::invalid_argument("llm request: first message must have the system role");
  }
  if (messages.back().role != Role::kUser) {
    throw std::invalid_argument("llm request: last message must be the user prompt");
  }
  int users = 0;
  for (const auto& m : messages) users += m.role == Role::kUser;
  if (users != 1) {
    throw std::invalid_argument("llm request: expected exactly one user message");
  }
  if (!(temperature >= 0.0) || max_tokens < 1) {
    throw std::invalid_argument("llm request: temperature must be >= 0 and max_tokens >= 1");
  }
}

namespace {

json request_json(const LlmRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
  }
  return {{"model", request.model_id},
          {"messages", std::move(messages)},
          {"temperature", request.temperature},
          {"max_tokens", request.max_tokens}};
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw LlmError("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json header_json() { return {{"format", "lcda-transcript"}, {"version", kTranscriptVersion}}; }

json entry_json(const TranscriptEntry& e) {
  return {{"digest", e.request_digest}, {"response", e.response_text}, {"timestamp", e.timestamp}};
}

}  // namespace

std::string request_body(const LlmRequest& request) { return request_json(request).dump(); }

std::string request_digest(const LlmRequest& request, uint64_t call_index) {
  return sha256_hex(std::to_string(call_index) + "\n" + request_body(request));
}

void save_transcript(const std::string& path, const Transcript& transcript) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw TranscriptFormatError("cannot write transcript " + path);
  out << header_json().dump() << "\n";
  for (const auto& e : transcript.entries) out << entry_json(e).dump() << "\n";
  if (!out) throw TranscriptFormatError("failed writing transcript " + path);
}

Transcript load_transcript(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TranscriptFormatError("cannot read transcript " + path);
  Transcript t;
  std::string line;
  size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw TranscriptFormatError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!header_seen) {
      if (!j.is_object() || j.value("format", "") != "lcda-transcript") {
        throw TranscriptFormatError(path + ": missing transcript header line");
      }
      if (!j.contains("version") || j["version"] != kTranscriptVersion) {
        throw TranscriptFormatError(path + ": unsupported transcript version " +
                                    (j.contains("version") ? j["version"].dump() : "?"));
      }
      header_seen = true;
      continue;
    }
    try {
      TranscriptEntry e;
      e.request_digest = j.at("digest").get<std::string>();
      e.response_text = j.at("response").get<std::string>();
      e.timestamp = j.at("timestamp").get<std::string>();
      t.entries.push_back(std::move(e));
    } catch (const json::exception& e) {
      throw TranscriptFormatError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return t;
}

TranscriptWriter::TranscriptWriter(const std::string& path) : out_(path, std::ios::trunc) {
  if (!out_) throw TranscriptFormatError("cannot write transcript " + path);
  out_ << header_json().dump() << "\n" << std::flush;
}

void TranscriptWriter::append(const TranscriptEntry& entry) {
  out_ << entry_json(entry).dump() << "\n" << std::flush;
}

std::string LlmClient::complete(const LlmRequest& request) {
  request.check();
  const uint64_t index = calls_;
  const std::string digest = request_digest(request, index);
  std::string text = do_complete(request, digest, index);
  ++calls_;
  TranscriptEntry entry{digest, text, utc_now()};
  if (sink_) sink_->append(entry);
  transcript_.entries.push_back(std::move(entry));
  return text;
}

void LlmClient::attach_sink(const std::string& path) {
  sink_ = std::make_unique<TranscriptWriter>(path);
  for (const auto& e : transcript_.entries) sink_->append(e);
}

std::string parse_completion_reply(const std::string& body) {
  try {
    const json j = json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw MalformedReply(std::string("malformed chat-completions reply: ") + e.what());
  }
}

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("endpoint url needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

HttpLlmClient::PostFn make_http_post(const EndpointConfig& config) {
  const SplitUrl target = split_url(config.url);
  const auto timeout = config.timeout;
  return [target, timeout](const std::string& body, const std::optional<std::string>& key) {
    httplib::Client client(target.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (key) headers.emplace("Authorization", "Bearer " + *key);
    auto res = client.Post(target.path, headers, body, "application/json");
    if (!res) return HttpReply{0, httplib::to_string(res.error())};
    return HttpReply{res->status, res->body};
  };
}

}  // namespace

HttpLlmClient::HttpLlmClient(EndpointConfig config)
    : HttpLlmClient(config, make_http_post(config),
                    [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

HttpLlmClient::HttpLlmClient(EndpointConfig config, PostFn post, SleepFn sleep)
    : config_(std::move(config)), post_(std::move(post)), sleep_(std::move(sleep)) {}

std::string HttpLlmClient::do_complete(const LlmRequest& request, const std::string&,
                                       uint64_t) {
  std::optional<std::string> key;
  if (!config_.api_key_env.empty()) {
    if (const char* v = std::getenv(config_.api_key_env.c_str()); v && *v) key = v;
  }
  const std::string body = request_body(request);
  auto delay = config_.initial_backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      sleep_(delay);
      delay *= 2;
    }
    const HttpReply reply = post_(body, key);
    if (reply.status == 401 || reply.status == 403) {
      throw AuthenticationError("endpoint rejected credentials (HTTP " +
                                std::to_string(reply.status) + ")");
    }
    if (reply.status == 200) return parse_completion_reply(reply.body);
    const bool retryable = reply.status == 0 || reply.status == 429 || reply.status >= 500;
    last_error = reply.status == 0 ? "transport error: " + reply.body
                                   : "HTTP " + std::to_string(reply.status);
    if (!retryable) throw LlmError("completion failed: " + last_error + ": " + reply.body);
  }
  throw RetriesExhausted("completion failed after " + std::to_string(config_.max_retries + 1) +
                         " attempts: " + last_error);
}

ReplayLlmClient::ReplayLlmClient(Transcript recorded) : recorded_(std::move(recorded)) {}

std::string ReplayLlmClient::do_complete(const LlmRequest&, const std::string& digest,
                                         uint64_t call_index) {
  if (cursor_ >= recorded_.entries.size()) {
    throw ReplayDivergence(call_index, std::nullopt,
                           "replay transcript exhausted at call " + std::to_string(call_index));
  }
  const auto& entry = recorded_.entries[cursor_];
  if (entry.request_digest != digest) {
    throw ReplayDivergence(call_index, std::nullopt,
                           "replay diverged at call " + std::to_string(call_index) +
                               ": request digest " + digest.substr(0, 12) +
                               " does not match recorded " + entry.request_digest.substr(0, 12));
  }
  ++cursor_;
  return entry.response_text;
}

}  // namespace lcda
