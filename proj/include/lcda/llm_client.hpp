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
#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lcda {

enum class Role { kSystem, kUser, kAssistant };

const char* role_name(Role role);

struct ChatMessage {
  Role role = Role::kUser;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct LlmRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 1024;

  /// Throws std::invalid_argument unless the first message is the system
  /// message and the last one is the single trailing user message.
  void check() const;
};

/// Chat-completions request body: {"model", "messages", "temperature", "max_tokens"}.
std::string request_body(const LlmRequest& request);

/// Hex SHA-256 over the call index and the request body.
std::string request_digest(const LlmRequest& request, uint64_t call_index);

struct TranscriptEntry {
  std::string request_digest;
  std::string response_text;
  std::string timestamp;  // ISO-8601 UTC

  bool operator==(const TranscriptEntry&) const = default;
};

struct Transcript {
  std::vector<TranscriptEntry> entries;

  bool operator==(const Transcript&) const = default;
};

inline constexpr int kTranscriptVersion = 1;

class LlmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RetriesExhausted : public LlmError {
 public:
  using LlmError::LlmError;
};

class AuthenticationError : public LlmError {
 public:
  using LlmError::LlmError;
};

class MalformedReply : public LlmError {
 public:
  using LlmError::LlmError;
};

class TranscriptFormatError : public LlmError {
 public:
  using LlmError::LlmError;
};

class ReplayDivergence : public LlmError {
 public:
  ReplayDivergence(uint64_t call_index, std::optional<int> episode, const std::string& what)
      : LlmError(what), call_index_(call_index), episode_(episode) {}

  uint64_t call_index() const { return call_index_; }
  std::optional<int> episode() const { return episode_; }

 private:
  uint64_t call_index_;
  std::optional<int> episode_;
};

// Transcript files: a header line {"format":"lcda-transcript","version":1}
// followed by one {"digest","response","timestamp"} object per line.
void save_transcript(const std::string& path, const Transcript& transcript);
Transcript load_transcript(const std::string& path);

/// Appends entries to a transcript file as they happen.
class TranscriptWriter {
 public:
  explicit TranscriptWriter(const std::string& path);
  void append(const TranscriptEntry& entry);

 private:
  std::ofstream out_;
};

/// Base for every completion backend. complete() records each call in the
/// in-memory transcript and, when a sink is attached, in the transcript file.
class LlmClient {
 public:
  virtual ~LlmClient() = default;

  std::string complete(const LlmRequest& request);

  const Transcript& transcript() const { return transcript_; }
  uint64_t calls() const { return calls_; }
  void attach_sink(const std::string& path);

 protected:
  virtual std::string do_complete(const LlmRequest& request, const std::string& digest,
                                  uint64_t call_index) = 0;

 private:
  Transcript transcript_;
  std::unique_ptr<TranscriptWriter> sink_;
  uint64_t calls_ = 0;
};

struct HttpReply {
  int status = 0;  // 0 when the transport failed before a status arrived
  std::string body;
};

struct EndpointConfig {
  std::string url = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "OPENAI_API_KEY";
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::seconds timeout{120};

  bool operator==(const EndpointConfig&) const = default;
};

/// Live chat-completions client. Transport failures, 429 and 5xx are retried
/// with exponential backoff; 401/403 fail immediately.
class HttpLlmClient : public LlmClient {
 public:
  using PostFn = std::function<HttpReply(const std::string& body,
                                         const std::optional<std::string>& api_key)>;
  using SleepFn = std::function<void(std::chrono::milliseconds)>;

  explicit HttpLlmClient(EndpointConfig config);
  /// Test seam: replaces the network transport and the backoff sleep.
  HttpLlmClient(EndpointConfig config, PostFn post, SleepFn sleep);

 protected:
  std::string do_complete(const LlmRequest& request, const std::string& digest,
                          uint64_t call_index) override;

 private:
  EndpointConfig config_;
  PostFn post_;
  SleepFn sleep_;
};

/// Serves recorded responses in order; any digest mismatch is a divergence.
class ReplayLlmClient : public LlmClient {
 public:
  explicit ReplayLlmClient(Transcript recorded);

  size_t remaining() const { return recorded_.entries.size() - cursor_; }

 protected:
  std::string do_complete(const LlmRequest& request, const std::string& digest,
                          uint64_t call_index) override;

 private:
  Transcript recorded_;
  size_t cursor_ = 0;
};

/// In-process model: a callable maps each request to its reply. Used for
/// offline dry runs and tests.
class FunctionLlmClient : public LlmClient {
 public:
  using Fn = std::function<std::string(const LlmRequest&)>;
  explicit FunctionLlmClient(Fn fn) : fn_(std::move(fn)) {}

 protected:
  std::string do_complete(const LlmRequest& request, const std::string&, uint64_t) override {
    return fn_(request);
  }

 private:
  Fn fn_;
};

/// Extracts choices[0].message.content from a chat-completions reply.
std::string parse_completion_reply(const std::string& body);

}  // namespace lcda
