// Copyright 2026 The FinTeam Authors.
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

#pragma once

#include <functional>
#include <mutex>
#include <string>
#include <vector>

namespace finteam {

enum class Role { System, User, Assistant };

const char* role_name(Role role);

struct ChatMessage {
  Role role = Role::User;
  std::string content;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.1;
  int max_tokens = 2048;
  std::vector<std::string> stop_sequences;  // at most 4

  // Throws Error("invalid-request") when an invariant is broken: empty
  // message list, first message not system/user, empty system/user content,
  // temperature outside [0,2], non-positive max_tokens, >4 stop sequences.
  void validate() const;

  ChatRequest with_appended(ChatMessage msg) const;
  const std::string* last_user_content() const;
};

// Streaming callback. Receives the next delta (concatenation of all deltas
// equals the final text). Return false to stop the stream; no further deltas
// arrive after that.
using DeltaCallback = std::function<bool(const std::string& delta)>;

class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string complete(const ChatRequest& request) = 0;

  // Default implementation adapts complete() by emitting one delta.
  virtual std::string complete_streaming(const ChatRequest& request, const DeltaCallback& on_delta);

  virtual std::string model_name() const = 0;
};

// Deterministic backend for tests and golden traces. Each script entry pairs
// a substring matcher (over the last user message; empty matches anything)
// with a canned reply. Strict mode consumes entries in order and fails loudly
// on exhaustion or mismatch; non-strict mode serves the first unconsumed
// matching entry and falls back to an empty reply.
class ScriptedBackend : public Backend {
 public:
  struct Entry {
    std::string matcher;
    std::string reply;
  };

  ScriptedBackend(std::vector<Entry> script, bool strict = true, int chunk_codepoints = 3);
  ScriptedBackend(std::initializer_list<Entry> script, bool strict = true,
                  int chunk_codepoints = 3)
      : ScriptedBackend(std::vector<Entry>(script), strict, chunk_codepoints) {}

  std::string complete(const ChatRequest& request) override;
  std::string complete_streaming(const ChatRequest& request, const DeltaCallback& on_delta) override;
  std::string model_name() const override { return "scripted"; }

  size_t consumed() const;
  bool exhausted() const;
  std::vector<ChatRequest> captured_requests() const;

 private:
  std::string next_reply(const ChatRequest& request);

  std::vector<Entry> script_;
  std::vector<bool> used_;
  bool strict_;
  int chunk_codepoints_;
  size_t cursor_ = 0;
  mutable std::mutex mutex_;
  std::vector<ChatRequest> captured_;
};

// Replays a recorded reply sequence verbatim, ignoring request content.
// Used to re-execute persisted workflow traces.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(std::vector<std::string> replies, int chunk_codepoints = 3);

  std::string complete(const ChatRequest& request) override;
  std::string complete_streaming(const ChatRequest& request, const DeltaCallback& on_delta) override;
  std::string model_name() const override { return "replay"; }

 private:
  std::string next();

  std::vector<std::string> replies_;
  size_t cursor_ = 0;
  int chunk_codepoints_;
  std::mutex mutex_;
};

// Pass-through wrapper that records every reply the inner backend produced,
// in request order. Workflow traces embed this log so runs can be replayed.
class RecordingBackend : public Backend {
 public:
  explicit RecordingBackend(Backend& inner) : inner_(inner) {}

  std::string complete(const ChatRequest& request) override;
  std::string complete_streaming(const ChatRequest& request, const DeltaCallback& on_delta) override;
  std::string model_name() const override { return inner_.model_name(); }

  const std::vector<std::string>& replies() const { return replies_; }

 private:
  Backend& inner_;
  std::vector<std::string> replies_;
  std::mutex mutex_;
};

// Streams a fixed text in codepoint-aligned chunks, honoring early stop.
// Shared by the deterministic backends.
std::string stream_in_chunks(const std::string& text, int chunk_codepoints,
                             const DeltaCallback& on_delta);

}  // namespace finteam
