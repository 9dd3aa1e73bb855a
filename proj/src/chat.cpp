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

#include "finteam/chat.hpp"

#include "finteam/error.hpp"
#include "finteam/text_util.hpp"

namespace finteam {

const char* role_name(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

void ChatRequest::validate() const {
  if (messages.empty()) {
    throw Error("invalid-request", "request has no messages");
  }
  if (messages.front().role == Role::Assistant) {
    throw Error("invalid-request", "first message must be system or user");
  }
  for (const auto& msg : messages) {
    if (msg.role != Role::Assistant && msg.content.empty()) {
      throw Error("invalid-request", "system/user message content must be non-empty");
    }
  }
  if (temperature < 0.0 || temperature > 2.0) {
    throw Error("invalid-request", "temperature outside [0,2]");
  }
  if (max_tokens <= 0) {
    throw Error("invalid-request", "max_tokens must be positive");
  }
  if (stop_sequences.size() > 4) {
    throw Error("invalid-request", "at most 4 stop sequences");
  }
}

ChatRequest ChatRequest::with_appended(ChatMessage msg) const {
  ChatRequest copy = *this;
  copy.messages.push_back(std::move(msg));
  return copy;
}

const std::string* ChatRequest::last_user_content() const {
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == Role::User) return &it->content;
  }
  return nullptr;
}

std::string stream_in_chunks(const std::string& text, int chunk_codepoints,
                             const DeltaCallback& on_delta) {
  if (chunk_codepoints < 1) chunk_codepoints = 1;
  std::string received;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t start = pos;
    for (int i = 0; i < chunk_codepoints && pos < text.size(); ++i) {
      utf8_next(text, pos);
    }
    std::string delta = text.substr(start, pos - start);
    received += delta;
    if (!on_delta(delta)) break;
  }
  return received;
}

std::string Backend::complete_streaming(const ChatRequest& request, const DeltaCallback& on_delta) {
  std::string text = complete(request);
  return stream_in_chunks(text, static_cast<int>(text.size()) + 1, on_delta);
}

ScriptedBackend::ScriptedBackend(std::vector<Entry> script, bool strict, int chunk_codepoints)
    : script_(std::move(script)),
      used_(script_.size(), false),
      strict_(strict),
      chunk_codepoints_(chunk_codepoints) {}

std::string ScriptedBackend::next_reply(const ChatRequest& request) {
  request.validate();
  const std::string* last_user = request.last_user_content();
  std::string probe = last_user ? *last_user : "";

  std::lock_guard<std::mutex> lock(mutex_);
  captured_.push_back(request);
  if (strict_) {
    if (cursor_ >= script_.size()) {
      throw Error("script-exhausted", "scripted backend has no entries left");
    }
    const Entry& entry = script_[cursor_];
    if (!entry.matcher.empty() && probe.find(entry.matcher) == std::string::npos) {
      throw Error("script-mismatch", "entry " + std::to_string(cursor_) + " expects \"" +
                                         entry.matcher + "\" in the last user message");
    }
    ++cursor_;
    return entry.reply;
  }
  for (size_t i = 0; i < script_.size(); ++i) {
    if (used_[i]) continue;
    if (script_[i].matcher.empty() || probe.find(script_[i].matcher) != std::string::npos) {
      used_[i] = true;
      return script_[i].reply;
    }
  }
  return "";
}

std::string ScriptedBackend::complete(const ChatRequest& request) {
  return next_reply(request);
}

std::string ScriptedBackend::complete_streaming(const ChatRequest& request,
                                                const DeltaCallback& on_delta) {
  return stream_in_chunks(next_reply(request), chunk_codepoints_, on_delta);
}

size_t ScriptedBackend::consumed() const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (strict_) return cursor_;
  size_t n = 0;
  for (bool u : used_) n += u ? 1 : 0;
  return n;
}

bool ScriptedBackend::exhausted() const { return consumed() == script_.size(); }

std::vector<ChatRequest> ScriptedBackend::captured_requests() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return captured_;
}

ReplayBackend::ReplayBackend(std::vector<std::string> replies, int chunk_codepoints)
    : replies_(std::move(replies)), chunk_codepoints_(chunk_codepoints) {}

std::string ReplayBackend::next() {
  std::lock_guard<std::mutex> lock(mutex_);
  if (cursor_ >= replies_.size()) {
    throw Error("script-exhausted", "replay backend has no recorded replies left");
  }
  return replies_[cursor_++];
}

std::string ReplayBackend::complete(const ChatRequest& request) {
  request.validate();
  return next();
}

std::string ReplayBackend::complete_streaming(const ChatRequest& request,
                                              const DeltaCallback& on_delta) {
  request.validate();
  return stream_in_chunks(next(), chunk_codepoints_, on_delta);
}

std::string RecordingBackend::complete(const ChatRequest& request) {
  std::string reply = inner_.complete(request);
  std::lock_guard<std::mutex> lock(mutex_);
  replies_.push_back(reply);
  return reply;
}

std::string RecordingBackend::complete_streaming(const ChatRequest& request,
                                                 const DeltaCallback& on_delta) {
  std::string reply = inner_.complete_streaming(request, on_delta);
  std::lock_guard<std::mutex> lock(mutex_);
  replies_.push_back(reply);
  return reply;
}

}  // namespace finteam
