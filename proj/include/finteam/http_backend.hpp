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

#include <string>

#include "finteam/chat.hpp"

namespace finteam {

struct RetryPolicy {
  int retries = 2;        // retries after the first attempt: 3 attempts total
  int backoff_base_ms = 250;
};

// Chat-completion client for any server speaking the de-facto standard wire
// protocol: POST {base_url}/chat/completions with
// {model, messages, temperature, max_tokens, stop, stream}; the reply text
// lives at choices[0].message.content (or choices[0].delta.content per SSE
// event when streaming).
class HttpBackend : public Backend {
 public:
  HttpBackend(std::string base_url, std::string model, std::string api_key = "",
              RetryPolicy retry = {});

  std::string complete(const ChatRequest& request) override;
  std::string complete_streaming(const ChatRequest& request, const DeltaCallback& on_delta) override;
  std::string model_name() const override { return model_; }

  // Requests issued so far (including retries); exposed for retry-bound tests.
  int requests_issued() const { return requests_issued_; }

 private:
  struct WireResult {
    int status = 0;
    std::string body;
    bool transport_error = false;
    std::string error_detail;
    bool canceled = false;
  };

  WireResult post_once(const std::string& payload, const DeltaCallback* on_sse_delta,
                       std::string* streamed_text, const ChatRequest& request);
  std::string run_with_retries(const ChatRequest& request, const DeltaCallback* on_delta);
  std::string build_payload(const ChatRequest& request, bool stream) const;

  std::string host_;    // scheme://host:port
  std::string prefix_;  // path prefix, e.g. "/v1"
  std::string model_;
  std::string api_key_;
  RetryPolicy retry_;
  int requests_issued_ = 0;
};

// Applies client-side stop-sequence truncation: cuts at the earliest
// occurrence of any stop sequence.
std::string truncate_at_stop(const std::string& text,
                             const std::vector<std::string>& stop_sequences);

}  // namespace finteam
