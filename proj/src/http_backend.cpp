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

#include "finteam/http_backend.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "finteam/error.hpp"

namespace finteam {

using nlohmann::json;

namespace {

// Splits "http://host:1234/v1" into host part and path prefix.
void split_base_url(const std::string& base_url, std::string& host, std::string& prefix) {
  size_t scheme = base_url.find("://");
  size_t path_start = scheme == std::string::npos ? base_url.find('/')
                                                  : base_url.find('/', scheme + 3);
  if (path_start == std::string::npos) {
    host = base_url;
    prefix = "";
  } else {
    host = base_url.substr(0, path_start);
    prefix = base_url.substr(path_start);
  }
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
}

bool retryable_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

std::string truncate_at_stop(const std::string& text,
                             const std::vector<std::string>& stop_sequences) {
  size_t cut = std::string::npos;
  for (const auto& stop : stop_sequences) {
    if (stop.empty()) continue;
    size_t pos = text.find(stop);
    if (pos != std::string::npos && pos < cut) cut = pos;
  }
  return cut == std::string::npos ? text : text.substr(0, cut);
}

HttpBackend::HttpBackend(std::string base_url, std::string model, std::string api_key,
                         RetryPolicy retry)
    : model_(std::move(model)), api_key_(std::move(api_key)), retry_(retry) {
  split_base_url(base_url, host_, prefix_);
}

std::string HttpBackend::build_payload(const ChatRequest& request, bool stream) const {
  json messages = json::array();
  for (const auto& msg : request.messages) {
    messages.push_back({{"role", role_name(msg.role)}, {"content", msg.content}});
  }
  json payload = {
      {"model", model_},
      {"messages", messages},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
      {"stream", stream},
  };
  if (!request.stop_sequences.empty()) payload["stop"] = request.stop_sequences;
  return payload.dump();
}

HttpBackend::WireResult HttpBackend::post_once(const std::string& payload,
                                               const DeltaCallback* on_sse_delta,
                                               std::string* streamed_text,
                                               const ChatRequest& request) {
  httplib::Client client(host_);
  client.set_connection_timeout(10);
  client.set_read_timeout(120);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  ++requests_issued_;
  WireResult out;

  if (!on_sse_delta) {
    auto res = client.Post(prefix_ + "/chat/completions", headers, payload, "application/json");
    if (!res) {
      out.transport_error = true;
      out.error_detail = httplib::to_string(res.error());
      return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
  }

  // SSE stream: parse "data: {...}" events as they arrive. A stop sequence
  // may straddle event boundaries, so delivery holds back the last
  // max(stop)-1 bytes until the stream proves they are not a stop prefix.
  size_t max_stop = 0;
  for (const auto& s : request.stop_sequences) max_stop = std::max(max_stop, s.size());
  const size_t holdback = max_stop > 0 ? max_stop - 1 : 0;

  std::string pending;
  std::string buffer;  // full text received; *streamed_text is what was delivered
  bool done = false;

  auto deliver_up_to = [&](size_t upto) {
    if (upto <= streamed_text->size()) return true;
    std::string delta = buffer.substr(streamed_text->size(), upto - streamed_text->size());
    *streamed_text += delta;
    return (*on_sse_delta)(delta);
  };

  httplib::Request sse_req;
  sse_req.method = "POST";
  sse_req.path = prefix_ + "/chat/completions";
  sse_req.headers = headers;
  sse_req.body = payload;
  sse_req.set_header("Content-Type", "application/json");
  sse_req.content_receiver =
      [&](const char* data, size_t len, uint64_t, uint64_t) {
        pending.append(data, len);
        size_t nl;
        while ((nl = pending.find('\n')) != std::string::npos) {
          std::string line = pending.substr(0, nl);
          pending.erase(0, nl + 1);
          while (!line.empty() && (line.back() == '\r')) line.pop_back();
          if (line.rfind("data:", 0) != 0) continue;
          std::string body = line.substr(5);
          size_t b = body.find_first_not_of(' ');
          body = b == std::string::npos ? "" : body.substr(b);
          if (body == "[DONE]") {
            std::string final_text = truncate_at_stop(buffer, request.stop_sequences);
            deliver_up_to(final_text.size());
            done = true;
            return false;
          }
          json event = json::parse(body, nullptr, false);
          if (event.is_discarded()) continue;
          std::string delta;
          if (event.contains("choices") && !event["choices"].empty()) {
            const auto& choice = event["choices"][0];
            if (choice.contains("delta") && choice["delta"].contains("content") &&
                choice["delta"]["content"].is_string()) {
              delta = choice["delta"]["content"].get<std::string>();
            }
          }
          if (delta.empty()) continue;

          buffer += delta;
          std::string truncated = truncate_at_stop(buffer, request.stop_sequences);
          if (truncated.size() < buffer.size()) {
            deliver_up_to(truncated.size());
            done = true;
            return false;
          }
          size_t safe = buffer.size() > holdback ? buffer.size() - holdback : 0;
          if (!deliver_up_to(safe)) {
            done = true;
            return false;
          }
        }
        return true;
      };
  auto res = client.send(sse_req);

  if (done) {
    out.canceled = true;
    return out;
  }
  if (!res) {
    if (res.error() == httplib::Error::Canceled) {
      out.canceled = true;
      return out;
    }
    out.transport_error = true;
    out.error_detail = httplib::to_string(res.error());
    return out;
  }
  // stream closed without a [DONE] marker: flush what is safe to deliver
  if (res->status >= 200 && res->status < 300) {
    deliver_up_to(truncate_at_stop(buffer, request.stop_sequences).size());
  }
  out.status = res->status;
  out.body = res->body;
  return out;
}

std::string HttpBackend::run_with_retries(const ChatRequest& request,
                                          const DeltaCallback* on_delta) {
  request.validate();
  std::string payload = build_payload(request, on_delta != nullptr);
  std::string last_error;

  for (int attempt = 0; attempt <= retry_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(retry_.backoff_base_ms * (1 << (attempt - 1))));
    }
    std::string streamed;
    WireResult wire = post_once(payload, on_delta, &streamed, request);

    if (wire.canceled) {
      return streamed;  // early stop or stop-sequence cut mid-stream
    }
    if (wire.transport_error) {
      last_error = "transport: " + wire.error_detail;
      continue;
    }
    if (retryable_status(wire.status)) {
      last_error = "status " + std::to_string(wire.status);
      continue;
    }
    if (wire.status < 200 || wire.status >= 300) {
      throw Error("wire-format", "backend returned status " + std::to_string(wire.status) +
                                     ": " + wire.body.substr(0, 200));
    }
    if (on_delta) {
      return streamed;  // server closed the stream normally
    }
    json body = json::parse(wire.body, nullptr, false);
    if (body.is_discarded() || !body.contains("choices") || body["choices"].empty() ||
        !body["choices"][0].contains("message") ||
        !body["choices"][0]["message"].contains("content")) {
      throw Error("wire-format", "malformed chat completion response");
    }
    std::string text = body["choices"][0]["message"]["content"].get<std::string>();
    return truncate_at_stop(text, request.stop_sequences);
  }
  throw Error("transport", "request failed after " + std::to_string(retry_.retries + 1) +
                               " attempts (" + last_error + ")");
}

std::string HttpBackend::complete(const ChatRequest& request) {
  return run_with_retries(request, nullptr);
}

std::string HttpBackend::complete_streaming(const ChatRequest& request,
                                            const DeltaCallback& on_delta) {
  return run_with_retries(request, &on_delta);
}

}  // namespace finteam
