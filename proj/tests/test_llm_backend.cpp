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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "finteam/chat.hpp"
#include "finteam/error.hpp"
#include "finteam/http_backend.hpp"

using namespace finteam;
using nlohmann::json;

static ChatRequest simple_request(const std::string& user) {
  ChatRequest req;
  req.messages = {{Role::System, "test system"}, {Role::User, user}};
  return req;
}

TEST_CASE("request invariants") {
  ChatRequest req;
  CHECK_THROWS_AS(req.validate(), Error);
  req = simple_request("hi");
  CHECK_NOTHROW(req.validate());
  req.temperature = 3.0;
  CHECK_THROWS_AS(req.validate(), Error);
  req = simple_request("hi");
  req.messages.front() = {Role::Assistant, "x"};
  CHECK_THROWS_AS(req.validate(), Error);
  req = simple_request("hi");
  req.stop_sequences = {"a", "b", "c", "d", "e"};
  CHECK_THROWS_AS(req.validate(), Error);
  req = simple_request("hi");
  req.messages.push_back({Role::User, ""});
  CHECK_THROWS_AS(req.validate(), Error);
}

TEST_CASE("scripted backend direct lookup") {
  ScriptedBackend backend({{"hello", "world"}});
  CHECK(backend.complete(simple_request("say hello")) == "world");
  CHECK(backend.exhausted());
}

TEST_CASE("strict empty script raises exhaustion") {
  ScriptedBackend backend(std::vector<ScriptedBackend::Entry>{});
  try {
    backend.complete(simple_request("anything"));
    FAIL("expected script-exhausted");
  } catch (const Error& e) {
    CHECK(e.kind() == "script-exhausted");
  }
}

TEST_CASE("strict mismatch raises") {
  ScriptedBackend backend(std::vector<ScriptedBackend::Entry>{{"expected text", "reply"}});
  try {
    backend.complete(simple_request("something else"));
    FAIL("expected script-mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == "script-mismatch");
  }
}

TEST_CASE("non-strict backend matches out of order and falls back to empty") {
  ScriptedBackend backend({{"alpha", "A"}, {"beta", "B"}}, /*strict=*/false);
  CHECK(backend.complete(simple_request("ask beta")) == "B");
  CHECK(backend.complete(simple_request("ask alpha")) == "A");
  CHECK(backend.complete(simple_request("ask gamma")) == "");
}

TEST_CASE("streaming deltas concatenate to the full reply") {
  ScriptedBackend backend({{"", "abc"}}, true, /*chunk_codepoints=*/1);
  std::vector<std::string> deltas;
  std::string final_text = backend.complete_streaming(simple_request("go"), [&](const std::string& d) {
    deltas.push_back(d);
    return true;
  });
  CHECK(final_text == "abc");
  CHECK(deltas == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("streaming early stop returns prefix received so far") {
  ScriptedBackend backend({{"", "a[bc"}}, true, 1);
  std::string seen;
  std::string final_text = backend.complete_streaming(simple_request("go"), [&](const std::string& d) {
    seen += d;
    return seen != "a[";
  });
  CHECK(final_text == "a[");
}

TEST_CASE("streaming chunks are UTF-8 boundary aligned") {
  ScriptedBackend backend({{"", "增长率ab"}}, true, 2);
  std::vector<std::string> deltas;
  std::string final_text = backend.complete_streaming(simple_request("go"), [&](const std::string& d) {
    deltas.push_back(d);
    return true;
  });
  CHECK(final_text == "增长率ab");
  REQUIRE(deltas.size() == 3);
  CHECK(deltas[0] == "增长");
  CHECK(deltas[1] == "率a");
  CHECK(deltas[2] == "b");
}

TEST_CASE("concatenation property over random scripted replies") {
  const std::string pool[] = {"abc", "利率上升", "mixed 图 text",
                              "", "1234567890"};
  for (const auto& reply : pool) {
    for (int chunk = 1; chunk <= 4; ++chunk) {
      ScriptedBackend backend({{"", reply}}, true, chunk);
      std::string joined;
      std::string final_text =
          backend.complete_streaming(simple_request("go"), [&](const std::string& d) {
            joined += d;
            return true;
          });
      ScriptedBackend plain({{"", reply}});
      CHECK(joined == final_text);
      CHECK(final_text == plain.complete(simple_request("go")));
    }
  }
}

TEST_CASE("scripted backend is referentially transparent") {
  auto run = [] {
    ScriptedBackend backend({{"q1", "r1"}, {"q2", "r2"}});
    std::string out = backend.complete(simple_request("q1"));
    out += "|" + backend.complete(simple_request("q2"));
    return out;
  };
  CHECK(run() == run());
}

namespace {

// In-process OpenAI-style stub. Counts requests; configurable failure runs.
class StubServer {
 public:
  StubServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      if (fail_first_ > 0 && hits_ <= fail_first_) {
        res.status = 500;
        res.set_content("{\"error\":\"boom\"}", "application/json");
        return;
      }
      json body = json::parse(req.body);
      if (body.value("stream", false)) {
        std::string sse;
        for (const auto& piece : stream_pieces_) {
          sse += "data: " + json{{"choices", {{{"delta", {{"content", piece}}}}}}}.dump() + "\n\n";
        }
        sse += "data: [DONE]\n\n";
        res.set_content(sse, "text/event-stream");
        return;
      }
      json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", reply_}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  int hits() const { return hits_; }

  std::string reply_ = "ok";
  std::vector<std::string> stream_pieces_ = {"fin", "ance"};
  int fail_first_ = 0;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> hits_{0};
};

}  // namespace

TEST_CASE("remote backend round trip") {
  StubServer stub;
  stub.reply_ = "remote says hi";
  HttpBackend backend(stub.base_url(), "test-model", "key", {2, 1});
  CHECK(backend.complete(simple_request("hello")) == "remote says hi");
  CHECK(stub.hits() == 1);
}

TEST_CASE("remote backend fails after exhausting retries on 500s") {
  StubServer stub;
  stub.fail_first_ = 1000;
  HttpBackend backend(stub.base_url(), "test-model", "", {2, 1});
  try {
    backend.complete(simple_request("hello"));
    FAIL("expected transport error");
  } catch (const Error& e) {
    CHECK(e.kind() == "transport");
  }
  // retry bound: exactly configured_retries+1 requests issued
  CHECK(stub.hits() == 3);
  CHECK(backend.requests_issued() == 3);
}

TEST_CASE("remote backend recovers when a retry succeeds") {
  StubServer stub;
  stub.fail_first_ = 2;
  stub.reply_ = "eventually";
  HttpBackend backend(stub.base_url(), "test-model", "", {2, 1});
  CHECK(backend.complete(simple_request("hello")) == "eventually");
  CHECK(stub.hits() == 3);  // min(attempts_needed, retries+1)
}

TEST_CASE("remote streaming concatenates chunks") {
  StubServer stub;
  stub.stream_pieces_ = {"fin", "ance"};
  HttpBackend backend(stub.base_url(), "test-model", "", {0, 1});
  std::string joined;
  std::string final_text =
      backend.complete_streaming(simple_request("stream"), [&](const std::string& d) {
        joined += d;
        return true;
      });
  CHECK(final_text == "finance");
  CHECK(joined == "finance");
}

TEST_CASE("remote truncates at first stop sequence") {
  StubServer stub;
  stub.reply_ = "head STOP tail";
  HttpBackend backend(stub.base_url(), "test-model", "", {0, 1});
  ChatRequest req = simple_request("hello");
  req.stop_sequences = {"STOP"};
  CHECK(backend.complete(req) == "head ");

  stub.stream_pieces_ = {"head ST", "OP tail"};
  std::string joined;
  std::string streamed = backend.complete_streaming(req, [&](const std::string& d) {
    joined += d;
    return true;
  });
  CHECK(streamed == "head ");
  CHECK(joined == "head ");
}

TEST_CASE("replay backend returns recorded replies in order") {
  ReplayBackend backend({"one", "two"});
  CHECK(backend.complete(simple_request("x")) == "one");
  CHECK(backend.complete(simple_request("y")) == "two");
  CHECK_THROWS_AS(backend.complete(simple_request("z")), Error);
}

TEST_CASE("recording backend captures replies in order") {
  ScriptedBackend inner({{"", "r1"}, {"", "r2"}});
  RecordingBackend recorder(inner);
  recorder.complete(simple_request("a"));
  recorder.complete_streaming(simple_request("b"), [](const std::string&) { return true; });
  CHECK(recorder.replies() == std::vector<std::string>{"r1", "r2"});
}
