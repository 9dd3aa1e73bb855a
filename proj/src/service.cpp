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

#include "finteam/service.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "finteam/error.hpp"
#include "finteam/http_backend.hpp"

namespace finteam {

using nlohmann::json;

WorkflowDeps Engine::deps() const {
  WorkflowDeps deps;
  deps.backend = backend.get();
  deps.store = store.get();
  deps.registry = &registry;
  deps.prompts = prompts.get();
  deps.kb_names = config.retrieval.kbs.empty() ? store->kb_names() : config.retrieval.kbs;
  deps.retrieval_k = config.retrieval.k;
  deps.context_budget_tokens = config.limits.context_budget;
  return deps;
}

std::shared_ptr<Backend> scripted_backend_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("config-validation", "script file not found: " + path);
  }
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("entries") || !j["entries"].is_array()) {
    throw Error("config-validation", "script file must hold {entries: [{matcher, reply}]}");
  }
  std::vector<ScriptedBackend::Entry> entries;
  for (const auto& e : j["entries"]) {
    entries.push_back({e.value("matcher", ""), e.value("reply", "")});
  }
  return std::make_shared<ScriptedBackend>(std::move(entries), j.value("strict", false),
                                           j.value("chunk_codepoints", 3));
}

Engine make_engine(EngineConfig config, std::shared_ptr<Backend> backend_override) {
  Engine engine;
  engine.config = config;

  if (backend_override) {
    engine.backend = std::move(backend_override);
  } else if (!config.backend.script_path.empty()) {
    engine.backend = scripted_backend_from_file(config.backend.script_path);
  } else {
    const char* key = std::getenv(config.backend.api_key_env.c_str());
    RetryPolicy retry;
    retry.retries = config.limits.retries;
    engine.backend = std::make_shared<HttpBackend>(config.backend.base_url,
                                                   config.backend.model,
                                                   key ? key : "", retry);
  }

  std::shared_ptr<Embedder> embedder;
  if (config.embedding.mode == "remote") {
    embedder = std::make_shared<RemoteEmbedder>(config.embedding.base_url,
                                                config.embedding.dimension);
  } else {
    embedder = std::make_shared<FallbackEmbedder>();
  }
  engine.store = std::make_shared<KnowledgeStore>(config.paths.data_dir, embedder);
  engine.prompts = std::make_shared<PromptLibrary>(config.paths.prompts_dir);
  engine.registry = ToolRegistry::with_default_tools();
  engine.registry.set_max_calls_per_response(config.limits.max_calls_per_response);
  return engine;
}

struct Service::Impl {
  Engine engine;
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

namespace {

void send_error(httplib::Response& res, int status, const std::string& error,
                const std::string& step) {
  res.status = status;
  res.set_content(json{{"error", error}, {"step", step}}.dump(), "application/json");
}

}  // namespace

Service::Service(Engine engine) : impl_(std::make_unique<Impl>()) {
  impl_->engine = std::move(engine);
  auto& server = impl_->server;
  auto* impl = impl_.get();

  server.new_task_queue = [impl] {
    return new httplib::ThreadPool(
        std::max(1, impl->engine.config.service.max_concurrency));
  };

  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"status", "ok"}}.dump(), "application/json");
  });

  server.Post("/v1/analyze", [impl](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      send_error(res, 400, "request body must be a JSON object", "parse");
      return;
    }
    std::string scenario_name = body.value("scenario", "");
    auto kind = scenario_kind_from(scenario_name);
    if (!kind) {
      send_error(res, 400, "unknown scenario '" + scenario_name + "'", "parse");
      return;
    }
    ScenarioOptions options;
    options.query = body.value("query", "");
    if (body.contains("options") && body["options"].is_object()) {
      options.include_news = body["options"].value("include_news", false);
      options.with_sentiment = body["options"].value("with_sentiment", false);
    }
    if (*kind != ScenarioKind::StatementAnalysis && options.query.empty()) {
      send_error(res, 400, "query must be non-empty", "parse");
      return;
    }
    if (*kind == ScenarioKind::StatementAnalysis) {
      if (!body.contains("statements")) {
        send_error(res, 400, "statement analysis requires 'statements'", "parse");
        return;
      }
      try {
        options.statements = statements_from_json(body["statements"]);
      } catch (const std::exception& e) {
        send_error(res, 400, std::string("bad statements payload: ") + e.what(), "parse");
        return;
      }
    }

    try {
      WorkflowTrace trace = run_scenario(*kind, options, impl->engine.deps());
      // the trace hits disk before the response leaves
      persist_trace(trace, impl->engine.config.paths.runs_dir);
      if (trace.failure) {
        send_error(res, 502, trace.failure->error,
                   "workflow step " + std::to_string(trace.failure->step) +
                       " (trace " + trace.trace_id + ")");
        return;
      }
      res.set_content(
          json{{"report", trace.final_report}, {"trace_id", trace.trace_id}}.dump(),
          "application/json");
    } catch (const Error& e) {
      send_error(res, 400, e.what(), e.kind());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what(), "internal");
    }
  });

  server.Get(R"(/v1/trace/([A-Za-z0-9_\-]+))",
             [impl](const httplib::Request& req, httplib::Response& res) {
               try {
                 WorkflowTrace trace =
                     load_trace(impl->engine.config.paths.runs_dir, req.matches[1]);
                 res.set_content(trace_to_json(trace).dump(2), "application/json");
               } catch (const Error& e) {
                 send_error(res, e.kind() == "not-found" ? 404 : 400, e.what(), e.kind());
               }
             });
}

Service::~Service() { stop(); }

int Service::start(int port, const std::string& host) {
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
  } else {
    if (!impl_->server.bind_to_port(host, port)) {
      throw Error("bind-failure", "cannot bind " + host + ":" + std::to_string(port));
    }
    impl_->port = port;
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void Service::stop() {
  if (impl_ && impl_->server.is_running()) {
    impl_->server.stop();
  }
  if (impl_ && impl_->thread.joinable()) {
    impl_->thread.join();
  }
}

bool Service::running() const { return impl_ && impl_->server.is_running(); }

}  // namespace finteam
