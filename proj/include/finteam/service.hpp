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

#include <memory>
#include <string>

#include "finteam/config.hpp"
#include "finteam/knowledge.hpp"
#include "finteam/prompts.hpp"
#include "finteam/tools.hpp"
#include "finteam/workflows.hpp"

namespace finteam {

// Everything a running engine needs, assembled from config. The backend may
// be overridden (tests inject scripted backends; the CLI builds HTTP or
// scripted ones per config).
struct Engine {
  EngineConfig config;
  std::shared_ptr<Backend> backend;
  std::shared_ptr<KnowledgeStore> store;
  std::shared_ptr<PromptLibrary> prompts;
  ToolRegistry registry;

  WorkflowDeps deps() const;
};

Engine make_engine(EngineConfig config, std::shared_ptr<Backend> backend_override = nullptr);

// Builds a ScriptedBackend from a JSON file:
// {"strict": bool, "chunk_codepoints": int, "entries": [{"matcher", "reply"}]}
std::shared_ptr<Backend> scripted_backend_from_file(const std::string& path);

// HTTP service over the engine:
//   GET  /health            -> {"status":"ok"}
//   POST /v1/analyze        -> {"report", "trace_id"} (trace persisted first)
//   GET  /v1/trace/{id}     -> the stored WorkflowTrace JSON
// Request errors return structured {"error", "step"} bodies.
class Service {
 public:
  explicit Service(Engine engine);
  ~Service();

  // binds and serves on a background thread; returns the bound port
  int start(int port = 0, const std::string& host = "127.0.0.1");
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace finteam
