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
#include <vector>

namespace finteam {

// Engine configuration, TOML format with ${ENV} interpolation in string
// values. Secrets come only from the environment (api_key_env names the
// variable holding the bearer token).
struct EngineConfig {
  struct BackendConfig {
    std::string base_url;
    std::string model;
    std::string api_key_env = "FINTEAM_API_KEY";
    std::string script_path;  // optional: deterministic scripted backend
  } backend;

  struct EmbeddingConfig {
    std::string mode = "fallback";  // "fallback" | "remote"
    std::string base_url;
    int dimension = 768;  // remote mode; fallback is fixed at 256
  } embedding;

  struct Paths {
    std::string data_dir = "data/kb";
    std::string prompts_dir = "prompts";
    std::string runs_dir = "runs";
  } paths;

  struct Limits {
    int max_calls_per_response = 8;
    int retries = 2;
    int context_budget = 3000;
  } limits;

  struct Retrieval {
    int k = 3;
    std::vector<std::string> kbs;  // empty: use every kb on disk
  } retrieval;

  struct Service {
    int port = 8080;
    int max_concurrency = 16;
  } service;

  std::vector<std::string> warnings;  // unknown keys, forward compatibility
};

// Parses and validates. Throws ParseError (kind "config-parse", offset is the
// line number) on malformed TOML and Error("config-validation") listing every
// validation failure at once. Unknown keys become warnings.
EngineConfig load_config(const std::string& path);

// The parser behind load_config, exposed for tests: takes raw text.
EngineConfig parse_config_text(const std::string& text);

}  // namespace finteam
