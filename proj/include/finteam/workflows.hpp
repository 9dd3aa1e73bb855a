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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "finteam/agents.hpp"
#include "finteam/fin_ratios.hpp"

namespace finteam {

enum class ScenarioKind { Macro, Industry, Company, StatementAnalysis };
const char* scenario_kind_str(ScenarioKind kind);
std::optional<ScenarioKind> scenario_kind_from(const std::string& name);

struct ToolCallRecord {
  std::string tool;
  std::string args;
  std::string rendered;
  bool ok = true;
};

struct RetrievalRecord {
  std::string kb_name;
  std::string doc_id;
  int ordinal = 0;
  double score = 0.0;
};

struct WorkflowStep {
  int ordinal = 0;  // contiguous from 1 at the top level
  std::string agent;
  std::string label;  // sub-step tag: "pest", "swot", "sentiment", ...
  std::string input_digest;
  std::string output_digest;
  std::vector<ToolCallRecord> tool_calls;
  std::vector<RetrievalRecord> retrieval;
  int64_t started_ns = 0;
  int64_t ended_ns = 0;
  std::string note;
  std::vector<WorkflowStep> sub;
};

struct WorkflowFailure {
  int step = 0;
  std::string error;
};

struct WorkflowTrace {
  std::string trace_id;
  std::string scenario;
  std::string query;
  bool include_news = false;
  bool with_sentiment = false;
  std::string statements_json;  // statement-analysis runs carry their input
  std::vector<WorkflowStep> steps;
  std::string final_report;
  std::map<std::string, std::string> template_hashes;
  std::vector<std::string> backend_replies;  // in request order, for replay
  std::vector<std::string> notes;
  std::optional<WorkflowFailure> failure;
  std::string ratio_table;  // rendered ratio values, statement analysis only
};

struct WorkflowDeps {
  Backend* backend = nullptr;
  KnowledgeStore* store = nullptr;
  const ToolRegistry* registry = nullptr;
  const PromptLibrary* prompts = nullptr;
  std::vector<std::string> kb_names;
  int retrieval_k = 3;
  int context_budget_tokens = 3000;
};

struct ScenarioOptions {
  std::string query;
  bool include_news = false;
  bool with_sentiment = false;
  std::optional<FinancialStatements> statements;
};

// The four fixed pipelines. Step failures abort the run and come back as
// trace.failure with the completed steps retained.
WorkflowTrace run_macro(const std::string& query, const WorkflowDeps& deps);
WorkflowTrace run_industry(const std::string& query, bool include_news,
                           const WorkflowDeps& deps);
WorkflowTrace run_company(const std::string& query, bool with_sentiment,
                          const WorkflowDeps& deps);
WorkflowTrace run_statement_analysis(const FinancialStatements& statements,
                                     const WorkflowDeps& deps);

WorkflowTrace run_scenario(ScenarioKind kind, const ScenarioOptions& options,
                           const WorkflowDeps& deps);

// Structural checks: contiguous ordinals, ordered timestamps, final report
// matching the last step, capability discipline (only the analyst retrieves,
// only the accountant calls tools), scenario-specific step sequences.
// Returns every violation found.
std::vector<std::string> validate_trace(const WorkflowTrace& trace);

nlohmann::json trace_to_json(const WorkflowTrace& trace);
WorkflowTrace trace_from_json(const nlohmann::json& j);

// Writes runs_dir/<timestamp>-<scenario>.json, assigning trace.trace_id.
std::string persist_trace(WorkflowTrace& trace, const std::string& runs_dir);
WorkflowTrace load_trace(const std::string& runs_dir, const std::string& trace_id);

// Re-runs the scenario against the trace's recorded backend replies; with the
// same stores and prompts this reproduces the final report byte for byte.
WorkflowTrace replay_trace(const WorkflowTrace& trace, WorkflowDeps deps);

}  // namespace finteam
