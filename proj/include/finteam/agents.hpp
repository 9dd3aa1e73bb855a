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

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "finteam/chat.hpp"
#include "finteam/error.hpp"
#include "finteam/knowledge.hpp"
#include "finteam/prompts.hpp"
#include "finteam/tool_loop.hpp"

namespace finteam {

enum class AgentName { DocumentAnalyzer, Analyst, Accountant, Consultant };
const char* agent_name_str(AgentName name);

enum class AgentCapability { Retrieval, Tools };

// Capability table: the accountant has tools, the analyst has retrieval,
// the other two have neither.
bool agent_has_capability(AgentName name, AgentCapability cap);

// Role descriptor tying an agent to its prompt template and capabilities.
struct AgentRole {
  AgentName name = AgentName::Consultant;
  std::string template_name;  // prompts/{template_name}.txt
  bool retrieval = false;
  bool tools = false;
};

const AgentRole& agent_role(AgentName name);

enum class AnalyzerTask { Intent, Entities, Sentiment, Summary, Keywords };
const char* analyzer_task_str(AnalyzerTask task);

enum class Sentiment { Positive, Neutral, Negative };
const char* sentiment_str(Sentiment s);

struct IntentOut {
  std::string label;
};
struct EntitiesOut {
  std::vector<std::pair<std::string, std::string>> items;  // (entity, type)
};
struct SentimentOut {
  Sentiment label = Sentiment::Neutral;
};
struct SummaryOut {
  std::string text;
};
struct KeywordsOut {
  std::vector<std::string> items;
};

struct AnalyzerOutput {
  AnalyzerTask task = AnalyzerTask::Intent;
  std::variant<IntentOut, EntitiesOut, SentimentOut, SummaryOut, KeywordsOut> payload;
  int retry_count = 0;
};

// Raised when the analyzer or judge reply cannot be parsed after the repair
// retry; carries the raw reply for diagnosis.
class ReplyParseError : public Error {
 public:
  ReplyParseError(const std::string& message, std::string raw_reply)
      : Error("reply-parse", message), raw_reply_(std::move(raw_reply)) {}
  const std::string& raw_reply() const { return raw_reply_; }

 private:
  std::string raw_reply_;
};

struct Citation {
  std::string kb_name;
  std::string doc_id;
  int ordinal = 0;
};

struct GroundedAnswer {
  std::string answer;
  std::vector<Citation> citations;      // always a subset of hits_used
  std::vector<RetrievalHit> hits_used;  // merged, score-descending
  bool no_reference = false;
};

struct AccountantResult {
  std::string answer;
  std::vector<std::pair<ToolCall, ToolResult>> tool_trace;
  bool budget_exceeded = false;
};

struct ContextBlock {
  std::string title;
  std::string text;
};

// Extracts the first balanced {...} object from a model reply.
std::optional<std::string> extract_json_object(const std::string& reply);

// Task-specific analysis with a strict one-JSON-object output grammar and a
// single repair retry.
AnalyzerOutput run_document_analyzer(AnalyzerTask task, const std::string& text,
                                     Backend& backend, const PromptLibrary& prompts);

// Retrieval-grounded answering: top-k per kb, merged by score, numbered
// context block, citations extracted from "[n]" markers in the reply.
GroundedAnswer run_analyst(const std::string& question, const std::vector<std::string>& kb_names,
                           int k, Backend& backend, KnowledgeStore& store,
                           const PromptLibrary& prompts);

// Tool-augmented answering with the accountant system prompt.
AccountantResult run_accountant(const std::string& question, Backend& backend,
                                const ToolRegistry& registry, const PromptLibrary& prompts);

// Synthesis over upstream context blocks with a character budget of
// budget_tokens*1.7; the oldest block is truncated from the front first and
// marked "[truncated]".
std::string run_consultant(const std::string& question,
                           const std::vector<ContextBlock>& context_blocks, Backend& backend,
                           const PromptLibrary& prompts, int budget_tokens = 3000);

// The context assembly used by run_consultant, exposed for prompt tests.
std::string assemble_consultant_context(std::vector<ContextBlock> blocks, int budget_tokens);

}  // namespace finteam
