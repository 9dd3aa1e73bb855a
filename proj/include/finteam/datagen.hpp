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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "finteam/chat.hpp"
#include "finteam/knowledge.hpp"
#include "finteam/prompts.hpp"
#include "finteam/tools.hpp"

namespace finteam {

enum class DatagenProcedure { CoR, SelfInstruct, SelfChat, ReportAnnotation };
const char* datagen_procedure_str(DatagenProcedure p);

struct Provenance {
  DatagenProcedure procedure = DatagenProcedure::CoR;
  std::string seed_id;
  std::string generator_model;
  std::optional<uint64_t> rng_seed;
};

struct InstructionRecord {
  std::string instruction;
  std::string input;  // reference block for CoR records; may be empty
  std::string output;
  Provenance provenance;
};

struct DialogueTurn {
  std::string speaker;  // "user" | "assistant"
  std::string text;
};

struct DialogueRecord {
  std::vector<DialogueTurn> turns;  // alternating, user first, >= 2
  std::string topic_seed;
};

// Three-step retrieval-grounded record construction: generate a question from
// the context document, retrieve references for it, answer from question plus
// references. Empty retrieval flags the record "no-reference" and the answer
// prompt says so explicitly.
InstructionRecord cor_generate(const Document& context_doc,
                               const std::vector<std::string>& kb_names, Backend& backend,
                               KnowledgeStore& store, const PromptLibrary& prompts, int k = 3);

struct SelfInstructOptions {
  uint64_t rng_seed = 20250615;
  double acceptance_floor = 0.2;
  int exemplars = 3;
};

struct SelfInstructStats {
  int attempts = 0;
  int accepted = 0;
  std::map<std::string, int> rejections;  // reason -> count
};

// Few-shot expansion of a seed pool. Every generated answer is re-validated:
// each embedded closed tool command is re-executed and the embedded value
// must reproduce; mismatching candidates are rejected and counted. Accepted
// records have their command results normalized to the canonical rendering.
std::vector<InstructionRecord> self_instruct_expand(
    const std::vector<InstructionRecord>& seed_pool, int n, Backend& backend,
    const SelfInstructOptions& options = {}, SelfInstructStats* stats_out = nullptr);

// Validates one answer text; returns the normalized text or the rejection
// reason. Exposed for the datagen CLI and tests.
struct CommandValidation {
  bool accepted = false;
  std::string normalized;
  std::string reason;
};
CommandValidation validate_tool_commands(const std::string& text);

struct SelfChatOptions {
  std::string end_token = "[END]";
};

// Alternating user-simulator / assistant dialogue on a topic seed. Stops at
// `turns` or when the user simulator emits the end token.
DialogueRecord self_chat_dialogue(const std::string& topic_seed, int turns, Backend& backend,
                                  const PromptLibrary& prompts, const SelfChatOptions& options = {});

// JSONL persistence; appends are serialized by the caller owning the path.
void append_instruction_records(const std::string& path,
                                const std::vector<InstructionRecord>& records);
std::vector<InstructionRecord> load_instruction_records(const std::string& path);
std::vector<std::string> existing_seed_ids(const std::string& path);

std::string dialogue_to_jsonl_line(const DialogueRecord& record);
DialogueRecord dialogue_from_jsonl_line(const std::string& line);

}  // namespace finteam
