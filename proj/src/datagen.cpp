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

#include "finteam/datagen.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "finteam/agents.hpp"
#include "finteam/error.hpp"

namespace finteam {

using nlohmann::json;

const char* datagen_procedure_str(DatagenProcedure p) {
  switch (p) {
    case DatagenProcedure::CoR: return "CoR";
    case DatagenProcedure::SelfInstruct: return "SelfInstruct";
    case DatagenProcedure::SelfChat: return "SelfChat";
    case DatagenProcedure::ReportAnnotation: return "ReportAnnotation";
  }
  return "CoR";
}

namespace {

std::optional<DatagenProcedure> procedure_from(const std::string& name) {
  if (name == "CoR") return DatagenProcedure::CoR;
  if (name == "SelfInstruct") return DatagenProcedure::SelfInstruct;
  if (name == "SelfChat") return DatagenProcedure::SelfChat;
  if (name == "ReportAnnotation") return DatagenProcedure::ReportAnnotation;
  return std::nullopt;
}

std::string trimmed(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

InstructionRecord cor_generate(const Document& context_doc,
                               const std::vector<std::string>& kb_names, Backend& backend,
                               KnowledgeStore& store, const PromptLibrary& prompts, int k) {
  if (context_doc.body.empty()) {
    throw Error("invalid-request", "CoR needs a non-empty context document");
  }

  // step 1: question generation from the context
  ChatRequest q_req;
  q_req.messages = {
      {Role::System,
       "You construct financial analysis questions. Read the context and write exactly one "
       "financial analysis question grounded in it. Reply with the question only."},
      {Role::User, context_doc.body}};
  std::string question;
  try {
    question = trimmed(backend.complete(q_req));
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("CoR question generation: ") + e.what());
  }

  // step 2: reference retrieval
  std::vector<RetrievalHit> hits;
  try {
    for (const auto& kb : kb_names) {
      auto kb_hits = store.retrieve(kb, question, k);
      hits.insert(hits.end(), kb_hits.begin(), kb_hits.end());
    }
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("CoR reference retrieval: ") + e.what());
  }
  std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.kb_name != b.kb_name) return a.kb_name < b.kb_name;
    if (a.chunk.doc_id != b.chunk.doc_id) return a.chunk.doc_id < b.chunk.doc_id;
    return a.chunk.ordinal < b.chunk.ordinal;
  });
  if (static_cast<int>(hits.size()) > k) hits.resize(k);

  std::string reference_block;
  bool no_reference = hits.empty();
  if (no_reference) {
    reference_block = "(no-reference)";
  } else {
    for (size_t i = 0; i < hits.size(); ++i) {
      reference_block += "[" + std::to_string(i + 1) + "] " + hits[i].chunk.text + "\n";
    }
  }

  // step 3: answer generation from question + references, through the
  // analyst's grounded-answering template
  ChatRequest a_req;
  a_req.messages = {{Role::System, prompts.render("analyst", {{"context", reference_block}})},
                    {Role::User, question}};
  std::string answer;
  try {
    answer = backend.complete(a_req);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("CoR answer generation: ") + e.what());
  }

  InstructionRecord record;
  record.instruction = question;
  record.input = reference_block;
  record.output = answer;
  record.provenance.procedure = DatagenProcedure::CoR;
  record.provenance.seed_id = context_doc.id;
  record.provenance.generator_model = backend.model_name();
  return record;
}

CommandValidation validate_tool_commands(const std::string& text) {
  CommandValidation out;
  ToolRegistry registry = ToolRegistry::with_default_tools();
  std::string normalized;
  size_t pos = 0;
  auto closed = find_closed_calls(text);
  for (const auto& cmd : closed) {
    ToolResult fresh = registry.execute(cmd.call);
    if (fresh.rendered != cmd.embedded_value) {
      // embedded value may carry formatting noise; accept when it parses to
      // the same canonical rendering
      std::string embedded = trimmed(cmd.embedded_value);
      if (embedded != fresh.rendered) {
        out.accepted = false;
        out.reason = std::string(tool_name_str(cmd.call.tool)) + "(" + cmd.call.args_raw +
                     ") embeds \"" + cmd.embedded_value + "\" but re-executes to \"" +
                     fresh.rendered + "\"";
        return out;
      }
    }
    normalized += text.substr(pos, cmd.full_begin - pos);
    normalized += "[";
    normalized += tool_name_str(cmd.call.tool);
    normalized += "(" + cmd.call.args_raw + ")→" + fresh.rendered + "]";
    pos = cmd.full_end;
  }
  normalized += text.substr(pos);
  if (detect_call(normalized).has_value()) {
    out.accepted = false;
    out.reason = "unclosed tool command in answer";
    return out;
  }
  out.accepted = true;
  out.normalized = normalized;
  return out;
}

std::vector<InstructionRecord> self_instruct_expand(
    const std::vector<InstructionRecord>& seed_pool, int n, Backend& backend,
    const SelfInstructOptions& options, SelfInstructStats* stats_out) {
  if (static_cast<int>(seed_pool.size()) < options.exemplars) {
    throw Error("invalid-request", "seed pool must hold at least " +
                                       std::to_string(options.exemplars) + " records");
  }
  std::mt19937_64 rng(options.rng_seed);
  SelfInstructStats stats;
  std::vector<InstructionRecord> accepted;

  for (int i = 0; i < n; ++i) {
    // sample k exemplars without replacement
    std::vector<size_t> indices(seed_pool.size());
    for (size_t j = 0; j < indices.size(); ++j) indices[j] = j;
    std::shuffle(indices.begin(), indices.end(), rng);

    std::string prompt =
        "Here are examples of financial calculation instructions whose answers embed tool "
        "commands of the form [Calculator(expression)→result]:\n\n";
    for (int e = 0; e < options.exemplars; ++e) {
      const auto& seed = seed_pool[indices[e]];
      prompt += "Instruction: " + seed.instruction + "\n";
      if (!seed.input.empty()) prompt += "Input: " + seed.input + "\n";
      prompt += "Answer: " + seed.output + "\n\n";
    }
    prompt +=
        "Write one new instruction of the same style with a step-by-step answer that embeds "
        "tool commands. Reply with exactly one JSON object "
        "{\"instruction\": \"...\", \"input\": \"...\", \"output\": \"...\"}.";

    ChatRequest request;
    request.messages = {{Role::User, prompt}};
    std::string reply = backend.complete(request);
    ++stats.attempts;

    auto object_text = extract_json_object(reply);
    if (!object_text) {
      ++stats.rejections["unparseable"];
      continue;
    }
    json parsed = json::parse(*object_text, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("instruction") ||
        !parsed.contains("output")) {
      ++stats.rejections["unparseable"];
      continue;
    }
    std::string instruction = parsed["instruction"].is_string()
                                  ? parsed["instruction"].get<std::string>()
                                  : "";
    std::string output = parsed["output"].is_string() ? parsed["output"].get<std::string>() : "";
    if (instruction.empty() || output.empty()) {
      ++stats.rejections["empty-fields"];
      continue;
    }
    auto validation = validate_tool_commands(output);
    if (!validation.accepted) {
      ++stats.rejections["command-mismatch"];
      continue;
    }

    InstructionRecord record;
    record.instruction = instruction;
    record.input = parsed.value("input", "");
    record.output = validation.normalized;
    record.provenance.procedure = DatagenProcedure::SelfInstruct;
    record.provenance.seed_id =
        "si-" + std::to_string(options.rng_seed) + "-" + std::to_string(i);
    record.provenance.generator_model = backend.model_name();
    record.provenance.rng_seed = options.rng_seed;
    accepted.push_back(std::move(record));
    ++stats.accepted;
  }

  if (stats.attempts > 0 &&
      static_cast<double>(stats.accepted) / stats.attempts < options.acceptance_floor) {
    std::string breakdown;
    for (const auto& [reason, count] : stats.rejections) {
      breakdown += " " + reason + "=" + std::to_string(count);
    }
    if (stats_out) *stats_out = stats;
    throw Error("low-acceptance",
                "acceptance rate " + std::to_string(stats.accepted) + "/" +
                    std::to_string(stats.attempts) + " below floor;" + breakdown);
  }
  if (stats_out) *stats_out = stats;
  return accepted;
}

DialogueRecord self_chat_dialogue(const std::string& topic_seed, int turns, Backend& backend,
                                  const PromptLibrary& prompts, const SelfChatOptions& options) {
  if (turns < 2 || turns % 2 != 0) {
    throw Error("invalid-request", "turns must be an even number >= 2");
  }
  DialogueRecord record;
  record.topic_seed = topic_seed;

  std::string user_system =
      "You simulate a retail investor asking about: " + topic_seed +
      ". Ask one natural follow-up question continuing the conversation. When you have "
      "nothing left to ask, reply exactly " +
      options.end_token + ".";

  for (int t = 0; t < turns; ++t) {
    bool user_turn = t % 2 == 0;
    ChatRequest request;
    if (user_turn) {
      // the simulator sees the conversation with roles flipped
      request.messages.push_back({Role::System, user_system});
      for (const auto& turn : record.turns) {
        request.messages.push_back(
            {turn.speaker == "user" ? Role::Assistant : Role::User, turn.text});
      }
      if (record.turns.empty() || request.messages.back().role == Role::Assistant) {
        request.messages.push_back({Role::User, "(start of conversation on: " + topic_seed + ")"});
      }
      std::string reply = trimmed(backend.complete(request));
      if (reply.find(options.end_token) != std::string::npos) break;
      record.turns.push_back({"user", reply});
    } else {
      request.messages.push_back({Role::System, prompts.render("consultant", {})});
      for (const auto& turn : record.turns) {
        request.messages.push_back(
            {turn.speaker == "user" ? Role::User : Role::Assistant, turn.text});
      }
      std::string reply = backend.complete(request);
      record.turns.push_back({"assistant", reply});
    }
  }

  if (record.turns.size() < 2) {
    throw Error("dialogue-too-short", "self-chat ended before two turns");
  }
  if (record.turns.size() % 2 != 0) record.turns.pop_back();  // keep pairs
  return record;
}

namespace {

json record_to_json(const InstructionRecord& record) {
  json provenance = {{"procedure", datagen_procedure_str(record.provenance.procedure)},
                     {"seed_id", record.provenance.seed_id},
                     {"generator_model", record.provenance.generator_model}};
  if (record.provenance.rng_seed) provenance["rng_seed"] = *record.provenance.rng_seed;
  return json{{"instruction", record.instruction},
              {"input", record.input},
              {"output", record.output},
              {"provenance", provenance}};
}

InstructionRecord record_from_json(const json& j) {
  InstructionRecord record;
  record.instruction = j.value("instruction", "");
  record.input = j.value("input", "");
  record.output = j.value("output", "");
  if (j.contains("provenance")) {
    const json& p = j["provenance"];
    auto proc = procedure_from(p.value("procedure", "CoR"));
    record.provenance.procedure = proc.value_or(DatagenProcedure::CoR);
    record.provenance.seed_id = p.value("seed_id", "");
    record.provenance.generator_model = p.value("generator_model", "");
    if (p.contains("rng_seed")) record.provenance.rng_seed = p["rng_seed"].get<uint64_t>();
  }
  return record;
}

}  // namespace

void append_instruction_records(const std::string& path,
                                const std::vector<InstructionRecord>& records) {
  std::ofstream out(path, std::ios::app);
  if (!out) {
    throw Error("io-error", "cannot open " + path + " for append");
  }
  for (const auto& record : records) {
    out << record_to_json(record).dump() << '\n';
  }
}

std::vector<InstructionRecord> load_instruction_records(const std::string& path) {
  std::vector<InstructionRecord> records;
  std::ifstream in(path);
  if (!in) return records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    records.push_back(record_from_json(j));
  }
  return records;
}

std::vector<std::string> existing_seed_ids(const std::string& path) {
  std::vector<std::string> ids;
  for (const auto& record : load_instruction_records(path)) {
    ids.push_back(record.provenance.seed_id);
  }
  return ids;
}

std::string dialogue_to_jsonl_line(const DialogueRecord& record) {
  json turns = json::array();
  for (const auto& turn : record.turns) {
    turns.push_back({{"speaker", turn.speaker}, {"text", turn.text}});
  }
  return json{{"topic_seed", record.topic_seed}, {"turns", turns}}.dump();
}

DialogueRecord dialogue_from_jsonl_line(const std::string& line) {
  json j = json::parse(line);
  DialogueRecord record;
  record.topic_seed = j.value("topic_seed", "");
  for (const auto& turn : j["turns"]) {
    record.turns.push_back({turn.value("speaker", ""), turn.value("text", "")});
  }
  return record;
}

}  // namespace finteam
