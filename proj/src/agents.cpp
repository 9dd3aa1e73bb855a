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

#include "finteam/agents.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "finteam/text_util.hpp"

namespace finteam {

using nlohmann::json;

const char* agent_name_str(AgentName name) {
  switch (name) {
    case AgentName::DocumentAnalyzer: return "DocumentAnalyzer";
    case AgentName::Analyst: return "Analyst";
    case AgentName::Accountant: return "Accountant";
    case AgentName::Consultant: return "Consultant";
  }
  return "Consultant";
}

bool agent_has_capability(AgentName name, AgentCapability cap) {
  switch (name) {
    case AgentName::Analyst: return cap == AgentCapability::Retrieval;
    case AgentName::Accountant: return cap == AgentCapability::Tools;
    default: return false;
  }
}

const AgentRole& agent_role(AgentName name) {
  static const AgentRole roles[] = {
      {AgentName::DocumentAnalyzer, "document_analyzer", false, false},
      {AgentName::Analyst, "analyst", true, false},
      {AgentName::Accountant, "accountant", false, true},
      {AgentName::Consultant, "consultant", false, false},
  };
  for (const auto& role : roles) {
    if (role.name == name) return role;
  }
  return roles[3];
}

const char* analyzer_task_str(AnalyzerTask task) {
  switch (task) {
    case AnalyzerTask::Intent: return "intent";
    case AnalyzerTask::Entities: return "entities";
    case AnalyzerTask::Sentiment: return "sentiment";
    case AnalyzerTask::Summary: return "summary";
    case AnalyzerTask::Keywords: return "keywords";
  }
  return "intent";
}

const char* sentiment_str(Sentiment s) {
  switch (s) {
    case Sentiment::Positive: return "positive";
    case Sentiment::Neutral: return "neutral";
    case Sentiment::Negative: return "negative";
  }
  return "neutral";
}

std::optional<std::string> extract_json_object(const std::string& reply) {
  size_t start = reply.find('{');
  if (start == std::string::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (size_t i = start; i < reply.size(); ++i) {
    char c = reply[i];
    if (escaped) {
      escaped = false;
      continue;
    }
    if (c == '\\') {
      escaped = true;
      continue;
    }
    if (c == '"') {
      in_string = !in_string;
      continue;
    }
    if (in_string) continue;
    if (c == '{') ++depth;
    if (c == '}') {
      if (--depth == 0) return reply.substr(start, i - start + 1);
    }
  }
  return std::nullopt;
}

namespace {

const char* task_instructions(AnalyzerTask task) {
  switch (task) {
    case AnalyzerTask::Intent:
      return "Task: intent recognition. Classify the user's intent behind the text. "
             "Output format: {\"intent\": \"<short label>\"}";
    case AnalyzerTask::Entities:
      return "Task: financial entity extraction. List every financial entity with its type "
             "(company, person, product, indicator, industry, other). "
             "Output format: {\"entities\": [[\"<entity>\", \"<type>\"], ...]}";
    case AnalyzerTask::Sentiment:
      return "Task: financial sentiment analysis. Classify the overall sentiment of the text. "
             "Output format: {\"sentiment\": \"positive\" | \"neutral\" | \"negative\"}";
    case AnalyzerTask::Summary:
      return "Task: summarization. Summarize the text in at most three sentences. "
             "Output format: {\"summary\": \"<text>\"}";
    case AnalyzerTask::Keywords:
      return "Task: keyword extraction. List the key financial terms of the text. "
             "Output format: {\"keywords\": [\"<term>\", ...]}";
  }
  return "";
}

AnalyzerOutput parse_analyzer_reply(AnalyzerTask task, const std::string& reply) {
  auto object_text = extract_json_object(reply);
  if (!object_text) {
    throw ReplyParseError("no JSON object in analyzer reply", reply);
  }
  json parsed = json::parse(*object_text, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw ReplyParseError("invalid JSON in analyzer reply", reply);
  }
  AnalyzerOutput out;
  out.task = task;
  switch (task) {
    case AnalyzerTask::Intent: {
      if (!parsed.contains("intent") || !parsed["intent"].is_string()) {
        throw ReplyParseError("missing 'intent' field", reply);
      }
      out.payload = IntentOut{parsed["intent"].get<std::string>()};
      return out;
    }
    case AnalyzerTask::Entities: {
      if (!parsed.contains("entities") || !parsed["entities"].is_array()) {
        throw ReplyParseError("missing 'entities' field", reply);
      }
      EntitiesOut entities;
      for (const auto& item : parsed["entities"]) {
        if (item.is_array() && item.size() >= 2 && item[0].is_string() && item[1].is_string()) {
          entities.items.emplace_back(item[0].get<std::string>(), item[1].get<std::string>());
        } else if (item.is_string()) {
          entities.items.emplace_back(item.get<std::string>(), "other");
        }
      }
      out.payload = std::move(entities);
      return out;
    }
    case AnalyzerTask::Sentiment: {
      if (!parsed.contains("sentiment") || !parsed["sentiment"].is_string()) {
        throw ReplyParseError("missing 'sentiment' field", reply);
      }
      std::string label = parsed["sentiment"].get<std::string>();
      SentimentOut sentiment;
      if (label == "positive") {
        sentiment.label = Sentiment::Positive;
      } else if (label == "negative") {
        sentiment.label = Sentiment::Negative;
      } else if (label == "neutral") {
        sentiment.label = Sentiment::Neutral;
      } else {
        throw ReplyParseError("sentiment label '" + label + "' not in the allowed set", reply);
      }
      out.payload = sentiment;
      return out;
    }
    case AnalyzerTask::Summary: {
      if (!parsed.contains("summary") || !parsed["summary"].is_string()) {
        throw ReplyParseError("missing 'summary' field", reply);
      }
      out.payload = SummaryOut{parsed["summary"].get<std::string>()};
      return out;
    }
    case AnalyzerTask::Keywords: {
      if (!parsed.contains("keywords") || !parsed["keywords"].is_array()) {
        throw ReplyParseError("missing 'keywords' field", reply);
      }
      KeywordsOut keywords;
      for (const auto& item : parsed["keywords"]) {
        if (item.is_string()) keywords.items.push_back(item.get<std::string>());
      }
      out.payload = std::move(keywords);
      return out;
    }
  }
  throw ReplyParseError("unknown analyzer task", reply);
}

}  // namespace

AnalyzerOutput run_document_analyzer(AnalyzerTask task, const std::string& text,
                                     Backend& backend, const PromptLibrary& prompts) {
  if (text.empty()) {
    throw Error("invalid-request", "analyzer input text must be non-empty");
  }
  std::string system = prompts.render(
      "document_analyzer", {{"task_instructions", task_instructions(task)}});
  ChatRequest request;
  request.messages = {{Role::System, system}, {Role::User, text}};

  std::string reply = backend.complete(request);
  try {
    return parse_analyzer_reply(task, reply);
  } catch (const ReplyParseError&) {
    // one repair retry with an explicit reminder
    ChatRequest retry = request;
    retry.messages.push_back({Role::Assistant, reply});
    retry.messages.push_back({Role::User, "reply with valid JSON only, exactly one object"});
    std::string second = backend.complete(retry);
    AnalyzerOutput out = parse_analyzer_reply(task, second);  // throws if still bad
    out.retry_count = 1;
    return out;
  }
}

GroundedAnswer run_analyst(const std::string& question, const std::vector<std::string>& kb_names,
                           int k, Backend& backend, KnowledgeStore& store,
                           const PromptLibrary& prompts) {
  GroundedAnswer out;
  for (const auto& kb : kb_names) {
    auto hits = store.retrieve(kb, question, k);
    out.hits_used.insert(out.hits_used.end(), hits.begin(), hits.end());
  }
  std::sort(out.hits_used.begin(), out.hits_used.end(),
            [](const RetrievalHit& a, const RetrievalHit& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.kb_name != b.kb_name) return a.kb_name < b.kb_name;
              if (a.chunk.doc_id != b.chunk.doc_id) return a.chunk.doc_id < b.chunk.doc_id;
              return a.chunk.ordinal < b.chunk.ordinal;
            });

  std::string context;
  if (out.hits_used.empty()) {
    out.no_reference = true;
    context = "(no reference found)";
  } else {
    for (size_t i = 0; i < out.hits_used.size(); ++i) {
      const auto& hit = out.hits_used[i];
      context += "[" + std::to_string(i + 1) + "] (" + hit.kb_name + "/" + hit.chunk.doc_id +
                 "#" + std::to_string(hit.chunk.ordinal) + ") " + hit.chunk.text + "\n";
    }
  }

  ChatRequest request;
  request.messages = {{Role::System, prompts.render("analyst", {{"context", context}})},
                      {Role::User, question}};
  out.answer = backend.complete(request);

  // map "[n]" markers onto the numbered hits; out-of-range markers are ignored
  for (size_t i = 0; i < out.answer.size(); ++i) {
    if (out.answer[i] != '[') continue;
    size_t j = i + 1;
    while (j < out.answer.size() && isdigit(static_cast<unsigned char>(out.answer[j]))) ++j;
    if (j > i + 1 && j < out.answer.size() && out.answer[j] == ']') {
      int n = std::stoi(out.answer.substr(i + 1, j - i - 1));
      if (n >= 1 && static_cast<size_t>(n) <= out.hits_used.size()) {
        const auto& hit = out.hits_used[n - 1];
        Citation c{hit.kb_name, hit.chunk.doc_id, hit.chunk.ordinal};
        bool seen = false;
        for (const auto& existing : out.citations) {
          if (existing.kb_name == c.kb_name && existing.doc_id == c.doc_id &&
              existing.ordinal == c.ordinal) {
            seen = true;
          }
        }
        if (!seen) out.citations.push_back(c);
      }
    }
  }
  return out;
}

AccountantResult run_accountant(const std::string& question, Backend& backend,
                                const ToolRegistry& registry, const PromptLibrary& prompts) {
  ChatRequest request;
  request.messages = {{Role::System, prompts.render("accountant", {})},
                      {Role::User, question}};
  ToolLoopResult loop = run_tool_augmented_generation(backend, request, registry);
  AccountantResult out;
  out.answer = std::move(loop.final_text);
  out.tool_trace = std::move(loop.calls);
  out.budget_exceeded = loop.budget_exceeded;
  return out;
}

std::string assemble_consultant_context(std::vector<ContextBlock> blocks, int budget_tokens) {
  // budget in characters: tokens are approximated as chars/1.7 for CJK-heavy
  // text, so the char allowance is budget_tokens * 1.7
  size_t budget_chars = static_cast<size_t>(std::floor(budget_tokens * 1.7));
  size_t total = 0;
  for (const auto& block : blocks) total += block.text.size();

  const std::string marker = "[truncated]";
  for (auto& block : blocks) {
    if (total <= budget_chars) break;
    size_t excess = total - budget_chars;
    // the marker itself must fit inside the freed space
    size_t cut = excess + marker.size();
    if (cut >= block.text.size()) {
      total -= block.text.size();
      block.text = marker;
      total += marker.size();
      continue;
    }
    // cut at a UTF-8 boundary
    while (cut < block.text.size() &&
           (static_cast<unsigned char>(block.text[cut]) & 0xC0) == 0x80) {
      ++cut;
    }
    block.text = marker + block.text.substr(cut);
    total = total - cut + marker.size();
  }

  std::string out;
  for (const auto& block : blocks) {
    out += "### " + block.title + "\n" + block.text + "\n\n";
  }
  return out;
}

std::string run_consultant(const std::string& question,
                           const std::vector<ContextBlock>& context_blocks, Backend& backend,
                           const PromptLibrary& prompts, int budget_tokens) {
  ChatRequest request;
  request.messages.push_back({Role::System, prompts.render("consultant", {})});
  std::string user;
  if (!context_blocks.empty()) {
    user += assemble_consultant_context(context_blocks, budget_tokens);
  }
  user += question;
  request.messages.push_back({Role::User, user});
  return backend.complete(request);
}

}  // namespace finteam
