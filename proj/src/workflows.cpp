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

#include "finteam/workflows.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "finteam/text_util.hpp"

namespace finteam {

using nlohmann::json;
namespace fs = std::filesystem;

const char* scenario_kind_str(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Macro: return "macro";
    case ScenarioKind::Industry: return "industry";
    case ScenarioKind::Company: return "company";
    case ScenarioKind::StatementAnalysis: return "statements";
  }
  return "macro";
}

std::optional<ScenarioKind> scenario_kind_from(const std::string& name) {
  if (name == "macro") return ScenarioKind::Macro;
  if (name == "industry") return ScenarioKind::Industry;
  if (name == "company") return ScenarioKind::Company;
  if (name == "statements" || name == "statement_analysis") {
    return ScenarioKind::StatementAnalysis;
  }
  return std::nullopt;
}

namespace {

std::vector<RetrievalRecord> to_records(const std::vector<RetrievalHit>& hits) {
  std::vector<RetrievalRecord> out;
  for (const auto& hit : hits) {
    out.push_back({hit.kb_name, hit.chunk.doc_id, hit.chunk.ordinal, hit.score});
  }
  return out;
}

std::vector<ToolCallRecord> to_records(
    const std::vector<std::pair<ToolCall, ToolResult>>& calls) {
  std::vector<ToolCallRecord> out;
  for (const auto& [call, result] : calls) {
    out.push_back({tool_name_str(call.tool), call.args_raw, result.rendered, result.ok()});
  }
  return out;
}

std::string strip_spaces(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c != ' ' && c != '\t') out += c;
  }
  return out;
}

// Shared bookkeeping for one workflow run: reply recording, monotone step
// timestamps, ordinal assignment, failure capture.
class Run {
 public:
  Run(ScenarioKind kind, std::string query, const WorkflowDeps& deps)
      : deps_(deps), recorder_(*deps.backend) {
    trace_.scenario = scenario_kind_str(kind);
    trace_.query = std::move(query);
    trace_.template_hashes = deps.prompts->hashes();
    start_ = std::chrono::steady_clock::now();
  }

  Backend& backend() { return recorder_; }
  const WorkflowDeps& deps() const { return deps_; }
  WorkflowTrace& trace() { return trace_; }

  int64_t now_ns() {
    auto elapsed = std::chrono::steady_clock::now() - start_;
    int64_t t = std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count();
    if (t <= last_ns_) t = last_ns_ + 1;
    last_ns_ = t;
    return t;
  }

  WorkflowStep begin_step(AgentName agent, const std::string& input) {
    WorkflowStep step;
    step.agent = agent_name_str(agent);
    step.input_digest = fnv1a64_hex(input);
    step.started_ns = now_ns();
    return step;
  }

  void end_step(WorkflowStep& step, const std::string& output) {
    step.output_digest = fnv1a64_hex(output);
    step.ended_ns = now_ns();
  }

  void push_step(WorkflowStep step) {
    step.ordinal = static_cast<int>(trace_.steps.size()) + 1;
    trace_.steps.push_back(std::move(step));
  }

  WorkflowTrace finish(const std::string& final_report) {
    trace_.final_report = final_report;
    trace_.backend_replies = recorder_.replies();
    return std::move(trace_);
  }

  WorkflowTrace fail(const std::exception& e) {
    trace_.failure = WorkflowFailure{static_cast<int>(trace_.steps.size()) + 1, e.what()};
    trace_.backend_replies = recorder_.replies();
    return std::move(trace_);
  }

 private:
  const WorkflowDeps& deps_;
  RecordingBackend recorder_;
  WorkflowTrace trace_;
  std::chrono::steady_clock::time_point start_;
  int64_t last_ns_ = 0;
};

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> existing_kbs(const WorkflowDeps& deps,
                                      const std::vector<std::string>& wanted) {
  std::vector<std::string> out;
  for (const auto& kb : wanted) {
    if (deps.store->has_kb(kb)) out.push_back(kb);
  }
  return out;
}

// Grounded analyst call recorded as a (sub-)step.
GroundedAnswer analyst_step(Run& run, WorkflowStep& step, const std::string& question,
                            const std::vector<std::string>& kbs) {
  auto answer = run_analyst(question, existing_kbs(run.deps(), kbs), run.deps().retrieval_k,
                            run.backend(), *run.deps().store, *run.deps().prompts);
  step.retrieval = to_records(answer.hits_used);
  return answer;
}

std::string render_statements(const FinancialStatements& s) {
  std::string out;
  out += "period: " + s.period + " (" + s.currency_unit + ")\n";
  out += "balance sheet: total assets " + format_number(s.balance_sheet.total_assets) +
         ", current assets " + format_number(s.balance_sheet.current_assets) +
         ", inventories " + format_number(s.balance_sheet.inventories) +
         ", total liabilities " + format_number(s.balance_sheet.total_liabilities) +
         ", current liabilities " + format_number(s.balance_sheet.current_liabilities) +
         ", shareholders equity " + format_number(s.balance_sheet.shareholders_equity) + "\n";
  out += "income statement: revenue " + format_number(s.income_statement.revenue) +
         ", cost of goods sold " + format_number(s.income_statement.cost_of_goods_sold) +
         ", operating income " + format_number(s.income_statement.operating_income) +
         ", net income " + format_number(s.income_statement.net_income);
  if (s.income_statement.prior_revenue) {
    out += ", prior revenue " + format_number(*s.income_statement.prior_revenue);
  }
  out += "\n";
  out += "cash flow: operating " + format_number(s.cash_flow.operating_cash_flow) +
         ", investing " + format_number(s.cash_flow.investing_cash_flow) + ", financing " +
         format_number(s.cash_flow.financing_cash_flow) + "\n";
  return out;
}

}  // namespace

WorkflowTrace run_macro(const std::string& query, const WorkflowDeps& deps) {
  Run run(ScenarioKind::Macro, query, deps);
  try {
    // 1. the document analyzer extracts key terms
    WorkflowStep s1 = run.begin_step(AgentName::DocumentAnalyzer, query);
    auto analyzed =
        run_document_analyzer(AnalyzerTask::Keywords, query, run.backend(), *deps.prompts);
    const auto& keywords = std::get<KeywordsOut>(analyzed.payload).items;
    std::string keyword_text = join(keywords, ", ");
    run.end_step(s1, keyword_text);
    run.push_step(std::move(s1));

    // 2. the consultant explains them (joint call; skipped when no terms)
    std::string explanations;
    bool have_terms = !keywords.empty();
    if (have_terms) {
      std::string question =
          "Briefly explain each of these financial terms: " + keyword_text;
      WorkflowStep s2 = run.begin_step(AgentName::Consultant, question);
      explanations = run_consultant(question, {{"user question", query}}, run.backend(),
                                    *deps.prompts, deps.context_budget_tokens);
      run.end_step(s2, explanations);
      run.push_step(std::move(s2));
    } else {
      run.trace().notes.push_back("no-terms fast path");
    }

    // 3. the analyst gathers and summarizes supplementary data
    WorkflowStep s3 = run.begin_step(AgentName::Analyst, query);
    auto grounded = analyst_step(run, s3, query, deps.kb_names);
    run.end_step(s3, grounded.answer);
    run.push_step(std::move(s3));

    // 4. the consultant compiles a final response
    std::vector<ContextBlock> blocks;
    if (have_terms) blocks.push_back({"term explanations", explanations});
    blocks.push_back({"supplementary data", grounded.answer});
    WorkflowStep s4 = run.begin_step(AgentName::Consultant, query);
    std::string report = run_consultant(query, blocks, run.backend(), *deps.prompts,
                                        deps.context_budget_tokens);
    run.end_step(s4, report);
    run.push_step(std::move(s4));
    return run.finish(report);
  } catch (const std::exception& e) {
    return run.fail(e);
  }
}

WorkflowTrace run_industry(const std::string& query, bool include_news,
                           const WorkflowDeps& deps) {
  Run run(ScenarioKind::Industry, query, deps);
  run.trace().include_news = include_news;
  try {
    // 1. identify relevant industries or companies
    WorkflowStep s1 = run.begin_step(AgentName::DocumentAnalyzer, query);
    auto analyzed =
        run_document_analyzer(AnalyzerTask::Entities, query, run.backend(), *deps.prompts);
    const auto& entities = std::get<EntitiesOut>(analyzed.payload).items;
    std::vector<std::string> names;
    for (const auto& [entity, type] : entities) {
      (void)type;
      names.push_back(entity);
    }
    std::string subject = names.empty() ? query : join(names, ", ");
    run.end_step(s1, join(names, ", "));
    run.push_step(std::move(s1));

    // 2. competition, supply chains, development trends
    std::string q2 =
        "Analyze the competition, supply chains, and development trends of: " + subject;
    WorkflowStep s2 = run.begin_step(AgentName::Analyst, q2);
    auto industry_answer = analyst_step(run, s2, q2, deps.kb_names);
    run.end_step(s2, industry_answer.answer);
    run.push_step(std::move(s2));

    // 3. recent news, only when requested
    std::string news_answer;
    if (include_news) {
      std::string q3 = "Recent news about: " + subject;
      WorkflowStep s3 = run.begin_step(AgentName::Analyst, q3);
      auto news = analyst_step(run, s3, q3, {"news"});
      news_answer = news.answer;
      run.end_step(s3, news_answer);
      run.push_step(std::move(s3));
    }

    // 4. summary and strategic suggestions
    std::vector<ContextBlock> blocks;
    if (names.empty()) blocks.push_back({"scope note", "unidentified industry"});
    blocks.push_back({"industry analysis", industry_answer.answer});
    if (include_news) blocks.push_back({"recent news", news_answer});
    WorkflowStep s4 = run.begin_step(AgentName::Consultant, query);
    std::string report = run_consultant(query, blocks, run.backend(), *deps.prompts,
                                        deps.context_budget_tokens);
    run.end_step(s4, report);
    run.push_step(std::move(s4));
    return run.finish(report);
  } catch (const std::exception& e) {
    return run.fail(e);
  }
}

WorkflowTrace run_company(const std::string& query, bool with_sentiment,
                          const WorkflowDeps& deps) {
  Run run(ScenarioKind::Company, query, deps);
  run.trace().with_sentiment = with_sentiment;
  try {
    // 1. extract key company data
    WorkflowStep s1 = run.begin_step(AgentName::DocumentAnalyzer, query);
    auto analyzed =
        run_document_analyzer(AnalyzerTask::Entities, query, run.backend(), *deps.prompts);
    const auto& entities = std::get<EntitiesOut>(analyzed.payload).items;
    std::vector<std::string> names;
    for (const auto& [entity, type] : entities) {
      (void)type;
      names.push_back(entity);
    }
    std::string subject = names.empty() ? query : join(names, ", ");
    std::string entity_text = join(names, ", ");
    run.end_step(s1, entity_text);
    run.push_step(std::move(s1));

    // 2. PEST and SWOT, plus a sentiment pass when requested
    WorkflowStep s2 = run.begin_step(AgentName::Analyst, subject);

    std::string q_pest = "PEST analysis (political, economic, social, technological) of: " + subject;
    WorkflowStep pest_sub = run.begin_step(AgentName::Analyst, q_pest);
    pest_sub.label = "pest";
    auto pest = analyst_step(run, pest_sub, q_pest, deps.kb_names);
    run.end_step(pest_sub, pest.answer);

    std::string q_swot =
        "SWOT analysis (strengths, weaknesses, opportunities, threats) of: " + subject;
    WorkflowStep swot_sub = run.begin_step(AgentName::Analyst, q_swot);
    swot_sub.label = "swot";
    auto swot = analyst_step(run, swot_sub, q_swot, deps.kb_names);
    run.end_step(swot_sub, swot.answer);

    s2.retrieval = pest_sub.retrieval;
    s2.retrieval.insert(s2.retrieval.end(), swot_sub.retrieval.begin(),
                        swot_sub.retrieval.end());
    s2.sub.push_back(std::move(pest_sub));
    s2.sub.push_back(std::move(swot_sub));

    std::string sentiment_label;
    if (with_sentiment) {
      // sentiment runs over retrieved news; the retrieval itself belongs to
      // the analyst step, the classification to the document analyzer
      std::vector<std::string> news_kbs = existing_kbs(deps, {"news"});
      if (news_kbs.empty()) news_kbs = existing_kbs(deps, deps.kb_names);
      std::string news_text;
      std::vector<RetrievalHit> news_hits;
      for (const auto& kb : news_kbs) {
        auto hits = deps.store->retrieve(kb, subject, deps.retrieval_k);
        for (auto& hit : hits) {
          news_text += hit.chunk.text + "\n";
          news_hits.push_back(std::move(hit));
        }
      }
      auto news_records = to_records(news_hits);
      s2.retrieval.insert(s2.retrieval.end(), news_records.begin(), news_records.end());

      std::string sentiment_input = news_text.empty() ? query : news_text;
      WorkflowStep senti_sub = run.begin_step(AgentName::DocumentAnalyzer, sentiment_input);
      senti_sub.label = "sentiment";
      auto senti = run_document_analyzer(AnalyzerTask::Sentiment, sentiment_input,
                                         run.backend(), *deps.prompts);
      sentiment_label = sentiment_str(std::get<SentimentOut>(senti.payload).label);
      run.end_step(senti_sub, sentiment_label);
      senti_sub.note = sentiment_label;
      s2.sub.push_back(std::move(senti_sub));
    }

    std::string s2_output = pest.answer + "\n" + swot.answer;
    run.end_step(s2, s2_output);
    run.push_step(std::move(s2));

    // 3. synthesized assessment
    std::vector<ContextBlock> blocks;
    blocks.push_back({"company data", entity_text.empty() ? query : entity_text});
    blocks.push_back({"PEST analysis", pest.answer});
    blocks.push_back({"SWOT analysis", swot.answer});
    if (with_sentiment) blocks.push_back({"news sentiment", sentiment_label});
    WorkflowStep s3 = run.begin_step(AgentName::Consultant, query);
    std::string report = run_consultant(query, blocks, run.backend(), *deps.prompts,
                                        deps.context_budget_tokens);
    run.end_step(s3, report);
    run.push_step(std::move(s3));
    return run.finish(report);
  } catch (const std::exception& e) {
    return run.fail(e);
  }
}

WorkflowTrace run_statement_analysis(const FinancialStatements& statements,
                                     const WorkflowDeps& deps) {
  auto violations = validate(statements);
  if (!violations.empty()) {
    throw Error("statement-validation", join(violations, "; "));
  }
  std::string rendered = render_statements(statements);

  Run run(ScenarioKind::StatementAnalysis, "financial statement analysis " + statements.period,
          deps);
  run.trace().statements_json = statements_to_json(statements).dump();
  try {
    // 1. the analyst summarizes the statement data
    std::string q1 = "Summarize the key figures of these financial statements for " +
                     (statements.period.empty() ? std::string("the period") : statements.period) +
                     ".";
    WorkflowStep s1 = run.begin_step(AgentName::Analyst, rendered);
    ChatRequest req;
    req.messages = {{Role::System, deps.prompts->render("analyst", {{"context", rendered}})},
                    {Role::User, q1}};
    std::string summary = run.backend().complete(req);
    run.end_step(s1, summary);
    run.push_step(std::move(s1));

    // 2. the accountant computes every catalog ratio through tool calls;
    // the per-response budget must cover the whole catalog (9 entries when
    // revenue growth applies, vs the default budget of 8)
    auto catalog = ratio_catalog(statements);
    ToolRegistry registry = *deps.registry;
    registry.set_max_calls_per_response(std::max(registry.max_calls_per_response(),
                                                 static_cast<int>(catalog.size())));
    std::string q2 = "Compute the following ratios, one Calculator command each, in order:\n";
    for (const auto& entry : catalog) {
      q2 += "- " + entry.name + ": " + entry.formula_expression + "\n";
    }
    WorkflowStep s2 = run.begin_step(AgentName::Accountant, q2);
    auto accountant = run_accountant(q2, run.backend(), registry, *deps.prompts);
    s2.tool_calls = to_records(accountant.tool_trace);
    run.end_step(s2, accountant.answer);
    run.push_step(std::move(s2));

    // ratio values flow from the executed tool calls, not from model text
    std::string table;
    for (const auto& entry : catalog) {
      const ToolResult* matched = nullptr;
      for (const auto& [call, result] : accountant.tool_trace) {
        if (call.tool == ToolName::Calculator &&
            strip_spaces(call.args_raw) == strip_spaces(entry.formula_expression)) {
          matched = &result;
          break;
        }
      }
      table += "- " + entry.name + " (" + ratio_category_str(entry.category) + ") = ";
      if (!matched) {
        table += "not computed";
      } else if (matched->ok()) {
        table += matched->rendered;
      } else if (matched->error == "division-by-zero") {
        table += "undefined (zero denominator)";
      } else {
        table += "undefined (" + *matched->error + ")";
      }
      table += "\n";
    }
    run.trace().ratio_table = table;

    // 3. the consultant writes the report
    std::string q3 = "Write a concise, actionable financial statement analysis report for " +
                     (statements.period.empty() ? std::string("the period") : statements.period) +
                     ".";
    WorkflowStep s3 = run.begin_step(AgentName::Consultant, q3);
    std::string report =
        run_consultant(q3, {{"data summary", summary}, {"computed ratios", table}},
                       run.backend(), *deps.prompts, deps.context_budget_tokens);
    run.end_step(s3, report);
    run.push_step(std::move(s3));
    return run.finish(report);
  } catch (const std::exception& e) {
    return run.fail(e);
  }
}

WorkflowTrace run_scenario(ScenarioKind kind, const ScenarioOptions& options,
                           const WorkflowDeps& deps) {
  switch (kind) {
    case ScenarioKind::Macro:
      return run_macro(options.query, deps);
    case ScenarioKind::Industry:
      return run_industry(options.query, options.include_news, deps);
    case ScenarioKind::Company:
      return run_company(options.query, options.with_sentiment, deps);
    case ScenarioKind::StatementAnalysis: {
      if (!options.statements) {
        throw Error("invalid-request", "statement analysis requires statements");
      }
      return run_statement_analysis(*options.statements, deps);
    }
  }
  throw Error("invalid-request", "unknown scenario");
}

namespace {

void check_capabilities(const WorkflowStep& step, std::vector<std::string>& violations) {
  if (step.agent != agent_name_str(AgentName::Analyst) && !step.retrieval.empty()) {
    violations.push_back("step " + std::to_string(step.ordinal) + " (" + step.agent +
                         ") recorded retrieval without the capability");
  }
  if (step.agent != agent_name_str(AgentName::Accountant) && !step.tool_calls.empty()) {
    violations.push_back("step " + std::to_string(step.ordinal) + " (" + step.agent +
                         ") recorded tool calls without the capability");
  }
  for (const auto& sub : step.sub) check_capabilities(sub, violations);
}

}  // namespace

std::vector<std::string> validate_trace(const WorkflowTrace& trace) {
  std::vector<std::string> violations;
  for (size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& step = trace.steps[i];
    if (step.ordinal != static_cast<int>(i) + 1) {
      violations.push_back("ordinals not contiguous at index " + std::to_string(i));
    }
    if (step.ended_ns < step.started_ns) {
      violations.push_back("step " + std::to_string(step.ordinal) + " timestamps reversed");
    }
    if (i > 0 && step.started_ns < trace.steps[i - 1].ended_ns) {
      violations.push_back("step " + std::to_string(step.ordinal) +
                           " starts before the previous step ended");
    }
    check_capabilities(step, violations);
  }
  if (!trace.failure && !trace.steps.empty()) {
    if (fnv1a64_hex(trace.final_report) != trace.steps.back().output_digest) {
      violations.push_back("final report does not match the last step output");
    }
  }

  // scenario step sequences
  std::vector<std::string> agents;
  for (const auto& step : trace.steps) agents.push_back(step.agent);
  auto seq_is = [&](std::initializer_list<const char*> expected) {
    if (agents.size() != expected.size()) return false;
    size_t i = 0;
    for (const char* name : expected) {
      if (agents[i++] != name) return false;
    }
    return true;
  };
  if (!trace.failure) {
    bool ok = true;
    if (trace.scenario == "macro") {
      ok = seq_is({"DocumentAnalyzer", "Consultant", "Analyst", "Consultant"}) ||
           seq_is({"DocumentAnalyzer", "Analyst", "Consultant"});
    } else if (trace.scenario == "industry") {
      ok = trace.include_news
               ? seq_is({"DocumentAnalyzer", "Analyst", "Analyst", "Consultant"})
               : seq_is({"DocumentAnalyzer", "Analyst", "Consultant"});
    } else if (trace.scenario == "company") {
      ok = seq_is({"DocumentAnalyzer", "Analyst", "Consultant"});
      if (ok && trace.steps.size() == 3) {
        const auto& sub = trace.steps[1].sub;
        size_t expected_subs = trace.with_sentiment ? 3 : 2;
        if (sub.size() != expected_subs || sub[0].label != "pest" || sub[1].label != "swot") {
          violations.push_back("company step 2 sub-steps malformed");
        }
        if (trace.with_sentiment &&
            (sub.size() < 3 || sub[2].label != "sentiment" ||
             (sub[2].note != "positive" && sub[2].note != "neutral" &&
              sub[2].note != "negative"))) {
          violations.push_back("sentiment sub-step missing or unlabeled");
        }
      }
    } else if (trace.scenario == "statements") {
      ok = seq_is({"Analyst", "Accountant", "Consultant"});
    }
    if (!ok) {
      violations.push_back("step sequence does not match scenario '" + trace.scenario + "'");
    }
  }
  return violations;
}

json step_to_json(const WorkflowStep& step) {
  json tool_calls = json::array();
  for (const auto& c : step.tool_calls) {
    tool_calls.push_back(
        {{"tool", c.tool}, {"args", c.args}, {"rendered", c.rendered}, {"ok", c.ok}});
  }
  json retrieval = json::array();
  for (const auto& r : step.retrieval) {
    retrieval.push_back({{"kb", r.kb_name},
                         {"doc_id", r.doc_id},
                         {"ordinal", r.ordinal},
                         {"score", r.score}});
  }
  json sub = json::array();
  for (const auto& s : step.sub) sub.push_back(step_to_json(s));
  json j = {{"ordinal", step.ordinal},
            {"agent", step.agent},
            {"input_digest", step.input_digest},
            {"output_digest", step.output_digest},
            {"tool_calls", tool_calls},
            {"retrieval", retrieval},
            {"started_ns", step.started_ns},
            {"ended_ns", step.ended_ns}};
  if (!step.label.empty()) j["label"] = step.label;
  if (!step.note.empty()) j["note"] = step.note;
  if (!sub.empty()) j["sub"] = sub;
  return j;
}

WorkflowStep step_from_json(const json& j) {
  WorkflowStep step;
  step.ordinal = j.value("ordinal", 0);
  step.agent = j.value("agent", "");
  step.label = j.value("label", "");
  step.input_digest = j.value("input_digest", "");
  step.output_digest = j.value("output_digest", "");
  step.started_ns = j.value("started_ns", int64_t{0});
  step.ended_ns = j.value("ended_ns", int64_t{0});
  step.note = j.value("note", "");
  if (j.contains("tool_calls")) {
    for (const auto& c : j["tool_calls"]) {
      step.tool_calls.push_back({c.value("tool", ""), c.value("args", ""),
                                 c.value("rendered", ""), c.value("ok", true)});
    }
  }
  if (j.contains("retrieval")) {
    for (const auto& r : j["retrieval"]) {
      step.retrieval.push_back({r.value("kb", ""), r.value("doc_id", ""),
                                r.value("ordinal", 0), r.value("score", 0.0)});
    }
  }
  if (j.contains("sub")) {
    for (const auto& s : j["sub"]) step.sub.push_back(step_from_json(s));
  }
  return step;
}

json trace_to_json(const WorkflowTrace& trace) {
  json steps = json::array();
  for (const auto& step : trace.steps) steps.push_back(step_to_json(step));
  json j = {{"trace_id", trace.trace_id},
            {"scenario", trace.scenario},
            {"query", trace.query},
            {"options", {{"include_news", trace.include_news},
                         {"with_sentiment", trace.with_sentiment}}},
            {"steps", steps},
            {"final_report", trace.final_report},
            {"template_hashes", trace.template_hashes},
            {"backend_replies", trace.backend_replies},
            {"notes", trace.notes}};
  if (!trace.statements_json.empty()) {
    j["statements"] = json::parse(trace.statements_json);
  }
  if (!trace.ratio_table.empty()) j["ratio_table"] = trace.ratio_table;
  if (trace.failure) {
    j["failure"] = {{"step", trace.failure->step}, {"error", trace.failure->error}};
  }
  return j;
}

WorkflowTrace trace_from_json(const json& j) {
  WorkflowTrace trace;
  trace.trace_id = j.value("trace_id", "");
  trace.scenario = j.value("scenario", "");
  trace.query = j.value("query", "");
  if (j.contains("options")) {
    trace.include_news = j["options"].value("include_news", false);
    trace.with_sentiment = j["options"].value("with_sentiment", false);
  }
  if (j.contains("steps")) {
    for (const auto& s : j["steps"]) trace.steps.push_back(step_from_json(s));
  }
  trace.final_report = j.value("final_report", "");
  if (j.contains("template_hashes")) {
    for (auto& [k, v] : j["template_hashes"].items()) {
      trace.template_hashes[k] = v.get<std::string>();
    }
  }
  if (j.contains("backend_replies")) {
    trace.backend_replies = j["backend_replies"].get<std::vector<std::string>>();
  }
  if (j.contains("notes")) trace.notes = j["notes"].get<std::vector<std::string>>();
  if (j.contains("statements")) trace.statements_json = j["statements"].dump();
  trace.ratio_table = j.value("ratio_table", "");
  if (j.contains("failure")) {
    trace.failure = WorkflowFailure{j["failure"].value("step", 0),
                                    j["failure"].value("error", "")};
  }
  return trace;
}

std::string persist_trace(WorkflowTrace& trace, const std::string& runs_dir) {
  static std::atomic<uint64_t> counter{0};
  fs::create_directories(runs_dir);
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%S", std::gmtime(&now));
  std::string id = std::string(stamp) + "-" + std::to_string(counter.fetch_add(1)) + "-" +
                   trace.scenario;
  trace.trace_id = id;
  fs::path path = fs::path(runs_dir) / (id + ".json");
  std::ofstream out(path, std::ios::trunc);
  out << trace_to_json(trace).dump(2) << '\n';
  return id;
}

WorkflowTrace load_trace(const std::string& runs_dir, const std::string& trace_id) {
  for (char c : trace_id) {
    if (!isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') {
      throw Error("invalid-request", "malformed trace id");
    }
  }
  fs::path path = fs::path(runs_dir) / (trace_id + ".json");
  std::ifstream in(path);
  if (!in) {
    throw Error("not-found", "trace '" + trace_id + "' not found");
  }
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw Error("parse-error", "trace file is corrupt");
  }
  return trace_from_json(j);
}

WorkflowTrace replay_trace(const WorkflowTrace& trace, WorkflowDeps deps) {
  ReplayBackend replay(trace.backend_replies);
  deps.backend = &replay;
  auto kind = scenario_kind_from(trace.scenario);
  if (!kind) {
    throw Error("invalid-request", "trace has unknown scenario '" + trace.scenario + "'");
  }
  ScenarioOptions options;
  options.query = trace.query;
  options.include_news = trace.include_news;
  options.with_sentiment = trace.with_sentiment;
  if (!trace.statements_json.empty()) {
    options.statements = statements_from_json(json::parse(trace.statements_json));
  }
  return run_scenario(*kind, options, deps);
}

}  // namespace finteam
