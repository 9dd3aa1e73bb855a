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

#include <chrono>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "finteam/config.hpp"
#include "finteam/datagen.hpp"
#include "finteam/error.hpp"
#include "finteam/eval.hpp"
#include "finteam/expr.hpp"
#include "finteam/fin_ratios.hpp"
#include "finteam/service.hpp"
#include "finteam/text_util.hpp"
#include "finteam/workflows.hpp"

using namespace finteam;
using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io-error", "cannot read " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error("parse-error", "bad JSON in " + path);
  return j;
}

void print_warnings(const EngineConfig& config) {
  for (const auto& w : config.warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_calc(const std::string& expression, bool as_json) {
  double value = eval_expression(*parse_expression(expression));
  if (as_json) {
    std::cout << json{{"expression", expression}, {"value", value},
                      {"rendered", format_number(value)}}.dump() << "\n";
  } else {
    std::cout << format_number(value) << "\n";
  }
  return 0;
}

int cmd_ratios(const std::string& path, bool as_json) {
  FinancialStatements statements = statements_from_json(load_json_file(path));
  auto violations = validate(statements);
  if (!violations.empty()) {
    for (const auto& v : violations) std::cerr << "invalid statements: " << v << "\n";
    return 1;
  }
  RatioReport report = evaluate_ratios(ratio_catalog(statements));
  if (as_json) {
    std::cout << ratio_report_to_json(report).dump(2) << "\n";
    return 0;
  }
  for (const auto& e : report.entries) {
    std::cout << e.name << " (" << ratio_category_str(e.category) << ")\t"
              << e.formula_expression << "\t"
              << (e.value ? format_number(*e.value) : e.note.value_or("undefined")) << "\n";
  }
  return 0;
}

int cmd_ingest(const EngineConfig& config, const std::string& kb, const std::string& path,
               bool as_json) {
  Engine engine = make_engine(config, std::make_shared<ScriptedBackend>(
                                          std::vector<ScriptedBackend::Entry>{}, false));
  size_t n = engine.store->ingest_path(kb, path);
  if (as_json) {
    std::cout << json{{"kb", kb}, {"documents", n},
                      {"chunks", engine.store->chunk_count(kb)}}.dump() << "\n";
  } else {
    std::cout << "ingested " << n << " documents into kb '" << kb << "' ("
              << engine.store->chunk_count(kb) << " chunks)\n";
  }
  return 0;
}

int cmd_ask(const EngineConfig& config, const std::string& scenario, const std::string& query,
            bool include_news, bool with_sentiment, const std::string& statements_path,
            bool as_json) {
  auto kind = scenario_kind_from(scenario);
  if (!kind) throw Error("invalid-request", "unknown scenario '" + scenario + "'");
  ScenarioOptions options;
  options.query = query;
  options.include_news = include_news;
  options.with_sentiment = with_sentiment;
  if (*kind == ScenarioKind::StatementAnalysis) {
    if (statements_path.empty()) {
      throw Error("invalid-request", "statements scenario needs --statements <file.json>");
    }
    options.statements = statements_from_json(load_json_file(statements_path));
  } else if (query.empty()) {
    throw Error("invalid-request", "--query must be non-empty");
  }

  Engine engine = make_engine(config);
  WorkflowTrace trace = run_scenario(*kind, options, engine.deps());
  persist_trace(trace, config.paths.runs_dir);
  if (trace.failure) {
    std::cerr << "workflow failed at step " << trace.failure->step << ": "
              << trace.failure->error << " (trace " << trace.trace_id << ")\n";
    return 1;
  }
  if (as_json) {
    std::cout << json{{"report", trace.final_report}, {"trace_id", trace.trace_id}}.dump()
              << "\n";
  } else {
    std::cout << trace.final_report << "\n";
    std::cerr << "trace: " << trace.trace_id << "\n";
  }
  return 0;
}

int cmd_datagen_cor(const EngineConfig& config, const std::string& docs_path,
                    const std::string& out_path, int n, bool as_json) {
  Engine engine = make_engine(config);
  auto deps = engine.deps();

  // context docs come from a JSONL of {id,title,body}
  std::ifstream in(docs_path);
  if (!in) throw Error("io-error", "cannot read " + docs_path);
  std::set<std::string> done;
  for (const auto& id : existing_seed_ids(out_path)) done.insert(id);

  int produced = 0;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line) && produced < n) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    Document doc;
    doc.id = j.value("id", docs_path + ":" + std::to_string(line_no));
    doc.title = j.value("title", "");
    doc.body = j.value("body", "");
    if (doc.body.empty()) continue;
    if (done.count(doc.id)) continue;  // resumable: skip produced seeds
    auto record = cor_generate(doc, deps.kb_names, *engine.backend, *engine.store,
                               *engine.prompts, deps.retrieval_k);
    append_instruction_records(out_path, {record});
    ++produced;
  }
  if (as_json) {
    std::cout << json{{"written", produced}, {"out", out_path}}.dump() << "\n";
  } else {
    std::cout << "wrote " << produced << " records to " << out_path << "\n";
  }
  return 0;
}

int cmd_datagen_selfinstruct(const EngineConfig& config, const std::string& seeds_path,
                             const std::string& out_path, int n, uint64_t rng_seed,
                             bool as_json) {
  Engine engine = make_engine(config);
  auto seeds = load_instruction_records(seeds_path);
  SelfInstructOptions options;
  options.rng_seed = rng_seed;
  SelfInstructStats stats;
  auto records = self_instruct_expand(seeds, n, *engine.backend, options, &stats);
  std::set<std::string> done;
  for (const auto& id : existing_seed_ids(out_path)) done.insert(id);
  std::vector<InstructionRecord> fresh;
  for (auto& record : records) {
    if (!done.count(record.provenance.seed_id)) fresh.push_back(std::move(record));
  }
  append_instruction_records(out_path, fresh);
  if (as_json) {
    json rejections = json::object();
    for (const auto& [reason, count] : stats.rejections) rejections[reason] = count;
    std::cout << json{{"accepted", stats.accepted},
                      {"attempts", stats.attempts},
                      {"written", fresh.size()},
                      {"rejections", rejections},
                      {"out", out_path}}.dump() << "\n";
  } else {
    std::cout << "accepted " << stats.accepted << "/" << stats.attempts << " records -> "
              << out_path << "\n";
    for (const auto& [reason, count] : stats.rejections) {
      std::cout << "rejected " << count << ": " << reason << "\n";
    }
  }
  return 0;
}

int cmd_datagen_selfchat(const EngineConfig& config, const std::string& topics_path,
                         const std::string& out_path, int turns, bool as_json) {
  Engine engine = make_engine(config);
  std::ifstream in(topics_path);
  if (!in) throw Error("io-error", "cannot read " + topics_path);
  std::set<std::string> done;
  {
    std::ifstream existing(out_path);
    std::string line;
    while (std::getline(existing, line)) {
      if (line.empty()) continue;
      try {
        done.insert(dialogue_from_jsonl_line(line).topic_seed);
      } catch (const std::exception&) {
      }
    }
  }
  std::ofstream out(out_path, std::ios::app);
  std::string topic;
  int produced = 0;
  while (std::getline(in, topic)) {
    if (topic.empty()) continue;
    if (done.count(topic)) continue;
    auto record = self_chat_dialogue(topic, turns, *engine.backend, *engine.prompts);
    out << dialogue_to_jsonl_line(record) << "\n";
    ++produced;
  }
  if (as_json) {
    std::cout << json{{"written", produced}, {"out", out_path}}.dump() << "\n";
  } else {
    std::cout << "wrote " << produced << " dialogues to " << out_path << "\n";
  }
  return 0;
}

int cmd_eval_judge(const EngineConfig& config, const std::string& in_path,
                   const std::string& out_path, bool as_json) {
  Engine engine = make_engine(config);
  std::ifstream in(in_path);
  if (!in) throw Error("io-error", "cannot read " + in_path);

  // rows: {"question": ..., "responses": {model: text}}
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> per_model;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    std::string question = j.value("question", "");
    if (!j.contains("responses")) continue;
    for (auto& [model, text] : j["responses"].items()) {
      per_model[model].push_back({question, text.get<std::string>()});
    }
  }

  json results = json::object();
  for (const auto& [model, qa] : per_model) {
    auto batch = judge_batch(qa, *engine.backend, *engine.prompts);
    json scores = json::array();
    for (const auto& s : batch.scores) {
      scores.push_back({{"accuracy", s.accuracy},
                        {"thoroughness", s.thoroughness},
                        {"clarity", s.clarity},
                        {"professionalism", s.professionalism},
                        {"overall", s.overall}});
    }
    results[model] = {{"means",
                       {{"accuracy", batch.mean_accuracy},
                        {"thoroughness", batch.mean_thoroughness},
                        {"clarity", batch.mean_clarity},
                        {"professionalism", batch.mean_professionalism},
                        {"overall", batch.mean_overall}}},
                      {"scores", scores}};
  }
  std::ofstream out(out_path, std::ios::trunc);
  out << results.dump(2) << "\n";
  if (as_json) {
    std::cout << json{{"models", per_model.size()}, {"out", out_path}}.dump() << "\n";
  } else {
    std::cout << "judged " << per_model.size() << " model(s) -> " << out_path << "\n";
  }
  return 0;
}

int cmd_eval_metrics(const std::string& metric, const std::string& pred_path,
                     const std::string& gold_path, bool as_json) {
  json pred = load_json_file(pred_path);
  json gold = load_json_file(gold_path);
  double value = 0.0;
  if (metric == "rouge") {
    if (!pred.is_array() || !gold.is_array() || pred.size() != gold.size()) {
      throw Error("invalid-request", "rouge expects two equal-length string arrays");
    }
    for (size_t i = 0; i < pred.size(); ++i) {
      value += rouge_l(pred[i].get<std::string>(), gold[i].get<std::string>());
    }
    if (!pred.empty()) value /= pred.size();
  } else if (metric == "f1") {
    std::set<std::string> p, g;
    for (const auto& item : pred) p.insert(item.get<std::string>());
    for (const auto& item : gold) g.insert(item.get<std::string>());
    value = f1_extraction(p, g);
  } else if (metric == "mc") {
    std::vector<std::string> responses = pred.get<std::vector<std::string>>();
    std::vector<std::string> answers = gold.get<std::vector<std::string>>();
    value = mc_accuracy(responses, answers);
  } else if (metric == "formula") {
    // rows: {extracted_formula, extracted_result, gold_formula, gold_result}
    std::vector<FormulaRecord> records;
    for (const auto& row : pred) {
      records.push_back({row.value("extracted_formula", ""), row.value("extracted_result", ""),
                         row.value("gold_formula", ""), row.value("gold_result", "")});
    }
    auto acc = formula_result_accuracy(records);
    if (as_json) {
      std::cout << json{{"formula_acc", acc.formula_acc},
                        {"formula_and_result_acc", acc.formula_and_result_acc}}.dump() << "\n";
    } else {
      std::cout << "formula accuracy: " << acc.formula_acc
                << "\nformula&result accuracy: " << acc.formula_and_result_acc << "\n";
    }
    return 0;
  } else {
    throw Error("invalid-request", "metric must be rouge|f1|mc|formula");
  }
  if (as_json) {
    std::cout << json{{"metric", metric}, {"value", value}}.dump() << "\n";
  } else {
    std::cout << metric << ": " << value << "\n";
  }
  return 0;
}

int cmd_eval_tally(const std::string& picks_path, bool as_json) {
  json j = load_json_file(picks_path);
  PickTally tally;
  if (!j.contains("wins") || !j.contains("total")) {
    throw Error("invalid-request", "picks file needs {wins: {model: n}, total: n}");
  }
  for (auto& [model, wins] : j["wins"].items()) {
    tally.wins[model] = wins.get<int>();
  }
  tally.total = j["total"].get<int>();
  json rates = json::object();
  for (const auto& [model, wins] : tally.wins) {
    (void)wins;
    rates[model] = acceptance_rate(tally, model);
  }
  if (as_json) {
    std::cout << json{{"total", tally.total}, {"acceptance_rates", rates}}.dump() << "\n";
  } else {
    for (const auto& [model, wins] : tally.wins) {
      std::printf("%s\t%d/%d\t%.2f%%\n", model.c_str(), wins, tally.total,
                  acceptance_rate(tally, model) * 100.0);
    }
  }
  return 0;
}

int cmd_eval_ttest(const std::string& a_path, const std::string& b_path, bool welch,
                   bool as_json) {
  auto a = load_json_file(a_path).get<std::vector<double>>();
  auto b = load_json_file(b_path).get<std::vector<double>>();
  auto result = welch ? welch_t_test(a, b) : paired_t_test(a, b);
  if (as_json) {
    std::cout << json{{"t_statistic", result.t_statistic},
                      {"p_value", result.p_value},
                      {"degrees_of_freedom", result.degrees_of_freedom},
                      {"n", result.n}}.dump() << "\n";
  } else {
    std::cout << "t = " << result.t_statistic << ", df = " << result.degrees_of_freedom
              << ", two-tailed p = " << result.p_value << "\n";
  }
  return 0;
}

int cmd_serve(const EngineConfig& config, int port_override) {
  Engine engine = make_engine(config);
  Service service(std::move(engine));
  int port = service.start(port_override > 0 ? port_override : config.service.port, "0.0.0.0");
  std::cout << "serving on port " << port << "\n";
  while (service.running()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finteam: multi-agent financial analysis engine"};
  app.require_subcommand(1);

  std::string config_path = "finteam.toml";
  bool as_json = false;
  app.add_option("--config", config_path, "engine config file (TOML)");
  app.add_flag("--json", as_json, "machine-readable JSON output");

  // calc
  std::string expression;
  auto* calc = app.add_subcommand("calc", "evaluate an arithmetic expression");
  calc->add_option("expression", expression, "expression to evaluate")->required();

  // ask
  std::string scenario, query, statements_path;
  bool include_news = false, with_sentiment = false;
  auto* ask = app.add_subcommand("ask", "run an analysis scenario");
  ask->add_option("--scenario", scenario, "macro|industry|company|statements")->required();
  ask->add_option("--query,-q", query, "the user question");
  ask->add_flag("--include-news", include_news, "industry: include the news step");
  ask->add_flag("--with-sentiment", with_sentiment, "company: add the sentiment pass");
  ask->add_option("--statements", statements_path, "statements JSON (statements scenario)");

  // ingest
  std::string kb_name, ingest_path;
  auto* ingest = app.add_subcommand("ingest", "ingest documents into a knowledge base");
  ingest->add_option("--kb", kb_name, "knowledge base name")->required();
  ingest->add_option("path", ingest_path, "file or directory (.txt/.md/.jsonl)")->required();

  // ratios
  std::string ratios_path;
  auto* ratios = app.add_subcommand("ratios", "evaluate the ratio catalog for statements");
  ratios->add_option("file", ratios_path, "statements JSON file")->required();

  // datagen
  auto* datagen = app.add_subcommand("datagen", "dataset construction pipelines");
  datagen->require_subcommand(1);
  std::string dg_seeds, dg_out, dg_docs, dg_topics;
  int dg_n = 10, dg_turns = 4;
  uint64_t dg_rng = 20250615;
  auto* dg_cor = datagen->add_subcommand("cor", "retrieval-grounded QA records");
  dg_cor->add_option("--docs", dg_docs, "context documents JSONL")->required();
  dg_cor->add_option("--out", dg_out, "output JSONL")->required();
  dg_cor->add_option("-n", dg_n, "max records");
  auto* dg_si = datagen->add_subcommand("selfinstruct", "few-shot instruction expansion");
  dg_si->add_option("--seeds", dg_seeds, "seed records JSONL")->required();
  dg_si->add_option("--out", dg_out, "output JSONL")->required();
  dg_si->add_option("-n", dg_n, "candidates to generate");
  dg_si->add_option("--rng-seed", dg_rng, "exemplar sampling seed");
  auto* dg_sc = datagen->add_subcommand("selfchat", "multi-turn dialogue construction");
  dg_sc->add_option("--seeds", dg_topics, "topic seeds, one per line")->required();
  dg_sc->add_option("--out", dg_out, "output JSONL")->required();
  dg_sc->add_option("--turns", dg_turns, "turns per dialogue (even)");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluation harness");
  eval->require_subcommand(1);
  std::string ev_in, ev_out = "judge_results.json", ev_metric, ev_pred, ev_gold, ev_a, ev_b;
  auto* ev_judge = eval->add_subcommand("judge", "LLM-judge rubric scoring");
  ev_judge->add_option("--in", ev_in, "JSONL of {question, responses{model:text}}")->required();
  ev_judge->add_option("--out", ev_out, "results JSON path");
  auto* ev_metrics = eval->add_subcommand("metrics", "task metrics");
  ev_metrics->add_option("--metric", ev_metric, "rouge|f1|mc|formula")->required();
  ev_metrics->add_option("--pred", ev_pred, "predictions JSON")->required();
  ev_metrics->add_option("--gold", ev_gold, "gold JSON");
  std::string ev_picks;
  auto* ev_tally = eval->add_subcommand("tally", "acceptance rates from a human pick tally");
  ev_tally->add_option("--picks", ev_picks, "JSON {wins:{model:n}, total:n}")->required();
  auto* ev_ttest = eval->add_subcommand("ttest", "paired two-tailed t-test");
  ev_ttest->add_option("--a", ev_a, "JSON array of scores (model A)")->required();
  ev_ttest->add_option("--b", ev_b, "JSON array of scores (model B)")->required();
  bool ev_welch = false;
  ev_ttest->add_flag("--welch", ev_welch, "unpaired Welch variant instead of paired");

  // serve
  int port = 0;
  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  serve->add_option("--port", port, "listen port (default from config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (*calc) return cmd_calc(expression, as_json);
    if (*ratios) return cmd_ratios(ratios_path, as_json);

    if (*ev_metrics) return cmd_eval_metrics(ev_metric, ev_pred, ev_gold, as_json);
    if (*ev_tally) return cmd_eval_tally(ev_picks, as_json);
    if (*ev_ttest) return cmd_eval_ttest(ev_a, ev_b, ev_welch, as_json);

    EngineConfig config = load_config(config_path);
    print_warnings(config);
    if (*ask) {
      return cmd_ask(config, scenario, query, include_news, with_sentiment, statements_path,
                     as_json);
    }
    if (*ingest) return cmd_ingest(config, kb_name, ingest_path, as_json);
    if (*dg_cor) return cmd_datagen_cor(config, dg_docs, dg_out, dg_n, as_json);
    if (*dg_si) return cmd_datagen_selfinstruct(config, dg_seeds, dg_out, dg_n, dg_rng, as_json);
    if (*dg_sc) return cmd_datagen_selfchat(config, dg_topics, dg_out, dg_turns, as_json);
    if (*ev_judge) return cmd_eval_judge(config, ev_in, ev_out, as_json);
    if (*serve) return cmd_serve(config, port);
  } catch (const Error& e) {
    std::cerr << "error (" << e.kind() << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "no subcommand executed\n";
  return 2;
}
