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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "finteam/config.hpp"
#include "finteam/error.hpp"
#include "finteam/service.hpp"

using namespace finteam;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path prompts_dir() {
  fs::path candidates[] = {"prompts", "../prompts", "../../prompts"};
  for (const auto& c : candidates) {
    if (fs::is_directory(c)) return c;
  }
  return fs::path(FINTEAM_PROMPTS_DIR);
}

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("finteam_svc_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

EngineConfig base_config(const std::string& tag) {
  auto root = fresh_dir(tag);
  EngineConfig config;
  config.backend.base_url = "http://unused.invalid";
  config.backend.model = "test";
  config.paths.data_dir = (root / "kb").string();
  config.paths.prompts_dir = prompts_dir().string();
  config.paths.runs_dir = (root / "runs").string();
  return config;
}

std::shared_ptr<ScriptedBackend> macro_backend() {
  return std::make_shared<ScriptedBackend>(
      std::vector<ScriptedBackend::Entry>{
          {"", R"({"keywords":["CPI"]})"},
          {"", "CPI explained."},
          {"", "supplementary data summary"},
          {"", "the final macro report"},
      },
      true, 3);
}

}  // namespace

TEST_CASE("minimal config gets defaults filled") {
  auto config = parse_config_text(
      "[backend]\nbase_url = \"http://localhost:9999/v1\"\nmodel = \"m\"\n");
  CHECK(config.backend.base_url == "http://localhost:9999/v1");
  CHECK(config.limits.max_calls_per_response == 8);
  CHECK(config.limits.retries == 2);
  CHECK(config.limits.context_budget == 3000);
  CHECK(config.embedding.mode == "fallback");
  CHECK(config.paths.runs_dir == "runs");
  CHECK(config.warnings.empty());
}

TEST_CASE("remote embedding requires a base url") {
  try {
    parse_config_text(
        "[backend]\nbase_url = \"http://x\"\nmodel = \"m\"\n[embedding]\nmode = \"remote\"\n");
    FAIL("expected config-validation");
  } catch (const Error& e) {
    CHECK(e.kind() == "config-validation");
    CHECK(std::string(e.what()).find("embedding.base_url") != std::string::npos);
  }
}

TEST_CASE("validation reports all failures at once") {
  try {
    parse_config_text("[embedding]\nmode = \"nonsense\"\n[retrieval]\nk = 0\n");
    FAIL("expected config-validation");
  } catch (const Error& e) {
    std::string what = e.what();
    CHECK(what.find("backend.base_url") != std::string::npos);
    CHECK(what.find("embedding.mode") != std::string::npos);
    CHECK(what.find("retrieval.k") != std::string::npos);
  }
}

TEST_CASE("unknown keys warn instead of erroring") {
  auto config = parse_config_text(
      "[backend]\nbase_url = \"http://x\"\nmodel = \"m\"\nfuture_knob = 7\n");
  REQUIRE(config.warnings.size() == 1);
  CHECK(config.warnings[0].find("backend.future_knob") != std::string::npos);
}

TEST_CASE("parse errors carry the line number") {
  try {
    parse_config_text("[backend]\nbase_url = \"ok\"\nbroken line here\n");
    FAIL("expected config-parse");
  } catch (const ParseError& e) {
    CHECK(e.kind() == "config-parse");
    CHECK(e.offset() == 3);
  }
}

TEST_CASE("env interpolation replaces placeholders in strings") {
  setenv("FINTEAM_TEST_URL", "http://from-env:1234", 1);
  auto config = parse_config_text(
      "[backend]\nbase_url = \"${FINTEAM_TEST_URL}/v1\"\nmodel = \"m\"\n");
  CHECK(config.backend.base_url == "http://from-env:1234/v1");
  unsetenv("FINTEAM_TEST_URL");
}

TEST_CASE("comments and arrays parse") {
  auto config = parse_config_text(
      "# engine config\n[backend]\nbase_url = \"http://x\"  # inline\nmodel = \"m\"\n"
      "[retrieval]\nkbs = [\"news\", \"reports\"]\nk = 5\n");
  CHECK(config.retrieval.kbs == std::vector<std::string>{"news", "reports"});
  CHECK(config.retrieval.k == 5);
}

TEST_CASE("health endpoint responds") {
  Engine engine = make_engine(base_config("health"), macro_backend());
  Service service(std::move(engine));
  int port = service.start();
  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/health");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["status"] == "ok");
}

TEST_CASE("analyze endpoint runs a workflow and persists the trace") {
  auto config = base_config("analyze");
  Engine engine = make_engine(config, macro_backend());
  engine.store->ingest_document({"d1", "reports", "t", "CPI data document.", {}});
  Service service(std::move(engine));
  int port = service.start();
  httplib::Client client("127.0.0.1", port);

  json body = {{"scenario", "macro"}, {"query", "inflation outlook?"}};
  auto res = client.Post("/v1/analyze", body.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  json reply = json::parse(res->body);
  CHECK(reply["report"] == "the final macro report");
  std::string trace_id = reply["trace_id"];
  CHECK_FALSE(trace_id.empty());

  // trace was persisted before the response
  auto trace_res = client.Get("/v1/trace/" + trace_id);
  REQUIRE(trace_res);
  CHECK(trace_res->status == 200);
  json trace = json::parse(trace_res->body);
  CHECK(trace["final_report"] == "the final macro report");
  CHECK(trace["steps"].size() == 4);
}

TEST_CASE("unknown scenario returns 400 with a structured error") {
  Engine engine = make_engine(base_config("bad_scenario"), macro_backend());
  Service service(std::move(engine));
  int port = service.start();
  httplib::Client client("127.0.0.1", port);
  auto res = client.Post("/v1/analyze", R"({"scenario":"astrology","query":"?"})",
                         "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  json reply = json::parse(res->body);
  CHECK(reply.contains("error"));
  CHECK(reply.contains("step"));
}

TEST_CASE("missing trace returns 404") {
  Engine engine = make_engine(base_config("no_trace"), macro_backend());
  Service service(std::move(engine));
  int port = service.start();
  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/v1/trace/20200101T000000-0-macro");
  REQUIRE(res);
  CHECK(res->status == 404);
}

TEST_CASE("scripted backend loads from a json file") {
  auto dir = fresh_dir("script");
  std::string path = (dir / "script.json").string();
  {
    std::ofstream out(path);
    out << R"({"strict": false, "entries": [{"matcher": "hello", "reply": "world"}]})";
  }
  auto backend = scripted_backend_from_file(path);
  ChatRequest req;
  req.messages = {{Role::User, "say hello"}};
  CHECK(backend->complete(req) == "world");
}

namespace {

struct CliResult {
  int exit_code = -1;
  std::string stdout_text;
};

CliResult run_cli(const std::string& args) {
  CliResult result;
  std::string cmd = std::string(FINTEAM_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buffer[4096];
  size_t n;
  while ((n = fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
    result.stdout_text.append(buffer, n);
  }
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

}  // namespace

TEST_CASE("cli exit-code contract and --json schemas") {
  // success path: calc prints the canonical rendering
  auto calc = run_cli("calc \"(1+0.05)^10\"");
  CHECK(calc.exit_code == 0);
  CHECK(calc.stdout_text == "1.628895\n");

  auto calc_json = run_cli("--json calc \"2+2\"");
  CHECK(calc_json.exit_code == 0);
  json parsed = json::parse(calc_json.stdout_text, nullptr, false);
  REQUIRE_FALSE(parsed.is_discarded());
  CHECK(parsed["rendered"] == "4");
  CHECK(parsed["value"] == 4.0);

  // usage error: ask without --scenario
  CHECK(run_cli("ask").exit_code == 2);
  CHECK(run_cli("nonsense-subcommand").exit_code == 2);

  // domain error: division by zero
  CHECK(run_cli("calc \"1/0\"").exit_code == 1);

  // ratios --json emits a schema-complete report
  auto dir = fresh_dir("cli_ratios");
  std::string statements_path = (dir / "st.json").string();
  {
    std::ofstream out(statements_path);
    out << R"({"balance_sheet":{"total_assets":100,"current_assets":40,"inventories":10,)"
        << R"("total_liabilities":60,"current_liabilities":20,"shareholders_equity":40},)"
        << R"("income_statement":{"revenue":50,"cost_of_goods_sold":30,"net_income":8},)"
        << R"("cash_flow":{}})";
  }
  auto ratios = run_cli("--json ratios " + statements_path);
  CHECK(ratios.exit_code == 0);
  json report = json::parse(ratios.stdout_text, nullptr, false);
  REQUIRE_FALSE(report.is_discarded());
  REQUIRE(report.contains("entries"));
  CHECK(report["entries"].size() == 8);  // no prior revenue, no growth entry
  for (const auto& entry : report["entries"]) {
    CHECK(entry.contains("name"));
    CHECK(entry.contains("category"));
    CHECK(entry.contains("formula_expression"));
    CHECK(entry.contains("value"));
  }

  // ttest --json
  std::string a_path = (dir / "a.json").string();
  std::string b_path = (dir / "b.json").string();
  std::ofstream(a_path) << "[1,2,3]";
  std::ofstream(b_path) << "[1,1,1]";
  auto ttest = run_cli("--json eval ttest --a " + a_path + " --b " + b_path);
  CHECK(ttest.exit_code == 0);
  json tt = json::parse(ttest.stdout_text, nullptr, false);
  REQUIRE_FALSE(tt.is_discarded());
  CHECK(tt["degrees_of_freedom"] == 2);
  CHECK(std::abs(tt["t_statistic"].get<double>() - std::sqrt(3.0)) < 1e-6);

  // tally --json reproduces the acceptance-rate arithmetic
  std::string picks_path = (dir / "picks.json").string();
  std::ofstream(picks_path)
      << R"({"wins":{"m1":93,"m2":14,"m3":8,"m4":6,"m5":29},"total":150})";
  auto tally = run_cli("--json eval tally --picks " + picks_path);
  CHECK(tally.exit_code == 0);
  json rates = json::parse(tally.stdout_text, nullptr, false);
  REQUIRE_FALSE(rates.is_discarded());
  CHECK(rates["acceptance_rates"]["m1"] == 0.62);

  // metrics --json
  std::string pred_path = (dir / "pred.json").string();
  std::string gold_path = (dir / "gold.json").string();
  std::ofstream(pred_path) << R"(["a b c d"])";
  std::ofstream(gold_path) << R"(["a c d"])";
  auto metrics = run_cli("--json eval metrics --metric rouge --pred " + pred_path +
                         " --gold " + gold_path);
  CHECK(metrics.exit_code == 0);
  json m = json::parse(metrics.stdout_text, nullptr, false);
  REQUIRE_FALSE(m.is_discarded());
  CHECK(std::abs(m["value"].get<double>() - 0.857142857) < 1e-4);
}

TEST_CASE("cli ask and ingest run end-to-end against a scripted config") {
  auto dir = fresh_dir("cli_ask");
  std::string script_path = (dir / "script.json").string();
  {
    std::ofstream out(script_path);
    json script = {
        {"strict", false},
        {"entries",
         {{{"matcher", "CLIQ"}, {"reply", R"({"keywords":["CPI"]})"}},
          {{"matcher", "Briefly explain"}, {"reply", "explained"}},
          {{"matcher", "CLIQ"}, {"reply", "analyst summary"}},
          {{"matcher", "CLIQ"}, {"reply", "cli macro report"}}}}};
    out << script.dump();
  }
  std::string config_path = (dir / "finteam.toml").string();
  {
    std::ofstream out(config_path);
    out << "[backend]\nscript_path = \"" << script_path << "\"\n"
        << "[paths]\ndata_dir = \"" << (dir / "kb").string() << "\"\n"
        << "prompts_dir = \"" << prompts_dir().string() << "\"\n"
        << "runs_dir = \"" << (dir / "runs").string() << "\"\n";
  }
  std::string docs_dir = (dir / "docs").string();
  fs::create_directories(docs_dir);
  std::ofstream(docs_dir + "/a.txt") << "CPI rose 2.1% this quarter.";

  auto ingest = run_cli("--json --config " + config_path + " ingest --kb reports " + docs_dir);
  CHECK(ingest.exit_code == 0);
  json ingest_out = json::parse(ingest.stdout_text, nullptr, false);
  REQUIRE_FALSE(ingest_out.is_discarded());
  CHECK(ingest_out["documents"] == 1);

  auto ask = run_cli("--json --config " + config_path +
                     " ask --scenario macro -q \"CLIQ inflation\"");
  CHECK(ask.exit_code == 0);
  json ask_out = json::parse(ask.stdout_text, nullptr, false);
  REQUIRE_FALSE(ask_out.is_discarded());
  CHECK(ask_out["report"] == "cli macro report");
  CHECK_FALSE(ask_out["trace_id"].get<std::string>().empty());
}

TEST_CASE("workflow failures surface as 502 with the failing step") {
  auto config = base_config("fail");
  // script exhausts after step 1
  auto backend = std::make_shared<ScriptedBackend>(
      std::vector<ScriptedBackend::Entry>{{"", R"({"keywords":["CPI"]})"}});
  Engine engine = make_engine(config, backend);
  Service service(std::move(engine));
  int port = service.start();
  httplib::Client client("127.0.0.1", port);
  auto res = client.Post("/v1/analyze", R"({"scenario":"macro","query":"q"})",
                         "application/json");
  REQUIRE(res);
  CHECK(res->status == 502);
  json reply = json::parse(res->body);
  CHECK(reply["step"].get<std::string>().find("workflow step 2") != std::string::npos);
}
