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
#include <random>

#include <nlohmann/json.hpp>

#include "finteam/error.hpp"
#include "finteam/expr.hpp"
#include "finteam/fin_ratios.hpp"

using namespace finteam;

namespace {

FinancialStatements fixture() {
  FinancialStatements s;
  s.balance_sheet = {/*total_assets=*/1000, /*current_assets=*/200, /*inventories=*/50,
                     /*total_liabilities=*/600, /*current_liabilities=*/100,
                     /*shareholders_equity=*/400};
  s.income_statement = {/*revenue=*/500, /*cogs=*/300, /*operating_income=*/120,
                        /*net_income=*/80, /*prior_revenue=*/400};
  s.cash_flow = {90, -40, -10};
  s.period = "FY2025";
  s.currency_unit = "CNY million";
  return s;
}

const RatioEntry* find_entry(const std::vector<RatioEntry>& entries, const std::string& name) {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("accounting identity validation") {
  FinancialStatements s = fixture();
  s.balance_sheet.total_assets = 100;
  s.balance_sheet.current_assets = 40;
  s.balance_sheet.total_liabilities = 60;
  s.balance_sheet.shareholders_equity = 40;
  CHECK(validate(s).empty());

  s.balance_sheet.shareholders_equity = 50;  // 10% imbalance
  auto violations = validate(s);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("accounting identity") != std::string::npos);
}

TEST_CASE("current assets above total assets is a violation") {
  FinancialStatements s = fixture();
  s.balance_sheet.current_assets = 1200;
  auto violations = validate(s);
  REQUIRE_FALSE(violations.empty());
  CHECK(violations[0].find("exceed total_assets") != std::string::npos);
}

TEST_CASE("all violations are reported, not just the first") {
  FinancialStatements s = fixture();
  s.balance_sheet.current_assets = 1200;
  s.balance_sheet.shareholders_equity = 300;
  CHECK(validate(s).size() == 2);
}

TEST_CASE("catalog substitutes concrete numbers") {
  FinancialStatements s = fixture();
  auto catalog = ratio_catalog(s);
  const RatioEntry* current = find_entry(catalog, "current ratio");
  REQUIRE(current != nullptr);
  CHECK(current->formula_expression == "200/100");
  CHECK(current->category == RatioCategory::Liquidity);
  CHECK(catalog.size() == 9);  // growth entry present with prior revenue

  s.income_statement.prior_revenue.reset();
  CHECK(ratio_catalog(s).size() == 8);
}

TEST_CASE("every catalog expression parses under the calculator") {
  auto catalog = ratio_catalog(fixture());
  for (const auto& e : catalog) {
    CHECK_NOTHROW(parse_expression(e.formula_expression));
  }
  // negative equity still parses (wrapped in parens)
  FinancialStatements s = fixture();
  s.balance_sheet.shareholders_equity = -400;
  s.balance_sheet.total_liabilities = 1400;
  for (const auto& e : ratio_catalog(s)) {
    CHECK_NOTHROW(parse_expression(e.formula_expression));
  }
}

TEST_CASE("evaluated fixture matches direct arithmetic (oracle)") {
  FinancialStatements s = fixture();
  auto report = evaluate_ratios(ratio_catalog(s));
  REQUIRE(report.entries.size() == 9);
  struct Expected {
    const char* name;
    double value;
  } expected[] = {
      {"current ratio", 200.0 / 100.0},
      {"quick ratio", (200.0 - 50.0) / 100.0},
      {"debt-to-assets", 600.0 / 1000.0},
      {"debt-to-equity", 600.0 / 400.0},
      {"gross margin", (500.0 - 300.0) / 500.0},
      {"net margin", 80.0 / 500.0},
      {"return on assets", 80.0 / 1000.0},
      {"return on equity", 80.0 / 400.0},
      {"revenue growth", (500.0 - 400.0) / 400.0},
  };
  for (const auto& exp : expected) {
    const RatioEntry* entry = find_entry(report.entries, exp.name);
    REQUIRE_MESSAGE(entry != nullptr, exp.name);
    REQUIRE(entry->value.has_value());
    CHECK(*entry->value == doctest::Approx(exp.value).epsilon(1e-12));
  }
}

TEST_CASE("zero denominator entries carry a note, never a value") {
  FinancialStatements s = fixture();
  s.balance_sheet.current_liabilities = 0;
  auto report = evaluate_ratios(ratio_catalog(s));
  const RatioEntry* current = find_entry(report.entries, "current ratio");
  REQUIRE(current != nullptr);
  CHECK_FALSE(current->value.has_value());
  CHECK(current->note == "undefined (zero denominator)");
  for (const auto& e : report.entries) {
    CHECK(e.value.has_value() != e.note.has_value());
  }
}

TEST_CASE("scale invariance of every ratio (property)") {
  std::mt19937_64 rng(0x5ca1e);
  std::uniform_real_distribution<double> c_pick(0.001, 1000.0);
  for (int trial = 0; trial < 25; ++trial) {
    double c = c_pick(rng);
    FinancialStatements base = fixture();
    FinancialStatements scaled = base;
    auto scale = [&](double& v) { v *= c; };
    scale(scaled.balance_sheet.total_assets);
    scale(scaled.balance_sheet.current_assets);
    scale(scaled.balance_sheet.inventories);
    scale(scaled.balance_sheet.total_liabilities);
    scale(scaled.balance_sheet.current_liabilities);
    scale(scaled.balance_sheet.shareholders_equity);
    scale(scaled.income_statement.revenue);
    scale(scaled.income_statement.cost_of_goods_sold);
    scale(scaled.income_statement.operating_income);
    scale(scaled.income_statement.net_income);
    scaled.income_statement.prior_revenue = *base.income_statement.prior_revenue * c;

    auto base_report = evaluate_ratios(ratio_catalog(base));
    auto scaled_report = evaluate_ratios(ratio_catalog(scaled));
    REQUIRE(base_report.entries.size() == scaled_report.entries.size());
    for (size_t i = 0; i < base_report.entries.size(); ++i) {
      REQUIRE(base_report.entries[i].value.has_value());
      REQUIRE(scaled_report.entries[i].value.has_value());
      CHECK(std::abs(*base_report.entries[i].value - *scaled_report.entries[i].value) < 1e-12);
    }
    CHECK(std::abs(growth_rate(400 * c, 500 * c) - growth_rate(400, 500)) < 1e-12);
  }
}

TEST_CASE("growth rate") {
  CHECK(growth_rate(100, 110) == doctest::Approx(0.10));
  CHECK(growth_rate(100, 100) == doctest::Approx(0.0));
  // oracle: same computation through the expression engine
  CHECK(growth_rate(80, 100) ==
        doctest::Approx(eval_expression(*parse_expression("(100-80)/80"))));
  CHECK_THROWS_AS(growth_rate(0, 50), Error);
}

TEST_CASE("statements JSON round trip") {
  FinancialStatements s = fixture();
  auto j = statements_to_json(s);
  FinancialStatements back = statements_from_json(j);
  CHECK(back.balance_sheet.total_assets == s.balance_sheet.total_assets);
  CHECK(back.income_statement.prior_revenue == s.income_statement.prior_revenue);
  CHECK(back.period == "FY2025");
}
