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

#include "finteam/fin_ratios.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "finteam/error.hpp"
#include "finteam/expr.hpp"
#include "finteam/text_util.hpp"

namespace finteam {

using nlohmann::json;

const char* ratio_category_str(RatioCategory c) {
  switch (c) {
    case RatioCategory::Profitability: return "profitability";
    case RatioCategory::Liquidity: return "liquidity";
    case RatioCategory::Leverage: return "leverage";
    case RatioCategory::Growth: return "growth";
  }
  return "liquidity";
}

std::vector<std::string> validate(const FinancialStatements& s) {
  std::vector<std::string> violations;
  const auto& b = s.balance_sheet;
  const auto& i = s.income_statement;
  const auto& c = s.cash_flow;

  auto finite = [&](double v, const char* field) {
    if (!std::isfinite(v)) violations.push_back(std::string(field) + " is not finite");
  };
  finite(b.total_assets, "total_assets");
  finite(b.current_assets, "current_assets");
  finite(b.inventories, "inventories");
  finite(b.total_liabilities, "total_liabilities");
  finite(b.current_liabilities, "current_liabilities");
  finite(b.shareholders_equity, "shareholders_equity");
  finite(i.revenue, "revenue");
  finite(i.cost_of_goods_sold, "cost_of_goods_sold");
  finite(i.operating_income, "operating_income");
  finite(i.net_income, "net_income");
  if (i.prior_revenue) finite(*i.prior_revenue, "prior_revenue");
  finite(c.operating_cash_flow, "operating_cash_flow");
  finite(c.investing_cash_flow, "investing_cash_flow");
  finite(c.financing_cash_flow, "financing_cash_flow");
  if (!violations.empty()) return violations;

  double rhs = b.total_liabilities + b.shareholders_equity;
  double scale = std::max({std::abs(b.total_assets), std::abs(rhs), 1.0});
  if (std::abs(b.total_assets - rhs) > 0.005 * scale) {
    violations.push_back("accounting identity broken: total_assets " +
                         format_number(b.total_assets) + " != liabilities+equity " +
                         format_number(rhs) + " (beyond 0.5% tolerance)");
  }
  if (b.current_assets > b.total_assets) {
    violations.push_back("current_assets " + format_number(b.current_assets) +
                         " exceed total_assets " + format_number(b.total_assets));
  }
  return violations;
}

namespace {

// substitution that survives parse -> eval exactly; negatives get parens
std::string num(double v) {
  std::string s = format_number_roundtrip(v);
  if (!s.empty() && s[0] == '-') return "(" + s + ")";
  return s;
}

}  // namespace

std::vector<RatioEntry> ratio_catalog(const FinancialStatements& s) {
  const auto& b = s.balance_sheet;
  const auto& i = s.income_statement;
  std::vector<RatioEntry> out;

  auto add = [&](const char* name, RatioCategory cat, const std::string& expr) {
    RatioEntry e;
    e.name = name;
    e.category = cat;
    e.formula_expression = expr;
    out.push_back(std::move(e));
  };

  add("current ratio", RatioCategory::Liquidity,
      num(b.current_assets) + "/" + num(b.current_liabilities));
  add("quick ratio", RatioCategory::Liquidity,
      "(" + num(b.current_assets) + "-" + num(b.inventories) + ")/" +
          num(b.current_liabilities));
  add("debt-to-assets", RatioCategory::Leverage,
      num(b.total_liabilities) + "/" + num(b.total_assets));
  add("debt-to-equity", RatioCategory::Leverage,
      num(b.total_liabilities) + "/" + num(b.shareholders_equity));
  add("gross margin", RatioCategory::Profitability,
      "(" + num(i.revenue) + "-" + num(i.cost_of_goods_sold) + ")/" + num(i.revenue));
  add("net margin", RatioCategory::Profitability,
      num(i.net_income) + "/" + num(i.revenue));
  add("return on assets", RatioCategory::Profitability,
      num(i.net_income) + "/" + num(b.total_assets));
  add("return on equity", RatioCategory::Profitability,
      num(i.net_income) + "/" + num(b.shareholders_equity));
  if (i.prior_revenue) {
    add("revenue growth", RatioCategory::Growth,
        "(" + num(i.revenue) + "-" + num(*i.prior_revenue) + ")/" + num(*i.prior_revenue));
  }
  return out;
}

RatioReport evaluate_ratios(const std::vector<RatioEntry>& catalog) {
  RatioReport report;
  for (const auto& entry : catalog) {
    RatioEntry evaluated = entry;
    try {
      evaluated.value = eval_expression(*parse_expression(entry.formula_expression));
      evaluated.note.reset();
    } catch (const Error& e) {
      evaluated.value.reset();
      if (e.kind() == "division-by-zero") {
        evaluated.note = "undefined (zero denominator)";
      } else {
        evaluated.note = "undefined (" + e.kind() + ")";
      }
    }
    report.entries.push_back(std::move(evaluated));
  }
  return report;
}

double growth_rate(double previous, double current) {
  if (previous == 0.0) {
    throw Error("division-by-zero", "growth rate undefined for zero base period");
  }
  return (current - previous) / previous;
}

FinancialStatements statements_from_json(const json& j) {
  FinancialStatements s;
  const json& b = j.at("balance_sheet");
  s.balance_sheet.total_assets = b.at("total_assets").get<double>();
  s.balance_sheet.current_assets = b.at("current_assets").get<double>();
  s.balance_sheet.inventories = b.value("inventories", 0.0);
  s.balance_sheet.total_liabilities = b.at("total_liabilities").get<double>();
  s.balance_sheet.current_liabilities = b.at("current_liabilities").get<double>();
  s.balance_sheet.shareholders_equity = b.at("shareholders_equity").get<double>();
  const json& i = j.at("income_statement");
  s.income_statement.revenue = i.at("revenue").get<double>();
  s.income_statement.cost_of_goods_sold = i.value("cost_of_goods_sold", 0.0);
  s.income_statement.operating_income = i.value("operating_income", 0.0);
  s.income_statement.net_income = i.at("net_income").get<double>();
  if (i.contains("prior_revenue") && !i["prior_revenue"].is_null()) {
    s.income_statement.prior_revenue = i["prior_revenue"].get<double>();
  }
  const json& c = j.at("cash_flow");
  s.cash_flow.operating_cash_flow = c.value("operating_cash_flow", 0.0);
  s.cash_flow.investing_cash_flow = c.value("investing_cash_flow", 0.0);
  s.cash_flow.financing_cash_flow = c.value("financing_cash_flow", 0.0);
  s.period = j.value("period", "");
  s.currency_unit = j.value("currency_unit", "");
  return s;
}

json statements_to_json(const FinancialStatements& s) {
  json i = {{"revenue", s.income_statement.revenue},
            {"cost_of_goods_sold", s.income_statement.cost_of_goods_sold},
            {"operating_income", s.income_statement.operating_income},
            {"net_income", s.income_statement.net_income}};
  if (s.income_statement.prior_revenue) i["prior_revenue"] = *s.income_statement.prior_revenue;
  return json{
      {"balance_sheet",
       {{"total_assets", s.balance_sheet.total_assets},
        {"current_assets", s.balance_sheet.current_assets},
        {"inventories", s.balance_sheet.inventories},
        {"total_liabilities", s.balance_sheet.total_liabilities},
        {"current_liabilities", s.balance_sheet.current_liabilities},
        {"shareholders_equity", s.balance_sheet.shareholders_equity}}},
      {"income_statement", i},
      {"cash_flow",
       {{"operating_cash_flow", s.cash_flow.operating_cash_flow},
        {"investing_cash_flow", s.cash_flow.investing_cash_flow},
        {"financing_cash_flow", s.cash_flow.financing_cash_flow}}},
      {"period", s.period},
      {"currency_unit", s.currency_unit}};
}

json ratio_report_to_json(const RatioReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    json item = {{"name", e.name},
                 {"category", ratio_category_str(e.category)},
                 {"formula_expression", e.formula_expression}};
    if (e.value) {
      item["value"] = *e.value;
    } else {
      item["value"] = nullptr;
      item["note"] = e.note.value_or("undefined");
    }
    entries.push_back(std::move(item));
  }
  return json{{"entries", entries}};
}

}  // namespace finteam
