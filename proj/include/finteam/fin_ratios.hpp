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
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace finteam {

struct BalanceSheet {
  double total_assets = 0;
  double current_assets = 0;
  double inventories = 0;
  double total_liabilities = 0;
  double current_liabilities = 0;
  double shareholders_equity = 0;
};

struct IncomeStatement {
  double revenue = 0;
  double cost_of_goods_sold = 0;
  double operating_income = 0;
  double net_income = 0;
  std::optional<double> prior_revenue;
};

struct CashFlow {
  double operating_cash_flow = 0;
  double investing_cash_flow = 0;
  double financing_cash_flow = 0;
};

struct FinancialStatements {
  BalanceSheet balance_sheet;
  IncomeStatement income_statement;
  CashFlow cash_flow;
  std::string period;
  std::string currency_unit;
};

enum class RatioCategory { Profitability, Liquidity, Leverage, Growth };
const char* ratio_category_str(RatioCategory c);

struct RatioEntry {
  std::string name;
  RatioCategory category = RatioCategory::Liquidity;
  std::string formula_expression;  // numbers substituted, parses under the calculator
  std::optional<double> value;
  std::optional<std::string> note;  // set exactly when value is absent
};

struct RatioReport {
  std::vector<RatioEntry> entries;
};

// Returns every invariant violation (accounting identity within 0.5%
// relative, current <= total assets, finite fields); empty means valid.
std::vector<std::string> validate(const FinancialStatements& statements);

// The ratio catalog with concrete numbers substituted into each formula:
// liquidity (current, quick), leverage (debt-to-assets, debt-to-equity),
// profitability (gross margin, net margin, ROA, ROE) and revenue growth when
// prior revenue is present. Values are not evaluated here.
std::vector<RatioEntry> ratio_catalog(const FinancialStatements& statements);

// Evaluates a catalog through the expression engine; zero denominators and
// other faults become notes, never values.
RatioReport evaluate_ratios(const std::vector<RatioEntry>& catalog);

double growth_rate(double previous, double current);

FinancialStatements statements_from_json(const nlohmann::json& j);
nlohmann::json statements_to_json(const FinancialStatements& statements);
nlohmann::json ratio_report_to_json(const RatioReport& report);

}  // namespace finteam
