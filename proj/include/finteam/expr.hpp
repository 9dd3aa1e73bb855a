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
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace finteam {

// Variable bindings for evaluation; ordered map keeps output deterministic.
using Assignment = std::map<std::string, double>;

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Arithmetic AST. Binary ops are '+','-','*','/','^'; the only unary op is
// negation. Unicode operator synonyms are normalized at parse time.
struct Expr {
  enum class Kind { Number, Variable, Unary, Binary, Call };

  Kind kind = Kind::Number;
  double number = 0.0;
  std::string name;           // variable or function name
  char op = 0;                // binary/unary operator
  std::vector<ExprPtr> args;  // operands / call arguments

  static ExprPtr make_number(double v);
  static ExprPtr make_variable(std::string name);
  static ExprPtr make_unary(ExprPtr operand);
  static ExprPtr make_binary(char op, ExprPtr lhs, ExprPtr rhs);
  static ExprPtr make_call(std::string name, std::vector<ExprPtr> args);
};

// Parses an arithmetic expression. Precedence: ^ > unary minus > * / > + -,
// with ^ right-associative. Percent literals ("5%") normalize to v/100.
// Supported functions: sqrt, abs, ln, log10, exp, min, max, pow.
// Throws ParseError with kinds "syntax-error", "unknown-function",
// "unbalanced-parentheses".
ExprPtr parse_expression(std::string_view text);

// Evaluates in IEEE double arithmetic. Throws Error with kinds
// "division-by-zero", "domain-error", "unbound-variable",
// "non-finite-result".
double eval_expression(const Expr& expr, const Assignment* bindings = nullptr);

// Prints with the fewest parentheses that preserve structure; reparsing the
// output yields a structurally identical AST.
std::string print_expression(const Expr& expr);

bool expr_equal(const Expr& a, const Expr& b);

// Names of all variables in first-appearance (pre-order) order.
std::vector<std::string> expr_variables(const Expr& expr);

}  // namespace finteam
