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

#include "finteam/equations.hpp"

#include <cmath>
#include <map>
#include <optional>

#include "finteam/error.hpp"
#include "finteam/text_util.hpp"

namespace finteam {

namespace {

// Affine form c0 + sum(coeff_i * var_i); absence means nonlinear.
struct Affine {
  std::map<std::string, double> coeffs;
  double constant = 0.0;

  bool constant_only() const { return coeffs.empty(); }
};

std::optional<Affine> extract_affine(const Expr& e);

std::optional<Affine> scale(std::optional<Affine> a, double factor) {
  if (!a) return std::nullopt;
  a->constant *= factor;
  for (auto& [k, v] : a->coeffs) v *= factor;
  return a;
}

std::optional<Affine> combine(std::optional<Affine> a, const std::optional<Affine>& b,
                              double sign) {
  if (!a || !b) return std::nullopt;
  a->constant += sign * b->constant;
  for (const auto& [k, v] : b->coeffs) a->coeffs[k] += sign * v;
  return a;
}

std::optional<Affine> extract_affine(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Number:
      return Affine{{}, e.number};
    case Expr::Kind::Variable: {
      Affine a;
      a.coeffs[e.name] = 1.0;
      return a;
    }
    case Expr::Kind::Unary:
      return scale(extract_affine(*e.args[0]), -1.0);
    case Expr::Kind::Binary: {
      auto lhs = extract_affine(*e.args[0]);
      auto rhs = extract_affine(*e.args[1]);
      switch (e.op) {
        case '+':
          return combine(std::move(lhs), rhs, 1.0);
        case '-':
          return combine(std::move(lhs), rhs, -1.0);
        case '*':
          if (!lhs || !rhs) return std::nullopt;
          if (lhs->constant_only()) return scale(std::move(rhs), lhs->constant);
          if (rhs->constant_only()) return scale(std::move(lhs), rhs->constant);
          return std::nullopt;
        case '/':
          if (!lhs || !rhs) return std::nullopt;
          if (!rhs->constant_only()) return std::nullopt;
          if (rhs->constant == 0.0) throw Error("division-by-zero", "division by zero");
          return scale(std::move(lhs), 1.0 / rhs->constant);
        case '^':
          if (!lhs || !rhs || !rhs->constant_only()) return std::nullopt;
          if (lhs->constant_only()) {
            return Affine{{}, eval_expression(e)};
          }
          if (rhs->constant == 1.0) return lhs;
          if (rhs->constant == 0.0) return Affine{{}, 1.0};
          return std::nullopt;
        default:
          return std::nullopt;
      }
    }
    case Expr::Kind::Call: {
      // a function of variable-free arguments folds to a constant
      for (const auto& arg : e.args) {
        if (!expr_variables(*arg).empty()) return std::nullopt;
      }
      return Affine{{}, eval_expression(e)};
    }
  }
  return std::nullopt;
}

void split_on(std::string_view text, std::string_view ascii, std::string_view wide,
              std::vector<std::string>& out) {
  std::string cur;
  size_t pos = 0;
  while (pos < text.size()) {
    if (text.compare(pos, ascii.size(), ascii) == 0) {
      out.push_back(cur);
      cur.clear();
      pos += ascii.size();
    } else if (!wide.empty() && text.compare(pos, wide.size(), wide) == 0) {
      out.push_back(cur);
      cur.clear();
      pos += wide.size();
    } else {
      cur += text[pos++];
    }
  }
  out.push_back(cur);
}

std::string trimmed(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

EquationSystem parse_equation_system(std::string_view text) {
  std::vector<std::string> parts;
  split_on(text, ";", "；", parts);
  EquationSystem system;
  for (const auto& raw : parts) {
    std::string part = trimmed(raw);
    if (part.empty()) continue;
    std::vector<std::string> sides;
    split_on(part, "=", "＝", sides);
    if (sides.size() != 2) {
      throw ParseError("syntax-error", "equation needs exactly one '='", 0);
    }
    ExprPtr lhs = parse_expression(trimmed(sides[0]));
    ExprPtr rhs = parse_expression(trimmed(sides[1]));
    for (const auto& side : {lhs, rhs}) {
      for (const auto& var : expr_variables(*side)) {
        bool seen = false;
        for (const auto& v : system.variables) {
          if (v == var) {
            seen = true;
            break;
          }
        }
        if (!seen) system.variables.push_back(var);
      }
    }
    system.equations.emplace_back(std::move(lhs), std::move(rhs));
  }
  if (system.equations.empty()) {
    throw ParseError("syntax-error", "no equations given", 0);
  }
  return system;
}

Assignment solve_equation_system(const EquationSystem& system) {
  const size_t m = system.equations.size();
  const size_t n = system.variables.size();
  if (n == 0) {
    throw Error("dimension-mismatch", "system has no variables");
  }

  // rows are lhs - rhs as affine forms: sum(coeff*var) + constant = 0
  std::vector<std::vector<double>> a(m, std::vector<double>(n + 1, 0.0));
  for (size_t i = 0; i < m; ++i) {
    auto lhs = extract_affine(*system.equations[i].first);
    auto rhs = extract_affine(*system.equations[i].second);
    if (!lhs || !rhs) {
      throw Error("nonlinear-equation", "equation " + std::to_string(i + 1) +
                                            " is not linear in the declared variables");
    }
    for (size_t j = 0; j < n; ++j) {
      double c = 0.0;
      auto itl = lhs->coeffs.find(system.variables[j]);
      if (itl != lhs->coeffs.end()) c += itl->second;
      auto itr = rhs->coeffs.find(system.variables[j]);
      if (itr != rhs->coeffs.end()) c -= itr->second;
      a[i][j] = c;
    }
    a[i][n] = rhs->constant - lhs->constant;  // move constant to rhs
  }

  double scale = 0.0;
  for (const auto& row : a) {
    for (size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(row[j]));
  }
  if (scale == 0.0) scale = 1.0;
  const double eps = 1e-12 * scale;

  // forward elimination with partial pivoting
  size_t rank = 0;
  std::vector<size_t> pivot_col;
  for (size_t col = 0; col < n && rank < m; ++col) {
    size_t best = rank;
    for (size_t r = rank + 1; r < m; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[best][col])) best = r;
    }
    if (std::abs(a[best][col]) <= eps) continue;
    std::swap(a[rank], a[best]);
    for (size_t r = 0; r < m; ++r) {
      if (r == rank) continue;
      double f = a[r][col] / a[rank][col];
      if (f == 0.0) continue;
      for (size_t c = col; c <= n; ++c) a[r][c] -= f * a[rank][c];
    }
    pivot_col.push_back(col);
    ++rank;
  }

  bool inconsistent = false;
  for (size_t r = rank; r < m; ++r) {
    if (std::abs(a[r][n]) > 1e-8 * std::max(1.0, scale)) inconsistent = true;
  }

  if (rank < n || inconsistent) {
    if (m == n && !inconsistent) {
      throw Error("singular-system", "system has no unique solution");
    }
    throw Error(m == n ? "singular-system" : "dimension-mismatch",
                inconsistent ? "system is inconsistent" : "system has no unique solution");
  }

  Assignment solution;
  for (size_t r = 0; r < rank; ++r) {
    solution[system.variables[pivot_col[r]]] = a[r][n] / a[r][pivot_col[r]];
  }

  // every equation must close to |lhs-rhs| <= 1e-8 (scaled) after substitution
  for (const auto& [lhs, rhs] : system.equations) {
    double l = eval_expression(*lhs, &solution);
    double r = eval_expression(*rhs, &solution);
    double tol = 1e-8 * std::max({1.0, std::abs(l), std::abs(r)});
    if (std::abs(l - r) > tol) {
      throw Error("singular-system", "solution fails residual check; system is ill-conditioned");
    }
  }
  return solution;
}

std::string format_assignment(const EquationSystem& system, const Assignment& solution) {
  std::string out;
  for (const auto& var : system.variables) {
    if (!out.empty()) out += ", ";
    out += var;
    out += '=';
    out += format_number(solution.at(var));
  }
  return out;
}

}  // namespace finteam
