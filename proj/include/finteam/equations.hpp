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

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "finteam/expr.hpp"

namespace finteam {

// A system of equations, each stored as (lhs, rhs) expression pair. The
// variable list is ordered by first appearance and drives solution output
// order.
struct EquationSystem {
  std::vector<std::pair<ExprPtr, ExprPtr>> equations;
  std::vector<std::string> variables;
};

// Input convention: equations separated by ';' (full-width '；' accepted),
// each with exactly one '=' (or '＝') splitting lhs from rhs.
EquationSystem parse_equation_system(std::string_view text);

// Solves a linear system by Gaussian elimination with partial pivoting.
// Linearity is verified by symbolic coefficient extraction first. Throws
// Error with kinds "nonlinear-equation", "singular-system",
// "dimension-mismatch".
Assignment solve_equation_system(const EquationSystem& system);

// "x=2, y=1" in the system's variable order, canonical number formatting.
std::string format_assignment(const EquationSystem& system, const Assignment& solution);

}  // namespace finteam
