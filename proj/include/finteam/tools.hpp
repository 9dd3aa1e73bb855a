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

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "finteam/expr.hpp"

namespace finteam {

enum class ToolName { Calculator, EquationSolver, Counter, ProbabilityTable };

const char* tool_name_str(ToolName name);
std::optional<ToolName> tool_name_from(std::string_view text);

// An inline tool command detected in generated text. The span covers
// "[Name(args)ARROW" in the scanned text, byte offsets on UTF-8 boundaries.
struct ToolCall {
  ToolName tool = ToolName::Calculator;
  std::string args_raw;
  size_t span_begin = 0;
  size_t span_end = 0;
};

// Result of executing one command. Exactly one of value/error is set; the
// rendered text is what gets spliced after the arrow.
struct ToolResult {
  std::string rendered;
  std::variant<std::monostate, double, long long, Assignment> value;
  std::optional<std::string> error;  // stable error kind, e.g. "division-by-zero"

  bool ok() const { return !error.has_value(); }
};

// A fully closed command "[Name(args)ARROW value]" found in finished text.
struct ClosedCall {
  ToolCall call;
  std::string embedded_value;
  size_t full_begin = 0;  // '['
  size_t full_end = 0;    // one past ']'
};

// Finds the earliest live (not yet closed) complete command header in a
// generation prefix. Returns nullopt while the header is still incomplete
// (partial name, unclosed args, arrow bytes cut mid-sequence). Malformed
// bracketed text is plain prose. Headers already closed with "value]" are
// skipped, which makes the protocol idempotent over finished text.
std::optional<ToolCall> detect_call(std::string_view text);

// Scans finished text for closed commands (datagen validation, trace checks).
std::vector<ClosedCall> find_closed_calls(std::string_view text);

// Removes every closed "[...ARROW...]" segment. Inverse of splicing: applied
// to a tool-loop result it recovers the backend's prose.
std::string strip_closed_calls(std::string_view text);

class ToolRegistry {
 public:
  using ToolFn = std::function<ToolResult(const std::string& args_raw)>;

  // All four standard tools registered, 1s timeout, 8 calls per response.
  static ToolRegistry with_default_tools();

  ToolResult execute(const ToolCall& call) const;

  void register_tool(ToolName name, ToolFn fn);
  void set_timeout(std::chrono::milliseconds timeout) { timeout_ = timeout; }
  void set_max_calls_per_response(int n) { max_calls_ = n; }
  int max_calls_per_response() const { return max_calls_; }
  std::chrono::milliseconds timeout() const { return timeout_; }

 private:
  std::map<ToolName, ToolFn> tools_;
  std::chrono::milliseconds timeout_{1000};
  int max_calls_ = 8;
};

// The individual tools, exposed for direct use and tests.
ToolResult run_calculator(const std::string& args_raw);
ToolResult run_equation_solver(const std::string& args_raw);
ToolResult run_counter(const std::string& args_raw);
ToolResult run_probability_table(const std::string& args_raw);

}  // namespace finteam
