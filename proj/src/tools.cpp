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

#include "finteam/tools.hpp"

#include <array>

#include "finteam/equations.hpp"
#include "finteam/error.hpp"
#include "finteam/normal.hpp"
#include "finteam/text_util.hpp"

namespace finteam {

namespace {

constexpr std::string_view kArrowUtf8 = "→";  // U+2192
constexpr std::string_view kArrowAscii = "->";

const std::array<std::pair<std::string_view, ToolName>, 4> kToolNames = {{
    {"Calculator", ToolName::Calculator},
    {"EquationSolver", ToolName::EquationSolver},
    {"Counter", ToolName::Counter},
    {"ProbabilityTable", ToolName::ProbabilityTable},
}};

// Outcome of matching one candidate '[' position.
enum class HeaderMatch { Complete, Incomplete, Malformed };

struct HeaderScan {
  HeaderMatch outcome = HeaderMatch::Malformed;
  ToolCall call;
  size_t resume_at = 0;  // where to continue scanning after a malformed header
};

bool is_prefix(std::string_view text, std::string_view candidate) {
  return candidate.size() <= text.size() && text.substr(0, candidate.size()) == candidate;
}

// Attempts to match "[Name(args)ARROW" at `begin` (which points at '[').
HeaderScan scan_header(std::string_view text, size_t begin) {
  HeaderScan scan;
  scan.resume_at = begin + 1;
  size_t pos = begin + 1;
  std::string_view rest = text.substr(pos);

  ToolName matched{};
  bool found = false;
  for (const auto& [name, tool] : kToolNames) {
    if (is_prefix(rest, name)) {
      matched = tool;
      found = true;
      pos += name.size();
      break;
    }
    if (rest.size() < name.size() && is_prefix(name, rest)) {
      scan.outcome = HeaderMatch::Incomplete;  // could still complete next chunk
      return scan;
    }
  }
  if (!found) return scan;

  if (pos >= text.size()) {
    scan.outcome = HeaderMatch::Incomplete;
    return scan;
  }
  if (text[pos] != '(') return scan;
  ++pos;

  size_t args_begin = pos;
  int depth = 1;
  while (pos < text.size()) {
    char c = text[pos];
    if (c == '(') {
      ++depth;
    } else if (c == ')') {
      if (--depth == 0) break;
    } else if (c == ']') {
      return scan;  // bracket inside args: not a command, prose
    } else if (c == '[') {
      // a nested command header poisons the outer candidate
      for (const auto& [name, tool] : kToolNames) {
        (void)tool;
        std::string_view inner = text.substr(pos + 1);
        if (is_prefix(inner, name) &&
            pos + 1 + name.size() < text.size() && text[pos + 1 + name.size()] == '(') {
          scan.resume_at = pos;  // rescan from the inner '['
          return scan;
        }
      }
    }
    ++pos;
  }
  if (pos >= text.size()) {
    scan.outcome = HeaderMatch::Incomplete;
    return scan;
  }
  size_t args_end = pos;
  ++pos;  // past ')'

  // arrow: U+2192 or "->"; partial byte sequences mean "wait for more"
  std::string_view tail = text.substr(pos);
  size_t arrow_len = 0;
  if (is_prefix(tail, kArrowUtf8)) {
    arrow_len = kArrowUtf8.size();
  } else if (is_prefix(tail, kArrowAscii)) {
    arrow_len = kArrowAscii.size();
  } else if (tail.empty() || is_prefix(kArrowUtf8, tail) || is_prefix(kArrowAscii, tail)) {
    scan.outcome = HeaderMatch::Incomplete;
    return scan;
  } else {
    return scan;
  }

  scan.outcome = HeaderMatch::Complete;
  scan.call.tool = matched;
  scan.call.args_raw = std::string(text.substr(args_begin, args_end - args_begin));
  scan.call.span_begin = begin;
  scan.call.span_end = pos + arrow_len;
  return scan;
}

// After a complete header, decides whether the command is already closed:
// a ']' with no '[' in between means "value]" follows the arrow.
enum class Closure { Closed, Open, Undecided };

Closure closure_after(std::string_view text, size_t arrow_end, size_t* close_pos) {
  for (size_t pos = arrow_end; pos < text.size(); ++pos) {
    if (text[pos] == ']') {
      if (close_pos) *close_pos = pos;
      return Closure::Closed;
    }
    if (text[pos] == '[') return Closure::Open;
  }
  return Closure::Open;  // end of prefix: treat as live, the loop cuts at the arrow
}

}  // namespace

const char* tool_name_str(ToolName name) {
  switch (name) {
    case ToolName::Calculator: return "Calculator";
    case ToolName::EquationSolver: return "EquationSolver";
    case ToolName::Counter: return "Counter";
    case ToolName::ProbabilityTable: return "ProbabilityTable";
  }
  return "Calculator";
}

std::optional<ToolName> tool_name_from(std::string_view text) {
  for (const auto& [name, tool] : kToolNames) {
    if (text == name) return tool;
  }
  return std::nullopt;
}

std::optional<ToolCall> detect_call(std::string_view text) {
  size_t pos = 0;
  while (true) {
    size_t bracket = text.find('[', pos);
    if (bracket == std::string_view::npos) return std::nullopt;
    HeaderScan scan = scan_header(text, bracket);
    switch (scan.outcome) {
      case HeaderMatch::Incomplete:
        return std::nullopt;  // nothing after this point can be complete yet
      case HeaderMatch::Malformed:
        pos = scan.resume_at;
        break;
      case HeaderMatch::Complete: {
        size_t close = 0;
        if (closure_after(text, scan.call.span_end, &close) == Closure::Closed) {
          pos = close + 1;  // already executed in an earlier round: skip
          break;
        }
        return scan.call;
      }
    }
  }
}

std::vector<ClosedCall> find_closed_calls(std::string_view text) {
  std::vector<ClosedCall> calls;
  size_t pos = 0;
  while (true) {
    size_t bracket = text.find('[', pos);
    if (bracket == std::string_view::npos) return calls;
    HeaderScan scan = scan_header(text, bracket);
    if (scan.outcome == HeaderMatch::Complete) {
      size_t close = 0;
      if (closure_after(text, scan.call.span_end, &close) == Closure::Closed) {
        ClosedCall closed;
        closed.call = scan.call;
        closed.embedded_value =
            std::string(text.substr(scan.call.span_end, close - scan.call.span_end));
        closed.full_begin = bracket;
        closed.full_end = close + 1;
        calls.push_back(std::move(closed));
        pos = close + 1;
        continue;
      }
      pos = scan.call.span_end;
      continue;
    }
    if (scan.outcome == HeaderMatch::Incomplete) return calls;
    pos = scan.resume_at;
  }
}

std::string strip_closed_calls(std::string_view text) {
  std::string out;
  size_t pos = 0;
  for (const auto& closed : find_closed_calls(text)) {
    out += text.substr(pos, closed.full_begin - pos);
    pos = closed.full_end;
  }
  out += text.substr(pos);
  return out;
}

ToolResult run_calculator(const std::string& args_raw) {
  ToolResult result;
  try {
    double value = eval_expression(*parse_expression(args_raw));
    result.rendered = format_number(value);
    result.value = value;
  } catch (const Error& e) {
    result.rendered = "ERROR: " + e.kind();
    result.error = e.kind();
  }
  return result;
}

ToolResult run_equation_solver(const std::string& args_raw) {
  ToolResult result;
  try {
    EquationSystem system = parse_equation_system(args_raw);
    Assignment solution = solve_equation_system(system);
    result.rendered = format_assignment(system, solution);
    result.value = solution;
  } catch (const Error& e) {
    result.rendered = "ERROR: " + e.kind();
    result.error = e.kind();
  }
  return result;
}

ToolResult run_counter(const std::string& args_raw) {
  ToolResult result;
  long long n = count_samples_text(args_raw);
  result.rendered = std::to_string(n);
  result.value = n;
  return result;
}

ToolResult run_probability_table(const std::string& args_raw) {
  ToolResult result;
  try {
    double x = eval_expression(*parse_expression(args_raw));
    double phi = normal_cdf(x);
    result.rendered = format_number(phi);
    result.value = phi;
  } catch (const Error& e) {
    result.rendered = "ERROR: " + e.kind();
    result.error = e.kind();
  }
  return result;
}

ToolRegistry ToolRegistry::with_default_tools() {
  ToolRegistry registry;
  registry.register_tool(ToolName::Calculator, run_calculator);
  registry.register_tool(ToolName::EquationSolver, run_equation_solver);
  registry.register_tool(ToolName::Counter, run_counter);
  registry.register_tool(ToolName::ProbabilityTable, run_probability_table);
  return registry;
}

void ToolRegistry::register_tool(ToolName name, ToolFn fn) {
  tools_[name] = std::move(fn);
}

ToolResult ToolRegistry::execute(const ToolCall& call) const {
  auto it = tools_.find(call.tool);
  if (it == tools_.end()) {
    ToolResult result;
    result.rendered = "ERROR: unknown-tool";
    result.error = "unknown-tool";
    return result;
  }
  auto start = std::chrono::steady_clock::now();
  ToolResult result;
  try {
    result = it->second(call.args_raw);
  } catch (const std::exception&) {
    result = ToolResult{};
    result.rendered = "ERROR: tool-failure";
    result.error = "tool-failure";
  }
  auto elapsed = std::chrono::steady_clock::now() - start;
  if (elapsed > timeout_) {
    // tools are pure functions that always terminate, so the deadline is
    // checked after the fact rather than preempting the call
    ToolResult timed_out;
    timed_out.rendered = "ERROR: timeout";
    timed_out.error = "timeout";
    return timed_out;
  }
  return result;
}

}  // namespace finteam
