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

#include "finteam/tool_loop.hpp"

namespace finteam {

const char* kContinueInstruction = "continue from where you stopped";

ToolLoopResult run_tool_augmented_generation(Backend& backend, const ChatRequest& request,
                                             const ToolRegistry& registry) {
  request.validate();
  ToolLoopResult result;
  const int max_calls = registry.max_calls_per_response();

  // hard cap on continuation rounds: every round but the last executes a call
  for (int round = 0; round <= max_calls + 1; ++round) {
    ChatRequest round_request = request;
    if (!result.final_text.empty()) {
      round_request.messages.push_back({Role::Assistant, result.final_text});
      round_request.messages.push_back({Role::User, kContinueInstruction});
    }

    std::string round_text;
    backend.complete_streaming(round_request, [&](const std::string& delta) {
      round_text += delta;
      return !detect_call(round_text).has_value();
    });

    auto detected = detect_call(round_text);
    if (!detected) {
      result.final_text += round_text;
      return result;
    }
    if (static_cast<int>(result.calls.size()) >= max_calls) {
      // budget spent: keep the prose before the undispatched header
      result.final_text += round_text.substr(0, detected->span_begin);
      result.budget_exceeded = true;
      return result;
    }

    ToolResult tool_result = registry.execute(*detected);

    // splice: prose up to '[', normalized header, rendered result, ']'
    std::string header = "[";
    header += tool_name_str(detected->tool);
    header += '(';
    header += detected->args_raw;
    header += ")→";

    ToolCall recorded = *detected;
    recorded.span_begin = result.final_text.size() + detected->span_begin;
    recorded.span_end = recorded.span_begin + header.size();

    result.final_text += round_text.substr(0, detected->span_begin);
    result.final_text += header;
    result.final_text += tool_result.rendered;
    result.final_text += ']';
    result.calls.emplace_back(std::move(recorded), std::move(tool_result));
  }
  result.budget_exceeded = true;
  return result;
}

}  // namespace finteam
