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
#include <utility>
#include <vector>

#include "finteam/chat.hpp"
#include "finteam/tools.hpp"

namespace finteam {

struct ToolLoopResult {
  std::string final_text;
  std::vector<std::pair<ToolCall, ToolResult>> calls;  // spans index final_text
  bool budget_exceeded = false;
};

// Instruction appended when generation resumes after a splice. The wire
// protocol cannot resume a server-side decode, so continuation is a fresh
// request carrying the spliced prefix as the last assistant message.
extern const char* kContinueInstruction;

// Streams from the backend until a tool command header completes, executes
// the tool, splices "result]" after the arrow, and resumes generation with
// the spliced prefix as assistant context. Ends when a round streams to
// completion with no live command, or when the per-response call budget is
// hit (the undispatched header is dropped and the budget flag set).
// Emitted headers are normalized to the U+2192 arrow.
ToolLoopResult run_tool_augmented_generation(Backend& backend, const ChatRequest& request,
                                             const ToolRegistry& registry);

}  // namespace finteam
