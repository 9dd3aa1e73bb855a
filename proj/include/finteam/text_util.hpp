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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace finteam {

// Decodes the UTF-8 codepoint starting at byte offset `pos`. Advances `pos`
// past it. Invalid sequences decode as one replacement char per byte so the
// cursor always makes progress.
char32_t utf8_next(std::string_view text, size_t& pos);

// Byte length of the UTF-8 sequence introduced by `lead` (1..4).
size_t utf8_seq_len(unsigned char lead);

bool is_cjk(char32_t cp);

// CJK-aware tokenization: each CJK codepoint is its own token; runs of
// ASCII/Latin alphanumerics form one token (lowercased). Everything else
// separates tokens.
std::vector<std::string> tokenize_cjk_aware(std::string_view text);

// Token estimate used for chunk sizing: CJK codepoints count 1 each, every
// alphanumeric run counts 1.
int approx_token_count(std::string_view text);

uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

// Canonical number rendering used everywhere a tool result is spliced into
// text: up to 6 fractional digits, trailing zeros trimmed.
std::string format_number(double v);

// Shortest decimal form that round-trips to the same double. Used where a
// number must survive a print -> parse cycle exactly (ratio catalog, AST
// printing).
std::string format_number_roundtrip(double v);

}  // namespace finteam
