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

#include "finteam/text_util.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace finteam {

size_t utf8_seq_len(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;  // invalid lead byte, consume it alone
}

char32_t utf8_next(std::string_view text, size_t& pos) {
  unsigned char lead = static_cast<unsigned char>(text[pos]);
  size_t len = utf8_seq_len(lead);
  if (len == 1) {
    pos += 1;
    return lead < 0x80 ? lead : 0xFFFD;
  }
  if (pos + len > text.size()) {
    pos += 1;
    return 0xFFFD;
  }
  char32_t cp = lead & (0x7F >> len);
  for (size_t i = 1; i < len; ++i) {
    unsigned char cont = static_cast<unsigned char>(text[pos + i]);
    if ((cont >> 6) != 0x2) {
      pos += 1;
      return 0xFFFD;
    }
    cp = (cp << 6) | (cont & 0x3F);
  }
  pos += len;
  return cp;
}

bool is_cjk(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) ||    // unified ideographs
         (cp >= 0x3400 && cp <= 0x4DBF) ||    // extension A
         (cp >= 0xF900 && cp <= 0xFAFF) ||    // compatibility ideographs
         (cp >= 0x3040 && cp <= 0x30FF) ||    // hiragana + katakana
         (cp >= 0xAC00 && cp <= 0xD7AF) ||    // hangul syllables
         (cp >= 0x20000 && cp <= 0x2A6DF);    // extension B
}

static bool is_word_cp(char32_t cp) {
  return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
         (cp >= '0' && cp <= '9') ||
         (cp >= 0x00C0 && cp <= 0x024F);  // latin supplement/extended
}

std::vector<std::string> tokenize_cjk_aware(std::string_view text) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush_word = [&] {
    if (!word.empty()) {
      tokens.push_back(word);
      word.clear();
    }
  };
  size_t pos = 0;
  while (pos < text.size()) {
    size_t start = pos;
    char32_t cp = utf8_next(text, pos);
    if (is_cjk(cp)) {
      flush_word();
      tokens.emplace_back(text.substr(start, pos - start));
    } else if (is_word_cp(cp)) {
      if (cp < 0x80) {
        word += static_cast<char>(std::tolower(static_cast<int>(cp)));
      } else {
        word.append(text.substr(start, pos - start));
      }
    } else {
      flush_word();
    }
  }
  flush_word();
  return tokens;
}

int approx_token_count(std::string_view text) {
  int count = 0;
  bool in_word = false;
  size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = utf8_next(text, pos);
    if (is_cjk(cp)) {
      if (in_word) in_word = false;
      ++count;
    } else if (is_word_cp(cp)) {
      if (!in_word) {
        ++count;
        in_word = true;
      }
    } else {
      in_word = false;
    }
  }
  return count;
}

uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return std::string(buf);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  if (std::abs(v) < 1e15 && v == std::floor(v)) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    return std::string(buf);
  }
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  std::string s(buf);
  size_t dot = s.find('.');
  if (dot != std::string::npos) {
    size_t last = s.find_last_not_of('0');
    if (last == dot) last -= 1;
    s.erase(last + 1);
  }
  if (s == "-0") s = "0";
  return s;
}

std::string format_number_roundtrip(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace finteam
