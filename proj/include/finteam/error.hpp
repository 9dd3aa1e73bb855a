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

#include <stdexcept>
#include <string>

namespace finteam {

// Every domain error carries a stable kebab-case kind slug so callers
// (and tool-result rendering) can dispatch without string-matching prose.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

// Parse errors additionally carry the byte offset of the offending input.
class ParseError : public Error {
 public:
  ParseError(std::string kind, const std::string& message, size_t offset)
      : Error(std::move(kind), message + " (offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  size_t offset() const { return offset_; }

 private:
  size_t offset_;
};

}  // namespace finteam
