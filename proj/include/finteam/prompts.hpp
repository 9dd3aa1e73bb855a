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

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace finteam {

// Role system prompts live in versioned template files prompts/{role}.txt.
// Placeholders are {lower_snake_case} tokens; rendering replaces them and
// fails if any placeholder token survives.
class PromptLibrary {
 public:
  // Loads every *.txt in the directory. Throws if a role file known to need
  // placeholders is missing them.
  explicit PromptLibrary(const std::filesystem::path& dir);

  // In-memory library (tests); map of template name -> content.
  explicit PromptLibrary(std::map<std::string, std::string> templates);

  const std::string& raw(const std::string& name) const;
  bool has(const std::string& name) const;

  std::string render(const std::string& name,
                     const std::map<std::string, std::string>& values) const;

  // FNV-1a content hash per template, pinned into workflow traces.
  std::map<std::string, std::string> hashes() const;

  static std::vector<std::string> placeholders_in(const std::string& text);

 private:
  void validate() const;

  std::map<std::string, std::string> templates_;
};

}  // namespace finteam
