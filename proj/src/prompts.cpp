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

#include "finteam/prompts.hpp"

#include <fstream>

#include "finteam/error.hpp"
#include "finteam/text_util.hpp"

namespace finteam {

namespace fs = std::filesystem;

namespace {

// Declared placeholders per role; load-time check that templates carry them.
const std::map<std::string, std::vector<std::string>> kDeclared = {
    {"document_analyzer", {"task_instructions"}},
    {"analyst", {"context"}},
    {"accountant", {}},
    {"consultant", {}},
    {"judge", {}},
};

bool is_placeholder_char(char c) {
  return (c >= 'a' && c <= 'z') || c == '_';
}

}  // namespace

std::vector<std::string> PromptLibrary::placeholders_in(const std::string& text) {
  std::vector<std::string> found;
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    size_t j = i + 1;
    while (j < text.size() && is_placeholder_char(text[j])) ++j;
    if (j > i + 1 && j < text.size() && text[j] == '}') {
      found.push_back(text.substr(i + 1, j - i - 1));
      i = j;
    }
  }
  return found;
}

PromptLibrary::PromptLibrary(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error("config-validation", "prompts directory not found: " + dir.string());
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    templates_[entry.path().stem().string()] = std::move(content);
  }
  validate();
}

PromptLibrary::PromptLibrary(std::map<std::string, std::string> templates)
    : templates_(std::move(templates)) {
  validate();
}

void PromptLibrary::validate() const {
  for (const auto& [role, wanted] : kDeclared) {
    auto it = templates_.find(role);
    if (it == templates_.end()) {
      throw Error("config-validation", "missing prompt template: " + role);
    }
    auto present = placeholders_in(it->second);
    for (const auto& name : wanted) {
      bool found = false;
      for (const auto& p : present) {
        if (p == name) found = true;
      }
      if (!found) {
        throw Error("config-validation",
                    "template '" + role + "' lacks placeholder {" + name + "}");
      }
    }
  }
}

const std::string& PromptLibrary::raw(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) {
    throw Error("config-validation", "unknown prompt template: " + name);
  }
  return it->second;
}

bool PromptLibrary::has(const std::string& name) const { return templates_.count(name) > 0; }

std::string PromptLibrary::render(const std::string& name,
                                  const std::map<std::string, std::string>& values) const {
  const std::string& tmpl = raw(name);
  // single left-to-right pass so substituted values are never re-scanned
  std::string out;
  out.reserve(tmpl.size());
  size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      size_t j = i + 1;
      while (j < tmpl.size() && is_placeholder_char(tmpl[j])) ++j;
      if (j > i + 1 && j < tmpl.size() && tmpl[j] == '}') {
        std::string key = tmpl.substr(i + 1, j - i - 1);
        auto it = values.find(key);
        if (it == values.end()) {
          throw Error("template-render",
                      "unfilled placeholder {" + key + "} in '" + name + "'");
        }
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::map<std::string, std::string> PromptLibrary::hashes() const {
  std::map<std::string, std::string> out;
  for (const auto& [name, content] : templates_) {
    out[name] = fnv1a64_hex(content);
  }
  return out;
}

}  // namespace finteam
