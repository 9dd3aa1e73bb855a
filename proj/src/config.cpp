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

#include "finteam/config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "finteam/error.hpp"

namespace finteam {

namespace {

// Minimal TOML reader covering the subset this config uses: [section]
// headers, string/integer/float/boolean scalars, flat string arrays, and #
// comments. No system TOML package ships in this toolchain, so the subset is
// parsed here and documented in the README.
struct TomlValue {
  enum class Type { String, Number, Boolean, StringArray } type = Type::String;
  std::string str;
  double number = 0;
  bool boolean = false;
  std::vector<std::string> array;
};

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string interpolate_env(const std::string& value) {
  std::string out;
  size_t i = 0;
  while (i < value.size()) {
    if (value[i] == '$' && i + 1 < value.size() && value[i + 1] == '{') {
      size_t close = value.find('}', i + 2);
      if (close != std::string::npos) {
        std::string name = value.substr(i + 2, close - i - 2);
        const char* env = std::getenv(name.c_str());
        out += env ? env : "";
        i = close + 1;
        continue;
      }
    }
    out += value[i++];
  }
  return out;
}

std::string parse_quoted(const std::string& raw, size_t line_no) {
  if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
    throw ParseError("config-parse", "expected a quoted string", line_no);
  }
  std::string out;
  for (size_t i = 1; i + 1 < raw.size(); ++i) {
    char c = raw[i];
    if (c == '\\' && i + 2 < raw.size()) {
      char next = raw[++i];
      switch (next) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: out += next;
      }
    } else {
      out += c;
    }
  }
  return interpolate_env(out);
}

TomlValue parse_value(const std::string& raw, size_t line_no) {
  TomlValue value;
  std::string v = trim(raw);
  if (v.empty()) {
    throw ParseError("config-parse", "missing value", line_no);
  }
  if (v.front() == '"') {
    value.type = TomlValue::Type::String;
    value.str = parse_quoted(v, line_no);
    return value;
  }
  if (v.front() == '[') {
    if (v.back() != ']') {
      throw ParseError("config-parse", "unterminated array", line_no);
    }
    value.type = TomlValue::Type::StringArray;
    std::string inner = trim(v.substr(1, v.size() - 2));
    size_t pos = 0;
    while (pos < inner.size()) {
      size_t start = inner.find('"', pos);
      if (start == std::string::npos) break;
      size_t end = inner.find('"', start + 1);
      if (end == std::string::npos) {
        throw ParseError("config-parse", "unterminated string in array", line_no);
      }
      value.array.push_back(
          parse_quoted(inner.substr(start, end - start + 1), line_no));
      pos = end + 1;
    }
    return value;
  }
  if (v == "true" || v == "false") {
    value.type = TomlValue::Type::Boolean;
    value.boolean = v == "true";
    return value;
  }
  try {
    size_t used = 0;
    value.number = std::stod(v, &used);
    if (used != v.size()) {
      throw ParseError("config-parse", "malformed number '" + v + "'", line_no);
    }
    value.type = TomlValue::Type::Number;
    return value;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("config-parse", "unrecognized value '" + v + "'", line_no);
  }
}

std::map<std::string, TomlValue> parse_toml_subset(const std::string& text) {
  std::map<std::string, TomlValue> values;
  std::istringstream in(text);
  std::string line;
  std::string section;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // strip comments outside strings
    bool in_string = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
      if (line[i] == '#' && !in_string) {
        line = line.substr(0, i);
        break;
      }
    }
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ParseError("config-parse", "malformed section header", line_no);
      }
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config-parse", "expected key = value", line_no);
    }
    std::string key = trim(t.substr(0, eq));
    if (key.empty()) {
      throw ParseError("config-parse", "empty key", line_no);
    }
    std::string full_key = section.empty() ? key : section + "." + key;
    values[full_key] = parse_value(t.substr(eq + 1), line_no);
  }
  return values;
}

}  // namespace

EngineConfig parse_config_text(const std::string& text) {
  auto values = parse_toml_subset(text);
  EngineConfig config;
  std::vector<std::string> errors;

  auto take_string = [&](const char* key, std::string& out) {
    auto it = values.find(key);
    if (it == values.end()) return;
    if (it->second.type != TomlValue::Type::String) {
      errors.push_back(std::string(key) + " must be a string");
    } else {
      out = it->second.str;
    }
    values.erase(it);
  };
  auto take_int = [&](const char* key, int& out) {
    auto it = values.find(key);
    if (it == values.end()) return;
    if (it->second.type != TomlValue::Type::Number) {
      errors.push_back(std::string(key) + " must be a number");
    } else {
      out = static_cast<int>(it->second.number);
    }
    values.erase(it);
  };
  auto take_array = [&](const char* key, std::vector<std::string>& out) {
    auto it = values.find(key);
    if (it == values.end()) return;
    if (it->second.type != TomlValue::Type::StringArray) {
      errors.push_back(std::string(key) + " must be an array of strings");
    } else {
      out = it->second.array;
    }
    values.erase(it);
  };

  take_string("backend.base_url", config.backend.base_url);
  take_string("backend.model", config.backend.model);
  take_string("backend.api_key_env", config.backend.api_key_env);
  take_string("backend.script_path", config.backend.script_path);
  take_string("embedding.mode", config.embedding.mode);
  take_string("embedding.base_url", config.embedding.base_url);
  take_int("embedding.dimension", config.embedding.dimension);
  take_string("paths.data_dir", config.paths.data_dir);
  take_string("paths.prompts_dir", config.paths.prompts_dir);
  take_string("paths.runs_dir", config.paths.runs_dir);
  take_int("limits.max_calls_per_response", config.limits.max_calls_per_response);
  take_int("limits.retries", config.limits.retries);
  take_int("limits.context_budget", config.limits.context_budget);
  take_int("retrieval.k", config.retrieval.k);
  take_array("retrieval.kbs", config.retrieval.kbs);
  take_int("service.port", config.service.port);
  take_int("service.max_concurrency", config.service.max_concurrency);

  for (const auto& [key, value] : values) {
    (void)value;
    config.warnings.push_back("unknown config key: " + key);
  }

  if (config.backend.base_url.empty() && config.backend.script_path.empty()) {
    errors.push_back("backend.base_url is required (or backend.script_path for scripted runs)");
  }
  if (config.backend.model.empty() && config.backend.script_path.empty()) {
    errors.push_back("backend.model is required");
  }
  if (config.embedding.mode != "fallback" && config.embedding.mode != "remote") {
    errors.push_back("embedding.mode must be \"fallback\" or \"remote\"");
  }
  if (config.embedding.mode == "remote" && config.embedding.base_url.empty()) {
    errors.push_back("embedding.mode = \"remote\" requires embedding.base_url");
  }
  if (config.limits.max_calls_per_response < 1) {
    errors.push_back("limits.max_calls_per_response must be >= 1");
  }
  if (config.limits.retries < 0) {
    errors.push_back("limits.retries must be >= 0");
  }
  if (config.retrieval.k < 1) {
    errors.push_back("retrieval.k must be >= 1");
  }

  if (!errors.empty()) {
    std::string joined;
    for (const auto& e : errors) {
      if (!joined.empty()) joined += "; ";
      joined += e;
    }
    throw Error("config-validation", joined);
  }
  return config;
}

EngineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("config-validation", "config file not found: " + path);
  }
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

}  // namespace finteam
