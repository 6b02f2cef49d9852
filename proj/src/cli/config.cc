// Copyright 2026 The DDSH Authors.
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

#include "ddsh/cli/config.h"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include "ddsh/errors.h"

namespace ddsh::cli {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Drops a trailing comment that is not inside a string.
std::string_view StripComment(std::string_view s) {
  bool in_string = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

[[noreturn]] void Fail(size_t line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

bool ParseInt(std::string_view s, int64_t& out) {
  std::string cleaned;
  for (const char ch : s) {
    if (ch != '_') cleaned.push_back(ch);
  }
  if (!cleaned.empty() && cleaned.front() == '+') cleaned.erase(0, 1);
  auto [ptr, ec] = std::from_chars(cleaned.data(), cleaned.data() + cleaned.size(), out);
  return ec == std::errc() && ptr == cleaned.data() + cleaned.size() && !cleaned.empty();
}

bool ParseFloat(std::string_view s, double& out) {
  std::string cleaned;
  for (const char ch : s) {
    if (ch != '_') cleaned.push_back(ch);
  }
  if (!cleaned.empty() && cleaned.front() == '+') cleaned.erase(0, 1);
  auto [ptr, ec] = std::from_chars(cleaned.data(), cleaned.data() + cleaned.size(), out);
  return ec == std::errc() && ptr == cleaned.data() + cleaned.size() && !cleaned.empty();
}

TomlValue ParseValue(std::string_view text, size_t line) {
  if (text.empty()) Fail(line, "missing value");
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') Fail(line, "unterminated string");
    std::string out;
    for (size_t i = 1; i + 1 < text.size(); ++i) {
      if (text[i] == '\\' && i + 2 < text.size()) {
        const char next = text[++i];
        switch (next) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          default: out.push_back(next);
        }
      } else {
        out.push_back(text[i]);
      }
    }
    return out;
  }
  if (text.front() == '[') {
    if (text.back() != ']') Fail(line, "unterminated array");
    std::vector<int64_t> items;
    std::string_view body = Trim(text.substr(1, text.size() - 2));
    while (!body.empty()) {
      const size_t comma = body.find(',');
      const auto item = Trim(body.substr(0, comma));
      if (!item.empty()) {
        int64_t v = 0;
        if (!ParseInt(item, v)) Fail(line, "arrays may only hold integers");
        items.push_back(v);
      }
      if (comma == std::string_view::npos) break;
      body = body.substr(comma + 1);
    }
    return items;
  }
  if (text == "true") return true;
  if (text == "false") return false;
  int64_t i = 0;
  if (ParseInt(text, i)) return i;
  double d = 0.0;
  if (ParseFloat(text, d)) return d;
  Fail(line, "cannot parse value \"" + std::string(text) + "\"");
}

struct KeyReader {
  const std::string& key;
  const TomlValue& value;

  [[noreturn]] void TypeError(const char* expected) const {
    throw ConfigError("config key \"" + key + "\" must be " + expected);
  }
  int64_t Int() const {
    if (const auto* v = std::get_if<int64_t>(&value)) return *v;
    TypeError("an integer");
  }
  size_t Count() const {
    const int64_t v = Int();
    if (v < 0) TypeError("a non-negative integer");
    return static_cast<size_t>(v);
  }
  double Real() const {
    if (const auto* v = std::get_if<double>(&value)) return *v;
    if (const auto* v = std::get_if<int64_t>(&value)) return static_cast<double>(*v);
    TypeError("a number");
  }
  std::string String() const {
    if (const auto* v = std::get_if<std::string>(&value)) return *v;
    TypeError("a string");
  }
  std::vector<int64_t> Array() const {
    if (const auto* v = std::get_if<std::vector<int64_t>>(&value)) return *v;
    TypeError("an integer array");
  }
  std::vector<size_t> Counts() const {
    std::vector<size_t> out;
    for (const int64_t v : Array()) {
      if (v < 0) TypeError("an array of non-negative integers");
      out.push_back(static_cast<size_t>(v));
    }
    return out;
  }
};

SolverMode ParseSolver(const std::string& name) {
  if (name == "auto") return SolverMode::kAuto;
  if (name == "exact") return SolverMode::kExact;
  if (name == "local") return SolverMode::kLocal;
  throw ConfigError("unknown solver \"" + name + "\"");
}

}  // namespace

std::map<std::string, TomlValue> ParseFlatToml(const std::string& text) {
  std::map<std::string, TomlValue> table;
  std::istringstream in(text);
  std::string raw;
  size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto body = Trim(StripComment(raw));
    if (body.empty()) continue;
    if (body.front() == '[') Fail(line, "tables are not supported; use flat keys");
    const size_t eq = body.find('=');
    if (eq == std::string_view::npos) Fail(line, "expected key = value");
    std::string key(Trim(body.substr(0, eq)));
    if (key.empty()) Fail(line, "empty key");
    if (table.contains(key)) Fail(line, "duplicate key \"" + key + "\"");
    table.emplace(std::move(key), ParseValue(Trim(body.substr(eq + 1)), line));
  }
  return table;
}

void ApplyToml(const std::map<std::string, TomlValue>& table, RunConfig& config) {
  auto& t = config.train;
  for (const auto& [key, value] : table) {
    const KeyReader r{key, value};
    if (key == "bits") {
      t.bits = r.Count();
    } else if (key == "omega_size") {
      t.omega_size = r.Count();
    } else if (key == "t_out") {
      t.t_out = r.Count();
    } else if (key == "t_in") {
      t.t_in = r.Count();
    } else if (key == "batch") {
      t.batch_size = r.Count();
    } else if (key == "lr") {
      t.learning_rate = r.Real();
    } else if (key == "weight_decay") {
      t.weight_decay = r.Real();
    } else if (key == "seed") {
      t.seed = static_cast<uint64_t>(r.Int());
    } else if (key == "target_scale") {
      if (std::holds_alternative<int64_t>(value)) {
        t.target_scale = ParseTargetScale(std::to_string(r.Int()));
      } else {
        t.target_scale = ParseTargetScale(r.String());
      }
    } else if (key == "variant") {
      t.variant = ParseVariant(r.String());
    } else if (key == "layers") {
      t.hidden_layers = r.Counts();
    } else if (key == "multilabel_policy") {
      t.multilabel_policy = ParseWeightPolicy(r.String());
    } else if (key == "solver") {
      t.solver = ParseSolver(r.String());
    } else if (key == "solver_restarts") {
      t.solver_restarts = r.Count();
    } else if (key == "grad_reduction") {
      t.grad_reduction = ParseGradReduction(r.String());
    } else if (key == "features") {
      config.features = r.String();
    } else if (key == "labels") {
      config.labels = r.String();
    } else if (key == "model") {
      config.model = r.String();
    } else if (key == "codes") {
      config.codes = r.String();
    } else if (key == "out") {
      config.out = r.String();
    } else if (key == "query_features") {
      config.query_features = r.String();
    } else if (key == "query_labels") {
      config.query_labels = r.String();
    } else if (key == "query_codes") {
      config.query_codes = r.String();
    } else if (key == "radii") {
      config.eval.radii.clear();
      for (const int64_t v : r.Array()) config.eval.radii.push_back(static_cast<int>(v));
    } else if (key == "ks") {
      config.eval.ks = r.Counts();
    } else if (key == "map_at") {
      config.eval.map_at = r.Count();
    } else {
      throw ConfigError("unknown config key \"" + key + "\"");
    }
  }
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunConfig config;
  const auto base = path.parent_path();
  ApplyToml(ParseFlatToml(buffer.str()), config);
  // Relative paths in a config file resolve against the file's directory.
  for (auto* p : {&config.features, &config.labels, &config.model, &config.codes, &config.out,
                  &config.query_features, &config.query_labels, &config.query_codes}) {
    if (!p->empty() && p->is_relative()) *p = base / *p;
  }
  return config;
}

}  // namespace ddsh::cli
