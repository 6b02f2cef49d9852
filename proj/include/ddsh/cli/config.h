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

#ifndef DDSH_CLI_CONFIG_H_
#define DDSH_CLI_CONFIG_H_

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "ddsh/metrics.h"
#include "ddsh/trainer.h"

namespace ddsh::cli {

// Value of one flat TOML key.
using TomlValue = std::variant<bool, int64_t, double, std::string, std::vector<int64_t>>;

// Parses the flat subset of TOML used for run configs: `key = value` lines,
// comments, strings, integers, floats, booleans and integer arrays. Tables
// are rejected. Throws ConfigError with the offending line number.
std::map<std::string, TomlValue> ParseFlatToml(const std::string& text);

struct RunConfig {
  TrainConfig train;
  std::filesystem::path features;
  std::filesystem::path labels;
  std::filesystem::path model;
  std::filesystem::path codes;
  std::filesystem::path out;
  std::filesystem::path query_features;
  std::filesystem::path query_labels;
  std::filesystem::path query_codes;
  EvalOptions eval;
};

// Applies every key of `table` onto `config`. Unknown keys and type
// mismatches throw ConfigError naming the key.
void ApplyToml(const std::map<std::string, TomlValue>& table, RunConfig& config);

RunConfig LoadRunConfig(const std::filesystem::path& path);

}  // namespace ddsh::cli

#endif  // DDSH_CLI_CONFIG_H_
