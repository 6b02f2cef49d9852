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

#ifndef DDSH_CLI_JSON_IO_H_
#define DDSH_CLI_JSON_IO_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ddsh/metrics.h"
#include "ddsh/trainer.h"

namespace ddsh::cli {

using nlohmann::json;

json ConfigEcho(const TrainConfig& cfg);
json LossTraceToJson(const std::vector<LossRecord>& trace);

// The document emitted by `ddsh eval`.
struct MetricsDocument {
  RetrievalReport report;
  json loss_trace = json::array();
  json config_echo = nullptr;
  std::optional<uint64_t> seed;
};

json ToJson(const MetricsDocument& doc);
MetricsDocument MetricsDocumentFromJson(const json& j);

// Pretty-printed with a trailing newline.
std::string Dump(const json& j);

}  // namespace ddsh::cli

#endif  // DDSH_CLI_JSON_IO_H_
