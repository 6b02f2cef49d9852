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

#include "ddsh/cli/json_io.h"

#include <string>

#include "ddsh/errors.h"

namespace ddsh::cli {

json ConfigEcho(const TrainConfig& cfg) {
  json j;
  j["bits"] = cfg.bits;
  j["omega_size"] = cfg.omega_size;
  j["t_out"] = cfg.t_out;
  j["t_in"] = cfg.t_in;
  j["batch"] = cfg.batch_size;
  j["lr"] = cfg.learning_rate;
  j["weight_decay"] = cfg.weight_decay;
  j["seed"] = cfg.seed;
  j["target_scale"] = TargetScaleName(cfg.target_scale);
  j["variant"] = VariantName(cfg.variant);
  j["layers"] = cfg.hidden_layers;
  j["multilabel_policy"] = WeightPolicyName(cfg.multilabel_policy);
  switch (cfg.solver) {
    case SolverMode::kExact:
      j["solver"] = "exact";
      break;
    case SolverMode::kLocal:
      j["solver"] = "local";
      break;
    default:
      j["solver"] = "auto";
  }
  j["solver_restarts"] = cfg.solver_restarts;
  j["grad_reduction"] = GradReductionName(cfg.grad_reduction);
  return j;
}

json LossTraceToJson(const std::vector<LossRecord>& trace) {
  json out = json::array();
  for (const auto& r : trace) {
    out.push_back({{"iter", r.iter}, {"epoch", r.epoch}, {"phase", PhaseName(r.phase)},
                   {"loss", r.loss}});
  }
  return out;
}

json ToJson(const MetricsDocument& doc) {
  const auto& rep = doc.report;
  json j;
  j["map"] = rep.map;
  j["map_at"] = rep.map_at ? json(*rep.map_at) : json(nullptr);
  j["per_query_ap"] = rep.per_query_ap;
  j["topk"] = json::array();
  for (const auto& [k, p] : rep.topk) j["topk"].push_back({{"k", k}, {"precision", p}});
  j["pr"] = json::array();
  for (const auto& pt : rep.pr_curve) {
    j["pr"].push_back({{"recall", pt.recall}, {"precision", pt.precision}});
  }
  j["sr"] = json::object();
  for (const auto& [r, v] : rep.success_rate) j["sr"][std::to_string(r)] = v;
  j["loss_trace"] = doc.loss_trace;
  j["config_echo"] = doc.config_echo;
  j["seed"] = doc.seed ? json(*doc.seed) : json(nullptr);
  return j;
}

MetricsDocument MetricsDocumentFromJson(const json& j) {
  try {
    MetricsDocument doc;
    auto& rep = doc.report;
    rep.map = j.at("map").get<double>();
    if (!j.at("map_at").is_null()) rep.map_at = j.at("map_at").get<size_t>();
    rep.per_query_ap = j.at("per_query_ap").get<std::vector<double>>();
    for (const auto& t : j.at("topk")) {
      rep.topk.emplace_back(t.at("k").get<size_t>(), t.at("precision").get<double>());
    }
    for (const auto& p : j.at("pr")) {
      rep.pr_curve.push_back({p.at("recall").get<double>(), p.at("precision").get<double>()});
    }
    for (const auto& [key, value] : j.at("sr").items()) {
      rep.success_rate[std::stoi(key)] = value.get<double>();
    }
    doc.loss_trace = j.at("loss_trace");
    doc.config_echo = j.at("config_echo");
    if (!j.at("seed").is_null()) doc.seed = j.at("seed").get<uint64_t>();
    return doc;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed metrics document: ") + e.what());
  }
}

std::string Dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace ddsh::cli
