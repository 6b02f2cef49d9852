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

#include "ddsh/cli/commands.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "ddsh/cli/config.h"
#include "ddsh/cli/json_io.h"
#include "ddsh/dataset.h"
#include "ddsh/errors.h"
#include "ddsh/featnet.h"
#include "ddsh/gradcheck.h"
#include "ddsh/metrics.h"
#include "ddsh/retrieval.h"
#include "ddsh/trainer.h"

namespace ddsh::cli {
namespace fs = std::filesystem;
namespace {

// Command-line values; unset options leave the config file untouched.
struct Flags {
  std::string config;
  std::string features, labels, model, codes, out;
  std::string query_features, query_labels, query_codes, trace;
  size_t bits = 0, omega = 0, tout = 0, tin = 0, batch = 0, map_at = 0;
  uint64_t seed = 0;
  double lr = 0.0;
  std::vector<int> radius;
  std::vector<size_t> k;

  CLI::App* app = nullptr;
  bool Given(const std::string& name) const { return app->count(name) > 0; }
};

void AddPathFlags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "TOML run configuration");
  app->add_option("--features", f.features, "Feature file (.csv, or .bin/.ddfv binary)");
  app->add_option("--labels", f.labels, "Label file");
  app->add_option("--model", f.model, "Model file");
  app->add_option("--codes", f.codes, "Codes file");
  app->add_option("--out", f.out, "Output file");
}

void AddTrainFlags(CLI::App* app, Flags& f) {
  app->add_option("--bits", f.bits, "Code length c");
  app->add_option("--seed", f.seed, "Random seed");
  app->add_option("--omega", f.omega, "Sampled column count |omega|");
  app->add_option("--tout", f.tout, "Outer iterations");
  app->add_option("--tin", f.tin, "Inner epochs per outer iteration");
  app->add_option("--lr", f.lr, "Learning rate");
  app->add_option("--batch", f.batch, "Minibatch size");
}

void AddEvalFlags(CLI::App* app, Flags& f) {
  app->add_option("--query-codes", f.query_codes, "Query codes file");
  app->add_option("--query-labels", f.query_labels, "Query label file");
  app->add_option("--trace", f.trace, "Training trace JSON to echo into the report");
  app->add_option("--radius", f.radius, "Hash lookup radius (repeatable)");
  app->add_option("--k", f.k, "Top-k precision cutoff (repeatable)");
  app->add_option("--map-at", f.map_at, "Truncate MAP at this many results");
}

RunConfig Resolve(const Flags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : LoadRunConfig(f.config);
  auto path = [&](const std::string& flag, const std::string& value, fs::path& target) {
    if (f.Given(flag)) target = value;
  };
  path("--features", f.features, cfg.features);
  path("--labels", f.labels, cfg.labels);
  path("--model", f.model, cfg.model);
  path("--codes", f.codes, cfg.codes);
  path("--out", f.out, cfg.out);
  for (const auto* opt : f.app->get_options()) {
    const auto name = opt->get_name();
    if (opt->count() == 0) continue;
    if (name == "--query-codes") cfg.query_codes = f.query_codes;
    if (name == "--query-labels") cfg.query_labels = f.query_labels;
    if (name == "--query-features") cfg.query_features = f.query_features;
    if (name == "--bits") cfg.train.bits = f.bits;
    if (name == "--seed") cfg.train.seed = f.seed;
    if (name == "--omega") cfg.train.omega_size = f.omega;
    if (name == "--tout") cfg.train.t_out = f.tout;
    if (name == "--tin") cfg.train.t_in = f.tin;
    if (name == "--lr") cfg.train.learning_rate = f.lr;
    if (name == "--batch") cfg.train.batch_size = f.batch;
    if (name == "--radius") cfg.eval.radii = f.radius;
    if (name == "--k") cfg.eval.ks = f.k;
    if (name == "--map-at") cfg.eval.map_at = f.map_at;
  }
  return cfg;
}

void RequireInput(const fs::path& p, const char* key) {
  if (p.empty()) {
    throw ConfigError("missing required key \"" + std::string(key) + "\"");
  }
  if (!fs::exists(p)) {
    throw ConfigError("key \"" + std::string(key) + "\": file not found: " + p.string());
  }
}

void RequireOutput(const fs::path& p, const char* key) {
  if (p.empty()) {
    throw ConfigError("missing required key \"" + std::string(key) + "\"");
  }
  const auto parent = p.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw ConfigError("key \"" + std::string(key) + "\": directory does not exist: " +
                      parent.string());
  }
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::out | std::ios::trunc | std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

void Emit(const fs::path& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    WriteText(path, text);
  }
}

json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

int TrainWith(const Flags& flags, std::optional<Variant> variant, std::ostream& out) {
  RunConfig cfg = Resolve(flags);
  if (variant) cfg.train.variant = *variant;
  const bool lsh = cfg.train.variant == Variant::kLsh;

  RequireInput(cfg.features, "features");
  if (!lsh || !cfg.labels.empty()) RequireInput(cfg.labels, "labels");
  RequireOutput(cfg.model, "model");
  RequireOutput(cfg.codes, "codes");
  if (!lsh) RequireOutput(cfg.out, "out");

  const auto features = LoadFeatures(cfg.features);
  std::optional<SimilarityOracle> sim;
  if (!cfg.labels.empty()) {
    auto labels = LoadLabels(cfg.labels);
    if (labels.size() != features.rows()) {
      throw DataError("dimension mismatch: " + std::to_string(features.rows()) +
                      " feature rows vs " + std::to_string(labels.size()) + " label rows");
    }
    sim.emplace(std::move(labels), cfg.train.multilabel_policy);
  }
  ValidateConfig(cfg.train, features.rows());

  const TrainedModel model =
      lsh ? TrainLsh(features, cfg.train) : TrainVariant(features, *sim, cfg.train);

  SaveModel(cfg.model, model.net);
  SaveCodes(cfg.codes, PackedCodes::Pack(model.codes));
  if (!cfg.out.empty()) {
    json trace;
    trace["loss_trace"] = LossTraceToJson(model.trace);
    trace["config_echo"] = ConfigEcho(cfg.train);
    trace["seed"] = cfg.train.seed;
    trace["final_split"] = {{"omega", model.final_split.omega},
                            {"gamma", model.final_split.gamma}};
    trace["coder_sweeps"] = json::array();
    for (const auto& s : model.sweeps) {
      trace["coder_sweeps"].push_back({{"before", s.loss_before}, {"after", s.loss_after}});
    }
    WriteText(cfg.out, Dump(trace));
  }
  out << VariantName(cfg.train.variant) << ": trained " << features.rows() << " points, "
      << cfg.train.bits << " bits\n";
  return kExitOk;
}

int Encode(const Flags& flags, std::ostream& out) {
  const RunConfig cfg = Resolve(flags);
  RequireInput(cfg.model, "model");
  RequireInput(cfg.features, "features");
  RequireOutput(cfg.codes, "codes");
  const auto net = LoadModel(cfg.model);
  const auto features = LoadFeatures(cfg.features);
  if (features.cols() != net.input_dim()) {
    throw DataError("dimension mismatch: model expects " + std::to_string(net.input_dim()) +
                    " features, file has " + std::to_string(features.cols()));
  }
  SaveCodes(cfg.codes, PackedCodes::Pack(net.EncodeAll(features)));
  out << "encoded " << features.rows() << " points, " << net.code_length() << " bits\n";
  return kExitOk;
}

int Eval(const Flags& flags, std::ostream& out) {
  const RunConfig cfg = Resolve(flags);
  RequireInput(cfg.codes, "codes");
  RequireInput(cfg.labels, "labels");
  RequireInput(cfg.query_codes, "query_codes");
  RequireInput(cfg.query_labels, "query_labels");
  if (!cfg.out.empty()) RequireOutput(cfg.out, "out");
  if (!flags.trace.empty()) RequireInput(flags.trace, "trace");

  const auto db = LoadCodes(cfg.codes);
  const auto queries = LoadCodes(cfg.query_codes);
  if (db.bits() != queries.bits()) {
    throw DataError("code length mismatch: database " + std::to_string(db.bits()) +
                    " bits, queries " + std::to_string(queries.bits()));
  }
  auto db_labels = LoadLabels(cfg.labels);
  auto query_labels = LoadLabels(cfg.query_labels);
  if (db_labels.size() != db.rows() || query_labels.size() != queries.rows()) {
    throw DataError("codes and labels disagree on the number of points");
  }
  const RelevanceJudge judge(std::move(query_labels), std::move(db_labels));

  MetricsDocument doc;
  doc.report = Evaluate(queries, db, judge, cfg.eval);
  if (!flags.trace.empty()) {
    const json trace = ReadJson(flags.trace);
    doc.loss_trace = trace.value("loss_trace", json::array());
    doc.config_echo = trace.value("config_echo", json(nullptr));
    if (trace.contains("seed")) doc.seed = trace["seed"].get<uint64_t>();
  }
  Emit(cfg.out, Dump(ToJson(doc)), out);
  if (!cfg.out.empty()) out << "map " << doc.report.map << "\n";
  return kExitOk;
}

int GradCheck(uint64_t seed, size_t seeds, bool corrupt, std::ostream& out) {
  bool passed = true;
  for (size_t s = 0; s < std::max<size_t>(seeds, 1); ++s) {
    GradCheckOptions options;
    options.seed = seed + s;
    options.corrupt = corrupt;
    const auto report = RunGradientCheck(options);
    out << "seed " << options.seed << ": " << report.parameters_checked << " parameters\n";
    for (size_t l = 0; l < report.layers.size(); ++l) {
      out << "  layer " << l << ": weight max rel err " << report.layers[l].weight
          << ", bias max rel err " << report.layers[l].bias << "\n";
    }
    out << "  max relative error " << report.max_error << " (tolerance " << options.tolerance
        << "): " << (report.passed ? "PASS" : "FAIL") << "\n";
    passed = passed && report.passed;
  }
  return passed ? kExitOk : kExitCheckFailed;
}

int TanhHist(const Flags& flags, size_t bins, std::ostream& out) {
  const RunConfig cfg = Resolve(flags);
  RequireInput(cfg.model, "model");
  RequireInput(cfg.features, "features");
  if (!cfg.out.empty()) RequireOutput(cfg.out, "out");
  const auto net = LoadModel(cfg.model);
  const auto features = LoadFeatures(cfg.features);
  if (features.cols() != net.input_dim()) {
    throw DataError("dimension mismatch: model expects " + std::to_string(net.input_dim()) +
                    " features, file has " + std::to_string(features.cols()));
  }
  const auto hist = TanhSaturationHistogram(net, features, bins);
  json j;
  j["bins"] = bins;
  j["counts"] = hist.counts;
  j["total"] = hist.total;
  j["saturation_threshold"] = 0.8;
  j["saturation_fraction"] = hist.saturation_fraction;
  Emit(cfg.out, Dump(j), out);
  return kExitOk;
}

struct BlobFlags {
  size_t classes = 2;
  size_t per_class = 250;
  size_t dim = 16;
  double spread = 1.0;
  uint64_t seed = 0;
  size_t num_query = 0;
  std::string features, labels, query_features, query_labels;
};

int GenBlobs(const BlobFlags& f, std::ostream& out) {
  RequireOutput(f.features, "features");
  RequireOutput(f.labels, "labels");
  auto ds = GenerateBlobs(f.classes, f.per_class, f.dim, f.spread, f.seed);
  if (f.num_query == 0) {
    SaveFeatures(f.features, ds.features);
    SaveLabels(f.labels, ds.labels);
    out << "wrote " << ds.size() << " points\n";
    return kExitOk;
  }
  RequireOutput(f.query_features, "query_features");
  RequireOutput(f.query_labels, "query_labels");
  AssignQuerySplit(ds, f.num_query, f.seed);
  SaveFeatures(f.features, ds.features.Select(ds.retrieval));
  SaveLabels(f.labels, ds.labels.Select(ds.retrieval));
  SaveFeatures(f.query_features, ds.features.Select(ds.query));
  SaveLabels(f.query_labels, ds.labels.Select(ds.query));
  out << "wrote " << ds.retrieval.size() << " database points and " << ds.query.size()
      << " queries\n";
  return kExitOk;
}

}  // namespace

void ConfigureLogging() {
  static const bool configured = [] {
    auto logger = spdlog::stderr_color_mt("ddsh");
    spdlog::set_default_logger(logger);
    return true;
  }();
  (void)configured;
  const char* env = std::getenv("DDSH_LOG");
  const std::string level = env ? env : "info";
  if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else {
    spdlog::set_level(spdlog::level::info);
  }
}

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  ConfigureLogging();
  CLI::App app{"Deep discrete supervised hashing: training, encoding and retrieval evaluation"};
  app.require_subcommand(1);

  Flags train_flags;
  auto* train = app.add_subcommand("train", "Train a hashing model");
  train_flags.app = train;
  AddPathFlags(train, train_flags);
  AddTrainFlags(train, train_flags);

  Flags encode_flags;
  auto* encode = app.add_subcommand("encode", "Encode features with a trained model");
  encode_flags.app = encode;
  AddPathFlags(encode, encode_flags);

  Flags eval_flags;
  auto* eval = app.add_subcommand("eval", "Evaluate query codes against database codes");
  eval_flags.app = eval;
  AddPathFlags(eval, eval_flags);
  AddEvalFlags(eval, eval_flags);

  Flags baseline_flags;
  std::string method;
  auto* baseline = app.add_subcommand("baseline", "Train the lsh or ddsh0 baseline");
  baseline_flags.app = baseline;
  baseline->add_option("method", method, "lsh or ddsh0")
      ->required()
      ->check(CLI::IsMember({"lsh", "ddsh0"}));
  AddPathFlags(baseline, baseline_flags);
  AddTrainFlags(baseline, baseline_flags);

  uint64_t gc_seed = 1;
  size_t gc_seeds = 1;
  bool gc_corrupt = false;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  gradcheck->add_option("--seed", gc_seed, "First seed");
  gradcheck->add_option("--seeds", gc_seeds, "Number of consecutive seeds");
  gradcheck->add_flag("--corrupt", gc_corrupt, "Perturb one analytic gradient (test hook)")
      ->group("");

  Flags diag_flags;
  size_t bins = 10;
  auto* diag = app.add_subcommand("diag", "Diagnostics");
  diag->require_subcommand(1);
  auto* tanh_hist = diag->add_subcommand("tanh-hist", "Histogram of |tanh(F(x))|");
  diag_flags.app = tanh_hist;
  AddPathFlags(tanh_hist, diag_flags);
  tanh_hist->add_option("--bins", bins, "Number of bins over [0, 1]");

  BlobFlags blob;
  auto* gen = app.add_subcommand("gen-blobs", "Generate a Gaussian blob dataset");
  gen->add_option("--classes", blob.classes);
  gen->add_option("--per-class", blob.per_class);
  gen->add_option("--dim", blob.dim);
  gen->add_option("--spread", blob.spread);
  gen->add_option("--seed", blob.seed);
  gen->add_option("--num-query", blob.num_query, "Hold out this many points as queries");
  gen->add_option("--features", blob.features);
  gen->add_option("--labels", blob.labels);
  gen->add_option("--query-features", blob.query_features);
  gen->add_option("--query-labels", blob.query_labels);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (train->parsed()) return TrainWith(train_flags, std::nullopt, out);
    if (baseline->parsed()) return TrainWith(baseline_flags, ParseVariant(method), out);
    if (encode->parsed()) return Encode(encode_flags, out);
    if (eval->parsed()) return Eval(eval_flags, out);
    if (gradcheck->parsed()) return GradCheck(gc_seed, gc_seeds, gc_corrupt, out);
    if (tanh_hist->parsed()) return TanhHist(diag_flags, bins, out);
    if (gen->parsed()) return GenBlobs(blob, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    err << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace ddsh::cli
