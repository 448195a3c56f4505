// Copyright 2026 The rankcons Authors
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

// rankcons: generate a synthetic cascade, train its models, simulate and
// score ranking consistency.
//
//   rankcons generate  [--config F] [--out D] [--seed N]
//   rankcons train     [--tier NAME]           (all tiers when omitted)
//   rankcons simulate  [--pipeline SPEC|NAME] [--split train|eval]
//   rankcons evaluate  [--pipeline SPEC|NAME] [--k 10,20] [--c 50,100]
//   rankcons diagnose  [--pipeline SPEC|NAME]
//   rankcons report
//
// Errors go to stderr as one line:
//   rankcons: error kind=<kind> code=<exit code> message=<JSON string>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rankcons/checkpoint.h"
#include "rankcons/config.h"
#include "rankcons/errors.h"
#include "rankcons/experiment.h"
#include "rankcons/logs.h"
#include "rankcons/report.h"

namespace fs = std::filesystem;
using namespace rankcons;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string tier;
  std::string pipeline;
  std::string split = "eval";
  std::vector<std::size_t> k;
  std::vector<std::size_t> c;
};

std::string fnv_hex(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig load(const Options& opt) {
  ExperimentConfig cfg = opt.config.empty() ? ExperimentConfig::defaults() : load_config(opt.config);
  if (opt.seed) {
    cfg.seed = *opt.seed;
    cfg.world.seed = *opt.seed;
  }
  if (!opt.out.empty()) {
    cfg.output_dir = opt.out;
  } else if (const char* env = std::getenv("RANKCONS_OUTPUT_DIR"); env && *env) {
    cfg.output_dir = env;
  }
  cfg.validate();
  return cfg;
}

struct Layout {
  fs::path root;
  fs::path world() const { return root / "world"; }
  fs::path manifest() const { return world() / "manifest.json"; }
  fs::path checkpoint(std::string_view tier) const {
    return root / "models" / (std::string(tier) + ".ckpt");
  }
  fs::path loss_trace(std::string_view tier) const {
    return root / "models" / (std::string(tier) + "_loss.csv");
  }
  fs::path logs(Split split, std::string_view spec) const {
    return root / "logs" / (split == Split::kTrain ? "train" : "eval") / spec_slug(spec);
  }
  fs::path eval(std::string_view name) const { return root / "eval" / std::string(name); }
  fs::path diagnosis(std::string_view spec) const {
    return root / "diagnosis" / (spec_slug(spec) + ".csv");
  }
  fs::path report() const { return root / "report"; }
};

constexpr std::string_view kFixtureName = "fixture";

std::string config_digest(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.output_dir.clear();
  return fnv_hex(config_to_json(c));
}

// Confirms the world files on disk were produced from this config.
void require_world(const ExperimentConfig& cfg, const Layout& at) {
  if (!fs::exists(at.manifest())) {
    throw MissingPrerequisite("missing " + at.manifest().string() + "; run: rankcons generate");
  }
  const auto manifest = nlohmann::json::parse(read_text_file(at.manifest()), nullptr, false);
  if (manifest.is_discarded() || !manifest.contains("config_digest")) {
    throw DataError(at.manifest().string() + ": malformed manifest");
  }
  if (manifest["config_digest"] != config_digest(cfg)) {
    throw DataError(at.manifest().string() +
                    ": world was generated from a different config; rerun: rankcons generate");
  }
}

// Loads every checkpoint present so pipelines can resolve their tiers.
void load_models(Experiment& exp, const Layout& at) {
  for (const auto& tier : exp.config().tiers) {
    if (fs::exists(at.checkpoint(tier.name))) {
      exp.set_model(tier.name, load_checkpoint(at.checkpoint(tier.name)).model);
    }
  }
}

struct NamedPipeline {
  std::string name;
  std::string spec;
};

NamedPipeline resolve_pipeline(const ExperimentConfig& cfg, const std::string& arg) {
  for (const auto& p : cfg.pipelines) {
    if (p.name == arg || p.spec == arg) return {p.name, p.spec};
  }
  return {spec_slug(arg), arg};
}

std::vector<NamedPipeline> selected_pipelines(const ExperimentConfig& cfg, const Options& opt) {
  if (!opt.pipeline.empty()) return {resolve_pipeline(cfg, opt.pipeline)};
  std::vector<NamedPipeline> out;
  for (const auto& p : cfg.pipelines) out.push_back({p.name, p.spec});
  return out;
}

void write_logs(const fs::path& dir, const SimulationLogs& logs) {
  write_service_log(dir / "service.jsonl", logs.service);
  write_simulator_log(dir / "simulator.jsonl", logs.simulator);
  write_exposure_log(dir / "exposures.jsonl", logs.exposures);
}

SimulationLogs fixture_logs(const FixtureConfig& fixture) {
  const World world = fixture_world(fixture);
  const Request req = fixture_request(fixture);
  const Pipeline pipeline = fixture_pipeline(fixture);
  auto service = run_request(req, pipeline, world);
  auto sim = run_simulator(req, pipeline, world);
  SimulationLogs logs;
  logs.service = std::move(service.service);
  logs.simulator = std::move(sim.records);
  return logs;
}

int cmd_generate(const Options& opt) {
  const auto cfg = load(opt);
  const Layout at{cfg.output_dir};
  const Experiment exp(cfg);
  write_corpus(at.world() / "corpus.jsonl", exp.world().corpus);
  write_requests(at.world() / "requests_train.jsonl", exp.requests(Split::kTrain));
  write_requests(at.world() / "requests_eval.jsonl", exp.requests(Split::kEval));
  nlohmann::ordered_json truth;
  truth["w_ctr"] = exp.world().truth.w_ctr;
  truth["b_ctr"] = exp.world().truth.b_ctr;
  truth["w_opt"] = exp.world().truth.w_opt;
  write_text_file(at.world() / "ground_truth.json", truth.dump() + "\n");

  nlohmann::ordered_json manifest;
  manifest["seed"] = cfg.seed;
  manifest["config_digest"] = config_digest(cfg);
  nlohmann::ordered_json digests;
  for (const char* name : {"corpus.jsonl", "requests_train.jsonl", "requests_eval.jsonl",
                           "ground_truth.json"}) {
    digests[name] = file_digest(at.world() / name);
  }
  if (cfg.fixture) {
    const fs::path dir = at.logs(Split::kEval, kFixtureName);
    write_logs(dir, fixture_logs(*cfg.fixture));
    for (const char* name : {"service.jsonl", "simulator.jsonl", "exposures.jsonl"}) {
      digests[std::string("fixture/") + name] = file_digest(dir / name);
    }
  }
  manifest["digests"] = digests;
  write_text_file(at.manifest(), manifest.dump(2) + "\n");
  return kExitOk;
}

nlohmann::ordered_json checkpoint_metadata(const ExperimentConfig& cfg, const TierConfig& tier,
                                           const Predictor& model, const TrainResult& result) {
  nlohmann::ordered_json meta;
  meta["tier"] = tier.name;
  meta["kind"] = std::string(to_string(tier.kind));
  meta["mask_fraction"] = tier.mask_fraction;
  meta["active_fraction"] = model.mask_fraction();
  meta["hidden"] = tier.hidden;
  meta["loss"] = std::string(to_string(tier.train.loss));
  meta["learning_rate"] = tier.train.learning_rate;
  meta["epochs"] = tier.train.epochs;
  meta["batch_size"] = tier.train.batch_size;
  if (tier.kind == TierKind::kLtr) {
    meta["chunks"] = tier.train.chunks;
    if (tier.train.chunks == 2) meta["boundary"] = cfg.world.sizes.k;
  }
  meta["train_seed"] = cfg.train_seed(tier.name);
  meta["config_digest"] = config_digest(cfg);
  meta["final_loss"] = result.loss_trace.empty() ? 0.0 : result.loss_trace.back();
  return meta;
}

void train_one(Experiment& exp, const TierConfig& tier, const Layout& at) {
  const auto& cfg = exp.config();
  TrainResult result;
  switch (tier.kind) {
    case TierKind::kRank:
      result = exp.train_teacher(tier);
      break;
    case TierKind::kLogloss: {
      const auto path = at.logs(Split::kTrain, cfg.exposure_pipeline) / "exposures.jsonl";
      if (!fs::exists(path)) {
        throw MissingPrerequisite("missing " + path.string() +
                                  "; run: rankcons simulate --split train --pipeline '" +
                                  cfg.exposure_pipeline + "'");
      }
      result = exp.train_logloss(tier, read_exposure_log(path));
      break;
    }
    case TierKind::kDistill:
    case TierKind::kLtr: {
      const auto dir = at.logs(Split::kTrain, cfg.training_pipeline);
      if (!fs::exists(dir / "service.jsonl") || !fs::exists(dir / "simulator.jsonl")) {
        throw MissingPrerequisite("missing logs in " + dir.string() +
                                  "; run: rankcons simulate --split train --pipeline '" +
                                  cfg.training_pipeline + "'");
      }
      result = exp.train_from_teacher(tier, read_service_log(dir / "service.jsonl"),
                                      read_simulator_log(dir / "simulator.jsonl"));
      break;
    }
  }
  save_checkpoint(at.checkpoint(tier.name), result.model,
                  checkpoint_metadata(cfg, tier, result.model, result).dump());
  write_text_file(at.loss_trace(tier.name), loss_trace_csv(result.loss_trace));
  exp.set_model(tier.name, std::move(result.model));
}

void simulate_to_disk(const Experiment& exp, const std::string& spec, Split split,
                      const Layout& at) {
  write_logs(at.logs(split, spec), exp.simulate(exp.pipeline(spec), split));
}

int cmd_train(const Options& opt) {
  const auto cfg = load(opt);
  const Layout at{cfg.output_dir};
  require_world(cfg, at);
  Experiment exp(cfg);
  load_models(exp, at);
  if (!opt.tier.empty() && opt.tier != "all") {
    train_one(exp, cfg.tier(opt.tier), at);
    return kExitOk;
  }
  // Every tier in dependency order, producing the training-split logs between phases.
  for (const auto kind : {TierKind::kRank, TierKind::kLogloss, TierKind::kDistill}) {
    if (kind == TierKind::kLogloss) {
      simulate_to_disk(exp, cfg.exposure_pipeline, Split::kTrain, at);
    } else if (kind == TierKind::kDistill) {
      simulate_to_disk(exp, cfg.training_pipeline, Split::kTrain, at);
    }
    for (const auto& tier : cfg.tiers) {
      const bool teacher_fed = tier.kind == TierKind::kDistill || tier.kind == TierKind::kLtr;
      if (tier.kind == kind || (kind == TierKind::kDistill && teacher_fed)) {
        train_one(exp, tier, at);
      }
    }
  }
  return kExitOk;
}

int cmd_simulate(const Options& opt) {
  const auto cfg = load(opt);
  const Layout at{cfg.output_dir};
  require_world(cfg, at);
  Split split;
  if (opt.split == "eval") {
    split = Split::kEval;
  } else if (opt.split == "train") {
    split = Split::kTrain;
  } else {
    throw ConfigError("--split: expected 'train' or 'eval', got '" + opt.split + "'");
  }
  Experiment exp(cfg);
  load_models(exp, at);
  for (const auto& p : selected_pipelines(cfg, opt)) simulate_to_disk(exp, p.spec, split, at);
  return kExitOk;
}

void evaluate_one(const ExperimentConfig& cfg, const EvaluationConfig& eval, const Layout& at,
                  const std::string& name, const std::string& spec, const StageSizes& sizes) {
  const fs::path dir = at.logs(Split::kEval, spec);
  for (const char* file : {"service.jsonl", "simulator.jsonl", "exposures.jsonl"}) {
    if (!fs::exists(dir / file)) {
      throw MissingPrerequisite("missing " + (dir / file).string() +
                                (name == kFixtureName
                                     ? std::string("; run: rankcons generate")
                                     : "; run: rankcons simulate --pipeline '" + spec + "'"));
    }
  }
  const auto service = read_service_log(dir / "service.jsonl");
  const auto simulator = read_simulator_log(dir / "simulator.jsonl");
  const auto exposures = read_exposure_log(dir / "exposures.jsonl");
  const bool probability = name == kFixtureName
                               ? pctr_is_probability(fixture_pipeline(*cfg.fixture))
                               : pctr_is_probability(spec, cfg);
  const auto report =
      evaluate_logs(name, spec, service, simulator, exposures, eval, sizes, probability);
  const fs::path out = at.eval(name);
  write_text_file(out / "rcs_grid.csv", rcs_grid_csv(report));
  write_text_file(out / "single_objective.csv", single_objective_csv(report));
  write_text_file(out / "calibration.csv",
                  report.calibration ? calibration_csv(*report.calibration)
                                     : calibration_csv(CalibrationReport{}));
  write_text_file(out / "histograms.csv",
                  histograms_csv(report.histograms, cfg.evaluation.histogram_buckets));
  write_text_file(out / "summary.csv", summary_csv(summarize(report)));
}

int cmd_evaluate(const Options& opt) {
  const auto cfg = load(opt);
  const Layout at{cfg.output_dir};
  EvaluationConfig eval = cfg.evaluation;
  if (!opt.k.empty()) eval.k_grid = opt.k;
  if (!opt.c.empty()) eval.c_grid = opt.c;
  bool any_pair = false;
  for (auto k : eval.k_grid) {
    if (k == 0) throw ConfigError("--k: values must be >= 1");
    for (auto c : eval.c_grid) any_pair = any_pair || k <= c;
  }
  if (!any_pair) throw ConfigError("--k/--c: grid has no pair with k <= c");
  if (opt.pipeline == kFixtureName || (opt.pipeline.empty() && cfg.fixture)) {
    if (!cfg.fixture) throw ConfigError("fixture: not present in the config");
    evaluate_one(cfg, eval, at, std::string(kFixtureName), std::string(kFixtureName),
                 cfg.fixture->sizes);
    if (opt.pipeline == kFixtureName) return kExitOk;
  }
  for (const auto& p : selected_pipelines(cfg, opt)) {
    evaluate_one(cfg, eval, at, p.name, p.spec, cfg.world.sizes);
  }
  return kExitOk;
}

int cmd_diagnose(const Options& opt) {
  const auto cfg = load(opt);
  const Layout at{cfg.output_dir};
  require_world(cfg, at);
  const std::string spec =
      opt.pipeline.empty() ? cfg.diagnose_pipeline : resolve_pipeline(cfg, opt.pipeline).spec;
  Experiment exp(cfg);
  load_models(exp, at);
  const auto table = diagnose(exp.pipeline(spec), exp.requests(Split::kEval), exp.world(),
                              cfg.evaluation.mode);
  write_text_file(at.diagnosis(spec), diagnosis_csv(table));
  return kExitOk;
}

int cmd_report(const Options& opt) {
  const auto cfg = load(opt);
  const Layout at{cfg.output_dir};
  std::vector<std::string> missing;
  for (const auto& p : cfg.pipelines) {
    for (const char* file : {"summary.csv", "histograms.csv", "rcs_grid.csv"}) {
      if (!fs::exists(at.eval(p.name) / file)) missing.push_back((at.eval(p.name) / file).string());
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw MissingPrerequisite("missing evaluate outputs: " + list + "; run: rankcons evaluate");
  }
  std::vector<SummaryRecord> rows;
  std::vector<TrendSeries> trends;
  const std::size_t k = cfg.evaluation.k_grid.front();
  for (const auto& p : cfg.pipelines) {
    const fs::path dir = at.eval(p.name);
    rows.push_back(parse_summary_csv(read_text_file(dir / "summary.csv")));
    const auto table = parse_histograms_csv(read_text_file(dir / "histograms.csv"));
    write_text_file(at.report() / (p.name + "_histograms.svg"),
                    histogram_svg(p.name + " score distributions", table));
    TrendSeries series{p.name, {}};
    for (const auto& g : parse_rcs_grid_csv(read_text_file(dir / "rcs_grid.csv"))) {
      if (g.k == k) {
        series.points.emplace_back(static_cast<double>(g.c),
                                   cfg.evaluation.mode == RcsMode::kMacro ? g.macro : g.micro);
      }
    }
    trends.push_back(std::move(series));
  }
  write_text_file(at.report() / "summary.csv", summary_table_csv(rows, cfg.evaluation.mode));
  write_text_file(at.report() / "rcs_vs_c.svg",
                  trend_svg("RCS vs c at k=" + std::to_string(k), "c", trends));
  return kExitOk;
}

void print_error(std::string_view kind, int code, std::string_view message) {
  std::cerr << "rankcons: error kind=" << kind << " code=" << code
            << " message=" << nlohmann::json(std::string(message)).dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ranking consistency of a simulated two-stage ad cascade"};
  app.require_subcommand(1);
  Options opt;
  const auto common = [&opt](CLI::App* cmd) {
    cmd->add_option("--config", opt.config, "JSON config file (defaults when omitted)");
    cmd->add_option("--out", opt.out, "output directory (overrides config and RANKCONS_OUTPUT_DIR)");
    cmd->add_option("--seed", opt.seed, "global seed (overrides config)");
  };
  auto* generate = app.add_subcommand("generate", "write the synthetic world");
  auto* train = app.add_subcommand("train", "train one tier, or all tiers in dependency order");
  auto* simulate = app.add_subcommand("simulate", "write service, simulator and exposure logs");
  auto* evaluate = app.add_subcommand("evaluate", "compute metric CSVs from logs");
  auto* diagnose = app.add_subcommand("diagnose", "slot substitution table");
  auto* report = app.add_subcommand("report", "summary table and SVG plots");
  for (auto* cmd : {generate, train, simulate, evaluate, diagnose, report}) common(cmd);
  train->add_option("--tier", opt.tier, "tier name, or 'all'");
  for (auto* cmd : {simulate, evaluate, diagnose}) {
    cmd->add_option("--pipeline", opt.pipeline, "configured pipeline name or spec");
  }
  simulate->add_option("--split", opt.split, "train or eval");
  evaluate->add_option("--k", opt.k, "k grid override")->delimiter(',');
  evaluate->add_option("--c", opt.c, "c grid override")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", kExitValidation, e.what());
    return kExitValidation;
  }

  try {
    if (generate->parsed()) return cmd_generate(opt);
    if (train->parsed()) return cmd_train(opt);
    if (simulate->parsed()) return cmd_simulate(opt);
    if (evaluate->parsed()) return cmd_evaluate(opt);
    if (diagnose->parsed()) return cmd_diagnose(opt);
    if (report->parsed()) return cmd_report(opt);
  } catch (const Error& e) {
    print_error(e.kind(), e.exit_code(), e.what());
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    print_error("data", kExitData, e.what());
    return kExitData;
  }
  return kExitOk;
}
