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

#include "rankcons/config.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

#include "json.hpp"
#include "rankcons/errors.h"
#include "rankcons/experiment.h"
#include "rankcons/logs.h"

namespace rankcons {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t name_hash(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Walks one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_or_root() + ": expected an object");
  }

  bool has(const char* key) const { return obj_.contains(key); }
  std::string path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* take(const char* key) {
    if (!obj_.contains(key)) return nullptr;
    seen_.insert(key);
    return &obj_.at(key);
  }

  void read(const char* key, std::size_t& out) {
    if (const json* v = take(key)) out = as_size(*v, path(key));
  }
  void read(const char* key, double& out) {
    if (const json* v = take(key)) out = as_real(*v, path(key));
  }
  void read(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ConfigError(path(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  void read(const char* key, std::vector<std::size_t>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) throw ConfigError(path(key) + ": expected a list of integers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        out.push_back(as_size((*v)[i], path(key) + "[" + std::to_string(i) + "]"));
      }
    }
  }

  void finish() const {
    for (const auto& [key, _] : obj_.items()) {
      if (!seen_.contains(key)) throw ConfigError(path(key.c_str()) + ": unknown key");
    }
  }

  static std::size_t as_size(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::size_t>();
    throw ConfigError(where + ": expected a non-negative integer");
  }
  static double as_real(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where + ": expected a finite number");
    return d;
  }

 private:
  std::string path_or_root() const { return path_.empty() ? "<root>" : path_; }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

ObjectiveScores parse_score_map(const json& v, const std::string& where) {
  if (!v.is_object()) throw ConfigError(where + ": expected an object of scores");
  ObjectiveScores scores;
  for (const auto& [name, value] : v.items()) {
    scores.set(name, Fields::as_real(value, where + "." + name));
  }
  return scores;
}

void parse_sizes(const json& v, const std::string& where, StageSizes& sizes) {
  Fields f(v, where);
  f.read("n", sizes.n);
  f.read("c", sizes.c);
  f.read("k", sizes.k);
  f.finish();
}

void parse_train(const json& v, const std::string& where, TrainConfig& train) {
  Fields f(v, where);
  f.read("learning_rate", train.learning_rate);
  f.read("epochs", train.epochs);
  f.read("batch_size", train.batch_size);
  f.read("chunks", train.chunks);
  f.finish();
}

TierConfig parse_tier(const json& v, const std::string& where) {
  Fields f(v, where);
  TierConfig tier;
  f.read("name", tier.name);
  if (tier.name.empty()) throw ConfigError(where + ".name: required");
  std::string kind = "logloss";
  f.read("kind", kind);
  try {
    tier.kind = parse_tier_kind(kind);
  } catch (const ConfigError& e) {
    throw ConfigError(f.path("kind") + ": " + e.what());
  }
  tier.train.loss = tier.kind == TierKind::kDistill ? LossKind::kDistill
                    : tier.kind == TierKind::kLtr   ? LossKind::kRankNet
                                                    : LossKind::kLogloss;
  f.read("mask_fraction", tier.mask_fraction);
  f.read("hidden", tier.hidden);
  f.read("samples_per_request", tier.samples_per_request);
  if (const json* train = f.take("train")) parse_train(*train, f.path("train"), tier.train);
  f.finish();
  return tier;
}

void parse_world(const json& v, WorldConfig& world) {
  Fields f(v, "world");
  f.read("d", world.d);
  f.read("d_u", world.d_u);
  f.read("corpus_size", world.corpus_size);
  f.read("requests_per_epoch", world.requests_per_epoch);
  f.read("eval_requests", world.eval_requests);
  if (const json* sizes = f.take("sizes")) parse_sizes(*sizes, "world.sizes", world.sizes);
  if (const json* range = f.take("bid_range")) {
    if (!range->is_array() || range->size() != 2) {
      throw ConfigError("world.bid_range: expected [lo, hi]");
    }
    world.bid_range.lo = Fields::as_real((*range)[0], "world.bid_range[0]");
    world.bid_range.hi = Fields::as_real((*range)[1], "world.bid_range[1]");
  }
  if (const json* truth = f.take("truth")) {
    Fields t(*truth, "world.truth");
    t.read("ctr_logit_scale", world.truth.ctr_logit_scale);
    t.read("ctr_bias", world.truth.ctr_bias);
    t.read("opt_logit_scale", world.truth.opt_logit_scale);
    t.finish();
  }
  f.finish();
}

void parse_evaluation(const json& v, EvaluationConfig& eval) {
  Fields f(v, "evaluation");
  f.read("k_grid", eval.k_grid);
  f.read("c_grid", eval.c_grid);
  std::string mode(to_string(eval.mode));
  f.read("mode", mode);
  try {
    eval.mode = parse_rcs_mode(mode);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("evaluation.mode: ") + e.what());
  }
  f.read("ece_buckets", eval.ece_buckets);
  f.read("histogram_buckets", eval.histogram_buckets);
  f.finish();
}

FixtureConfig parse_fixture(const json& v) {
  Fields f(v, "fixture");
  FixtureConfig fixture;
  f.read("request_id", fixture.request_id);
  if (const json* sizes = f.take("sizes")) parse_sizes(*sizes, "fixture.sizes", fixture.sizes);
  if (const json* items = f.take("items")) {
    if (!items->is_array()) throw ConfigError("fixture.items: expected a list");
    for (std::size_t i = 0; i < items->size(); ++i) {
      const std::string where = "fixture.items[" + std::to_string(i) + "]";
      Fields item(items->at(i), where);
      FixtureItem entry;
      item.read("item_id", entry.item_id);
      if (const json* pre = item.take("prerank")) entry.prerank = parse_score_map(*pre, where + ".prerank");
      if (const json* rank = item.take("rank")) entry.rank = parse_score_map(*rank, where + ".rank");
      item.finish();
      fixture.items.push_back(std::move(entry));
    }
  }
  f.finish();
  if (fixture.sizes.n == 0) fixture.sizes.n = fixture.items.size();
  return fixture;
}

ordered_json scores_json(const ObjectiveScores& scores) {
  ordered_json out = ordered_json::object();
  for (const auto& [name, value] : scores) out[name] = value;
  return out;
}

TierConfig make_tier(std::string name, TierKind kind, double mask, std::vector<std::size_t> hidden,
                     double lr, std::size_t epochs, std::size_t batch) {
  TierConfig tier;
  tier.name = std::move(name);
  tier.kind = kind;
  tier.mask_fraction = mask;
  tier.hidden = std::move(hidden);
  tier.train.learning_rate = lr;
  tier.train.epochs = epochs;
  tier.train.batch_size = batch;
  tier.train.loss = kind == TierKind::kDistill ? LossKind::kDistill
                    : kind == TierKind::kLtr   ? LossKind::kRankNet
                                               : LossKind::kLogloss;
  return tier;
}

}  // namespace

std::string_view to_string(TierKind kind) {
  switch (kind) {
    case TierKind::kRank:
      return "rank";
    case TierKind::kLogloss:
      return "logloss";
    case TierKind::kDistill:
      return "distill";
    case TierKind::kLtr:
      return "ltr";
  }
  return "unknown";
}

TierKind parse_tier_kind(std::string_view name) {
  if (name == "rank") return TierKind::kRank;
  if (name == "logloss") return TierKind::kLogloss;
  if (name == "distill") return TierKind::kDistill;
  if (name == "ltr") return TierKind::kLtr;
  throw ConfigError("unknown tier kind '" + std::string(name) + "'");
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig cfg;
  auto rank = make_tier("rank", TierKind::kRank, 1.0, {32, 16}, 0.05, 3, 64);
  rank.samples_per_request = 100;
  cfg.tiers = {
      rank,
      make_tier("logloss-small", TierKind::kLogloss, 0.25, {16}, 0.05, 20, 32),
      make_tier("logloss-med", TierKind::kLogloss, 0.5, {16}, 0.05, 20, 32),
      make_tier("logloss", TierKind::kLogloss, 0.75, {16}, 0.05, 20, 32),
      make_tier("distill", TierKind::kDistill, 0.75, {16}, 0.01, 10, 64),
      make_tier("ltr", TierKind::kLtr, 0.75, {16}, 0.1, 10, 8),
  };
  cfg.pipelines = {
      {"logloss-small", "init*logloss-small/opt*rank"},
      {"logloss-med", "init*logloss-med/opt*rank"},
      {"logloss", "init*logloss/opt*rank"},
      {"ltr", "init*ltr/opt*rank"},
      {"distill", "init*distill/opt*rank"},
      {"rank-as-prerank", "opt*rank/opt*rank"},
  };
  return cfg;
}

const TierConfig& ExperimentConfig::tier(std::string_view name) const {
  for (const auto& t : tiers) {
    if (t.name == name) return t;
  }
  throw ConfigError("unknown tier '" + std::string(name) + "'");
}

bool ExperimentConfig::has_tier(std::string_view name) const {
  for (const auto& t : tiers) {
    if (t.name == name) return true;
  }
  return false;
}

std::uint64_t ExperimentConfig::train_seed(std::string_view tier_name) const {
  return derive_seed(seed, name_hash(tier_name));
}

void ExperimentConfig::validate() const {
  world.validate();
  if (threads < 1) throw ConfigError("threads: must be >= 1");
  std::set<std::string> names;
  std::size_t teachers = 0;
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    const auto& t = tiers[i];
    const std::string where = "tiers[" + std::to_string(i) + "]";
    if (!names.insert(t.name).second) throw ConfigError(where + ".name: duplicate tier '" + t.name + "'");
    if (!(t.mask_fraction > 0.0 && t.mask_fraction <= 1.0)) {
      throw ConfigError(where + ".mask_fraction: must lie in (0, 1]");
    }
    for (auto h : t.hidden) {
      if (h == 0) throw ConfigError(where + ".hidden: layer widths must be positive");
    }
    try {
      t.train.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(where + "." + e.what());
    }
    if (t.kind == TierKind::kRank) ++teachers;
  }
  if (teachers != 1 && !tiers.empty()) {
    throw ConfigError("tiers: exactly one tier must have kind 'rank'");
  }
  std::set<std::string> pipeline_names;
  for (std::size_t i = 0; i < pipelines.size(); ++i) {
    if (pipelines[i].name.empty() || pipelines[i].spec.empty()) {
      throw ConfigError("pipelines[" + std::to_string(i) + "]: name and spec are required");
    }
    if (!pipeline_names.insert(pipelines[i].name).second) {
      throw ConfigError("pipelines[" + std::to_string(i) + "].name: duplicate");
    }
  }
  // Every spec must parse and name only defined tiers.
  const auto placeholder = std::make_shared<const Predictor>();
  const auto check_spec = [&](const std::string& spec, const std::string& where) {
    try {
      parse_pipeline_spec(spec, world.sizes, [&](std::string_view tier) {
        if (!has_tier(tier)) throw ConfigError("unknown tier '" + std::string(tier) + "'");
        return ModelScore{std::string(tier), placeholder};
      });
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  };
  for (std::size_t i = 0; i < pipelines.size(); ++i) {
    check_spec(pipelines[i].spec, "pipelines[" + std::to_string(i) + "].spec");
  }
  if (!tiers.empty()) {
    check_spec(exposure_pipeline, "exposure_pipeline");
    check_spec(training_pipeline, "training_pipeline");
    check_spec(diagnose_pipeline, "diagnose_pipeline");
  }
  if (evaluation.k_grid.empty() || evaluation.c_grid.empty()) {
    throw ConfigError("evaluation: k_grid and c_grid must be non-empty");
  }
  for (auto k : evaluation.k_grid) {
    if (k < 1 || k > world.sizes.n) {
      throw ConfigError("evaluation.k_grid: values must lie in [1, world.sizes.n]");
    }
  }
  for (auto c : evaluation.c_grid) {
    if (c < 1 || c > world.sizes.n) {
      throw ConfigError("evaluation.c_grid: values must lie in [1, world.sizes.n]");
    }
  }
  const bool has_pair = std::any_of(evaluation.k_grid.begin(), evaluation.k_grid.end(), [&](auto k) {
    return std::any_of(evaluation.c_grid.begin(), evaluation.c_grid.end(),
                       [k](auto c) { return k <= c; });
  });
  if (!has_pair) throw ConfigError("evaluation: k_grid and c_grid have no pair with k <= c");
  if (evaluation.ece_buckets < 1) throw ConfigError("evaluation.ece_buckets: must be >= 1");
  if (evaluation.histogram_buckets < 1) {
    throw ConfigError("evaluation.histogram_buckets: must be >= 1");
  }
  if (fixture) {
    try {
      fixture->sizes.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("fixture.sizes: ") + e.what());
    }
    if (fixture->items.size() != fixture->sizes.n) {
      throw ConfigError("fixture.items: count must equal fixture.sizes.n");
    }
  }
}

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("<root>: malformed JSON: ") + e.what());
  }
  ExperimentConfig cfg = ExperimentConfig::defaults();
  Fields f(root, "");
  f.read("seed", cfg.seed);
  f.read("output_dir", cfg.output_dir);
  f.read("threads", cfg.threads);
  if (const json* world = f.take("world")) parse_world(*world, cfg.world);
  if (const json* tiers = f.take("tiers")) {
    if (!tiers->is_array()) throw ConfigError("tiers: expected a list");
    cfg.tiers.clear();
    for (std::size_t i = 0; i < tiers->size(); ++i) {
      cfg.tiers.push_back(parse_tier(tiers->at(i), "tiers[" + std::to_string(i) + "]"));
    }
  }
  if (const json* pipelines = f.take("pipelines")) {
    if (!pipelines->is_array()) throw ConfigError("pipelines: expected a list");
    cfg.pipelines.clear();
    for (std::size_t i = 0; i < pipelines->size(); ++i) {
      Fields p(pipelines->at(i), "pipelines[" + std::to_string(i) + "]");
      PipelineConfig pc;
      p.read("name", pc.name);
      p.read("spec", pc.spec);
      p.finish();
      cfg.pipelines.push_back(std::move(pc));
    }
  }
  f.read("exposure_pipeline", cfg.exposure_pipeline);
  f.read("training_pipeline", cfg.training_pipeline);
  f.read("diagnose_pipeline", cfg.diagnose_pipeline);
  if (const json* eval = f.take("evaluation")) parse_evaluation(*eval, cfg.evaluation);
  if (const json* fixture = f.take("fixture")) cfg.fixture = parse_fixture(*fixture);
  f.finish();
  cfg.world.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const MissingPrerequisite&) {
    throw ConfigError("config file not found: " + path.string());
  }
  return parse_config(text);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  ordered_json root;
  root["seed"] = cfg.seed;
  root["output_dir"] = cfg.output_dir;
  root["threads"] = cfg.threads;
  const auto& w = cfg.world;
  root["world"] = {
      {"d", w.d},
      {"d_u", w.d_u},
      {"corpus_size", w.corpus_size},
      {"requests_per_epoch", w.requests_per_epoch},
      {"eval_requests", w.eval_requests},
      {"sizes", {{"n", w.sizes.n}, {"c", w.sizes.c}, {"k", w.sizes.k}}},
      {"bid_range", {w.bid_range.lo, w.bid_range.hi}},
      {"truth",
       {{"ctr_logit_scale", w.truth.ctr_logit_scale},
        {"ctr_bias", w.truth.ctr_bias},
        {"opt_logit_scale", w.truth.opt_logit_scale}}},
  };
  root["tiers"] = ordered_json::array();
  for (const auto& t : cfg.tiers) {
    ordered_json tier;
    tier["name"] = t.name;
    tier["kind"] = std::string(to_string(t.kind));
    tier["mask_fraction"] = t.mask_fraction;
    tier["hidden"] = t.hidden;
    if (t.kind == TierKind::kRank) tier["samples_per_request"] = t.samples_per_request;
    tier["train"] = {{"learning_rate", t.train.learning_rate},
                     {"epochs", t.train.epochs},
                     {"batch_size", t.train.batch_size}};
    if (t.kind == TierKind::kLtr) tier["train"]["chunks"] = t.train.chunks;
    root["tiers"].push_back(tier);
  }
  root["pipelines"] = ordered_json::array();
  for (const auto& p : cfg.pipelines) root["pipelines"].push_back({{"name", p.name}, {"spec", p.spec}});
  root["exposure_pipeline"] = cfg.exposure_pipeline;
  root["training_pipeline"] = cfg.training_pipeline;
  root["diagnose_pipeline"] = cfg.diagnose_pipeline;
  root["evaluation"] = {{"k_grid", cfg.evaluation.k_grid},
                        {"c_grid", cfg.evaluation.c_grid},
                        {"mode", std::string(to_string(cfg.evaluation.mode))},
                        {"ece_buckets", cfg.evaluation.ece_buckets},
                        {"histogram_buckets", cfg.evaluation.histogram_buckets}};
  if (cfg.fixture) {
    ordered_json fixture;
    fixture["request_id"] = cfg.fixture->request_id;
    fixture["sizes"] = {{"n", cfg.fixture->sizes.n},
                        {"c", cfg.fixture->sizes.c},
                        {"k", cfg.fixture->sizes.k}};
    fixture["items"] = ordered_json::array();
    for (const auto& item : cfg.fixture->items) {
      fixture["items"].push_back({{"item_id", item.item_id},
                                  {"prerank", scores_json(item.prerank)},
                                  {"rank", scores_json(item.rank)}});
    }
    root["fixture"] = fixture;
  }
  return root.dump(2) + "\n";
}

}  // namespace rankcons
