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

#include "rankcons/experiment.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "rankcons/errors.h"

namespace rankcons {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

Stage parse_stage(std::string_view text, std::string_view spec, const ModelResolver& resolve) {
  Stage stage;
  for (std::string_view raw : split(text, '*')) {
    std::string_view term = trim(raw);
    if (term.empty()) throw ConfigError("pipeline spec '" + std::string(spec) + "': empty term");
    if (term == "init" || term == "init-bid") {
      stage.slots.push_back({std::string(kBidObjective), BidSource::kInit});
      continue;
    }
    if (term == "opt" || term == "opt-bid") {
      stage.slots.push_back({std::string(kBidObjective), BidSource::kOpt});
      continue;
    }
    double scale = 1.0;
    if (const auto at = term.find('@'); at != std::string_view::npos) {
      const std::string number(trim(term.substr(at + 1)));
      std::size_t used = 0;
      try {
        scale = std::stod(number, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != number.size() || number.empty() || !(scale > 0.0) || !std::isfinite(scale)) {
        throw ConfigError("pipeline spec '" + std::string(spec) + "': bad scale '" + number + "'");
      }
      term = trim(term.substr(0, at));
    }
    if (term.size() >= 2 && term.front() == '|' && term.back() == '|') {
      term = trim(term.substr(1, term.size() - 2));
    }
    if (term.empty()) throw ConfigError("pipeline spec '" + std::string(spec) + "': empty model name");
    ModelScore score = resolve(term);
    score.scale = scale;
    stage.slots.push_back({std::string(kCtrObjective), std::move(score)});
  }
  return stage;
}

// Probability clamped below 1 for calibration buckets.
double to_unit(double v) { return std::clamp(v, 0.0, 1.0 - kProbClamp); }

struct Key {
  RequestId request_id;
  ItemId item_id;
  bool operator==(const Key&) const = default;
};

struct KeyHash {
  std::size_t operator()(const Key& key) const noexcept {
    return std::hash<std::uint64_t>{}(derive_seed(key.request_id, key.item_id));
  }
};

double logit_of(double p) {
  const double clamped = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return std::log(clamped) - std::log1p(-clamped);
}

// Competitive-set records of the service log grouped by request, in
// pre_rank_pos order, with the teacher pctr joined from the simulator log.
struct CompetitiveItem {
  ItemId item_id;
  double teacher_pctr;
};

std::map<RequestId, std::vector<CompetitiveItem>> competitive_sets(
    std::span<const ServiceRecord> service, std::span<const SimulatorRecord> simulator,
    std::size_t c) {
  std::unordered_map<Key, double, KeyHash> teacher;
  teacher.reserve(simulator.size());
  for (const auto& rec : simulator) {
    teacher[{rec.request_id, rec.item_id}] = rec.scores.at(kCtrObjective);
  }
  std::map<RequestId, std::vector<std::pair<std::uint32_t, CompetitiveItem>>> staged;
  for (const auto& rec : service) {
    if (rec.pre_rank_pos == 0 || rec.pre_rank_pos > c) continue;
    auto it = teacher.find({rec.request_id, rec.item_id});
    if (it == teacher.end()) {
      throw DataError("simulator log has no record for request " +
                      std::to_string(rec.request_id) + " item " + std::to_string(rec.item_id));
    }
    staged[rec.request_id].push_back({rec.pre_rank_pos, {rec.item_id, it->second}});
  }
  std::map<RequestId, std::vector<CompetitiveItem>> out;
  for (auto& [id, items] : staged) {
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    auto& dst = out[id];
    for (const auto& [_, item] : items) dst.push_back(item);
  }
  return out;
}

}  // namespace

Pipeline parse_pipeline_spec(std::string_view spec, const StageSizes& sizes,
                             const ModelResolver& resolve) {
  const auto stages = split(spec, '/');
  if (stages.size() != 2) {
    throw ConfigError("pipeline spec '" + std::string(spec) +
                      "' must have the form <prerank>/<rank>");
  }
  Pipeline pipeline;
  pipeline.prerank = parse_stage(stages[0], spec, resolve);
  pipeline.rank = parse_stage(stages[1], spec, resolve);
  pipeline.sizes = sizes;
  try {
    pipeline.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("pipeline spec '" + std::string(spec) + "': " + e.what());
  }
  return pipeline;
}

std::string spec_slug(std::string_view spec) {
  std::string out;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const char ch = spec[i];
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '.') {
      out += ch;
    } else if (ch == '*') {
      out += '-';
    } else if (ch == '/') {
      out += "__";
    } else if (ch == '@') {
      out += "_x";
    }
  }
  return out;
}

std::vector<bool> tier_mask(std::size_t phi_dim, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(phi_dim);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, streams::kMasks));
  std::shuffle(order.begin(), order.end(), rng);
  const auto active = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(phi_dim))), 1,
      phi_dim);
  std::vector<bool> mask(phi_dim, false);
  for (std::size_t i = 0; i < active; ++i) mask[order[i]] = true;
  return mask;
}

bool pctr_is_probability(const Pipeline& pipeline) {
  const Slot* slot = pipeline.prerank.find(kCtrObjective);
  if (slot == nullptr) return false;
  if (const auto* model = std::get_if<ModelScore>(&slot->source)) {
    return model->transform == Transform::kSigmoid;
  }
  if (const auto* table = std::get_if<TableScore>(&slot->source)) {
    return std::all_of(table->values.begin(), table->values.end(),
                       [](const auto& kv) { return kv.second >= 0.0 && kv.second < 1.0; });
  }
  return false;
}

bool pctr_is_probability(std::string_view spec, const ExperimentConfig& cfg) {
  const auto placeholder = std::make_shared<const Predictor>();
  const auto pipeline = parse_pipeline_spec(spec, cfg.world.sizes, [&](std::string_view tier) {
    const bool ltr = cfg.tier(tier).kind == TierKind::kLtr;
    return ModelScore{std::string(tier), placeholder,
                      ltr ? Transform::kExp : Transform::kSigmoid};
  });
  return pctr_is_probability(pipeline);
}

PipelineReport evaluate_logs(std::string name, std::string spec,
                             std::span<const ServiceRecord> service,
                             std::span<const SimulatorRecord> simulator,
                             std::span<const ExposureRecord> exposures,
                             const EvaluationConfig& eval, const StageSizes& sizes,
                             bool pctr_is_probability) {
  PipelineReport report;
  report.name = std::move(name);
  report.spec = std::move(spec);
  report.sizes = sizes;
  for (auto k : eval.k_grid) {
    for (auto c : eval.c_grid) {
      if (k <= c) report.rcs_grid.push_back(rcs(service, simulator, k, c));
    }
  }
  report.rcs = rcs(service, simulator, sizes.k, sizes.c);
  if (!service.empty()) {
    for (const auto& [objective, _] : service.front().scores) {
      report.single_objective.emplace_back(
          objective, single_objective_rcs(service, simulator, objective, sizes.k, sizes.c));
    }
  }

  // Pair pre-ranking and ranking pctr per (request, item).
  std::unordered_map<Key, double, KeyHash> rank_ctr;
  rank_ctr.reserve(simulator.size());
  bool have_ctr = true;
  for (const auto& rec : simulator) {
    auto v = rec.scores.get(kCtrObjective);
    if (!v) {
      have_ctr = false;
      break;
    }
    rank_ctr[{rec.request_id, rec.item_id}] = *v;
  }
  std::unordered_map<Key, double, KeyHash> pre_ctr;
  std::vector<double> pred;
  std::vector<double> ref;
  if (have_ctr) {
    pre_ctr.reserve(service.size());
    for (const auto& rec : service) {
      auto v = rec.scores.get(kCtrObjective);
      auto r = rank_ctr.find({rec.request_id, rec.item_id});
      if (!v || r == rank_ctr.end()) {
        have_ctr = false;
        break;
      }
      pre_ctr[{rec.request_id, rec.item_id}] = *v;
      pred.push_back(to_unit(*v));
      ref.push_back(to_unit(r->second));
    }
  }
  if (pctr_is_probability && have_ctr && !pred.empty()) {
    report.calibration = calibration(pred, ref, eval.ece_buckets);
    StageHistograms h;
    h.pre_full = score_histogram(pred, eval.histogram_buckets);
    h.rank_full = score_histogram(ref, eval.histogram_buckets);
    std::vector<double> pre_win;
    std::vector<double> rank_win;
    for (const auto& e : exposures) {
      auto p = pre_ctr.find({e.request_id, e.item_id});
      auto r = rank_ctr.find({e.request_id, e.item_id});
      if (p == pre_ctr.end() || r == rank_ctr.end()) {
        throw DataError("exposure for request " + std::to_string(e.request_id) + " item " +
                        std::to_string(e.item_id) + " missing from the logs");
      }
      pre_win.push_back(to_unit(p->second));
      rank_win.push_back(to_unit(r->second));
    }
    h.pre_win = score_histogram(pre_win, eval.histogram_buckets);
    h.rank_win = score_histogram(rank_win, eval.histogram_buckets);
    h.tv_full = total_variation(h.pre_full, h.rank_full);
    h.tv_win = total_variation(h.pre_win, h.rank_win);
    report.histograms = std::move(h);
  }
  if (have_ctr && !exposures.empty()) {
    std::vector<int> labels;
    std::vector<double> scores;
    for (const auto& e : exposures) {
      auto p = pre_ctr.find({e.request_id, e.item_id});
      if (p == pre_ctr.end()) continue;
      labels.push_back(e.click);
      scores.push_back(p->second);
    }
    const auto positives = std::count(labels.begin(), labels.end(), 1);
    if (positives > 0 && positives < static_cast<std::ptrdiff_t>(labels.size())) {
      report.auc = auc(labels, scores);
    }
  }
  return report;
}

Experiment::Experiment(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.world.seed = cfg_.seed;
  cfg_.validate();
  world_ = World::generate(cfg_.world);
  train_requests_ = gen_requests(cfg_.world, world_.corpus, Split::kTrain);
  eval_requests_ = gen_requests(cfg_.world, world_.corpus, Split::kEval);
  for (const auto& r : train_requests_) by_id_[r.id] = &r;
  for (const auto& r : eval_requests_) by_id_[r.id] = &r;
}

const std::vector<Request>& Experiment::requests(Split split) const {
  return split == Split::kTrain ? train_requests_ : eval_requests_;
}

const Request& Experiment::request(RequestId id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw DataError("unknown request_id " + std::to_string(id));
  return *it->second;
}

std::uint64_t Experiment::click_seed(Split split) const {
  return derive_seed(cfg_.seed, streams::kClicks, split == Split::kTrain ? 0 : 1);
}

Predictor Experiment::initial_model(const TierConfig& tier) const {
  const std::size_t dim = cfg_.world.phi_dim();
  std::vector<std::size_t> dims{dim};
  dims.insert(dims.end(), tier.hidden.begin(), tier.hidden.end());
  dims.push_back(1);
  return Predictor::initialized(tier_mask(dim, tier.mask_fraction, cfg_.seed), dims,
                                cfg_.train_seed(tier.name));
}

PointDataset Experiment::teacher_dataset(const TierConfig& tier) const {
  PointDataset data;
  const std::size_t n = cfg_.world.sizes.n;
  const std::size_t take =
      tier.samples_per_request == 0 ? n : std::min(n, tier.samples_per_request);
  data.reserve(train_requests_.size() * take);
  for (const auto& req : train_requests_) {
    Rng rng(derive_seed(cfg_.seed, streams::kTeacherLabels, req.id));
    std::vector<ItemId> items = req.preranking_set;
    for (std::size_t i = 0; i < take; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, items.size() - 1);
      std::swap(items[i], items[pick(rng)]);
    }
    for (std::size_t i = 0; i < take; ++i) {
      const Item& item = world_.item(items[i]);
      const bool click = sample_click(world_.true_ctr(req, item), rng);
      data.push_back({req.user_features, item.features, click ? 1.0 : 0.0});
    }
  }
  return data;
}

PointDataset Experiment::exposure_dataset(std::span<const ExposureRecord> exposures) const {
  PointDataset data;
  data.reserve(exposures.size());
  for (const auto& e : exposures) {
    const Request& req = request(e.request_id);
    data.push_back({req.user_features, world_.item(e.item_id).features,
                    static_cast<double>(e.click)});
  }
  return data;
}

PointDataset Experiment::distill_dataset(std::span<const ServiceRecord> service,
                                         std::span<const SimulatorRecord> simulator) const {
  PointDataset data;
  for (const auto& [id, items] : competitive_sets(service, simulator, cfg_.world.sizes.c)) {
    const Request& req = request(id);
    for (const auto& item : items) {
      data.push_back({req.user_features, world_.item(item.item_id).features,
                      logit_of(item.teacher_pctr)});
    }
  }
  return data;
}

GroupDataset Experiment::ltr_dataset(std::span<const ServiceRecord> service,
                                     std::span<const SimulatorRecord> simulator,
                                     std::size_t chunks) const {
  GroupDataset data;
  for (const auto& [id, items] : competitive_sets(service, simulator, cfg_.world.sizes.c)) {
    const Request& req = request(id);
    std::vector<ItemId> ids;
    std::vector<double> targets;
    for (const auto& item : items) {
      const Item& it = world_.item(item.item_id);
      ids.push_back(it.id);
      targets.push_back(ltr_target(item.teacher_pctr, world_.opt_bid(req, it), it.init_bid));
    }
    if (ids.size() < chunks) continue;
    const auto order = ranking_order(ids, targets);
    const std::optional<std::size_t> boundary =
        chunks == 2 ? std::optional<std::size_t>(cfg_.world.sizes.k) : std::nullopt;
    const auto labels = assign_chunks(ids.size(), chunks, boundary);
    Group group;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const Item& it = world_.item(ids[order[pos]]);
      group.items.push_back({req.user_features, it.features, static_cast<double>(labels[pos])});
    }
    data.push_back(std::move(group));
  }
  return data;
}

TrainResult Experiment::train_teacher(const TierConfig& tier) const {
  if (tier.kind != TierKind::kRank) throw ConfigError("tier '" + tier.name + "' is not a teacher");
  TrainConfig train = tier.train;
  train.seed = cfg_.train_seed(tier.name);
  return rankcons::train(initial_model(tier), teacher_dataset(tier), train);
}

TrainResult Experiment::train_logloss(const TierConfig& tier,
                                      std::span<const ExposureRecord> exposures) const {
  if (tier.kind != TierKind::kLogloss) {
    throw ConfigError("tier '" + tier.name + "' is not a logloss tier");
  }
  if (exposures.empty()) throw DataError("exposure log is empty");
  TrainConfig train = tier.train;
  train.seed = cfg_.train_seed(tier.name);
  return rankcons::train(initial_model(tier), exposure_dataset(exposures), train);
}

TrainResult Experiment::train_from_teacher(const TierConfig& tier,
                                           std::span<const ServiceRecord> service,
                                           std::span<const SimulatorRecord> simulator) const {
  TrainConfig train = tier.train;
  train.seed = cfg_.train_seed(tier.name);
  if (tier.kind == TierKind::kDistill) {
    return rankcons::train(initial_model(tier), distill_dataset(service, simulator), train);
  }
  if (tier.kind == TierKind::kLtr) {
    return rankcons::train(initial_model(tier), ltr_dataset(service, simulator, train.chunks),
                           train);
  }
  throw ConfigError("tier '" + tier.name + "' does not learn from teacher scores");
}

void Experiment::set_model(const std::string& tier, Predictor model) {
  if (model.input_dim() != cfg_.world.phi_dim()) {
    throw DataError("model for tier '" + tier + "' expects " +
                    std::to_string(model.input_dim()) + " features, world has " +
                    std::to_string(cfg_.world.phi_dim()));
  }
  models_[tier] = std::make_shared<const Predictor>(std::move(model));
}

bool Experiment::has_model(std::string_view tier) const { return models_.contains(tier); }

std::shared_ptr<const Predictor> Experiment::model(std::string_view tier) const {
  auto it = models_.find(tier);
  if (it == models_.end()) {
    throw MissingPrerequisite("no trained model for tier '" + std::string(tier) +
                              "'; run: rankcons train --tier " + std::string(tier));
  }
  return it->second;
}

Pipeline Experiment::pipeline(std::string_view spec) const {
  return parse_pipeline_spec(spec, cfg_.world.sizes, [&](std::string_view tier) {
    const TierConfig& t = cfg_.tier(tier);
    return ModelScore{t.name, model(tier),
                      t.kind == TierKind::kLtr ? Transform::kExp : Transform::kSigmoid, 1.0};
  });
}

SimulationLogs Experiment::simulate(const Pipeline& pipeline, Split split) const {
  return rankcons::simulate(pipeline, requests(split), world_, click_seed(split), cfg_.threads);
}

std::vector<ExposureRecord> Experiment::exposure_log(const Pipeline& pipeline,
                                                     Split split) const {
  return collect_exposure_log(pipeline, requests(split), world_, click_seed(split));
}

std::map<std::string, std::vector<double>> train_all(Experiment& exp) {
  const auto& cfg = exp.config();
  std::map<std::string, std::vector<double>> traces;
  for (const auto& tier : cfg.tiers) {
    if (tier.kind != TierKind::kRank) continue;
    auto result = exp.train_teacher(tier);
    traces[tier.name] = result.loss_trace;
    exp.set_model(tier.name, std::move(result.model));
  }
  std::vector<ExposureRecord> exposures;
  for (const auto& tier : cfg.tiers) {
    if (tier.kind != TierKind::kLogloss) continue;
    if (exposures.empty()) exposures = exp.exposure_log(exp.pipeline(cfg.exposure_pipeline), Split::kTrain);
    auto result = exp.train_logloss(tier, exposures);
    traces[tier.name] = result.loss_trace;
    exp.set_model(tier.name, std::move(result.model));
  }
  std::optional<SimulationLogs> teacher_logs;
  for (const auto& tier : cfg.tiers) {
    if (tier.kind != TierKind::kDistill && tier.kind != TierKind::kLtr) continue;
    if (!teacher_logs) teacher_logs = exp.simulate(exp.pipeline(cfg.training_pipeline), Split::kTrain);
    auto result = exp.train_from_teacher(tier, teacher_logs->service, teacher_logs->simulator);
    traces[tier.name] = result.loss_trace;
    exp.set_model(tier.name, std::move(result.model));
  }
  return traces;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  Experiment exp(cfg);
  ExperimentResult result;
  result.loss_traces = train_all(exp);
  for (const auto& pc : exp.config().pipelines) {
    const auto logs = exp.simulate(exp.pipeline(pc.spec), Split::kEval);
    result.pipelines.push_back(evaluate_logs(pc.name, pc.spec, logs.service, logs.simulator,
                                             logs.exposures, exp.config().evaluation,
                                             exp.config().world.sizes,
                                             pctr_is_probability(exp.pipeline(pc.spec))));
  }
  result.diagnosis = diagnose(exp.pipeline(exp.config().diagnose_pipeline),
                              exp.requests(Split::kEval), exp.world(),
                              exp.config().evaluation.mode);
  return result;
}

World fixture_world(const FixtureConfig& fixture) {
  World world;
  world.cfg.sizes = fixture.sizes;
  world.cfg.corpus_size = fixture.items.size();
  for (const auto& entry : fixture.items) {
    Item item;
    item.id = entry.item_id;
    item.init_bid = entry.prerank.get(kBidObjective).value_or(1.0);
    world.corpus.push_back(std::move(item));
  }
  return world;
}

Request fixture_request(const FixtureConfig& fixture) {
  Request req;
  req.id = fixture.request_id;
  for (const auto& entry : fixture.items) req.preranking_set.push_back(entry.item_id);
  return req;
}

Pipeline fixture_pipeline(const FixtureConfig& fixture) {
  Pipeline pipeline;
  pipeline.sizes = fixture.sizes;
  if (fixture.items.empty()) throw ConfigError("fixture.items: must not be empty");
  for (const auto& [objective, _] : fixture.items.front().prerank) {
    TableScore pre{objective + "@prerank", {}};
    TableScore rank{objective + "@rank", {}};
    for (const auto& entry : fixture.items) {
      pre.values[entry.item_id] = entry.prerank.at(objective);
      rank.values[entry.item_id] = entry.rank.at(objective);
    }
    pipeline.prerank.slots.push_back({objective, std::move(pre)});
    pipeline.rank.slots.push_back({objective, std::move(rank)});
  }
  pipeline.validate();
  return pipeline;
}

}  // namespace rankcons
