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

#include "rankcons/cascade.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

#include "rankcons/errors.h"

namespace rankcons {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string format_scale(double scale) {
  std::ostringstream os;
  os << scale;
  return os.str();
}

std::vector<double> slot_values(const Slot& slot, const Request& req,
                                std::span<const ItemId> items, const World& world) {
  std::vector<double> values(items.size());
  std::visit(
      Overloaded{
          [&](BidSource bid) {
            for (std::size_t i = 0; i < items.size(); ++i) {
              const Item& item = world.item(items[i]);
              values[i] = bid == BidSource::kInit ? item.init_bid : world.opt_bid(req, item);
            }
          },
          [&](const ModelScore& model) {
            Predictor::Workspace ws;
            for (std::size_t i = 0; i < items.size(); ++i) {
              const Item& item = world.item(items[i]);
              const double logit = model.model->forward(req.user_features, item.features, ws);
              const double base =
                  model.transform == Transform::kSigmoid ? sigmoid(logit) : std::exp(logit);
              values[i] = model.scale * base;
            }
          },
          [&](const TableScore& table) {
            for (std::size_t i = 0; i < items.size(); ++i) {
              auto it = table.values.find(items[i]);
              if (it == table.values.end()) {
                throw DataError("score table '" + table.name + "' has no entry for item " +
                                std::to_string(items[i]));
              }
              values[i] = it->second;
            }
          },
      },
      slot.source);
  return values;
}

std::vector<double> fused_scores(const Stage& stage,
                                 const std::vector<ObjectiveScores>& scores) {
  const FusionRule rule = stage.rule();
  std::vector<double> fused(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) fused[i] = rule.apply(scores[i]);
  return fused;
}

}  // namespace

std::string describe(const ScoreSource& source) {
  return std::visit(
      Overloaded{
          [](BidSource bid) -> std::string {
            return bid == BidSource::kInit ? "init-bid" : "opt-bid";
          },
          [](const ModelScore& model) -> std::string {
            std::string out = "|" + model.name + "|";
            if (model.scale != 1.0) out += "@" + format_scale(model.scale);
            return out;
          },
          [](const TableScore& table) -> std::string { return "table:" + table.name; },
      },
      source);
}

bool same_source(const ScoreSource& a, const ScoreSource& b) {
  if (a.index() != b.index()) return false;
  if (const auto* bid = std::get_if<BidSource>(&a)) return *bid == std::get<BidSource>(b);
  if (const auto* model = std::get_if<ModelScore>(&a)) {
    const auto& other = std::get<ModelScore>(b);
    const bool same_model = model->model == other.model ||
                            (model->model && other.model && *model->model == *other.model);
    return same_model && model->transform == other.transform && model->scale == other.scale;
  }
  const auto& table = std::get<TableScore>(a);
  return table.values == std::get<TableScore>(b).values;
}

FusionRule Stage::rule() const { return FusionRule::product(objectives()); }

std::vector<std::string> Stage::objectives() const {
  std::vector<std::string> names;
  names.reserve(slots.size());
  for (const auto& slot : slots) names.push_back(slot.objective);
  return names;
}

const Slot* Stage::find(std::string_view objective) const {
  for (const auto& slot : slots) {
    if (slot.objective == objective) return &slot;
  }
  return nullptr;
}

std::vector<std::string> Stage::probability_objectives() const {
  std::vector<std::string> names;
  for (const auto& slot : slots) {
    const auto* model = std::get_if<ModelScore>(&slot.source);
    if (model && model->transform == Transform::kSigmoid) names.push_back(slot.objective);
  }
  return names;
}

std::string Stage::describe() const {
  std::string out;
  for (const auto& slot : slots) {
    if (!out.empty()) out += "*";
    out += rankcons::describe(slot.source);
  }
  return out;
}

void Pipeline::validate() const {
  sizes.validate();
  if (prerank.slots.empty() || rank.slots.empty()) {
    throw ConfigError("pipeline stages need at least one objective");
  }
  auto names = [](const Stage& stage) {
    std::set<std::string> set;
    for (const auto& slot : stage.slots) {
      if (!set.insert(slot.objective).second) {
        throw ConfigError("objective '" + slot.objective + "' appears twice in one stage");
      }
      if (const auto* model = std::get_if<ModelScore>(&slot.source); model && !model->model) {
        throw ConfigError("objective '" + slot.objective + "' has no model");
      }
    }
    return set;
  };
  if (names(prerank) != names(rank)) {
    throw ConfigError("pre-ranking and ranking stages must share objective names");
  }
}

std::string Pipeline::describe() const {
  return prerank.describe() + " / " + rank.describe();
}

std::vector<ObjectiveScores> score_stage(const Stage& stage, const Request& req,
                                         std::span<const ItemId> items,
                                         const World& world) {
  std::vector<ObjectiveScores> scores(items.size());
  for (const auto& slot : stage.slots) {
    const auto values = slot_values(slot, req, items, world);
    for (std::size_t i = 0; i < items.size(); ++i) scores[i].set(slot.objective, values[i]);
  }
  return scores;
}

RequestOutcome run_request(const Request& req, const Pipeline& pipeline,
                           const World& world) {
  const std::span<const ItemId> items = req.preranking_set;
  const auto pre_scores = score_stage(pipeline.prerank, req, items, world);
  const auto pre_fused = fused_scores(pipeline.prerank, pre_scores);
  const auto order = ranking_order(items, pre_fused);

  RequestOutcome outcome;
  outcome.service.reserve(items.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t i = order[pos];
    outcome.service.push_back({req.id, items[i], pre_scores[i], pre_fused[i],
                               static_cast<std::uint32_t>(pos + 1)});
  }
  const std::size_t c = std::min(pipeline.sizes.c, items.size());
  outcome.competitive.reserve(c);
  for (std::size_t pos = 0; pos < c; ++pos) outcome.competitive.push_back(items[order[pos]]);

  const auto rank_scores = score_stage(pipeline.rank, req, outcome.competitive, world);
  const auto rank_fused = fused_scores(pipeline.rank, rank_scores);
  outcome.win = top_by_score(outcome.competitive, rank_fused, pipeline.sizes.k);
  return outcome;
}

SimulatorOutcome run_simulator(const Request& req, const Pipeline& pipeline,
                               const World& world) {
  const std::span<const ItemId> items = req.preranking_set;
  const auto scores = score_stage(pipeline.rank, req, items, world);
  const auto fused = fused_scores(pipeline.rank, scores);
  const auto order = ranking_order(items, fused);

  SimulatorOutcome outcome;
  outcome.records.reserve(items.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t i = order[pos];
    outcome.records.push_back(
        {req.id, items[i], scores[i], fused[i], static_cast<std::uint32_t>(pos + 1)});
  }
  const std::size_t k = std::min(pipeline.sizes.k, items.size());
  for (std::size_t pos = 0; pos < k; ++pos) outcome.ideal_win.push_back(items[order[pos]]);
  return outcome;
}

Pipeline substitute(const Pipeline& pipeline, std::string_view objective,
                    ScoreSource replacement) {
  Pipeline out = pipeline;
  for (auto& slot : out.prerank.slots) {
    if (slot.objective == objective) {
      slot.source = std::move(replacement);
      return out;
    }
  }
  throw ConfigError("no pre-ranking slot named '" + std::string(objective) + "'");
}

Pipeline rank_as_prerank(const Pipeline& pipeline) {
  Pipeline out = pipeline;
  for (const auto& slot : pipeline.rank.slots) {
    out = substitute(out, slot.objective, slot.source);
  }
  return out;
}

namespace {

std::vector<ExposureRecord> label_win_set(const Request& req,
                                          std::span<const ItemId> win,
                                          const World& world, std::uint64_t click_seed) {
  std::vector<ExposureRecord> records;
  records.reserve(win.size());
  for (ItemId id : win) {
    Rng rng(derive_seed(click_seed, streams::kClicks, req.id, id));
    const double p = world.true_ctr(req, world.item(id));
    records.push_back({req.id, id, sample_click(p, rng) ? 1 : 0});
  }
  return records;
}

}  // namespace

std::vector<ExposureRecord> collect_exposure_log(const Pipeline& pipeline,
                                                 std::span<const Request> requests,
                                                 const World& world,
                                                 std::uint64_t click_seed) {
  pipeline.validate();
  std::vector<ExposureRecord> log;
  for (const auto& req : requests) {
    const auto outcome = run_request(req, pipeline, world);
    auto labeled = label_win_set(req, outcome.win, world, click_seed);
    log.insert(log.end(), labeled.begin(), labeled.end());
  }
  return log;
}

SimulationLogs simulate(const Pipeline& pipeline, std::span<const Request> requests,
                        const World& world, std::uint64_t click_seed,
                        std::size_t threads) {
  pipeline.validate();
  struct PerRequest {
    RequestOutcome service;
    SimulatorOutcome simulator;
    std::vector<ExposureRecord> exposures;
  };
  std::vector<PerRequest> results(requests.size());
  auto work = [&](std::size_t worker, std::size_t workers) {
    for (std::size_t r = worker; r < requests.size(); r += workers) {
      auto& slot = results[r];
      slot.service = run_request(requests[r], pipeline, world);
      slot.simulator = run_simulator(requests[r], pipeline, world);
      slot.exposures = label_win_set(requests[r], slot.service.win, world, click_seed);
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, requests.size()));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  SimulationLogs logs;
  for (auto& r : results) {
    logs.service.insert(logs.service.end(), std::make_move_iterator(r.service.service.begin()),
                        std::make_move_iterator(r.service.service.end()));
    logs.simulator.insert(logs.simulator.end(),
                          std::make_move_iterator(r.simulator.records.begin()),
                          std::make_move_iterator(r.simulator.records.end()));
    logs.exposures.insert(logs.exposures.end(), r.exposures.begin(), r.exposures.end());
    logs.competitive.push_back(std::move(r.service.competitive));
    logs.win.push_back(std::move(r.service.win));
    logs.ideal_win.push_back(std::move(r.simulator.ideal_win));
  }
  return logs;
}

}  // namespace rankcons
