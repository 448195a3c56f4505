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

#ifndef RANKCONS_CASCADE_H_
#define RANKCONS_CASCADE_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rankcons/core.h"
#include "rankcons/models.h"
#include "rankcons/synthworld.h"

namespace rankcons {

enum class BidSource { kInit, kOpt };

// How a model logit becomes a serving score.
enum class Transform {
  kSigmoid,  // probability, e.g. pCTR
  kExp,      // strictly positive, order preserving; used by the LTR model
};

struct ModelScore {
  std::string name;
  std::shared_ptr<const Predictor> model;
  Transform transform = Transform::kSigmoid;
  double scale = 1.0;  // global multiplier applied after the transform
};

// Hand-set scores keyed by item id (fixtures such as the three-ad toy example).
struct TableScore {
  std::string name;
  std::map<ItemId, double> values;
};

using ScoreSource = std::variant<BidSource, ModelScore, TableScore>;

std::string describe(const ScoreSource& source);
bool same_source(const ScoreSource& a, const ScoreSource& b);

struct Slot {
  std::string objective;
  ScoreSource source;
};

/// The per-objective scorers of one stage, fused by product.
struct Stage {
  std::vector<Slot> slots;

  FusionRule rule() const;
  std::vector<std::string> objectives() const;
  const Slot* find(std::string_view objective) const;
  /// Objectives whose values are probabilities (sigmoid models).
  std::vector<std::string> probability_objectives() const;
  std::string describe() const;
};

/// Two-stage cascade: pre-ranking selects c of n, ranking selects k of c.
struct Pipeline {
  Stage prerank;
  Stage rank;
  StageSizes sizes;

  /// Throws ConfigError on invalid sizes or mismatched objective lists.
  void validate() const;
  std::string describe() const;
};

/// One row of the production-side log: pre-ranking scores over the pre-ranking set.
struct ServiceRecord {
  RequestId request_id = 0;
  ItemId item_id = 0;
  ObjectiveScores scores;
  double g_score = 0.0;
  std::uint32_t pre_rank_pos = 0;

  friend bool operator==(const ServiceRecord&, const ServiceRecord&) = default;
};

/// One row of the simulator log: ranking-model scores over the pre-ranking set.
struct SimulatorRecord {
  RequestId request_id = 0;
  ItemId item_id = 0;
  ObjectiveScores scores;
  double g_score = 0.0;
  std::uint32_t rank_pos = 0;

  friend bool operator==(const SimulatorRecord&, const SimulatorRecord&) = default;
};

struct RequestOutcome {
  std::vector<ServiceRecord> service;  // all n items, by pre_rank_pos
  std::vector<ItemId> competitive;     // C_r, best first
  std::vector<ItemId> win;             // W_r, best first
};

struct SimulatorOutcome {
  std::vector<SimulatorRecord> records;  // all n items, by rank_pos
  std::vector<ItemId> ideal_win;         // K_r, best first
};

/// Scores every item of `req` with one stage; result is parallel to `items`.
std::vector<ObjectiveScores> score_stage(const Stage& stage, const Request& req,
                                         std::span<const ItemId> items, const World& world);

RequestOutcome run_request(const Request& req, const Pipeline& pipeline,
                           const World& world);
SimulatorOutcome run_simulator(const Request& req, const Pipeline& pipeline,
                               const World& world);

/// Copy of `pipeline` with the pre-ranking slot for `objective` replaced.
/// Throws ConfigError for an unknown objective.
Pipeline substitute(const Pipeline& pipeline, std::string_view objective,
                    ScoreSource replacement);
/// Every pre-ranking slot replaced by its ranking counterpart.
Pipeline rank_as_prerank(const Pipeline& pipeline);

struct ExposureRecord {
  RequestId request_id = 0;
  ItemId item_id = 0;
  int click = 0;

  friend bool operator==(const ExposureRecord&, const ExposureRecord&) = default;
};

/// Labels one click per win-set item via sample_click(true_ctr). Each
/// (request, item) draws from its own seed derived from `click_seed`.
std::vector<ExposureRecord> collect_exposure_log(const Pipeline& pipeline,
                                                 std::span<const Request> requests,
                                                 const World& world,
                                                 std::uint64_t click_seed);

struct SimulationLogs {
  std::vector<ServiceRecord> service;
  std::vector<SimulatorRecord> simulator;
  std::vector<ExposureRecord> exposures;
  std::vector<std::vector<ItemId>> competitive;  // per request, request order
  std::vector<std::vector<ItemId>> win;
  std::vector<std::vector<ItemId>> ideal_win;
};

/// Runs production and simulator passes over every request. Requests are
/// split across `threads` workers; output is in request order regardless.
SimulationLogs simulate(const Pipeline& pipeline, std::span<const Request> requests,
                        const World& world, std::uint64_t click_seed,
                        std::size_t threads = 1);

}  // namespace rankcons

#endif  // RANKCONS_CASCADE_H_
