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

#ifndef RANKCONS_CONFIG_H_
#define RANKCONS_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rankcons/core.h"
#include "rankcons/metrics.h"
#include "rankcons/models.h"
#include "rankcons/synthworld.h"

namespace rankcons {

// What a tier is trained on and how it is served.
enum class TierKind {
  kRank,     // teacher: logloss on sampled labels over whole pre-ranking sets
  kLogloss,  // logloss on win-set exposures
  kDistill,  // MSE to teacher logits on the competitive set
  kLtr,      // ranknet on chunked teacher order over the competitive set
};

std::string_view to_string(TierKind kind);
TierKind parse_tier_kind(std::string_view name);

struct TierConfig {
  std::string name;
  TierKind kind = TierKind::kLogloss;
  double mask_fraction = 1.0;
  std::vector<std::size_t> hidden;
  TrainConfig train;
  // Teacher only: items sampled per training request (0 = all n).
  std::size_t samples_per_request = 0;
};

struct PipelineConfig {
  std::string name;
  std::string spec;  // e.g. "init*logloss/opt*rank"
};

struct EvaluationConfig {
  std::vector<std::size_t> k_grid{10};
  std::vector<std::size_t> c_grid{10, 20, 50, 100, 200, 500};
  RcsMode mode = RcsMode::kMacro;
  std::size_t ece_buckets = kDefaultEceBuckets;
  std::size_t histogram_buckets = kDefaultEceBuckets;
};

// Hand-set two-stage scores for a single request (the three-ad toy example).
struct FixtureItem {
  ItemId item_id = 0;
  ObjectiveScores prerank;
  ObjectiveScores rank;
};

struct FixtureConfig {
  RequestId request_id = 1;
  StageSizes sizes;
  std::vector<FixtureItem> items;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::size_t threads = 1;
  WorldConfig world;
  std::vector<TierConfig> tiers;
  std::vector<PipelineConfig> pipelines;
  std::string exposure_pipeline = "opt*rank/opt*rank";
  std::string training_pipeline = "init*logloss/opt*rank";
  std::string diagnose_pipeline = "init*logloss/opt*rank";
  EvaluationConfig evaluation;
  std::optional<FixtureConfig> fixture;

  /// The default desk-scale experiment.
  static ExperimentConfig defaults();

  /// Throws ConfigError naming the offending field path.
  void validate() const;
  const TierConfig& tier(std::string_view name) const;
  bool has_tier(std::string_view name) const;
  /// Seed used to train `tier`; depends on the global seed and the tier name.
  std::uint64_t train_seed(std::string_view tier) const;
};

/// Parses JSON text on top of ExperimentConfig::defaults(); absent keys keep
/// their defaults, unknown keys are rejected. Throws ConfigError with the
/// field path on any problem.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical JSON rendering (pretty printed, stable key order).
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace rankcons

#endif  // RANKCONS_CONFIG_H_
