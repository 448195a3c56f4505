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

#ifndef RANKCONS_EXPERIMENT_H_
#define RANKCONS_EXPERIMENT_H_

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rankcons/cascade.h"
#include "rankcons/config.h"
#include "rankcons/metrics.h"
#include "rankcons/models.h"
#include "rankcons/synthworld.h"

namespace rankcons {

inline constexpr std::string_view kBidObjective = "bid";
inline constexpr std::string_view kCtrObjective = "pctr";

/// Resolves a tier name in a pipeline spec to the model serving it.
using ModelResolver = std::function<ModelScore(std::string_view tier)>;

/// Parses "<prerank>/<rank>", each stage a '*'-separated product of terms:
///   init | init-bid | opt | opt-bid    -> the "bid" objective
///   <tier> | |<tier>|, optional @scale  -> the "pctr" objective
/// so "init-bid*|logloss|/opt-bid*|rank|" and "init*logloss/opt*rank" are
/// the same pipeline. Throws ConfigError on malformed specs.
Pipeline parse_pipeline_spec(std::string_view spec, const StageSizes& sizes,
                             const ModelResolver& resolve);

/// Filesystem-safe name for a spec ("init*logloss/opt*rank" -> "init-logloss__opt-rank").
std::string spec_slug(std::string_view spec);

/// Nested masks: tiers with a smaller fraction see a prefix of the same
/// seeded permutation of phi coordinates.
std::vector<bool> tier_mask(std::size_t phi_dim, double fraction, std::uint64_t seed);

struct StageHistograms {
  std::vector<double> pre_full;
  std::vector<double> rank_full;
  std::vector<double> pre_win;
  std::vector<double> rank_win;
  double tv_full = 0.0;
  double tv_win = 0.0;
};

struct PipelineReport {
  std::string name;
  std::string spec;
  StageSizes sizes;
  std::vector<RcsReport> rcs_grid;  // every (k, c) with k <= c from the grid
  RcsReport rcs;                    // at the pipeline's own (k, c)
  std::vector<std::pair<std::string, RcsReport>> single_objective;
  std::optional<CalibrationReport> calibration;  // pre pctr vs rank pctr, full set
  std::optional<double> auc;                     // pre pctr vs win-set clicks
  std::optional<StageHistograms> histograms;
};

/// True when the pre-ranking pctr slot holds a probability: a sigmoid model
/// (globally rescaled or not), or a table of values in [0, 1).
bool pctr_is_probability(const Pipeline& pipeline);
/// Same, for a spec whose tiers are defined in `cfg` (no trained models needed).
bool pctr_is_probability(std::string_view spec, const ExperimentConfig& cfg);

/// Every metric the evaluate command reports, computed from logs alone.
/// With `pctr_is_probability`, calibration and histograms read pctr clamped
/// into [0, 1 - kProbClamp], so a rescaled model that overshoots 1 is still
/// measured; otherwise (e.g. LTR scores) they are left empty.
PipelineReport evaluate_logs(std::string name, std::string spec,
                             std::span<const ServiceRecord> service,
                             std::span<const SimulatorRecord> simulator,
                             std::span<const ExposureRecord> exposures,
                             const EvaluationConfig& eval, const StageSizes& sizes,
                             bool pctr_is_probability);

/// Synthetic world plus trained models for one ExperimentConfig.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const World& world() const { return world_; }
  const std::vector<Request>& requests(Split split) const;
  /// Throws DataError for an id from neither split.
  const Request& request(RequestId id) const;
  std::uint64_t click_seed(Split split) const;

  Predictor initial_model(const TierConfig& tier) const;

  /// Teacher data: sampled clicks over (a sample of) each training pre-ranking set.
  PointDataset teacher_dataset(const TierConfig& tier) const;
  /// Win-set exposures with their click labels.
  PointDataset exposure_dataset(std::span<const ExposureRecord> exposures) const;
  /// Competitive-set items with the teacher logit as target.
  PointDataset distill_dataset(std::span<const ServiceRecord> service,
                               std::span<const SimulatorRecord> simulator) const;
  /// Competitive sets ordered by rank_pctr * opt_bid / init_bid, chunk labelled.
  GroupDataset ltr_dataset(std::span<const ServiceRecord> service,
                           std::span<const SimulatorRecord> simulator,
                           std::size_t chunks) const;

  TrainResult train_teacher(const TierConfig& tier) const;
  TrainResult train_logloss(const TierConfig& tier,
                            std::span<const ExposureRecord> exposures) const;
  TrainResult train_from_teacher(const TierConfig& tier,
                                 std::span<const ServiceRecord> service,
                                 std::span<const SimulatorRecord> simulator) const;

  void set_model(const std::string& tier, Predictor model);
  bool has_model(std::string_view tier) const;
  /// Throws MissingPrerequisite when the tier has not been trained or loaded.
  std::shared_ptr<const Predictor> model(std::string_view tier) const;

  Pipeline pipeline(std::string_view spec) const;
  SimulationLogs simulate(const Pipeline& pipeline, Split split) const;
  std::vector<ExposureRecord> exposure_log(const Pipeline& pipeline, Split split) const;

 private:
  ExperimentConfig cfg_;
  World world_;
  std::vector<Request> train_requests_;
  std::vector<Request> eval_requests_;
  std::unordered_map<RequestId, const Request*> by_id_;
  std::map<std::string, std::shared_ptr<const Predictor>, std::less<>> models_;
};

struct ExperimentResult {
  std::vector<PipelineReport> pipelines;  // config order
  DiagnosisTable diagnosis;
  std::map<std::string, std::vector<double>> loss_traces;
};

/// The whole study in memory: train every tier in dependency order, simulate
/// every configured pipeline on the eval split, evaluate, and diagnose.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Trains every tier of `exp` in dependency order (teacher, logloss tiers,
/// then distill / ltr) and returns their loss traces.
std::map<std::string, std::vector<double>> train_all(Experiment& exp);

// Hand-set fixture (no learned models): a one-request world whose pipeline
// reads scores straight from the fixture table.
World fixture_world(const FixtureConfig& fixture);
Request fixture_request(const FixtureConfig& fixture);
Pipeline fixture_pipeline(const FixtureConfig& fixture);

}  // namespace rankcons

#endif  // RANKCONS_EXPERIMENT_H_
