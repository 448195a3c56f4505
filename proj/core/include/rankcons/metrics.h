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

#ifndef RANKCONS_METRICS_H_
#define RANKCONS_METRICS_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankcons/cascade.h"

namespace rankcons {

enum class RcsMode {
  kMacro,  // mean over requests of |K_r & C_r| / |K_r|
  kMicro,  // sum |K_r & C_r| / sum |K_r|, the SUM/SUM form of the log join with pv = 1
};

std::string_view to_string(RcsMode mode);
RcsMode parse_rcs_mode(std::string_view name);

struct RequestCoverage {
  RequestId request_id = 0;
  std::size_t hits = 0;   // |K_r & C_r|
  std::size_t ideal = 0;  // |K_r|
  double ratio() const { return static_cast<double>(hits) / static_cast<double>(ideal); }
};

struct RcsReport {
  double macro = 0.0;
  double micro = 0.0;
  std::size_t k = 0;
  std::size_t c = 0;
  std::vector<RequestCoverage> per_request;  // ascending request_id

  std::size_t requests() const { return per_request.size(); }
  double value(RcsMode mode) const { return mode == RcsMode::kMacro ? macro : micro; }
};

/// Ranking Consistency Score of a service/simulator log pair.
///
/// K_r is the top-k of the simulator log by g_score, C_r the top-c of the
/// service log by g_score, both with ties broken by ascending item_id. The
/// overlap is counted by a hash join on (request_id, item_id), the in-process
/// equivalent of the LEFT JOIN between the two logs.
///
/// Throws ConfigError when k > c or k == 0, and DataError when a request is
/// present in only one log (the message lists offending ids) or has an empty K_r.
RcsReport rcs(std::span<const ServiceRecord> service,
              std::span<const SimulatorRecord> simulator, std::size_t k, std::size_t c);

/// As rcs(), but both stages are ordered by the raw score of one objective.
/// Throws ConfigError if any record lacks that objective.
RcsReport single_objective_rcs(std::span<const ServiceRecord> service,
                               std::span<const SimulatorRecord> simulator,
                               std::string_view objective, std::size_t k, std::size_t c);

struct CalibrationBucket {
  std::size_t count = 0;
  double mean_pred = 0.0;  // mean p-hat (pre-ranking)
  double mean_ref = 0.0;   // mean p (ranking)
};

struct CalibrationReport {
  double ece = 0.0;
  double pcoc = 0.0;
  std::vector<CalibrationBucket> buckets;
};

inline constexpr std::size_t kDefaultEceBuckets = 50;

/// Proxy ECE: (1/D) sum_k |sum_i (p_i - p-hat_i) 1(p-hat_i in B_k)| with
/// B_k = [(k-1)/K, k/K). `pred` is p-hat, `ref` is p.
/// Throws DataError for empty or unequal inputs, or values outside [0, 1).
double ece(std::span<const double> pred, std::span<const double> ref,
           std::size_t buckets = kDefaultEceBuckets);

/// sum(pred) / sum(ref). Throws DataError when sum(ref) == 0.
double pcoc(std::span<const double> pred, std::span<const double> ref);

CalibrationReport calibration(std::span<const double> pred, std::span<const double> ref,
                              std::size_t buckets = kDefaultEceBuckets);

/// Rank-sum AUC with ties counted one half. Throws DataError on single-class input.
double auc(std::span<const int> labels, std::span<const double> scores);

/// Proportion of values per bucket of [0, 1). Empty input gives all zeros.
std::vector<double> score_histogram(std::span<const double> values, std::size_t buckets);

/// Half the L1 distance between two histograms of equal length.
double total_variation(std::span<const double> a, std::span<const double> b);

struct DiagnosisRow {
  std::string slot;  // objective name, or "all"
  std::string replaced;
  std::string replacement;
  double rcs_before = 0.0;
  double rcs_after = 0.0;
  double delta() const { return rcs_after - rcs_before; }
};

using DiagnosisTable = std::vector<DiagnosisRow>;

/// Swaps each pre-ranking slot for its ranking counterpart in turn, then all
/// slots at once, and reports RCS before and after each swap.
/// Throws ConfigError when the pipeline has fewer than two slots.
DiagnosisTable diagnose(const Pipeline& base, std::span<const Request> requests,
                        const World& world, RcsMode mode = RcsMode::kMacro);

}  // namespace rankcons

#endif  // RANKCONS_METRICS_H_
