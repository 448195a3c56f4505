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

#ifndef RANKCONS_CORE_H_
#define RANKCONS_CORE_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rankcons {

using ItemId = std::uint64_t;
using RequestId = std::uint64_t;

/// An ad in the corpus. `init_bid` is the advertiser-provided bid per click.
struct Item {
  ItemId id = 0;
  std::vector<double> features;
  double init_bid = 1.0;
};

/// One user request together with the candidate list handed to pre-ranking.
struct Request {
  RequestId id = 0;
  std::vector<double> user_features;
  std::vector<ItemId> preranking_set;
};

/// Per-objective scores of one (request, item) pair, e.g. {"bid": 8, "pctr": 0.4}.
///
/// Entries are kept sorted by objective name so iteration order, and hence
/// every serialized form, is deterministic.
class ObjectiveScores {
 public:
  ObjectiveScores() = default;
  ObjectiveScores(std::initializer_list<std::pair<std::string, double>> init);

  /// Inserts or overwrites. Throws DataError on a non-finite value.
  void set(std::string_view name, double value);
  std::optional<double> get(std::string_view name) const;
  /// Throws ConfigError when `name` is absent.
  double at(std::string_view name) const;
  bool contains(std::string_view name) const { return get(name).has_value(); }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const ObjectiveScores&, const ObjectiveScores&) = default;

 private:
  std::vector<std::pair<std::string, double>> entries_;
};

/// Checks that every score is finite and that the named probability-typed
/// objectives lie strictly inside (0, 1). Throws DataError otherwise.
void validate_scores(const ObjectiveScores& scores,
                     std::span<const std::string> probability_objectives);

struct ScoredItem {
  ItemId item_id = 0;
  ObjectiveScores scores;
  double fused = 0.0;
  std::uint32_t rank_pos = 0;  // 1-based, 0 until ranked
};

/// Funnel sizes: pre-ranking set n, competitive set c, win set k.
struct StageSizes {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t k = 0;

  /// Throws ConfigError unless 1 <= k <= c <= n.
  void validate() const;
  friend bool operator==(const StageSizes&, const StageSizes&) = default;
};

/// Product fusion over a declared list of objective names (eCPM = bid * pctr).
class FusionRule {
 public:
  FusionRule() = default;
  explicit FusionRule(std::vector<std::string> objectives);

  static FusionRule product(std::vector<std::string> objectives) {
    return FusionRule(std::move(objectives));
  }

  const std::vector<std::string>& objectives() const { return objectives_; }

  /// Throws ConfigError on a missing objective and DataError on a non-finite score.
  double apply(const ObjectiveScores& scores) const;

 private:
  std::vector<std::string> objectives_;
};

double fuse(const ObjectiveScores& scores, const FusionRule& rule);

/// Orders by score descending, ties by ascending id. Scores are compared exactly.
inline bool ranks_before(double score_a, ItemId id_a, double score_b, ItemId id_b) {
  if (score_a != score_b) return score_a > score_b;
  return id_a < id_b;
}

/// Ids of the `m` highest scores, best first. `ids` and `scores` are parallel.
std::vector<ItemId> top_by_score(std::span<const ItemId> ids,
                                 std::span<const double> scores, std::size_t m);

/// Full ranking permutation: position i holds the index (into `ids`) of the
/// item at rank i + 1.
std::vector<std::size_t> ranking_order(std::span<const ItemId> ids,
                                       std::span<const double> scores);

/// Ids of the `m` items with the highest fused score. m >= size returns the
/// whole list ranked.
std::vector<ItemId> rank_top(std::span<const ScoredItem> scored, std::size_t m);

/// Sorts `scored` in place by fused score and fills in rank_pos.
void assign_rank_positions(std::vector<ScoredItem>& scored);

}  // namespace rankcons

#endif  // RANKCONS_CORE_H_
