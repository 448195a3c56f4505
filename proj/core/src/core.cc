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

#include "rankcons/core.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rankcons/errors.h"

namespace rankcons {

ObjectiveScores::ObjectiveScores(
    std::initializer_list<std::pair<std::string, double>> init) {
  for (const auto& [name, value] : init) set(name, value);
}

void ObjectiveScores::set(std::string_view name, double value) {
  if (!std::isfinite(value)) {
    throw DataError("non-finite score for objective '" + std::string(name) + "'");
  }
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), name,
      [](const auto& entry, std::string_view key) { return entry.first < key; });
  if (it != entries_.end() && it->first == name) {
    it->second = value;
  } else {
    entries_.emplace(it, std::string(name), value);
  }
}

std::optional<double> ObjectiveScores::get(std::string_view name) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), name,
      [](const auto& entry, std::string_view key) { return entry.first < key; });
  if (it != entries_.end() && it->first == name) return it->second;
  return std::nullopt;
}

double ObjectiveScores::at(std::string_view name) const {
  auto value = get(name);
  if (!value) throw ConfigError("objective '" + std::string(name) + "' not present");
  return *value;
}

void validate_scores(const ObjectiveScores& scores,
                     std::span<const std::string> probability_objectives) {
  for (const auto& [name, value] : scores) {
    if (!std::isfinite(value)) throw DataError("non-finite score for '" + name + "'");
  }
  for (const auto& name : probability_objectives) {
    auto value = scores.get(name);
    if (value && !(*value > 0.0 && *value < 1.0)) {
      throw DataError("probability objective '" + name + "' outside (0,1)");
    }
  }
}

void StageSizes::validate() const {
  if (k < 1 || k > c || c > n) {
    throw ConfigError("stage sizes must satisfy 1 <= k <= c <= n (got n=" +
                      std::to_string(n) + ", c=" + std::to_string(c) +
                      ", k=" + std::to_string(k) + ")");
  }
}

FusionRule::FusionRule(std::vector<std::string> objectives)
    : objectives_(std::move(objectives)) {
  if (objectives_.empty()) throw ConfigError("fusion rule needs at least one objective");
}

double FusionRule::apply(const ObjectiveScores& scores) const {
  double fused = 1.0;
  for (const auto& name : objectives_) {
    auto value = scores.get(name);
    if (!value) throw ConfigError("fusion objective '" + name + "' missing from scores");
    if (!std::isfinite(*value)) throw DataError("non-finite score for '" + name + "'");
    fused *= *value;
  }
  return fused;
}

double fuse(const ObjectiveScores& scores, const FusionRule& rule) {
  return rule.apply(scores);
}

std::vector<std::size_t> ranking_order(std::span<const ItemId> ids,
                                       std::span<const double> scores) {
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranks_before(scores[a], ids[a], scores[b], ids[b]);
  });
  return order;
}

std::vector<ItemId> top_by_score(std::span<const ItemId> ids,
                                 std::span<const double> scores, std::size_t m) {
  const std::size_t take = std::min(m, ids.size());
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto cmp = [&](std::size_t a, std::size_t b) {
    return ranks_before(scores[a], ids[a], scores[b], ids[b]);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                    order.end(), cmp);
  std::vector<ItemId> top;
  top.reserve(take);
  for (std::size_t i = 0; i < take; ++i) top.push_back(ids[order[i]]);
  return top;
}

std::vector<ItemId> rank_top(std::span<const ScoredItem> scored, std::size_t m) {
  std::vector<ItemId> ids;
  std::vector<double> fused;
  ids.reserve(scored.size());
  fused.reserve(scored.size());
  for (const auto& item : scored) {
    ids.push_back(item.item_id);
    fused.push_back(item.fused);
  }
  return top_by_score(ids, fused, m);
}

void assign_rank_positions(std::vector<ScoredItem>& scored) {
  std::sort(scored.begin(), scored.end(), [](const ScoredItem& a, const ScoredItem& b) {
    return ranks_before(a.fused, a.item_id, b.fused, b.item_id);
  });
  for (std::size_t i = 0; i < scored.size(); ++i) {
    scored[i].rank_pos = static_cast<std::uint32_t>(i + 1);
  }
}

}  // namespace rankcons
