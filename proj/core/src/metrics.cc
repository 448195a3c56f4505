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

#include "rankcons/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <unordered_set>
#include <utility>

#include "rankcons/errors.h"

namespace rankcons {
namespace {

struct JoinKey {
  RequestId request_id;
  ItemId item_id;
  bool operator==(const JoinKey&) const = default;
};

struct JoinKeyHash {
  std::size_t operator()(const JoinKey& key) const noexcept {
    return std::hash<std::uint64_t>{}(derive_seed(key.request_id, key.item_id));
  }
};

struct Candidates {
  std::vector<ItemId> ids;
  std::vector<double> scores;
};

template <typename Record, typename ScoreFn>
std::map<RequestId, Candidates> group_by_request(std::span<const Record> records,
                                                 ScoreFn score) {
  std::map<RequestId, Candidates> groups;
  for (const auto& rec : records) {
    auto& group = groups[rec.request_id];
    group.ids.push_back(rec.item_id);
    group.scores.push_back(score(rec));
  }
  return groups;
}

std::string id_list(const std::vector<RequestId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < 10; ++i) {
    if (i) out += ",";
    out += std::to_string(ids[i]);
  }
  if (ids.size() > 10) out += ",...";
  return "[" + out + "]";
}

// Mean of hits / ideal over requests as one rounded division of exact
// integers, sum(hits * L / ideal) / (L * R) with L = lcm(ideal). With a
// constant |K_r| this is the same division the micro form performs.
constexpr std::uint64_t kExactLimit = std::uint64_t{1} << 53;

std::optional<double> exact_mean_ratio(const std::vector<RequestCoverage>& cov,
                                       std::uint64_t common) {
  if (common == 0 || cov.size() > kExactLimit / common) return std::nullopt;
  std::uint64_t num = 0;
  for (const auto& c : cov) {
    num += c.hits * (common / c.ideal);
    if (num > kExactLimit) return std::nullopt;
  }
  return static_cast<double>(num) / static_cast<double>(common * cov.size());
}

template <typename ServiceScore, typename SimScore>
RcsReport rcs_impl(std::span<const ServiceRecord> service,
                   std::span<const SimulatorRecord> simulator, std::size_t k,
                   std::size_t c, ServiceScore service_score, SimScore sim_score) {
  if (k == 0) throw ConfigError("RCS needs k >= 1");
  if (k > c) throw ConfigError("RCS needs k <= c");
  const auto pre = group_by_request(service, service_score);
  const auto ideal = group_by_request(simulator, sim_score);

  std::vector<RequestId> service_only;
  std::vector<RequestId> simulator_only;
  for (const auto& [id, _] : pre) {
    if (!ideal.contains(id)) service_only.push_back(id);
  }
  for (const auto& [id, _] : ideal) {
    if (!pre.contains(id)) simulator_only.push_back(id);
  }
  if (!service_only.empty() || !simulator_only.empty()) {
    throw DataError("logs cover different requests: service-only " + id_list(service_only) +
                    ", simulator-only " + id_list(simulator_only));
  }

  // C: (request_id, item_id) keys with pre_rank_pos <= c.
  std::unordered_set<JoinKey, JoinKeyHash> competitive;
  for (const auto& [id, group] : pre) {
    for (ItemId item : top_by_score(group.ids, group.scores, c)) competitive.insert({id, item});
  }

  RcsReport report;
  report.k = k;
  report.c = c;
  report.per_request.reserve(ideal.size());
  std::size_t total_hits = 0;
  std::size_t total_ideal = 0;
  double ratio_sum = 0.0;
  std::uint64_t common = 1;  // lcm of the |K_r|, while it stays small
  for (const auto& [id, group] : ideal) {
    const auto top = top_by_score(group.ids, group.scores, k);
    if (top.empty()) throw DataError("request " + std::to_string(id) + " has an empty K_r");
    RequestCoverage cov{id, 0, top.size()};
    for (ItemId item : top) cov.hits += competitive.contains({id, item}) ? 1 : 0;
    total_hits += cov.hits;
    total_ideal += cov.ideal;
    ratio_sum += cov.ratio();
    if (common != 0) {
      const std::uint64_t next = std::lcm(common, static_cast<std::uint64_t>(cov.ideal));
      common = next <= kExactLimit ? next : 0;
    }
    report.per_request.push_back(cov);
  }
  if (report.per_request.empty()) throw DataError("RCS over an empty log");
  report.macro = exact_mean_ratio(report.per_request, common)
                     .value_or(ratio_sum / static_cast<double>(report.per_request.size()));
  report.micro = static_cast<double>(total_hits) / static_cast<double>(total_ideal);
  return report;
}

void check_probability_inputs(std::span<const double> pred, std::span<const double> ref) {
  if (pred.empty() || pred.size() != ref.size()) {
    throw DataError("calibration needs two non-empty vectors of equal length");
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(pred[i] >= 0.0 && pred[i] < 1.0) || !(ref[i] >= 0.0 && ref[i] < 1.0)) {
      throw DataError("calibration values must lie in [0,1); sample " + std::to_string(i) +
                      " has pred=" + std::to_string(pred[i]) +
                      " ref=" + std::to_string(ref[i]));
    }
  }
}

std::size_t bucket_of(double value, std::size_t buckets) {
  const auto b = static_cast<std::size_t>(value * static_cast<double>(buckets));
  return std::min(b, buckets - 1);
}

}  // namespace

std::string_view to_string(RcsMode mode) {
  return mode == RcsMode::kMacro ? "macro" : "micro";
}

RcsMode parse_rcs_mode(std::string_view name) {
  if (name == "macro") return RcsMode::kMacro;
  if (name == "micro") return RcsMode::kMicro;
  throw ConfigError("unknown RCS mode '" + std::string(name) + "'");
}

RcsReport rcs(std::span<const ServiceRecord> service,
              std::span<const SimulatorRecord> simulator, std::size_t k, std::size_t c) {
  return rcs_impl(
      service, simulator, k, c, [](const ServiceRecord& r) { return r.g_score; },
      [](const SimulatorRecord& r) { return r.g_score; });
}

RcsReport single_objective_rcs(std::span<const ServiceRecord> service,
                               std::span<const SimulatorRecord> simulator,
                               std::string_view objective, std::size_t k, std::size_t c) {
  auto pick = [&](const ObjectiveScores& scores) {
    auto value = scores.get(objective);
    if (!value) throw ConfigError("unknown objective '" + std::string(objective) + "'");
    return *value;
  };
  return rcs_impl(
      service, simulator, k, c, [&](const ServiceRecord& r) { return pick(r.scores); },
      [&](const SimulatorRecord& r) { return pick(r.scores); });
}

double ece(std::span<const double> pred, std::span<const double> ref, std::size_t buckets) {
  return calibration(pred, ref, buckets).ece;
}

double pcoc(std::span<const double> pred, std::span<const double> ref) {
  if (pred.size() != ref.size()) throw DataError("PCOC inputs differ in length");
  const double num = std::accumulate(pred.begin(), pred.end(), 0.0);
  const double den = std::accumulate(ref.begin(), ref.end(), 0.0);
  if (den == 0.0) throw DataError("PCOC undefined: reference predictions sum to zero");
  return num / den;
}

CalibrationReport calibration(std::span<const double> pred, std::span<const double> ref,
                              std::size_t buckets) {
  if (buckets < 1) throw ConfigError("calibration needs at least one bucket");
  check_probability_inputs(pred, ref);
  CalibrationReport report;
  report.buckets.resize(buckets);
  std::vector<double> signed_gap(buckets, 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const std::size_t b = bucket_of(pred[i], buckets);
    auto& bucket = report.buckets[b];
    ++bucket.count;
    bucket.mean_pred += pred[i];
    bucket.mean_ref += ref[i];
    signed_gap[b] += ref[i] - pred[i];
  }
  double total = 0.0;
  for (std::size_t b = 0; b < buckets; ++b) {
    auto& bucket = report.buckets[b];
    if (bucket.count) {
      bucket.mean_pred /= static_cast<double>(bucket.count);
      bucket.mean_ref /= static_cast<double>(bucket.count);
    }
    total += std::abs(signed_gap[b]);
  }
  report.ece = total / static_cast<double>(pred.size());
  report.pcoc = pcoc(pred, ref);
  return report;
}

double auc(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw DataError("AUC inputs differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t stop = start;
    while (stop < order.size() && scores[order[stop]] == scores[order[start]]) ++stop;
    // Tied block shares the average of ranks start+1 .. stop.
    const double rank = 0.5 * static_cast<double>(start + 1 + stop);
    for (std::size_t i = start; i < stop; ++i) {
      if (labels[order[i]] == 1) {
        positive_rank_sum += rank;
        ++positives;
      }
    }
    start = stop;
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw DataError("AUC needs at least one positive and one negative label");
  }
  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

std::vector<double> score_histogram(std::span<const double> values, std::size_t buckets) {
  if (buckets < 1) throw ConfigError("histogram needs at least one bucket");
  std::vector<double> hist(buckets, 0.0);
  for (double v : values) {
    if (!(v >= 0.0 && v < 1.0)) {
      throw DataError("histogram value " + std::to_string(v) + " outside [0,1)");
    }
    hist[bucket_of(v, buckets)] += 1.0;
  }
  if (!values.empty()) {
    for (auto& h : hist) h /= static_cast<double>(values.size());
  }
  return hist;
}

double total_variation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("histograms differ in bucket count");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return 0.5 * sum;
}

DiagnosisTable diagnose(const Pipeline& base, std::span<const Request> requests,
                        const World& world, RcsMode mode) {
  base.validate();
  if (base.prerank.slots.size() < 2) {
    throw ConfigError("diagnosis needs at least two substitutable slots");
  }
  std::vector<SimulatorRecord> simulator;
  for (const auto& req : requests) {
    auto out = run_simulator(req, base, world);
    simulator.insert(simulator.end(), out.records.begin(), out.records.end());
  }
  auto rcs_of = [&](const Pipeline& pipeline) {
    std::vector<ServiceRecord> service;
    for (const auto& req : requests) {
      auto out = run_request(req, pipeline, world);
      service.insert(service.end(), out.service.begin(), out.service.end());
    }
    return rcs(service, simulator, base.sizes.k, base.sizes.c).value(mode);
  };

  const double before = rcs_of(base);
  DiagnosisTable table;
  for (const auto& slot : base.prerank.slots) {
    const Slot* counterpart = base.rank.find(slot.objective);
    DiagnosisRow row{slot.objective, describe(slot.source), describe(counterpart->source),
                     before, before};
    if (!same_source(slot.source, counterpart->source)) {
      row.rcs_after = rcs_of(substitute(base, slot.objective, counterpart->source));
    }
    table.push_back(std::move(row));
  }
  const Pipeline all = rank_as_prerank(base);
  table.push_back({"all", base.prerank.describe(), all.prerank.describe(), before,
                   rcs_of(all)});
  return table;
}

}  // namespace rankcons
