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

#ifndef RANKCONS_TESTS_TEST_UTIL_H_
#define RANKCONS_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "rankcons/cascade.h"

namespace rankcons::testing {

// A log pair built directly from fused scores, one request per entry.
struct LogPair {
  std::vector<ServiceRecord> service;
  std::vector<SimulatorRecord> simulator;
};

// n items per request with ids 0..n-1; scores drawn from a small integer
// range so ties are frequent.
inline LogPair random_logs(std::mt19937_64& rng, std::size_t requests, std::size_t n) {
  std::uniform_int_distribution<int> score(0, 5);
  LogPair logs;
  for (RequestId r = 0; r < requests; ++r) {
    for (ItemId i = 0; i < n; ++i) {
      const double g_pre = score(rng);
      const double g_rank = score(rng);
      logs.service.push_back({r, i, {{"g", g_pre}}, g_pre, 0});
      logs.simulator.push_back({r, i, {{"g", g_rank}}, g_rank, 0});
    }
  }
  return logs;
}

// Naive top-m: repeatedly pick the best remaining (highest score, then lowest id).
template <typename Record>
std::set<ItemId> naive_top(const std::vector<Record>& recs, RequestId r, std::size_t m) {
  std::vector<std::pair<double, ItemId>> remaining;
  for (const auto& rec : recs) {
    if (rec.request_id == r) remaining.emplace_back(rec.g_score, rec.item_id);
  }
  std::set<ItemId> out;
  while (out.size() < m && !remaining.empty()) {
    auto best = remaining.begin();
    for (auto it = remaining.begin(); it != remaining.end(); ++it) {
      if (it->first > best->first || (it->first == best->first && it->second < best->second)) {
        best = it;
      }
    }
    out.insert(best->second);
    remaining.erase(best);
  }
  return out;
}

// Brute-force macro and micro RCS by explicit set intersection.
inline std::pair<double, double> naive_rcs(const LogPair& logs, std::size_t k, std::size_t c) {
  std::set<RequestId> ids;
  for (const auto& rec : logs.service) ids.insert(rec.request_id);
  // Macro as an exact fraction num / den, reduced as it accumulates.
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  std::size_t hits = 0;
  std::size_t total = 0;
  for (RequestId r : ids) {
    const auto ideal = naive_top(logs.simulator, r, k);
    const auto comp = naive_top(logs.service, r, c);
    std::size_t h = 0;
    for (ItemId i : ideal) h += comp.count(i);
    const std::uint64_t size = ideal.size();
    num = num * size + h * den;
    den *= size;
    const std::uint64_t g = std::gcd(num, den);
    num /= g;
    den /= g;
    hits += h;
    total += ideal.size();
  }
  den *= ids.size();
  return {static_cast<double>(num) / static_cast<double>(den),
          static_cast<double>(hits) / static_cast<double>(total)};
}

}  // namespace rankcons::testing

#endif  // RANKCONS_TESTS_TEST_UTIL_H_
