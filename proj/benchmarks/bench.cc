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

// Microbenchmarks for the hot paths: top-m selection, the RCS log join,
// the MLP forward pass and one training epoch.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "rankcons/experiment.h"

namespace rankcons {
namespace {

std::vector<ScoredItem> random_scored(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ScoredItem> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].item_id = static_cast<ItemId>(i);
    out[i].fused = u(rng);
  }
  return out;
}

void BM_RankTop(benchmark::State& state) {
  const auto scored = random_scored(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(rank_top(scored, 50));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RankTop)->Arg(500)->Arg(5000);

void BM_Rcs(benchmark::State& state) {
  const std::size_t requests = static_cast<std::size_t>(state.range(0));
  const std::size_t n = 500;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ServiceRecord> service;
  std::vector<SimulatorRecord> simulator;
  for (RequestId r = 0; r < requests; ++r) {
    for (ItemId i = 0; i < n; ++i) {
      service.push_back({r, i, {}, u(rng), 0});
      simulator.push_back({r, i, {}, u(rng), 0});
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(rcs(service, simulator, 10, 50));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(service.size()));
}
BENCHMARK(BM_Rcs)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Forward(benchmark::State& state) {
  const std::size_t dim = WorldConfig{}.phi_dim();
  const auto p = Predictor::initialized(std::vector<bool>(dim, true), {dim, 64, 32, 1}, 3);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::vector<double> phi(dim);
  for (double& x : phi) x = z(rng);
  Predictor::Workspace ws;
  for (auto _ : state) benchmark::DoNotOptimize(p.forward_phi(phi, ws));
}
BENCHMARK(BM_Forward);

void BM_TrainEpoch(benchmark::State& state) {
  WorldConfig cfg;
  const std::size_t dim = cfg.phi_dim();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z;
  std::bernoulli_distribution coin(0.1);
  std::vector<std::vector<double>> users(1000, std::vector<double>(cfg.d_u));
  std::vector<std::vector<double>> items(1000, std::vector<double>(cfg.d));
  PointDataset data;
  for (std::size_t i = 0; i < users.size(); ++i) {
    for (double& x : users[i]) x = z(rng);
    for (double& x : items[i]) x = z(rng);
    data.push_back({users[i], items[i], coin(rng) ? 1.0 : 0.0});
  }
  const auto init = Predictor::initialized(std::vector<bool>(dim, true), {dim, 32, 1}, 5);
  TrainConfig tc;
  tc.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(init, data, tc));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace rankcons

BENCHMARK_MAIN();
