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

#include "rankcons/synthworld.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rankcons/errors.h"

namespace rankcons {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

std::vector<double> normal_vector(std::size_t dim, double stddev, Rng& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  std::vector<double> v(dim);
  for (auto& x : v) x = normal(rng);
  return v;
}

double phi_dot(std::span<const double> w, std::span<const double> user,
               std::span<const double> item) {
  if (w.size() != feature_map_dim(user.size(), item.size())) {
    throw ConfigError("weight dimension " + std::to_string(w.size()) +
                      " does not match phi dimension " +
                      std::to_string(feature_map_dim(user.size(), item.size())));
  }
  double sum = 0.0;
  std::size_t j = 0;
  for (double u : user) sum += w[j++] * u;
  for (double x : item) sum += w[j++] * x;
  const std::size_t m = std::min(user.size(), item.size());
  for (std::size_t i = 0; i < m; ++i) sum += w[j++] * user[i] * item[i];
  return sum;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return splitmix64(h ^ c);
}

void WorldConfig::validate() const {
  auto require = [](bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
  };
  require(d >= 1, "world.d must be >= 1");
  require(d_u >= 1, "world.d_u must be >= 1");
  try {
    sizes.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("world.sizes: ") + e.what());
  }
  require(corpus_size >= sizes.n,
          "world.sizes.n (" + std::to_string(sizes.n) +
              ") exceeds world.corpus_size (" + std::to_string(corpus_size) + ")");
  require(bid_range.lo > 0.0 && bid_range.lo <= bid_range.hi &&
              std::isfinite(bid_range.hi),
          "world.bid_range must satisfy 0 < lo <= hi");
  require(std::isfinite(truth.ctr_logit_scale) && truth.ctr_logit_scale >= 0.0,
          "world.truth.ctr_logit_scale must be finite and >= 0");
  require(std::isfinite(truth.ctr_bias), "world.truth.ctr_bias must be finite");
  require(std::isfinite(truth.opt_logit_scale) && truth.opt_logit_scale >= 0.0,
          "world.truth.opt_logit_scale must be finite and >= 0");
}

std::size_t feature_map_dim(std::size_t user_dim, std::size_t item_dim) {
  return user_dim + item_dim + std::min(user_dim, item_dim);
}

void feature_map(std::span<const double> user, std::span<const double> item,
                 std::span<double> out) {
  std::size_t j = 0;
  for (double u : user) out[j++] = u;
  for (double x : item) out[j++] = x;
  const std::size_t m = std::min(user.size(), item.size());
  for (std::size_t i = 0; i < m; ++i) out[j++] = user[i] * item[i];
}

std::vector<double> feature_map(std::span<const double> user,
                                std::span<const double> item) {
  std::vector<double> out(feature_map_dim(user.size(), item.size()));
  feature_map(user, item, out);
  return out;
}

GroundTruth gen_ground_truth(const WorldConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, streams::kTruth));
  const std::size_t dim = cfg.phi_dim();
  const double root = std::sqrt(static_cast<double>(dim));
  GroundTruth gt;
  gt.w_ctr = normal_vector(dim, cfg.truth.ctr_logit_scale / root, rng);
  gt.b_ctr = cfg.truth.ctr_bias;
  gt.w_opt = normal_vector(dim, cfg.truth.opt_logit_scale / root, rng);
  return gt;
}

std::vector<Item> gen_corpus(const WorldConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, streams::kCorpus));
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool degenerate = cfg.bid_range.lo == cfg.bid_range.hi;
  std::uniform_real_distribution<double> bid(cfg.bid_range.lo,
                                             degenerate ? cfg.bid_range.lo + 1.0
                                                        : cfg.bid_range.hi);
  std::vector<Item> corpus(cfg.corpus_size);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Item& item = corpus[i];
    item.id = i;
    item.features.resize(cfg.d);
    for (auto& x : item.features) x = normal(rng);
    const double drawn = bid(rng);
    item.init_bid = degenerate ? cfg.bid_range.lo : drawn;
  }
  return corpus;
}

Request gen_request(const WorldConfig& cfg, std::span<const Item> corpus,
                    RequestId id, Rng& rng) {
  if (corpus.empty()) throw ConfigError("cannot draw a request from an empty corpus");
  const std::size_t n = cfg.sizes.n;
  if (n > corpus.size()) {
    throw ConfigError("world.sizes.n (" + std::to_string(n) +
                      ") exceeds world.corpus_size (" + std::to_string(corpus.size()) +
                      ")");
  }
  Request req;
  req.id = id;
  req.user_features = normal_vector(cfg.d_u, 1.0, rng);
  std::vector<std::size_t> pool(corpus.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  req.preranking_set.reserve(n);
  for (std::size_t i = 0; i < n; ++i) req.preranking_set.push_back(corpus[pool[i]].id);
  return req;
}

std::vector<Request> gen_requests(const WorldConfig& cfg, std::span<const Item> corpus,
                                  Split split) {
  const std::size_t count =
      split == Split::kTrain ? cfg.requests_per_epoch : cfg.eval_requests;
  // Eval ids continue after the training ids so the two streams never collide.
  const RequestId first = split == Split::kTrain ? 0 : cfg.requests_per_epoch;
  std::vector<Request> requests;
  requests.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const RequestId id = first + i;
    Rng rng(derive_seed(cfg.seed, streams::kRequests, id));
    requests.push_back(gen_request(cfg, corpus, id, rng));
  }
  return requests;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double true_ctr(const GroundTruth& gt, std::span<const double> user,
                std::span<const double> item) {
  return sigmoid(phi_dot(gt.w_ctr, user, item) + gt.b_ctr);
}

double opt_bid(const GroundTruth& gt, double init_bid, std::span<const double> user,
               std::span<const double> item) {
  if (!(init_bid > 0.0)) throw DataError("init_bid must be positive");
  return init_bid * (0.5 + 1.5 * sigmoid(phi_dot(gt.w_opt, user, item)));
}

bool sample_click(double p, Rng& rng) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DataError("click probability must lie in (0,1), got " + std::to_string(p));
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < p;
}

World World::generate(const WorldConfig& cfg) {
  cfg.validate();
  World world;
  world.cfg = cfg;
  world.truth = gen_ground_truth(cfg);
  world.corpus = gen_corpus(cfg);
  return world;
}

const Item& World::item(ItemId id) const {
  // Generated corpora are dense (id == index); hand-built fixtures may not be.
  if (id < corpus.size() && corpus[id].id == id) return corpus[id];
  auto it = std::find_if(corpus.begin(), corpus.end(),
                         [id](const Item& candidate) { return candidate.id == id; });
  if (it == corpus.end()) throw DataError("unknown item_id " + std::to_string(id));
  return *it;
}

double World::opt_bid(const Request& req, const Item& it) const {
  return rankcons::opt_bid(truth, it.init_bid, req.user_features, it.features);
}

double World::true_ctr(const Request& req, const Item& it) const {
  return rankcons::true_ctr(truth, req.user_features, it.features);
}

}  // namespace rankcons
