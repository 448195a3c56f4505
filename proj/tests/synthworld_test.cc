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

#include <gtest/gtest.h>

#include <set>

#include "rankcons/errors.h"

namespace rankcons {
namespace {

WorldConfig small_world() {
  WorldConfig cfg;
  cfg.d = 4;
  cfg.d_u = 3;
  cfg.corpus_size = 50;
  cfg.requests_per_epoch = 20;
  cfg.eval_requests = 10;
  cfg.sizes = {10, 5, 2};
  cfg.seed = 42;
  return cfg;
}

TEST(Sigmoid, Values) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(1.0), 0.7310585786300049, 1e-15);
  EXPECT_NEAR(sigmoid(2.0), 0.8807970779778823, 1e-15);
  EXPECT_TRUE(std::isfinite(sigmoid(-1000.0)));
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
}

TEST(FeatureMap, Layout) {
  const std::vector<double> u{1, 2, 3};
  const std::vector<double> x{4, 5};
  EXPECT_EQ(feature_map_dim(3, 2), 7u);
  EXPECT_EQ(feature_map(u, x), (std::vector<double>{1, 2, 3, 4, 5, 4, 10}));
}

TEST(TrueCtr, ZeroWeights) {
  GroundTruth gt{std::vector<double>(7, 0.0), 0.0, std::vector<double>(7, 0.0)};
  const std::vector<double> u{1, 2, 3};
  const std::vector<double> x{4, 5};
  EXPECT_EQ(true_ctr(gt, u, x), 0.5);
  EXPECT_EQ(opt_bid(gt, 2.0, u, x), 2.5);
}

TEST(TrueCtr, UnitWeight) {
  GroundTruth gt{std::vector<double>(7, 0.0), 0.0, std::vector<double>(7, 0.0)};
  gt.w_ctr[0] = 1.0;
  EXPECT_NEAR(true_ctr(gt, std::vector<double>{1, 0, 0}, std::vector<double>{0, 0}),
              0.7310585786300049, 1e-15);
}

TEST(TrueCtr, MonotoneInBias) {
  GroundTruth gt{std::vector<double>(7, 0.3), 0.0, std::vector<double>(7, 0.0)};
  const std::vector<double> u{1, -2, 0.5};
  const std::vector<double> x{0.1, 2};
  double prev = 0.0;
  for (double b = -10; b <= 10; b += 0.5) {
    gt.b_ctr = b;
    const double p = true_ctr(gt, u, x);
    EXPECT_GT(p, prev);
    EXPECT_LT(p, 1.0);
    prev = p;
  }
}

TEST(TrueCtr, DimensionMismatchIsConfigError) {
  GroundTruth gt{std::vector<double>(6, 0.0), 0.0, std::vector<double>(6, 0.0)};
  EXPECT_THROW(true_ctr(gt, std::vector<double>{1, 2, 3}, std::vector<double>{4, 5}),
               ConfigError);
}

TEST(OptBid, BoundsAndLinearity) {
  GroundTruth gt{std::vector<double>(7, 0.0), 0.0, std::vector<double>(7, 0.0)};
  const std::vector<double> u{1, 0, 0};
  const std::vector<double> x{0, 0};
  for (double w : {-15.0, -3.0, 0.7, 15.0}) {
    gt.w_opt[0] = w;
    const double m = opt_bid(gt, 1.0, u, x);
    EXPECT_GT(m, 0.5);
    EXPECT_LT(m, 2.0);
    EXPECT_DOUBLE_EQ(opt_bid(gt, 2.0, u, x), 2.0 * m);
  }
  gt.w_opt[0] = 15.0;
  EXPECT_NEAR(opt_bid(gt, 1.0, u, x), 2.0, 1e-5);
  gt.w_opt[0] = -15.0;
  EXPECT_NEAR(opt_bid(gt, 1.0, u, x), 0.5, 1e-5);
}

TEST(SampleClick, MonteCarloMean) {
  Rng rng(2024);
  int clicks = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) clicks += sample_click(0.3, rng);
  EXPECT_NEAR(static_cast<double>(clicks) / draws, 0.3, 0.01);
}

TEST(SampleClick, Boundaries) {
  Rng rng(1);
  EXPECT_THROW(sample_click(0.0, rng), DataError);
  EXPECT_THROW(sample_click(1.0, rng), DataError);
  int clicks = 0;
  for (int i = 0; i < 100; ++i) clicks += sample_click(1e-9, rng);
  EXPECT_EQ(clicks, 0);
  Rng a(99);
  Rng b(99);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_click(0.5, a), sample_click(0.5, b));
}

TEST(GenCorpus, DeterministicAndInRange) {
  const auto cfg = small_world();
  const auto a = gen_corpus(cfg);
  const auto b = gen_corpus(cfg);
  ASSERT_EQ(a.size(), 50u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, i);
    EXPECT_EQ(a[i].features, b[i].features);
    EXPECT_EQ(a[i].init_bid, b[i].init_bid);
    EXPECT_EQ(a[i].features.size(), cfg.d);
    EXPECT_GE(a[i].init_bid, cfg.bid_range.lo);
    EXPECT_LE(a[i].init_bid, cfg.bid_range.hi);
  }
}

TEST(GenCorpus, EmptyAndDegenerateBidRange) {
  auto cfg = small_world();
  cfg.corpus_size = 0;
  EXPECT_TRUE(gen_corpus(cfg).empty());
  cfg = small_world();
  cfg.bid_range = {1.0, 1.0};
  for (const auto& item : gen_corpus(cfg)) EXPECT_EQ(item.init_bid, 1.0);
}

TEST(GenRequest, DistinctSampleAndFullPermutation) {
  auto cfg = small_world();
  const auto corpus = gen_corpus(cfg);
  Rng rng(3);
  const auto req = gen_request(cfg, corpus, 7, rng);
  EXPECT_EQ(req.id, 7u);
  EXPECT_EQ(req.user_features.size(), cfg.d_u);
  EXPECT_EQ(std::set<ItemId>(req.preranking_set.begin(), req.preranking_set.end()).size(), 10u);

  cfg.sizes = {50, 5, 2};
  Rng rng2(3);
  const auto all = gen_request(cfg, corpus, 1, rng2);
  const std::set<ItemId> ids(all.preranking_set.begin(), all.preranking_set.end());
  EXPECT_EQ(ids.size(), 50u);
  EXPECT_EQ(*ids.rbegin(), 49u);
}

TEST(GenRequest, SameRngStateSameRequest) {
  const auto cfg = small_world();
  const auto corpus = gen_corpus(cfg);
  Rng a(5);
  Rng b(5);
  const auto ra = gen_request(cfg, corpus, 1, a);
  const auto rb = gen_request(cfg, corpus, 1, b);
  EXPECT_EQ(ra.preranking_set, rb.preranking_set);
  EXPECT_EQ(ra.user_features, rb.user_features);
}

TEST(GenRequest, TooLargeIsConfigError) {
  auto cfg = small_world();
  const auto corpus = gen_corpus(cfg);
  cfg.sizes = {51, 5, 2};
  Rng rng(1);
  EXPECT_THROW(gen_request(cfg, corpus, 1, rng), ConfigError);
  EXPECT_THROW(gen_request(cfg, {}, 1, rng), ConfigError);
}

TEST(GenRequests, SplitsAreDisjointAndReproducible) {
  const auto cfg = small_world();
  const auto corpus = gen_corpus(cfg);
  const auto train = gen_requests(cfg, corpus, Split::kTrain);
  const auto eval = gen_requests(cfg, corpus, Split::kEval);
  ASSERT_EQ(train.size(), 20u);
  ASSERT_EQ(eval.size(), 10u);
  std::set<RequestId> ids;
  for (const auto& r : train) ids.insert(r.id);
  for (const auto& r : eval) ids.insert(r.id);
  EXPECT_EQ(ids.size(), 30u);
  const auto again = gen_requests(cfg, corpus, Split::kEval);
  for (std::size_t i = 0; i < eval.size(); ++i) {
    EXPECT_EQ(eval[i].preranking_set, again[i].preranking_set);
  }
}

TEST(WorldConfig, Validation) {
  auto cfg = small_world();
  EXPECT_NO_THROW(cfg.validate());
  cfg.sizes = {60, 5, 2};
  try {
    cfg.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("sizes.n"), std::string::npos) << msg;
    EXPECT_NE(msg.find("corpus_size"), std::string::npos) << msg;
  }
  cfg = small_world();
  cfg.bid_range = {2.0, 1.0};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.bid_range = {0.0, 1.0};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_world();
  cfg.d = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(World, ProbabilitiesAndMultipliersInRange) {
  const auto world = World::generate(small_world());
  const auto reqs = gen_requests(world.cfg, world.corpus, Split::kTrain);
  for (const auto& r : reqs) {
    for (ItemId id : r.preranking_set) {
      const Item& it = world.item(id);
      const double p = world.true_ctr(r, it);
      EXPECT_GT(p, 0.0);
      EXPECT_LT(p, 1.0);
      const double m = world.opt_bid(r, it) / it.init_bid;
      EXPECT_GT(m, 0.5);
      EXPECT_LT(m, 2.0);
    }
  }
  EXPECT_THROW(world.item(999), DataError);
}

TEST(DeriveSeed, DistinctStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 100; ++a) {
    for (std::uint64_t b = 0; b < 10; ++b) seen.insert(derive_seed(1, a, b));
  }
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(derive_seed(5, 1, 2, 3), derive_seed(5, 1, 2, 3));
}

}  // namespace
}  // namespace rankcons
