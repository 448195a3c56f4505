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

#include "rankcons/config.h"

#include <gtest/gtest.h>

#include "rankcons/errors.h"
#include "rankcons/experiment.h"

namespace rankcons {
namespace {

std::string config_error(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, DefaultsAreValid) {
  const auto cfg = ExperimentConfig::defaults();
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.world.sizes, (StageSizes{500, 50, 10}));
  EXPECT_EQ(cfg.world.d, 32u);
  EXPECT_EQ(cfg.world.corpus_size, 10000u);
  EXPECT_EQ(cfg.world.requests_per_epoch, 2000u);
  EXPECT_EQ(cfg.world.eval_requests, 500u);
  EXPECT_EQ(cfg.evaluation.ece_buckets, 50u);
  EXPECT_EQ(cfg.evaluation.mode, RcsMode::kMacro);
  EXPECT_EQ(cfg.tier("logloss-small").mask_fraction, 0.25);
}

TEST(Config, EmptyObjectGivesDefaults) {
  EXPECT_EQ(config_to_json(parse_config("{}")), config_to_json(ExperimentConfig::defaults()));
}

TEST(Config, JsonRoundTrip) {
  auto cfg = ExperimentConfig::defaults();
  cfg.seed = 9;
  cfg.world.seed = 9;
  cfg.world.bid_range = {1.0, 1.0};
  cfg.evaluation.k_grid = {1, 5};
  const auto text = config_to_json(cfg);
  EXPECT_EQ(config_to_json(parse_config(text)), text);
}

TEST(Config, FieldPathErrors) {
  EXPECT_NE(config_error(R"({"world":{"bogus":1}})").find("world.bogus"), std::string::npos);
  EXPECT_NE(config_error(R"({"world":{"d":"x"}})").find("world.d"), std::string::npos);
  EXPECT_NE(config_error(R"({"tiers":[{"name":"rank","kind":"rank","train":{"learning_rate":-1}}]})")
                .find("tiers[0]"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"evaluation":{"mode":"median"}})").find("evaluation.mode"),
            std::string::npos);
  EXPECT_NE(config_error("{not json"), "");
  const auto both = config_error(R"({"world":{"corpus_size":100}})");
  EXPECT_NE(both.find("sizes.n"), std::string::npos) << both;
  EXPECT_NE(both.find("corpus_size"), std::string::npos) << both;
}

TEST(Config, PipelinesMustNameDefinedTiers) {
  const auto msg = config_error(R"({"pipelines":[{"name":"x","spec":"init*nosuch/opt*rank"}]})");
  EXPECT_NE(msg.find("pipelines[0].spec"), std::string::npos) << msg;
  EXPECT_NE(msg.find("nosuch"), std::string::npos) << msg;
}

TEST(Config, EvaluationGridNeedsAPair) {
  EXPECT_NE(config_error(R"({"evaluation":{"k_grid":[20],"c_grid":[10]}})"), "");
  EXPECT_NE(config_error(R"({"evaluation":{"c_grid":[600]}})"), "");
}

TEST(Config, FixtureParses) {
  const auto cfg = parse_config(R"({
    "fixture": {"request_id": 4, "sizes": {"n": 2, "c": 1, "k": 1},
                "items": [{"item_id": 1, "prerank": {"bid": 2, "pctr": 0.5}, "rank": {"bid": 2, "pctr": 0.4}},
                          {"item_id": 2, "prerank": {"bid": 3, "pctr": 0.1}, "rank": {"bid": 3, "pctr": 0.6}}]}})");
  ASSERT_TRUE(cfg.fixture.has_value());
  EXPECT_EQ(cfg.fixture->request_id, 4u);
  EXPECT_EQ(cfg.fixture->items[1].rank.at("pctr"), 0.6);
  EXPECT_NE(config_error(R"({"fixture":{"sizes":{"n":3,"c":1,"k":1},"items":[]}})"), "");
}

TEST(Config, TrainSeedDependsOnTierAndSeed) {
  auto cfg = ExperimentConfig::defaults();
  EXPECT_NE(cfg.train_seed("logloss"), cfg.train_seed("distill"));
  const auto before = cfg.train_seed("logloss");
  cfg.seed = 2;
  EXPECT_NE(cfg.train_seed("logloss"), before);
}

ModelResolver fake_resolver() {
  static const auto model = std::make_shared<const Predictor>();
  return [](std::string_view tier) { return ModelScore{std::string(tier), model}; };
}

TEST(PipelineSpec, EquivalentSpellings) {
  const StageSizes sizes{10, 5, 2};
  const auto a = parse_pipeline_spec("init-bid*|logloss|/opt-bid*|rank|", sizes, fake_resolver());
  const auto b = parse_pipeline_spec("init*logloss/opt*rank", sizes, fake_resolver());
  EXPECT_EQ(a.describe(), b.describe());
  EXPECT_EQ(a.describe(), "init-bid*|logloss| / opt-bid*|rank|");
  const auto scaled = parse_pipeline_spec("init*logloss@2/opt*rank", sizes, fake_resolver());
  EXPECT_EQ(std::get<ModelScore>(scaled.prerank.find("pctr")->source).scale, 2.0);
}

TEST(PipelineSpec, Malformed) {
  const StageSizes sizes{10, 5, 2};
  for (const char* spec : {"init*logloss", "init*logloss/opt*rank/x", "init*/opt*rank",
                           "init*logloss@zero/opt*rank", "init*logloss@-1/opt*rank",
                           "init*logloss/opt", "init*init/opt*opt", "||/opt"}) {
    EXPECT_THROW(parse_pipeline_spec(spec, sizes, fake_resolver()), ConfigError) << spec;
  }
}

TEST(PipelineSpec, Slug) {
  EXPECT_EQ(spec_slug("init*logloss/opt*rank"), "init-logloss__opt-rank");
  EXPECT_EQ(spec_slug("init*|logloss|@2/opt*rank"), "init-logloss_x2__opt-rank");
}

TEST(TierMask, NestedAndSized) {
  const auto small = tier_mask(64, 0.25, 3);
  const auto med = tier_mask(64, 0.5, 3);
  const auto full = tier_mask(64, 1.0, 3);
  EXPECT_EQ(std::count(small.begin(), small.end(), true), 16);
  EXPECT_EQ(std::count(med.begin(), med.end(), true), 32);
  EXPECT_EQ(std::count(full.begin(), full.end(), true), 64);
  for (std::size_t i = 0; i < 64; ++i) {
    if (small[i]) {
      EXPECT_TRUE(med[i]);
    }
  }
  EXPECT_NE(tier_mask(64, 0.25, 4), small);
}

}  // namespace
}  // namespace rankcons
