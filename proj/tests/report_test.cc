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

#include "rankcons/report.h"

#include <gtest/gtest.h>

#include "rankcons/errors.h"

namespace rankcons {
namespace {

struct ToyLogs {
  std::vector<ServiceRecord> service;
  std::vector<SimulatorRecord> simulator;
};

ToyLogs toy_logs() {
  FixtureConfig f;
  f.sizes = {3, 2, 2};
  f.items = {{1, {{"bid", 8}, {"pctr", 0.4}}, {{"bid", 8}, {"pctr", 0.2}}},
             {2, {{"bid", 6}, {"pctr", 0.5}}, {{"bid", 6}, {"pctr", 0.5}}},
             {3, {{"bid", 4}, {"pctr", 0.6}}, {{"bid", 4}, {"pctr", 0.8}}}};
  const auto world = fixture_world(f);
  const auto req = fixture_request(f);
  const auto p = fixture_pipeline(f);
  return {run_request(req, p, world).service, run_simulator(req, p, world).records};
}

PipelineReport toy_report() {
  const auto logs = toy_logs();
  EvaluationConfig eval;
  eval.k_grid = {1, 2, 3};
  eval.c_grid = {1, 2, 3};
  eval.ece_buckets = 10;
  eval.histogram_buckets = 10;
  const std::vector<ExposureRecord> exposures{{1, 2, 1}, {1, 3, 0}};
  return evaluate_logs("toy", "fixture", logs.service, logs.simulator, exposures, eval, {3, 2, 2},
                       true);
}

TEST(EvaluateLogs, ToyExample) {
  const auto r = toy_report();
  EXPECT_EQ(r.rcs.macro, 0.5);
  ASSERT_EQ(r.rcs_grid.size(), 6u);  // (1,1) (1,2) (1,3) (2,2) (2,3) (3,3)
  EXPECT_EQ(r.rcs_grid[0].macro, 0.0);
  EXPECT_EQ(r.rcs_grid[3].k, 2u);
  EXPECT_EQ(r.rcs_grid[3].c, 2u);
  EXPECT_EQ(r.rcs_grid[3].macro, 0.5);
  EXPECT_EQ(r.rcs_grid[5].macro, 1.0);
  ASSERT_EQ(r.single_objective.size(), 2u);
  EXPECT_EQ(r.single_objective[0].first, "bid");
  EXPECT_EQ(r.single_objective[1].second.macro, 1.0);
  ASSERT_TRUE(r.calibration.has_value());
  // Buckets of width 0.1: 0.4 -> 4, 0.5 -> 5, 0.6 -> 6; gaps -0.2, 0, +0.2.
  EXPECT_NEAR(r.calibration->ece, 0.4 / 3.0, 1e-12);
  EXPECT_NEAR(r.calibration->pcoc, 1.0, 1e-12);
  ASSERT_TRUE(r.auc.has_value());
  EXPECT_EQ(*r.auc, 0.0);  // the clicked item has the lower pre-ranking pctr
  ASSERT_TRUE(r.histograms.has_value());
  EXPECT_NEAR(r.histograms->tv_full, 2.0 / 3.0, 1e-12);
}

TEST(EvaluateLogs, NonProbabilityScoresSkipCalibration) {
  auto logs = toy_logs();
  for (auto& rec : logs.service) rec.scores.set("pctr", rec.scores.at("pctr") * 3.0);
  EvaluationConfig eval;
  eval.k_grid = {1};
  eval.c_grid = {2};
  const auto r = evaluate_logs("x", "x", logs.service, logs.simulator, {}, eval, {3, 2, 1}, false);
  EXPECT_FALSE(r.calibration.has_value());
  EXPECT_FALSE(r.histograms.has_value());
  EXPECT_FALSE(r.auc.has_value());
}

TEST(EvaluateLogs, RescaledProbabilitiesAreClampedForCalibration) {
  auto logs = toy_logs();
  for (auto& rec : logs.service) rec.scores.set("pctr", rec.scores.at("pctr") * 2.0);
  EvaluationConfig eval;
  eval.k_grid = {1};
  eval.c_grid = {2};
  eval.ece_buckets = 10;
  const auto r = evaluate_logs("x", "x", logs.service, logs.simulator, {}, eval, {3, 2, 1}, true);
  ASSERT_TRUE(r.calibration.has_value());
  // 0.8 -> bucket 8 (gap -0.6); 1.0 and 1.2 clamp to 1 - 1e-12 in bucket 9
  // (gaps -0.5, -0.2).
  EXPECT_NEAR(r.calibration->ece, 0.4333333333326667, 1e-15);
  EXPECT_NEAR(r.calibration->pcoc, 1.8666666666653333, 1e-15);
}

TEST(EvaluateLogs, ProbabilityPipelines) {
  auto cfg = ExperimentConfig::defaults();
  EXPECT_TRUE(pctr_is_probability("init*logloss/opt*rank", cfg));
  EXPECT_TRUE(pctr_is_probability("init*logloss@2/opt*rank", cfg));
  EXPECT_FALSE(pctr_is_probability("init*ltr/opt*rank", cfg));
  FixtureConfig f;
  f.sizes = {1, 1, 1};
  f.items = {{1, {{"bid", 1}, {"pctr", 0.5}}, {{"bid", 1}, {"pctr", 0.5}}}};
  EXPECT_TRUE(pctr_is_probability(fixture_pipeline(f)));
  f.items[0].prerank.set("pctr", 1.5);
  EXPECT_FALSE(pctr_is_probability(fixture_pipeline(f)));
}

TEST(Summary, RoundTrip) {
  const auto rec = summarize(toy_report());
  const auto text = summary_csv(rec);
  EXPECT_EQ(parse_summary_csv(text), rec);
  EXPECT_EQ(summary_csv(parse_summary_csv(text)), text);
  SummaryRecord sparse{"ltr", "init*ltr/opt*rank", 10, 50, 0.8, 0.8, 0.7, 0.9, {}, {}, 0.6, {}, {}};
  EXPECT_EQ(parse_summary_csv(summary_csv(sparse)), sparse);
  EXPECT_THROW(parse_summary_csv("name\nx\n"), DataError);
}

TEST(Summary, TableKeepsInputOrder) {
  SummaryRecord a{"b-tier", "s", 10, 50, 0.5, 0.4, 0.1, 0.2, 0.3, 1.1, 0.6, 0.1, 0.05};
  SummaryRecord b{"a-tier", "s", 10, 50, 0.7, 0.6, 0.1, 0.2, {}, {}, {}, {}, {}};
  const auto table = summary_table_csv({a, b}, RcsMode::kMacro);
  EXPECT_EQ(table,
            "tier,single_objective_rcs,rcs,ece,pcoc,auc\n"
            "b-tier,0.20000000000000001,0.5,0.29999999999999999,1.1000000000000001,0.59999999999999998\n"
            "a-tier,0.20000000000000001,0.69999999999999996,,,\n");
  EXPECT_NE(summary_table_csv({a}, RcsMode::kMicro).find(",0.40000000000000002,"),
            std::string::npos);
}

TEST(Csv, DiagnosisAndLossTrace) {
  DiagnosisTable t{{"bid", "init-bid", "opt-bid", 0.5, 0.75}, {"all", "a", "b", 0.5, 1.0}};
  EXPECT_EQ(diagnosis_csv(t),
            "slot,replaced,replacement,rcs_before,rcs_after,delta\n"
            "bid,init-bid,opt-bid,0.5,0.75,0.25\n"
            "all,a,b,0.5,1,0.5\n");
  EXPECT_EQ(loss_trace_csv({0.5, 0.25}), "epoch,loss\n0,0.5\n1,0.25\n");
}

TEST(Csv, HistogramsParseBack) {
  const auto r = toy_report();
  const auto text = histograms_csv(r.histograms, 10);
  const auto table = parse_histograms_csv(text);
  ASSERT_EQ(table.values.size(), 4u);
  EXPECT_EQ(table.values[0], r.histograms->pre_full);
  EXPECT_EQ(table.values[3], r.histograms->rank_win);
  const auto grid = parse_rcs_grid_csv(rcs_grid_csv(r));
  ASSERT_EQ(grid.size(), 6u);
  EXPECT_EQ(grid[3].macro, 0.5);
}

TEST(Svg, Deterministic) {
  const auto table = parse_histograms_csv(histograms_csv(toy_report().histograms, 10));
  const auto a = histogram_svg("toy", table);
  const auto b = histogram_svg("toy", parse_histograms_csv(histograms_csv(toy_report().histograms, 10)));
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("<polyline"), std::string::npos);
  const std::vector<TrendSeries> series{{"x", {{10, 0.5}, {50, 0.8}}}, {"y", {{10, 0.6}, {50, 0.9}}}};
  EXPECT_EQ(trend_svg("t", "c", series), trend_svg("t", "c", series));
}

TEST(Svg, EmptyHistogramDrawsAxesOnly) {
  const auto empty = parse_histograms_csv(histograms_csv(std::nullopt, 10));
  const auto svg = histogram_svg("empty", empty);
  EXPECT_EQ(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find("<line"), std::string::npos);
  EXPECT_EQ(svg, histogram_svg("empty", parse_histograms_csv("")));
  EXPECT_EQ(svg.rfind("</svg>\n"), svg.size() - 7);
}

TEST(Svg, EscapesTitles) {
  EXPECT_NE(histogram_svg("a<b&c", {}).find("a&lt;b&amp;c"), std::string::npos);
}

}  // namespace
}  // namespace rankcons
