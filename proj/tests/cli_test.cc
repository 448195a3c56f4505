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

// Drives the rankcons binary end to end on small configs.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>
#include <regex>
#include <string>

#include "rankcons/checkpoint.h"
#include "rankcons/logs.h"
#include "rankcons/report.h"

namespace rankcons {
namespace {

namespace fs = std::filesystem;

const std::string kCli = RANKCONS_CLI;
const std::string kConfigs = RANKCONS_CONFIG_DIR;

struct Run {
  int code;
  std::string err;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("rankcons_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run run(const std::string& args) {
  const auto err_file = work_dir() / "stderr.txt";
  const std::string cmd = kCli + " " + args + " >/dev/null 2>" + err_file.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1,
          fs::exists(err_file) ? read_text_file(err_file) : ""};
}

std::string config(const std::string& name) { return "--config " + kConfigs + "/" + name; }

std::string write_config(const std::string& name, const std::string& text) {
  const auto path = work_dir() / name;
  write_text_file(path, text);
  return "--config " + path.string();
}

// The full small-scale pipeline, run once and shared by the tests below.
class SmallPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    out_ = work_dir() / "small";
    for (const char* verb : {"generate", "train", "simulate", "evaluate", "diagnose", "report"}) {
      const auto r = run(std::string(verb) + " " + config("small.json") + " --out " + out_.string());
      ASSERT_EQ(r.code, 0) << verb << ": " << r.err;
    }
  }
  static fs::path out_;
};
fs::path SmallPipeline::out_;

TEST_F(SmallPipeline, WritesExpectedArtifacts) {
  for (const char* f : {"world/corpus.jsonl", "world/requests_train.jsonl", "world/requests_eval.jsonl",
                        "world/ground_truth.json", "world/manifest.json", "models/rank.ckpt",
                        "models/distill_loss.csv", "logs/eval/init-logloss__opt-rank/service.jsonl",
                        "eval/logloss/summary.csv", "diagnosis/init-logloss__opt-rank.csv",
                        "report/summary.csv", "report/rcs_vs_c.svg", "report/distill_histograms.svg"}) {
    EXPECT_TRUE(fs::exists(out_ / f)) << f;
  }
}

TEST_F(SmallPipeline, RerunIsByteIdentical) {
  const auto again = work_dir() / "small_again";
  for (const char* verb : {"generate", "train", "simulate", "evaluate", "diagnose", "report"}) {
    ASSERT_EQ(run(std::string(verb) + " " + config("small.json") + " --out " + again.string()).code, 0);
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(out_)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), out_);
    ASSERT_TRUE(fs::exists(again / rel)) << rel;
    EXPECT_EQ(file_digest(entry.path()), file_digest(again / rel)) << rel;
    ++compared;
  }
  EXPECT_GT(compared, 40u);
}

TEST_F(SmallPipeline, RankAsPrerankIsPerfectlyConsistent) {
  for (const auto& g : parse_rcs_grid_csv(read_text_file(out_ / "eval/rank-as-prerank/rcs_grid.csv"))) {
    EXPECT_EQ(g.macro, 1.0);
    EXPECT_EQ(g.micro, 1.0);
  }
}

TEST_F(SmallPipeline, LogRecordCounts) {
  const auto dir = out_ / "logs/eval/init-logloss__opt-rank";
  EXPECT_EQ(read_service_log(dir / "service.jsonl").size(), 40u * 60u);
  EXPECT_EQ(read_simulator_log(dir / "simulator.jsonl").size(), 40u * 60u);
  EXPECT_EQ(read_exposure_log(dir / "exposures.jsonl").size(), 40u * 4u);
}

TEST_F(SmallPipeline, CheckpointMetadata) {
  const auto small = load_checkpoint(out_ / "models/logloss-small.ckpt");
  EXPECT_NE(small.metadata.find("\"mask_fraction\":0.25"), std::string::npos) << small.metadata;
  EXPECT_NEAR(small.model.mask_fraction(), 0.25, 0.02);
  const auto ltr = load_checkpoint(out_ / "models/ltr.ckpt");
  EXPECT_NE(ltr.metadata.find("\"chunks\":2,\"boundary\":4"), std::string::npos) << ltr.metadata;
}

TEST_F(SmallPipeline, DistillLossDecreases) {
  const auto text = read_text_file(out_ / "models/distill_loss.csv");
  std::vector<double> losses;
  std::size_t pos = text.find('\n') + 1;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    const auto line = text.substr(pos, end - pos);
    losses.push_back(std::stod(line.substr(line.find(',') + 1)));
    pos = end + 1;
  }
  ASSERT_GE(losses.size(), 2u);
  EXPECT_LT(losses.back(), losses.front());
}

TEST_F(SmallPipeline, DiagnosisRowsFollowSlotOrder) {
  const auto text = read_text_file(out_ / "diagnosis/init-logloss__opt-rank.csv");
  const auto bid = text.find("\nbid,");
  const auto pctr = text.find("\npctr,");
  const auto all = text.find("\nall,");
  ASSERT_NE(all, std::string::npos);
  EXPECT_LT(bid, pctr);
  EXPECT_LT(pctr, all);
  EXPECT_NE(text.find(",1,", all), std::string::npos);
}

TEST_F(SmallPipeline, SummaryFollowsConfigOrder) {
  const auto text = read_text_file(out_ / "report/summary.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "tier,single_objective_rcs,rcs,ece,pcoc,auc");
  std::vector<std::size_t> at;
  for (const char* t : {"\nlogloss-small,", "\nlogloss,", "\nltr,", "\ndistill,", "\nrank-as-prerank,"}) {
    at.push_back(text.find(t));
  }
  for (std::size_t i = 1; i < at.size(); ++i) EXPECT_LT(at[i - 1], at[i]);
}

TEST_F(SmallPipeline, ReportRegeneratesIdenticalSvg) {
  const auto before = read_text_file(out_ / "report/rcs_vs_c.svg");
  ASSERT_EQ(run("report " + config("small.json") + " --out " + out_.string()).code, 0);
  EXPECT_EQ(read_text_file(out_ / "report/rcs_vs_c.svg"), before);
}

TEST_F(SmallPipeline, EvaluateGridOverride) {
  ASSERT_EQ(run("evaluate " + config("small.json") + " --out " + out_.string() +
                " --pipeline logloss --k 2,4 --c 12,60").code, 0);
  const auto grid = parse_rcs_grid_csv(read_text_file(out_ / "eval/logloss/rcs_grid.csv"));
  ASSERT_EQ(grid.size(), 4u);
  EXPECT_EQ(grid[0].k, 2u);
  EXPECT_EQ(grid[3].c, 60u);
  EXPECT_EQ(grid[3].macro, 1.0);
  EXPECT_EQ(run("evaluate " + config("small.json") + " --out " + out_.string() + " --k 20 --c 12").code, 2);
  // Restore the configured grid for the other tests.
  ASSERT_EQ(run("evaluate " + config("small.json") + " --out " + out_.string()).code, 0);
}

TEST(Fixture, ToyExampleRows) {
  const auto out = work_dir() / "fixture";
  ASSERT_EQ(run("generate " + config("table1_fixture.json") + " --out " + out.string()).code, 0);
  ASSERT_EQ(run("evaluate " + config("table1_fixture.json") + " --out " + out.string()).code, 0);
  const auto grid = parse_rcs_grid_csv(read_text_file(out / "eval/fixture/rcs_grid.csv"));
  for (const auto& g : grid) {
    if (g.k == 1 && g.c == 1) EXPECT_EQ(g.macro, 0.0);
    if (g.k == 2 && g.c == 2) EXPECT_EQ(g.macro, 0.5);
    if (g.k == 3 && g.c == 3) EXPECT_EQ(g.macro, 1.0);
  }
  const auto so = read_text_file(out / "eval/fixture/single_objective.csv");
  EXPECT_NE(so.find("pctr,2,2,1,1"), std::string::npos) << so;
}

const std::regex kErrorLine(R"(^rankcons: error kind=([a-z-]+) code=([0-9]) message="[^\n]*"\n$)");

void expect_error(const Run& r, int code, const std::string& kind, const std::string& needle = "") {
  EXPECT_EQ(r.code, code) << r.err;
  std::smatch m;
  ASSERT_TRUE(std::regex_match(r.err, m, kErrorLine)) << r.err;
  EXPECT_EQ(m[1], kind);
  EXPECT_EQ(m[2], std::to_string(code));
  if (!needle.empty()) EXPECT_NE(r.err.find(needle), std::string::npos) << r.err;
}

TEST(Errors, ValidationExitCode) {
  const auto out = " --out " + (work_dir() / "errors").string();
  expect_error(run("generate " + write_config("bad1.json", R"({"world":{"corpus_size":100}})") + out),
               2, "config", "corpus_size");
  expect_error(run("generate " + write_config("bad2.json", R"({"nope":1})") + out), 2, "config", "nope");
  expect_error(run("generate --config /nonexistent.json" + out), 2, "config");
  expect_error(run("generate --seed notanumber" + out), 2, "usage");
  expect_error(run("frobnicate"), 2, "usage");
  expect_error(run("train " + config("small.json") + " --tier nosuch --out " +
                   (work_dir() / "small_missing").string()),
               3, "missing-prerequisite");
}

TEST(Errors, MissingPrerequisiteExitCode) {
  const auto out = work_dir() / "prereq";
  const auto args = config("small.json") + " --out " + out.string();
  expect_error(run("train " + args), 3, "missing-prerequisite", "rankcons generate");
  ASSERT_EQ(run("generate " + args).code, 0);
  expect_error(run("train --tier logloss " + args), 3, "missing-prerequisite", "rankcons simulate");
  expect_error(run("simulate " + args), 3, "missing-prerequisite", "rankcons train");
  expect_error(run("evaluate " + args), 3, "missing-prerequisite", "rankcons simulate");
  expect_error(run("report " + args), 3, "missing-prerequisite", "summary.csv");
  expect_error(run("train --tier nosuch " + args), 2, "config", "nosuch");
}

TEST(Errors, DataErrorExitCode) {
  const auto out = work_dir() / "corrupt";
  const auto args = config("table1_fixture.json") + " --out " + out.string();
  ASSERT_EQ(run("generate " + args).code, 0);
  write_text_file(out / "logs/eval/fixture/simulator.jsonl", "{\"request_id\":1}\n");
  expect_error(run("evaluate " + args), 4, "data", "simulator.jsonl:1");
  // A world generated from a different config is rejected, not silently reused.
  ASSERT_EQ(run("generate " + args).code, 0);
  expect_error(run("train --seed 5 " + args), 4, "data", "different config");
}

TEST(Errors, MisalignedLogsNameTheRequest) {
  const auto out = work_dir() / "misaligned";
  const auto args = config("table1_fixture.json") + " --out " + out.string();
  ASSERT_EQ(run("generate " + args).code, 0);
  const auto path = out / "logs/eval/fixture/service.jsonl";
  auto text = read_text_file(path);
  text = std::regex_replace(text, std::regex("\"request_id\":1,"), "\"request_id\":42,");
  write_text_file(path, text);
  expect_error(run("evaluate " + args), 4, "data", "42");
}

TEST(Generate, SameConfigSameDigests) {
  const auto a = work_dir() / "gen_a";
  const auto b = work_dir() / "gen_b";
  ASSERT_EQ(run("generate " + config("small.json") + " --out " + a.string()).code, 0);
  ASSERT_EQ(run("generate " + config("small.json") + " --out " + b.string()).code, 0);
  EXPECT_EQ(read_text_file(a / "world/manifest.json"), read_text_file(b / "world/manifest.json"));
  ASSERT_EQ(run("generate " + config("small.json") + " --seed 4 --out " + b.string()).code, 0);
  EXPECT_NE(read_text_file(a / "world/manifest.json"), read_text_file(b / "world/manifest.json"));
}

TEST(Help, ExitsZero) { EXPECT_EQ(run("--help").code, 0); }

}  // namespace
}  // namespace rankcons
