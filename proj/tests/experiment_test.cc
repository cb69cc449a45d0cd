// Copyright 2026 The HetNet-AF Authors.
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
#include "hetnet/experiment.h"

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hetnet/error.h"

namespace hetnet {
namespace {

ScenarioConfig Small() {
  ScenarioConfig cfg;
  cfg.num_sectors = 1;
  cfg.picos_per_sector = 2;
  cfg.users_per_sector = 6;
  return cfg;
}

ExperimentSpec SmallSpec() {
  ExperimentSpec spec;
  spec.scenario = Small();
  spec.alphas = {0.25, 0.5};
  spec.algorithms = {"gls", "msa"};
  return spec;
}

int Lines(const std::string& s) {
  return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

std::string Results(const ExperimentReport& r) {
  std::ostringstream o;
  WriteResultsCsv(r, o);
  return o.str();
}

std::string Table(const ExperimentReport& r) {
  std::ostringstream o;
  WriteTableCsv(r, o);
  return o.str();
}

std::string History(const ExperimentReport& r) {
  std::ostringstream o;
  WriteHistoryCsv(r, o);
  return o.str();
}

TEST(ExperimentTest, OneRowPerAlphaAndAlgorithm) {
  const std::string csv = Results(RunExperiment(SmallSpec()));
  EXPECT_EQ(Lines(csv), 1 + 4);
  EXPECT_EQ(csv.rfind("alpha,seed,algorithm,score,", 0), 0u);
}

TEST(ExperimentTest, TableHeader) {
  ExperimentSpec spec = SmallSpec();
  spec.seeds = {1, 2};
  const std::string csv = Table(RunExperiment(spec));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "alpha,seed,Greedy,GLS,RU,RRA,MSA,DG,LSI");
  EXPECT_EQ(Lines(csv), 1 + 4);
}

TEST(ExperimentTest, ScoresMatchDirectEvaluation) {
  ExperimentSpec spec = SmallSpec();
  spec.algorithms = {"greedy", "gls", "dg", "dls", "ru", "rra", "msa"};
  spec.alphas = {0.5, 2.0};
  const ExperimentReport r = RunExperiment(spec);
  for (const CellResult& c : r.cells) {
    const Instance inst = CellInstance(spec, c.alpha, c.seed);
    const RateMatrix rates = ComputeRateMatrix(
        inst.gains, ActivationVector::Ones(inst.gains.num_tps()), 0);
    for (const AlgorithmResult& a : c.results) {
      if (a.algorithm == "ru") continue;
      const double u =
          SystemUtility(a.association, KktGamma(a.association, rates, inst.utility),
                        rates, inst.utility);
      EXPECT_NEAR(a.score, u, 1e-9 * std::max(1.0, std::abs(u))) << a.algorithm;
    }
    // Relaxation on the right side of every integral solution.
    const double ru = c.Find("ru")->score;
    for (const AlgorithmResult& a : c.results) EXPECT_GE(ru + 1e-9, a.score);
  }
}

TEST(ExperimentTest, RerunIsIdenticalAndManifestRoundTrips) {
  ExperimentSpec spec = SmallSpec();
  spec.alphas = {3.0};
  spec.algorithms = {"gls", "dls", "joint-gls-af", "joint-ra-af"};
  spec.seeds = {4, 5};
  spec.verify_frames = 1;
  spec.slots_per_frame = 200;
  const ExperimentReport a = RunExperiment(spec);
  const ExperimentSpec back = SpecFromManifest(ManifestJson(spec));
  const ExperimentReport b = RunExperiment(back);
  EXPECT_EQ(Results(a), Results(b));
  EXPECT_EQ(History(a), History(b));
  std::ostringstream va, vb;
  WriteVerifyCsv(a, va);
  WriteVerifyCsv(b, vb);
  EXPECT_EQ(va.str(), vb.str());
  EXPECT_EQ(Lines(va.str()), 1 + 2 * 4);
}

TEST(ExperimentTest, HistoryShape) {
  ExperimentSpec spec = SmallSpec();
  spec.alphas = {2.0};
  spec.algorithms = {"joint-gls-af", "msa"};
  const ExperimentReport r = RunExperiment(spec);
  const std::string csv = History(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "alpha,seed,algorithm,round,stage,score,rounded_score");
  const AlgorithmResult* j = r.cells[0].Find("joint-gls-af");
  ASSERT_NE(j, nullptr);
  EXPECT_EQ(Lines(csv), 1 + static_cast<int>(j->history.size()));
  // Half-steps alternate and rounds count up from 1.
  for (size_t i = 0; i < j->history.size(); ++i) {
    EXPECT_EQ(j->history[i].round, static_cast<int>(i / 2) + 1);
    EXPECT_EQ(j->history[i].stage, i % 2 ? "af" : "gls");
  }
}

TEST(ExperimentTest, Validation) {
  ExperimentSpec spec = SmallSpec();
  spec.algorithms = {"gls", "nope"};
  EXPECT_THROW(spec.Validate(), ValidationError);
  spec = SmallSpec();
  spec.alphas.clear();
  EXPECT_THROW(spec.Validate(), ValidationError);
  spec = SmallSpec();
  spec.instance = CellInstance(spec, 1.0, 1);
  EXPECT_THROW(spec.Validate(), ValidationError);
  EXPECT_THROW(SpecFromManifest("{\"alphas\": [1]}"), ParseError);
}

int RunCli(const std::string& args) {
  const std::string cmd = std::string(HETNET_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliTest, ExitCodesAndFiles) {
  const std::filesystem::path dir =
      std::filesystem::path(::testing::TempDir()) / "hetnet_cli_test";
  std::filesystem::remove_all(dir);
  const std::filesystem::path scen = dir.string() + "_scenario.json";
  {
    std::ofstream f(scen);
    f << SerializeScenarioConfig(Small());
  }
  EXPECT_EQ(RunCli("--scenario " + scen.string() +
                   " --alpha 0.25,0.5 --algos gls,msa --out " + dir.string()),
            0);
  for (const char* f : {"results.csv", "table.csv", "history.csv",
                        "manifest.json", "timing.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  EXPECT_EQ(RunCli("--alpha 1 --algos foo"), 2);
  EXPECT_EQ(RunCli("--alpha 1 --algos gls --no-such-flag"), 2);
  EXPECT_EQ(RunCli("--alpha -1 --algos gls"), 2);
  EXPECT_EQ(RunCli("--instance /nonexistent.json --alpha 1 --algos gls"), 2);
  EXPECT_EQ(RunCli("--help"), 0);
}

}  // namespace
}  // namespace hetnet
