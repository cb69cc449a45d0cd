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
// Experiment runner behind the command-line tool: association comparisons
// over an (alpha, seed) grid, joint-optimization histories and optional
// slot-level verification. Results are written as CSV plus a JSON manifest
// from which the run can be repeated.

#ifndef HETNET_EXPERIMENT_H_
#define HETNET_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hetnet/afopt.h"
#include "hetnet/association.h"
#include "hetnet/gls.h"
#include "hetnet/joint.h"
#include "hetnet/model.h"
#include "hetnet/rate.h"

namespace hetnet {

// Accepted algorithm names, in the order results are reported.
const std::vector<std::string>& KnownAlgorithms();

struct ExperimentSpec {
  // Exactly one source. With a scenario, seed s regenerates the topology
  // with rng_seed = s; an instance is used as is for every seed.
  std::optional<ScenarioConfig> scenario;
  std::optional<Instance> instance;
  std::vector<double> alphas;
  std::vector<std::string> algorithms;
  std::vector<uint64_t> seeds{1};
  // Relative swap threshold of GLS and distributed local search.
  double delta = 0.0;
  // Fast-fading draws for conservative rates and AF (fading gains only).
  int mc_samples = 1000;
  // Slot-level verification frames per solution; 0 skips verification.
  int verify_frames = 0;
  int slots_per_frame = 5000;
  int max_threads = 0;

  void Validate() const;
};

struct AlgorithmResult {
  std::string algorithm;
  // System utility at the KKT time shares; for ru, the relaxed optimum in
  // the same units.
  double score = 0.0;
  double g = 0.0;
  // -1 when not applicable.
  int ls_iterations = -1;
  int rounds = -1;
  bool converged = true;
  std::string bound_kind;
  // g-units; empty kind means no certificate.
  double bound_value = 0.0;
  double seconds = 0.0;
  Association association;
  ActivationVector rho;
  std::vector<JointRecord> history;
};

struct VerifyRow {
  std::string algorithm;
  double utility_conservative = 0.0;
  double utility_actual_rr = 0.0;
  double utility_actual_gradient = 0.0;
};

struct CellResult {
  double alpha = 0.0;
  uint64_t seed = 0;
  std::vector<AlgorithmResult> results;
  std::vector<VerifyRow> verify;

  const AlgorithmResult* Find(const std::string& algorithm) const;
};

struct ExperimentReport {
  // Alpha-major, then seed, in the order given.
  std::vector<CellResult> cells;
};

// The instance a cell runs on.
Instance CellInstance(const ExperimentSpec& spec, double alpha, uint64_t seed);

CellResult RunCell(const ExperimentSpec& spec, double alpha, uint64_t seed);
ExperimentReport RunExperiment(const ExperimentSpec& spec);

// alpha, seed, algorithm, score, g, ls_iterations, rounds, converged,
// bound_kind, bound_value.
void WriteResultsCsv(const ExperimentReport& report, std::ostream& out);
// alpha, seed, Greedy, GLS, RU, RRA, MSA, DG, LSI; blank where not run.
void WriteTableCsv(const ExperimentReport& report, std::ostream& out);
// Per-round utility of the joint algorithms.
void WriteHistoryCsv(const ExperimentReport& report, std::ostream& out);
void WriteVerifyCsv(const ExperimentReport& report, std::ostream& out);

std::string GitDescribe();
std::string ManifestJson(const ExperimentSpec& spec);
// Throws ParseError on a malformed manifest.
ExperimentSpec SpecFromManifest(const std::string& json_text);

// Writes results.csv, table.csv, history.csv, verify.csv (when
// verification ran), manifest.json and timing.json into `dir`.
void WriteExperiment(const ExperimentSpec& spec, const ExperimentReport& report,
                     const std::filesystem::path& dir);

}  // namespace hetnet

#endif  // HETNET_EXPERIMENT_H_
