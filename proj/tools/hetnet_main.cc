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
// hetnet: runs association / activation-fraction experiments and writes
// CSV tables, per-round histories and a manifest for reruns.
//
// Exit codes: 0 success, 2 bad configuration, 3 solver failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hetnet/error.h"
#include "hetnet/experiment.h"
#include "hetnet/model.h"

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverError = 3;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hetnet::ValidationError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HetNet association and activation-fraction experiments"};
  std::string scenario, instance, manifest, out = "out";
  std::vector<double> alphas;
  std::vector<std::string> algos;
  std::vector<uint64_t> seeds{1};
  hetnet::ExperimentSpec defaults;
  double delta = defaults.delta;
  int mc_samples = defaults.mc_samples;
  int verify_frames = defaults.verify_frames;
  int slots = defaults.slots_per_frame;
  int threads = 0;

  auto* scenario_opt = app.add_option(
      "--scenario", scenario, "Scenario JSON, or 'default' for the built-in layout");
  auto* instance_opt = app.add_option("--instance", instance, "Instance JSON");
  auto* manifest_opt =
      app.add_option("--manifest", manifest, "Rerun the experiment of a manifest.json");
  auto* alpha_opt =
      app.add_option("--alpha", alphas, "Comma-separated alpha values")->delimiter(',');
  std::string algo_help = "Comma-separated algorithms:";
  for (const auto& a : hetnet::KnownAlgorithms()) algo_help += " " + a;
  auto* algos_opt = app.add_option("--algos", algos, algo_help)->delimiter(',');
  auto* seeds_opt =
      app.add_option("--seeds", seeds, "Comma-separated seeds")->delimiter(',');
  auto* delta_opt = app.add_option("--delta", delta, "Local-search swap threshold");
  auto* mc_opt = app.add_option("--mc-samples", mc_samples,
                                "Fading samples for rates and AF");
  auto* verify_opt = app.add_option("--verify-frames", verify_frames,
                                    "Slot-level frames per solution (0 = off)");
  auto* slots_opt = app.add_option("--slots", slots, "Slots per verification frame");
  app.add_option("--out", out, "Output directory");
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  scenario_opt->excludes(instance_opt);
  for (auto* o : {scenario_opt, instance_opt, alpha_opt, algos_opt, seeds_opt,
                  delta_opt, mc_opt, verify_opt, slots_opt}) {
    manifest_opt->excludes(o);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigError;
  }

  try {
    hetnet::ExperimentSpec spec;
    if (!manifest.empty()) {
      spec = hetnet::SpecFromManifest(ReadFile(manifest));
    } else {
      if (scenario == "default") {
        spec.scenario = hetnet::ScenarioConfig{};
      } else if (!scenario.empty()) {
        spec.scenario = hetnet::LoadScenarioConfig(scenario);
      } else if (!instance.empty()) {
        spec.instance = hetnet::LoadInstance(instance);
      } else {
        spec.scenario = hetnet::ScenarioConfig{};
      }
      spec.alphas = alphas;
      spec.algorithms = algos;
      spec.seeds = seeds;
      spec.delta = delta;
      spec.mc_samples = mc_samples;
      spec.verify_frames = verify_frames;
      spec.slots_per_frame = slots;
    }
    spec.max_threads = threads;
    spec.Validate();
    const hetnet::ExperimentReport report = hetnet::RunExperiment(spec);
    hetnet::WriteExperiment(spec, report, out);
    hetnet::WriteTableCsv(report, std::cout);
    return 0;
  } catch (const hetnet::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const hetnet::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const hetnet::Error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
