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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <thread>

#include "hetnet/distsim.h"
#include "hetnet/error.h"
#include "hetnet/setfn.h"
#include "hetnet/slotsim.h"
#include "json.hpp"

#ifndef HETNET_GIT_DESCRIBE
#define HETNET_GIT_DESCRIBE "unknown"
#endif

namespace hetnet {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool Wants(const ExperimentSpec& spec, const std::string& name) {
  return std::find(spec.algorithms.begin(), spec.algorithms.end(), name) !=
         spec.algorithms.end();
}

// Tighter of the GLS certificates that apply.
void PickBound(const std::vector<BoundCertificate>& certs, bool maximize,
               AlgorithmResult& r) {
  for (const BoundCertificate& c : certs) {
    if (!c.applies) continue;
    const bool tighter = r.bound_kind.empty() ||
                         (maximize ? c.bound_value < r.bound_value
                                   : c.bound_value > r.bound_value);
    if (tighter) {
      r.bound_kind = ToString(c.kind);
      r.bound_value = c.bound_value;
    }
  }
}

AlgorithmResult FromAssociation(const std::string& name, const SetFunction& fn,
                                const Association& assoc, int num_tps) {
  AlgorithmResult r;
  r.algorithm = name;
  r.association = assoc;
  r.rho = ActivationVector::Ones(num_tps);
  r.g = fn.Value(assoc);
  r.score = Score(fn, assoc);
  return r;
}

AlgorithmResult FromJoint(const std::string& name, const JointResult& j,
                          double alpha) {
  AlgorithmResult r;
  r.algorithm = name;
  r.association = j.association;
  r.rho = j.rho;
  r.score = j.score;
  // g at the final rho.
  r.g = alpha <= 1.0 ? j.score : -j.score;
  r.rounds = j.rounds;
  r.converged = j.converged;
  r.history = j.history;
  return r;
}

json ScenarioJson(const ScenarioConfig& cfg) {
  return json::parse(SerializeScenarioConfig(cfg));
}

}  // namespace

const std::vector<std::string>& KnownAlgorithms() {
  static const std::vector<std::string> names = {
      "greedy", "gls", "dg", "dls", "ru", "rra", "msa", "joint-gls-af",
      "joint-ra-af"};
  return names;
}

void ExperimentSpec::Validate() const {
  if (scenario.has_value() == instance.has_value()) {
    throw ValidationError("give exactly one of a scenario and an instance");
  }
  if (alphas.empty()) throw ValidationError("alpha list is empty");
  for (double a : alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw ValidationError("alpha must be positive, got " + Num(a));
    }
  }
  if (algorithms.empty()) throw ValidationError("algorithm list is empty");
  for (const std::string& name : algorithms) {
    const auto& known = KnownAlgorithms();
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw ValidationError("unknown algorithm '" + name + "'");
    }
  }
  if (seeds.empty()) throw ValidationError("seed list is empty");
  if (!(delta >= 0.0)) throw ValidationError("delta must be >= 0");
  if (mc_samples < 1) throw ValidationError("mc_samples must be >= 1");
  if (verify_frames < 0) throw ValidationError("verify_frames must be >= 0");
  if (slots_per_frame < 1) throw ValidationError("slots_per_frame must be >= 1");
  if (scenario) scenario->Validate();
  if (instance) instance->gains.Validate();
}

const AlgorithmResult* CellResult::Find(const std::string& algorithm) const {
  for (const AlgorithmResult& r : results) {
    if (r.algorithm == algorithm) return &r;
  }
  return nullptr;
}

Instance CellInstance(const ExperimentSpec& spec, double alpha, uint64_t seed) {
  if (spec.scenario) {
    ScenarioConfig cfg = *spec.scenario;
    cfg.rng_seed = seed;
    return GenerateInstance(cfg, alpha);
  }
  Instance inst = *spec.instance;
  inst.utility = inst.utility.WithAlpha(alpha);
  return inst;
}

CellResult RunCell(const ExperimentSpec& spec, double alpha, uint64_t seed) {
  const Instance inst = CellInstance(spec, alpha, seed);
  const ChannelGains& gains = inst.gains;
  const UtilityConfig& util = inst.utility;
  const int nb = gains.num_tps();
  const bool fading = gains.fading_model != FadingModel::kNone;
  const RateMatrix rates = ComputeRateMatrix(
      gains, ActivationVector::Ones(nb), fading ? spec.mc_samples : 0, seed);
  const SetFunction fn(rates, util);

  CellResult cell;
  cell.alpha = alpha;
  cell.seed = seed;
  GlsConfig gls_cfg;
  gls_cfg.delta = spec.delta;
  AfConfig af_cfg;
  af_cfg.mc_samples = spec.mc_samples;
  af_cfg.seed = seed;

  std::optional<GlsResult> gls;
  double gls_seconds = 0.0;
  if (Wants(spec, "greedy") || Wants(spec, "gls")) {
    const auto t0 = Clock::now();
    gls = RunGls(fn, gls_cfg);
    gls_seconds = Seconds(t0);
  }
  std::optional<RelaxedAssociation> rel;
  double rel_seconds = 0.0;
  if (Wants(spec, "ru") || Wants(spec, "rra")) {
    const auto t0 = Clock::now();
    rel = RelaxedAssociationSolve(rates, util);
    rel_seconds = Seconds(t0);
  }
  std::optional<Association> dg;
  double dg_seconds = 0.0;
  if (Wants(spec, "dg") || Wants(spec, "dls")) {
    const auto t0 = Clock::now();
    DistGreedyConfig cfg;
    cfg.seed = seed;
    dg = DistributedGreedy(fn, cfg).first;
    dg_seconds = Seconds(t0);
  }

  for (const std::string& name : KnownAlgorithms()) {
    if (!Wants(spec, name)) continue;
    const auto t0 = Clock::now();
    AlgorithmResult r;
    if (name == "greedy") {
      r = FromAssociation(name, fn, gls->greedy.association, nb);
      const BoundCertificate c = GreedyBound(fn, gls->greedy.association);
      if (c.applies) {
        r.bound_kind = ToString(c.kind);
        r.bound_value = c.bound_value;
      }
      r.seconds = gls_seconds;
    } else if (name == "gls") {
      r = FromAssociation(name, fn, gls->association(), nb);
      r.ls_iterations = gls->local_search.swaps;
      r.converged = gls->local_search.exit == LsExit::kFixedPoint;
      PickBound(gls->certificates, fn.maximize(), r);
      r.seconds = gls_seconds;
    } else if (name == "dg") {
      r = FromAssociation(name, fn, *dg, nb);
      r.seconds = dg_seconds;
    } else if (name == "dls") {
      DistLsConfig cfg;
      cfg.delta = spec.delta;
      cfg.rng_seed = seed;
      cfg.max_windows = 10 * gains.num_users();
      const auto [assoc, trace] = DistributedLocalSearch(fn, *dg, cfg);
      r = FromAssociation(name, fn, assoc, nb);
      r.converged = trace.converged;
      const BoundCertificate c = LocalSearchBound(
          fn, assoc, gls_cfg,
          trace.converged ? LsExit::kFixedPoint : LsExit::kIterationCap);
      if (c.applies) {
        r.bound_kind = ToString(c.kind);
        r.bound_value = c.bound_value;
      }
      r.seconds = dg_seconds + Seconds(t0);
    } else if (name == "ru") {
      r.algorithm = name;
      r.g = rel->value;
      r.score = fn.maximize() ? rel->value : -rel->value;
      r.converged = rel->converged;
      r.rounds = rel->sweeps;
      r.bound_kind = "relaxation";
      r.bound_value = rel->bound;
      r.rho = ActivationVector::Ones(nb);
      r.seconds = rel_seconds;
    } else if (name == "rra") {
      r = FromAssociation(name, fn, RoundAssociation(rel->x), nb);
      r.seconds = rel_seconds + Seconds(t0);
    } else if (name == "msa") {
      r = FromAssociation(name, fn, MaxSnrAssociation(gains), nb);
      r.seconds = Seconds(t0);
    } else if (name == "joint-gls-af") {
      r = FromJoint(name, JointGlsAf(gains, util, gls_cfg, af_cfg, {}), alpha);
      r.seconds = Seconds(t0);
    } else if (name == "joint-ra-af") {
      r = FromJoint(name, JointRaAf(gains, util, af_cfg, {}), alpha);
      r.seconds = Seconds(t0);
    }
    cell.results.push_back(std::move(r));
  }

  if (spec.verify_frames > 0) {
    // Slot level always adds Rayleigh fast fading on top of the slow gains.
    ChannelGains faded = gains;
    faded.fading_model = FadingModel::kRayleighUnit;
    SlotSimConfig cfg;
    cfg.frames = spec.verify_frames;
    cfg.slots_per_frame = spec.slots_per_frame;
    cfg.mc_samples = spec.mc_samples;
    for (const AlgorithmResult& r : cell.results) {
      if (r.algorithm == "ru") continue;
      const VerifyReport v =
          VerifySolution(r.association, r.rho, faded, util, seed, cfg);
      cell.verify.push_back({r.algorithm, v.utility_conservative,
                             v.utility_actual_rr, v.utility_actual_gradient});
    }
  }
  return cell;
}

ExperimentReport RunExperiment(const ExperimentSpec& spec) {
  spec.Validate();
  std::vector<std::pair<double, uint64_t>> grid;
  for (double a : spec.alphas) {
    for (uint64_t s : spec.seeds) grid.emplace_back(a, s);
  }
  ExperimentReport report;
  report.cells.resize(grid.size());
  int threads = spec.max_threads > 0
                    ? spec.max_threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(grid.size()));
  std::vector<std::future<void>> jobs;
  for (int w = 0; w < threads; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (size_t i = w; i < grid.size(); i += threads) {
        report.cells[i] = RunCell(spec, grid[i].first, grid[i].second);
      }
    }));
  }
  // get() rethrows the first failure after every worker is done.
  for (auto& j : jobs) j.wait();
  for (auto& j : jobs) j.get();
  return report;
}

void WriteResultsCsv(const ExperimentReport& report, std::ostream& out) {
  out << "alpha,seed,algorithm,score,g,ls_iterations,rounds,converged,"
         "bound_kind,bound_value\n";
  for (const CellResult& c : report.cells) {
    for (const AlgorithmResult& r : c.results) {
      out << Num(c.alpha) << ',' << c.seed << ',' << r.algorithm << ','
          << Num(r.score) << ',' << Num(r.g) << ',';
      if (r.ls_iterations >= 0) out << r.ls_iterations;
      out << ',';
      if (r.rounds >= 0) out << r.rounds;
      out << ',' << (r.converged ? 1 : 0) << ',' << r.bound_kind << ',';
      if (!r.bound_kind.empty()) out << Num(r.bound_value);
      out << '\n';
    }
  }
}

void WriteTableCsv(const ExperimentReport& report, std::ostream& out) {
  static const std::vector<std::pair<std::string, std::string>> columns = {
      {"Greedy", "greedy"}, {"GLS", "gls"}, {"RU", "ru"}, {"RRA", "rra"},
      {"MSA", "msa"},       {"DG", "dg"}};
  out << "alpha,seed";
  for (const auto& [header, name] : columns) out << ',' << header;
  out << ",LSI\n";
  for (const CellResult& c : report.cells) {
    out << Num(c.alpha) << ',' << c.seed;
    for (const auto& [header, name] : columns) {
      out << ',';
      if (const AlgorithmResult* r = c.Find(name)) out << Num(r->score);
    }
    out << ',';
    if (const AlgorithmResult* r = c.Find("gls")) out << r->ls_iterations;
    out << '\n';
  }
}

void WriteHistoryCsv(const ExperimentReport& report, std::ostream& out) {
  out << "alpha,seed,algorithm,round,stage,score,rounded_score\n";
  for (const CellResult& c : report.cells) {
    for (const AlgorithmResult& r : c.results) {
      for (const JointRecord& h : r.history) {
        out << Num(c.alpha) << ',' << c.seed << ',' << r.algorithm << ','
            << h.round << ',' << h.stage << ',' << Num(h.score) << ','
            << (r.algorithm == "joint-ra-af" ? Num(h.rounded_score) : "")
            << '\n';
      }
    }
  }
}

void WriteVerifyCsv(const ExperimentReport& report, std::ostream& out) {
  out << "alpha,seed,algorithm,utility_conservative,utility_actual_rr,"
         "utility_actual_gradient\n";
  for (const CellResult& c : report.cells) {
    for (const VerifyRow& v : c.verify) {
      out << Num(c.alpha) << ',' << c.seed << ',' << v.algorithm << ','
          << Num(v.utility_conservative) << ',' << Num(v.utility_actual_rr)
          << ',' << Num(v.utility_actual_gradient) << '\n';
    }
  }
}

std::string GitDescribe() { return HETNET_GIT_DESCRIBE; }

std::string ManifestJson(const ExperimentSpec& spec) {
  json j;
  j["git_describe"] = GitDescribe();
  if (spec.scenario) {
    j["scenario"] = ScenarioJson(*spec.scenario);
  } else {
    j["instance"] = json::parse(SerializeInstance(*spec.instance));
  }
  j["alphas"] = spec.alphas;
  j["algorithms"] = spec.algorithms;
  j["seeds"] = spec.seeds;
  j["delta"] = spec.delta;
  j["mc_samples"] = spec.mc_samples;
  j["verify_frames"] = spec.verify_frames;
  j["slots_per_frame"] = spec.slots_per_frame;
  return j.dump(2) + "\n";
}

ExperimentSpec SpecFromManifest(const std::string& json_text) {
  ExperimentSpec spec;
  try {
    const json j = json::parse(json_text);
    if (j.contains("scenario")) {
      spec.scenario = ParseScenarioConfig(j.at("scenario").dump());
    }
    if (j.contains("instance")) {
      spec.instance = ParseInstance(j.at("instance").dump());
    }
    spec.alphas = j.at("alphas").get<std::vector<double>>();
    spec.algorithms = j.at("algorithms").get<std::vector<std::string>>();
    spec.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    spec.delta = j.at("delta").get<double>();
    spec.mc_samples = j.at("mc_samples").get<int>();
    spec.verify_frames = j.at("verify_frames").get<int>();
    spec.slots_per_frame = j.at("slots_per_frame").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad manifest: ") + e.what());
  }
  spec.Validate();
  return spec;
}

void WriteExperiment(const ExperimentSpec& spec, const ExperimentReport& report,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, auto&& fill) {
    std::ofstream out(dir / name);
    if (!out) throw Error("cannot write " + (dir / name).string());
    fill(out);
  };
  write("results.csv", [&](std::ostream& o) { WriteResultsCsv(report, o); });
  write("table.csv", [&](std::ostream& o) { WriteTableCsv(report, o); });
  write("history.csv", [&](std::ostream& o) { WriteHistoryCsv(report, o); });
  if (spec.verify_frames > 0) {
    write("verify.csv", [&](std::ostream& o) { WriteVerifyCsv(report, o); });
  }
  write("manifest.json", [&](std::ostream& o) { o << ManifestJson(spec); });
  json timing = json::array();
  for (const CellResult& c : report.cells) {
    for (const AlgorithmResult& r : c.results) {
      timing.push_back({{"alpha", c.alpha},
                        {"seed", c.seed},
                        {"algorithm", r.algorithm},
                        {"seconds", r.seconds}});
    }
  }
  write("timing.json", [&](std::ostream& o) { o << timing.dump(2) << '\n'; });
}

}  // namespace hetnet
