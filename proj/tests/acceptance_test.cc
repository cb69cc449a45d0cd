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
// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "af_oracle.h"
#include "hetnet/afopt.h"
#include "hetnet/distsim.h"
#include "hetnet/experiment.h"
#include "hetnet/gls.h"
#include "hetnet/joint.h"
#include "hetnet/slotsim.h"
#include "test_util.h"

namespace hetnet {
namespace {

using testing::TestRng;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double Since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string Fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. Greedy and local-search guarantees against exhaustive search.
Outcome GreedyGaps() {
  const auto t0 = Clock::now();
  TestRng rng(1001);
  int checks = 0, violations = 0;
  std::string first;
  auto check = [&](bool ok, const std::string& what) {
    ++checks;
    if (!ok) {
      ++violations;
      if (first.empty()) first = what;
    }
  };
  for (int inst = 0; inst < 100; ++inst) {
    const int k = rng.Int(4, 8), b = rng.Int(2, 3);
    for (double alpha : {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 4.0}) {
      const SetFunction fn = testing::RandomSetFunction(rng, k, b, alpha);
      const double opt = testing::EnumerateOptimum(fn).best;
      const GlsResult gls = RunGls(fn, GlsConfig{});
      const double g = testing::DirectG(fn, gls.greedy.association.tp_of_user());
      const double eps = 1e-12 * std::max(1.0, std::abs(opt));
      const std::string tag =
          "instance " + std::to_string(inst) + " alpha " + Fmt("%g", alpha);
      if (alpha < 1.0) {
        check(g >= opt / 2.0 - eps, tag + " greedy half");
      } else if (alpha == 1.0) {
        check(g >= opt - 2.0 * std::log(2.0) - eps, tag + " greedy 2ln2");
      } else if (alpha <= 1.5) {
        check((3.0 - std::pow(2.0, alpha)) * g <= opt + eps, tag + " greedy ratio");
      }
      if (alpha == 0.5 || alpha == 1.0 || alpha == 2.0 || alpha == 4.0) {
        const BoundCertificate c = LocalSearchBound(
            fn, gls.association(), GlsConfig{}, gls.local_search.exit);
        check(c.applies && c.Holds(opt), tag + " local search certificate");
      }
    }
  }
  const double secs = Since(t0);
  Outcome o;
  o.pass = violations == 0 && secs < 60.0;
  o.detail = std::to_string(checks) + " checks, " + std::to_string(violations) +
             " violations, " + Fmt("%.1f s", secs);
  if (!first.empty()) o.detail += ", first: " + first;
  return o;
}

// 2. Distributed greedy equals restricted greedy on its induced order.
Outcome DistributedGreedyEquivalence() {
  TestRng rng(1002);
  const std::vector<double> alphas = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 4.0};
  int mismatches = 0, bound_fail = 0, bound_checks = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const double alpha = alphas[inst % alphas.size()];
    const int k = rng.Int(1, 20), b = rng.Int(1, 5);
    const SetFunction fn = testing::RandomSetFunction(rng, k, b, alpha);
    DistGreedyConfig cfg;
    cfg.order = inst % 2 ? ArrivalOrder::kSeededShuffle : ArrivalOrder::kAscendingUserId;
    cfg.seed = 5000 + inst;
    const auto [a, trace] = DistributedGreedy(fn, cfg);
    const std::vector<int> pi = InducedOrdering(trace);
    if (!(RestrictedGreedy(fn, pi) == a)) ++mismatches;
  }
  // Criterion-1 bounds on enumerable instances.
  for (int inst = 0; inst < 100; ++inst) {
    const double alpha = alphas[inst % 6];
    const int k = rng.Int(4, 8), b = rng.Int(2, 3);
    const SetFunction fn = testing::RandomSetFunction(rng, k, b, alpha);
    const Association a = DistributedGreedy(fn).first;
    ++bound_checks;
    if (!GreedyBound(fn, a).Holds(testing::EnumerateOptimum(fn).best)) ++bound_fail;
  }
  Outcome o;
  o.pass = mismatches == 0 && bound_fail == 0;
  o.detail = std::to_string(mismatches) + "/100 mismatches, " +
             std::to_string(bound_fail) + "/" + std::to_string(bound_checks) +
             " bound violations";
  return o;
}

// 3. Distributed local search reaches an absorbing state.
Outcome DistributedLsAbsorption() {
  TestRng rng(1003);
  const std::vector<double> alphas = {0.5, 1.0, 2.0, 4.0};
  int timeouts = 0, cert_fail = 0;
  for (int inst = 0; inst < 100; ++inst) {
    SetFunction fn = testing::CollisionInstance();
    Association start = Association::FromTps({0, 0}, 3);
    if (inst > 0) {
      const int k = rng.Int(2, 8), b = rng.Int(2, 3);
      fn = testing::RandomSetFunction(rng, k, b, alphas[inst % 4]);
      std::vector<int> tp(k);
      for (int& t : tp) t = rng.Int(0, b - 1);
      start = Association::FromTps(tp, b);
    }
    DistLsConfig cfg;
    cfg.accept_probability = 0.5;
    cfg.max_windows = 10 * fn.num_users();
    cfg.rng_seed = 7000 + inst;
    const auto [a, trace] = DistributedLocalSearch(fn, start, cfg);
    if (!trace.converged) {
      ++timeouts;
      continue;
    }
    const double opt = testing::EnumerateOptimum(fn).best;
    if (!LocalSearchBound(fn, a, GlsConfig{}).Holds(opt)) ++cert_fail;
  }
  Outcome o;
  o.pass = timeouts == 0 && cert_fail == 0;
  o.detail = std::to_string(timeouts) + " timeouts, " + std::to_string(cert_fail) +
             " certificate failures over 100 instances";
  return o;
}

// 4. AF histories monotone and near a grid optimum.
Outcome AfMonotone() {
  TestRng rng(1004);
  double af_secs = 0.0, worst_step = 0.0, worst_grid = 0.0;
  int bad_steps = 0, grid_fail = 0, grid_cases = 0;
  for (double alpha : {0.5, 1.0, 3.0}) {
    for (int inst = 0; inst < 50; ++inst) {
      const int b = inst % 2 ? 2 : rng.Int(2, 4);
      const testing::Case c = testing::RandomCase(rng, rng.Int(b, 8), b, alpha);
      const auto t0 = Clock::now();
      const AfResult r = OptimizeAf(c.assoc, c.gains, c.util, AfConfig());
      af_secs += Since(t0);
      for (size_t i = 1; i < r.raw_history.size(); ++i) {
        const double d = r.raw_history[i] - r.raw_history[i - 1];
        const double worse = (r.maximize ? -d : d) /
                             std::max(1.0, std::abs(r.raw_history[i - 1]));
        worst_step = std::max(worst_step, worse);
        if (worse > 1e-9) ++bad_steps;
      }
      if (b == 2) {
        ++grid_cases;
        const double grid = testing::GridOptimum(c, 400);
        const double got = testing::OracleG(c, r.rho.rho);
        const double short_by = (r.maximize ? grid - got : got - grid) / std::abs(grid);
        worst_grid = std::max(worst_grid, short_by);
        if (short_by > 0.01) ++grid_fail;
      }
    }
  }
  Outcome o;
  o.pass = bad_steps == 0 && grid_fail == 0 && af_secs < 30.0;
  o.detail = "150 runs, " + std::to_string(bad_steps) + " non-monotone steps (worst " +
             Fmt("%.1e", worst_step) + "), " + std::to_string(grid_fail) + "/" +
             std::to_string(grid_cases) + " beyond 1% of grid (worst " +
             Fmt("%.2e", worst_grid) + "), AF time " + Fmt("%.1f s", af_secs);
  return o;
}

// 5. MMSE identity and MC rate consistency.
Outcome MmseIdentity() {
  TestRng rng(1005);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double beta = rng.Exponential() * std::exp(rng.Uniform(-3.0, 5.0));
    const double in = rng.Exponential() * std::exp(rng.Uniform(-3.0, 3.0));
    const MmseSample m = MmseClosedForm(beta, in);
    worst = std::max(worst, std::abs(1.0 - m.s * m.mse + std::log(m.s) -
                                     std::log1p(m.sinr)));
  }
  // rho_b ln s on independent draws against the library conservative rate.
  Eigen::MatrixXd m(3, 3);
  m << 5.0, 2.0, 0.7, 0.4, 9.0, 3.0, 1.5, 0.8, 6.0;
  ChannelGains g;
  g.slow_gain = m;
  g.fading_model = FadingModel::kRayleighUnit;
  const ActivationVector rho{{0.8, 0.6, 0.3}};
  std::mt19937 eng(77);
  std::exponential_distribution<double> ex(1.0);
  int misses = 0;
  double worst_z = 0.0;
  for (int k = 0; k < 3; ++k) {
    const int b = k;
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int s = 0; s < n; ++s) {
      double own = 0.0, interference = 0.0;
      for (int j = 0; j < 3; ++j) {
        const double p = m(k, j) * ex(eng);
        if (j == b) own = p; else interference += p * rho[j];
      }
      const double v = rho[b] * std::log(MmseClosedForm(own, interference).s);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    const int lib_n = 200000;
    const double lib = ConservativeRate(g, rho, k, b, lib_n, 5);
    const double z = std::abs(mean - lib) / (se * std::sqrt(2.0));
    worst_z = std::max(worst_z, z);
    if (z > 3.0) ++misses;
  }
  Outcome o;
  o.pass = worst <= 1e-12 && misses == 0;
  o.detail = "worst identity error " + Fmt("%.2e", worst) + " on 1e5 samples, " +
             "rate z-scores max " + Fmt("%.2f", worst_z);
  return o;
}

// 6. Distributed AF matches the centralized solution.
Outcome DistributedAf() {
  TestRng rng(1006);
  double worst_rho = 0.0, worst_gap = 0.0;
  int fails = 0, runs = 0;
  for (double alpha : {0.5, 1.0, 3.0}) {
    for (int trial = 0; trial < 4; ++trial) {
      const int b = 2 + trial % 2;
      const testing::Case c = testing::RandomCase(rng, rng.Int(b, 7), b, alpha);
      const AfResult central = OptimizeAf(c.assoc, c.gains, c.util, AfConfig());
      const DistAfResult d =
          OptimizeAfDistributed(c.assoc, c.gains, c.util, DistAfConfig());
      double diff = 0.0;
      for (int j = 0; j < b; ++j) {
        diff = std::max(diff, std::abs(d.af.rho[j] - central.rho[j]));
      }
      worst_rho = std::max(worst_rho, diff);
      worst_gap = std::max(worst_gap, d.final_consensus_gap);
      ++runs;
      if (diff > 1e-3 || !(d.final_consensus_gap < 1e-4)) ++fails;
    }
  }
  Outcome o;
  o.pass = fails == 0;
  o.detail = std::to_string(fails) + "/" + std::to_string(runs) +
             " failures, max rho diff " + Fmt("%.2e", worst_rho) +
             ", max consensus gap " + Fmt("%.2e", worst_gap);
  return o;
}

// 7. Frame-averaged round-robin rates against conservative rates.
Outcome Conservativeness() {
  TestRng rng(1007);
  const int k = 20, b = 4;
  Eigen::MatrixXd m(k, b);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < b; ++j) m(i, j) = std::exp(rng.Uniform(std::log(0.3), std::log(40.0)));
  }
  ChannelGains g;
  g.slow_gain = m;
  g.fading_model = FadingModel::kRayleighUnit;
  std::vector<int> tp(k);
  for (int i = 0; i < k; ++i) {
    if (i < b) {
      tp[i] = i;
    } else {
      m.row(i).maxCoeff(&tp[i]);
    }
  }
  ActivationVector rho;
  for (int j = 0; j < b; ++j) rho.rho.push_back(rng.Uniform(0.3, 1.0));
  SlotSimConfig cfg;
  cfg.frames = 30;
  cfg.mc_samples = 50000;
  const VerifyReport r = VerifySolution(Association::FromTps(tp, b), rho, g,
                                        UtilityConfig::Uniform(1.0, k), 1007, cfg);
  int below = 0;
  double min_z = 1e300;
  for (int i = 0; i < k; ++i) {
    const Eigen::VectorXd x = r.rr_frames.col(i);
    const double se = std::sqrt((x.array() - x.mean()).square().sum() /
                                (x.size() - 1) / x.size());
    const double z = (x.mean() - r.conservative_rate[i]) / se;
    min_z = std::min(min_z, z);
    if (z < -3.0) ++below;
  }
  Outcome o;
  o.pass = below == 0;
  o.detail = "20 links x 30 frames, " + std::to_string(below) +
             " links below 3 sigma, min z " + Fmt("%.2f", min_z);
  return o;
}

// 8. Directions on the default scenario.
Outcome DefaultScenarioDirections() {
  ExperimentSpec spec;
  spec.scenario = ScenarioConfig{};
  spec.algorithms = {"gls", "ru", "msa"};
  std::vector<std::string> fails;
  std::string info;
  for (double alpha : {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0}) {
    const CellResult c = RunCell(spec, alpha, 1);
    const AlgorithmResult& gls = *c.Find("gls");
    const AlgorithmResult& ru = *c.Find("ru");
    const AlgorithmResult& msa = *c.Find("msa");
    const std::string a = Fmt("%g", alpha);
    const bool ru_ok = alpha <= 1.0 ? ru.bound_value >= gls.g : ru.bound_value <= gls.g;
    if (!ru_ok) fails.push_back("RU side at alpha " + a);
    const bool msa_ok = alpha <= 1.0 ? gls.score >= msa.score : gls.g <= msa.g;
    if (!msa_ok) fails.push_back("GLS vs MSA at alpha " + a);
  }
  ExperimentSpec joint = spec;
  joint.algorithms = {"gls", "msa", "joint-gls-af"};
  joint.verify_frames = 1;
  for (double alpha : {0.5, 3.0}) {
    const CellResult c = RunCell(joint, alpha, 1);
    const std::string a = Fmt("%g", alpha);
    const double gls = c.Find("gls")->score;
    const double ja = c.Find("joint-gls-af")->score;
    if (!(ja >= gls)) fails.push_back("joint vs GLS at alpha " + a);
    double grad_joint = 0.0, grad_msa = 0.0;
    for (const VerifyRow& v : c.verify) {
      if (v.algorithm == "joint-gls-af") grad_joint = v.utility_actual_gradient;
      if (v.algorithm == "msa") grad_msa = v.utility_actual_gradient;
    }
    if (!(grad_joint >= grad_msa)) fails.push_back("gradient joint vs MSA at alpha " + a);
    info += " alpha " + a + ": joint " + Fmt("%.4g", ja) + " vs GLS " + Fmt("%.4g", gls) +
            ", gradient joint " + Fmt("%.4g", grad_joint) + " vs MSA " +
            Fmt("%.4g", grad_msa) + ";";
  }
  Outcome o;
  o.pass = fails.empty();
  o.detail = std::to_string(fails.size()) + " failed directions;" + info;
  for (const std::string& f : fails) o.detail += " [" + f + "]";
  return o;
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// 9. A rerun from the manifest reproduces every CSV byte for byte.
Outcome Determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::path(HETNET_ACCEPT_DIR);
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string cli = HETNET_CLI;
  const std::string first =
      cli + " --scenario default --alpha 2,3 --seeds 1,2"
            " --algos greedy,gls,dg,dls,ru,rra,msa,joint-gls-af,joint-ra-af"
            " --verify-frames 1 --slots 500 --out " + (root / "a").string() +
            " > " + (root / "a.log").string();
  const std::string second = cli + " --manifest " + (root / "a" / "manifest.json").string() +
                             " --out " + (root / "b").string() + " > " +
                             (root / "b.log").string();
  Outcome o;
  if (std::system(first.c_str()) != 0 || std::system(second.c_str()) != 0) {
    o.pass = false;
    o.detail = "cli run failed";
    return o;
  }
  int same = 0, differ = 0;
  for (const char* f : {"results.csv", "table.csv", "history.csv", "verify.csv"}) {
    const std::string x = Slurp(root / "a" / f), y = Slurp(root / "b" / f);
    if (!x.empty() && x == y) ++same; else ++differ;
  }
  o.pass = differ == 0;
  o.detail = std::to_string(same) + "/4 CSV files identical after rerun";
  return o;
}

}  // namespace
}  // namespace hetnet

int main() {
  using hetnet::Outcome;
  const std::vector<std::function<Outcome()>> criteria = {
      hetnet::GreedyGaps,           hetnet::DistributedGreedyEquivalence,
      hetnet::DistributedLsAbsorption, hetnet::AfMonotone,
      hetnet::MmseIdentity,         hetnet::DistributedAf,
      hetnet::Conservativeness,     hetnet::DefaultScenarioDirections,
      hetnet::Determinism};
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("criterion %zu: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
