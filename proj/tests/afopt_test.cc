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

#include "hetnet/afopt.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

#include "hetnet/error.h"
#include "af_oracle.h"
#include "test_util.h"

namespace hetnet {
namespace {

using testing::Case;
using testing::GridOptimum;
using testing::OracleG;
using testing::RandomCase;
using testing::TestRng;

ChannelGains Gains(const Eigen::MatrixXd& m,
                   FadingModel f = FadingModel::kNone) {
  ChannelGains g;
  g.slow_gain = m;
  g.fading_model = f;
  return g;
}

// Worsening of step i (positive means the objective moved the wrong way).
double Worsening(const AfResult& r, size_t i) {
  const double d = r.raw_history[i] - r.raw_history[i - 1];
  return r.maximize ? -d : d;
}

TEST(MmseTest, NoInterference) {
  const MmseSample m = MmseClosedForm(3.0, 0.0);
  EXPECT_NEAR(m.filter, std::sqrt(3.0) / 4.0, 1e-15);
  EXPECT_NEAR(m.mse, 0.25, 1e-15);
  EXPECT_NEAR(m.s, 4.0, 1e-15);
  EXPECT_NEAR(1.0 - m.s * m.mse + std::log(m.s), std::log(4.0), 1e-15);
}

TEST(MmseTest, OneInterferer) {
  const MmseSample m = MmseClosedForm(3.0, 2.0 * 0.5);
  EXPECT_NEAR(m.sinr, 1.5, 1e-15);
  EXPECT_NEAR(m.mse, 1.0 / 2.5, 1e-15);
  EXPECT_NEAR(m.s, 2.5, 1e-15);
}

TEST(MmseTest, MseMatchesItsDefinition) {
  // e(g) = (g sqrt(beta) - 1)^2 + g^2 (1 + I), minimized over g.
  TestRng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double beta = rng.Exponential() * 20.0;
    const double in = rng.Exponential() * 5.0;
    const MmseSample m = MmseClosedForm(beta, in);
    auto e = [&](double g) {
      return std::pow(g * std::sqrt(beta) - 1.0, 2) + g * g * (1.0 + in);
    };
    EXPECT_NEAR(e(m.filter), m.mse, 1e-12);
    EXPECT_LE(m.mse, e(m.filter * 1.001) + 1e-15);
    EXPECT_LE(m.mse, e(m.filter * 0.999) + 1e-15);
  }
}

TEST(MmseTest, IdentityOnRandomSamples) {
  TestRng rng(11);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double beta = rng.Exponential() * std::exp(rng.Uniform(-3.0, 5.0));
    const double in = rng.Exponential() * std::exp(rng.Uniform(-3.0, 3.0));
    const MmseSample m = MmseClosedForm(beta, in);
    worst = std::max(worst, std::abs(1.0 - m.s * m.mse + std::log(m.s) -
                                     std::log1p(m.sinr)));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(MmseUpdateTest, MeanLogSReproducesConservativeRate) {
  Eigen::MatrixXd m(2, 3);
  m << 5.0, 2.0, 0.7, 0.4, 9.0, 3.0;
  const ChannelGains g = Gains(m, FadingModel::kRayleighUnit);
  const Association a = Association::FromTps({0, 1}, 3);
  const ActivationVector rho{{0.8, 0.6, 0.3}};
  const int n = 4000;
  const FadingSamples fading = FadingSamples::Rayleigh(2, 3, n, 17);
  const AfState st = MmseUpdate(a, g, rho, fading);
  ASSERT_EQ(st.links.size(), 2u);
  for (const auto& l : st.links) {
    const double rate = ConservativeRate(g, rho, l.user, l.tp, n, 17);
    // Same samples: equal up to rounding.
    EXPECT_NEAR(rho[l.tp] * l.mean_log_s, rate, 1e-12);
    // Independent samples: within 3 standard errors.
    std::mt19937 eng(99 + l.user);
    std::exponential_distribution<double> ex(1.0);
    double sum = 0.0, sum2 = 0.0;
    for (int s = 0; s < 20000; ++s) {
      double in = 0.0;
      double own = 0.0;
      for (int b = 0; b < 3; ++b) {
        const double p = m(l.user, b) * ex(eng);
        if (b == l.tp) own = p; else in += p * rho[b];
      }
      const double v = rho[l.tp] * MmseClosedForm(own, in).s;
      sum += std::log(v / rho[l.tp]) * rho[l.tp];
      sum2 += std::pow(std::log(v / rho[l.tp]) * rho[l.tp], 2);
    }
    const double mean = sum / 20000;
    const double se = std::sqrt((sum2 / 20000 - mean * mean) / 20000);
    const double se_lib = se * std::sqrt(20000.0 / n);
    EXPECT_NEAR(rate, mean, 3.0 * std::hypot(se, se_lib));
  }
}

TEST(MmseUpdateTest, SurrogateIsTightAtCurrentRho) {
  TestRng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Case c = RandomCase(rng, 6, 3, 1.0);
    std::vector<double> rho = {rng.Uniform(0.1, 1.0), rng.Uniform(0.1, 1.0),
                               rng.Uniform(0.1, 1.0)};
    const AfState st = MmseUpdate(c.assoc, c.gains, ActivationVector{rho},
                                  FadingSamples());
    for (const auto& l : st.links) {
      double in = 0.0;
      for (int b = 0; b < 3; ++b) {
        if (b != l.tp) in += c.gains.slow_gain(l.user, b) * rho[b];
      }
      const double r = rho[l.tp] * std::log1p(c.gains.slow_gain(l.user, l.tp) / (1 + in));
      EXPECT_NEAR(l.Rate(rho), r, 1e-12);
      // Lower bound elsewhere.
      std::vector<double> other = {rng.Uniform(0.01, 1.0), rng.Uniform(0.01, 1.0),
                                   rng.Uniform(0.01, 1.0)};
      double in2 = 0.0;
      for (int b = 0; b < 3; ++b) {
        if (b != l.tp) in2 += c.gains.slow_gain(l.user, b) * other[b];
      }
      const double r2 =
          other[l.tp] * std::log1p(c.gains.slow_gain(l.user, l.tp) / (1 + in2));
      EXPECT_LE(l.Rate(other), r2 + 1e-12);
    }
  }
}

TEST(MmseUpdateTest, ServingTpAtZeroIsRejected) {
  Eigen::MatrixXd m(1, 2);
  m << 1.0, 1.0;
  EXPECT_THROW(MmseUpdate(Association::FromTps({0}, 2), Gains(m),
                          ActivationVector{{0.0, 1.0}}, FadingSamples()),
               ValidationError);
}

TEST(CondensationTest, ExactAtExpansionAndBelowElsewhere) {
  TestRng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.Int(1, 6);
    std::vector<double> at(n), x(n);
    for (int i = 0; i < n; ++i) {
      at[i] = std::exp(rng.Uniform(-5.0, 5.0));
      x[i] = std::exp(rng.Uniform(-5.0, 5.0));
    }
    double sum_at = 0.0, sum_x = 0.0;
    for (int i = 0; i < n; ++i) {
      sum_at += at[i];
      sum_x += x[i];
    }
    EXPECT_NEAR(CondensedValue(at, at), sum_at, 1e-12 * sum_at);
    EXPECT_LE(CondensedValue(at, x), sum_x * (1 + 1e-12));
  }
}

TEST(CondensationTest, WeightsSumToOne) {
  const std::vector<double> u = {1.0, 3.0};
  const auto d = CondensationWeights(u);
  EXPECT_DOUBLE_EQ(d[0], 0.25);
  EXPECT_DOUBLE_EQ(d[1], 0.75);
  const std::vector<double> bad = {1.0, 0.0};
  EXPECT_THROW(CondensationWeights(bad), SolverError);
}

class AfStepTest : public ::testing::TestWithParam<double> {};

TEST_P(AfStepTest, SingleTpGoesToOne) {
  Eigen::MatrixXd m(2, 1);
  m << 4.0, 1.5;
  const Association a = Association::FromTps({0, 0}, 1);
  const UtilityConfig u(GetParam(), {0.3, 0.7});
  const AfState st =
      MmseUpdate(a, Gains(m), ActivationVector{{0.2}}, FadingSamples());
  const AfStepResult r = AfStep(st, a, u, AfConfig());
  EXPECT_NEAR(r.rho[0], 1.0, 1e-6);
}

TEST_P(AfStepTest, SymmetricPairStaysSymmetric) {
  Eigen::MatrixXd m(2, 2);
  m << 10.0, 3.0, 3.0, 10.0;
  const Association a = Association::FromTps({0, 1}, 2);
  const UtilityConfig u(GetParam(), {0.5, 0.5});
  const AfResult r = OptimizeAf(a, Gains(m), u, AfConfig());
  EXPECT_NEAR(r.rho[0], r.rho[1], 1e-6);
}

TEST_P(AfStepTest, StepImprovesAndStaysBehindGrid) {
  TestRng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Case c = RandomCase(rng, 4, 2, GetParam());
    const ActivationVector start{{0.7, 0.7}};
    const AfState st = MmseUpdate(c.assoc, c.gains, start, FadingSamples());
    const AfStepResult r = AfStep(st, c.assoc, c.util, AfConfig());
    const double before = OracleG(c, start.rho);
    const double after = OracleG(c, r.rho.rho);
    const double grid = GridOptimum(c, 200);
    const double tol = 1e-9 * std::max(1.0, std::abs(before));
    if (c.util.alpha() <= 1.0) {
      EXPECT_GE(after, before - tol);
      EXPECT_LE(after, grid + 1e-6 * std::max(1.0, std::abs(grid)));
    } else {
      EXPECT_LE(after, before + tol);
      EXPECT_GE(after, grid - 1e-6 * std::max(1.0, std::abs(grid)));
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Alphas, AfStepTest,
                         ::testing::Values(0.5, 1.0, 3.0));

TEST(OptimizeAfTest, FixedPointWithoutInterference) {
  Eigen::MatrixXd m(3, 2);
  m << 5.0, 0.0, 2.0, 0.0, 0.0, 7.0;
  const Association a = Association::FromTps({0, 0, 1}, 2);
  for (double alpha : {0.5, 1.0, 3.0}) {
    const AfResult r =
        OptimizeAf(a, Gains(m), UtilityConfig::Uniform(alpha, 3), AfConfig());
    EXPECT_EQ(r.outer_iterations, 1) << alpha;
    EXPECT_EQ(r.rho[0], 1.0);
    EXPECT_EQ(r.rho[1], 1.0);
    EXPECT_TRUE(r.converged);
  }
}

TEST(OptimizeAfTest, IdleTpIsSwitchedOff) {
  Eigen::MatrixXd m(2, 3);
  m << 5.0, 1.0, 2.0, 1.0, 6.0, 2.0;
  const AfResult r = OptimizeAf(Association::FromTps({0, 1}, 3), Gains(m),
                                UtilityConfig::Uniform(1.0, 2), AfConfig());
  EXPECT_EQ(r.rho[2], 0.0);
}

TEST(OptimizeAfTest, MonotoneRawHistories) {
  TestRng rng(31);
  for (double alpha : {0.5, 1.0, 3.0}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Case c = RandomCase(rng, rng.Int(3, 8), rng.Int(2, 4), alpha);
      const AfResult r = OptimizeAf(c.assoc, c.gains, c.util, AfConfig());
      for (size_t i = 1; i < r.history.size(); ++i) {
        EXPECT_GT(r.maximize ? r.history[i] - r.history[i - 1]
                             : r.history[i - 1] - r.history[i],
                  0.0);
      }
      for (size_t i = 1; i < r.raw_history.size(); ++i) {
        EXPECT_LE(Worsening(r, i),
                  1e-9 * std::max(1.0, std::abs(r.raw_history[i - 1])))
            << "alpha " << alpha << " trial " << trial << " step " << i;
      }
    }
  }
}

TEST(OptimizeAfTest, NearGridOptimumOnTwoTps) {
  TestRng rng(41);
  for (double alpha : {0.5, 1.0, 3.0}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Case c = RandomCase(rng, 4, 2, alpha);
      const AfResult r = OptimizeAf(c.assoc, c.gains, c.util, AfConfig());
      const double grid = GridOptimum(c, 400);
      const double got = OracleG(c, r.rho.rho);
      EXPECT_NEAR(got, r.objective(), 1e-9 * std::max(1.0, std::abs(got)));
      if (r.maximize) {
        EXPECT_GE(got, grid - 0.01 * std::abs(grid)) << alpha << " " << trial;
      } else {
        EXPECT_LE(got, grid + 0.01 * std::abs(grid)) << alpha << " " << trial;
      }
    }
  }
}

TEST(OptimizeAfTest, FadingUsesFixedSampleSet) {
  Eigen::MatrixXd m(3, 2);
  m << 6.0, 2.0, 1.0, 5.0, 3.0, 3.5;
  const ChannelGains g = Gains(m, FadingModel::kRayleighUnit);
  const Association a = Association::FromTps({0, 1, 1}, 2);
  AfConfig cfg;
  cfg.mc_samples = 300;
  cfg.seed = 4;
  const AfResult r1 = OptimizeAf(a, g, UtilityConfig::Uniform(3.0, 3), cfg);
  const AfResult r2 = OptimizeAf(a, g, UtilityConfig::Uniform(3.0, 3), cfg);
  EXPECT_EQ(r1.raw_history, r2.raw_history);
  for (size_t i = 1; i < r1.raw_history.size(); ++i) {
    EXPECT_LE(Worsening(r1, i), 1e-9 * std::abs(r1.raw_history[i - 1]));
  }
  const FadingSamples f = AfSamples(g, cfg);
  EXPECT_DOUBLE_EQ(AfObjective(a, g, UtilityConfig::Uniform(3.0, 3), r1.rho, f),
                   r1.objective());
  cfg.mc_samples = 0;
  EXPECT_THROW(OptimizeAf(a, g, UtilityConfig::Uniform(3.0, 3), cfg),
               ValidationError);
}

TEST(OptimizeAfTest, ConfigValidation) {
  AfConfig c;
  c.outer_tol = 0.0;
  EXPECT_THROW(c.Validate(), ValidationError);
  c = AfConfig();
  c.rho_min = 1.0;
  EXPECT_THROW(c.Validate(), ValidationError);
  DistAfConfig d;
  d.penalty = -1.0;
  EXPECT_THROW(d.Validate(), ValidationError);
}

TEST(DistributedAfTest, SingleTpMatchesCentralized) {
  Eigen::MatrixXd m(2, 1);
  m << 4.0, 1.5;
  const Association a = Association::FromTps({0, 0}, 1);
  const UtilityConfig u(3.0, {0.3, 0.7});
  const DistAfResult d = OptimizeAfDistributed(a, Gains(m), u, DistAfConfig());
  const AfResult c = OptimizeAf(a, Gains(m), u, AfConfig());
  EXPECT_EQ(d.af.rho[0], c.rho[0]);
  EXPECT_TRUE(d.prices_converged);
}

TEST(DistributedAfTest, SymmetricPair) {
  Eigen::MatrixXd m(2, 2);
  m << 10.0, 3.0, 3.0, 10.0;
  const Association a = Association::FromTps({0, 1}, 2);
  const DistAfResult d = OptimizeAfDistributed(
      a, Gains(m), UtilityConfig::Uniform(1.0, 2), DistAfConfig());
  EXPECT_NEAR(d.af.rho[0], d.af.rho[1], 1e-6);
  EXPECT_LT(d.final_consensus_gap, 1e-4);
}

TEST(DistributedAfTest, MatchesCentralized) {
  TestRng rng(51);
  for (double alpha : {0.5, 1.0, 3.0}) {
    for (int trial = 0; trial < 4; ++trial) {
      const Case c = RandomCase(rng, 4 + trial, 2 + trial % 2, alpha);
      const AfResult central = OptimizeAf(c.assoc, c.gains, c.util, AfConfig());
      const DistAfResult d =
          OptimizeAfDistributed(c.assoc, c.gains, c.util, DistAfConfig());
      EXPECT_TRUE(d.prices_converged) << alpha << " " << trial;
      EXPECT_LT(d.final_consensus_gap, 1e-4);
      for (int b = 0; b < c.gains.num_tps(); ++b) {
        EXPECT_NEAR(d.af.rho[b], central.rho[b], 1e-3)
            << "alpha " << alpha << " trial " << trial << " tp " << b;
      }
    }
  }
}

TEST(DistributedAfTest, PriceHistoryCsv) {
  Eigen::MatrixXd m(2, 2);
  m << 10.0, 3.0, 2.0, 8.0;
  const DistAfResult d =
      OptimizeAfDistributed(Association::FromTps({0, 1}, 2), Gains(m),
                            UtilityConfig::Uniform(3.0, 2), DistAfConfig());
  const std::string path = ::testing::TempDir() + "/prices.csv";
  WritePriceHistoryCsv(path, d);
  std::ifstream f(path);
  std::string line;
  int rows = -1;
  while (std::getline(f, line)) ++rows;
  EXPECT_EQ(rows, static_cast<int>(d.price_history.size()));
  EXPECT_GT(rows, 0);
}

}  // namespace
}  // namespace hetnet
