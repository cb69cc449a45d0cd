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
// Closed-form activation-fraction oracle shared by the AF tests and the
// acceptance run.

#ifndef HETNET_TESTS_AF_ORACLE_H_
#define HETNET_TESTS_AF_ORACLE_H_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hetnet/association.h"
#include "hetnet/model.h"
#include "test_util.h"

namespace hetnet::testing {

// Random slow gains; user k is placed on its strongest TP. Every TP gets at
// least one user when k >= b.
struct Case {
  ChannelGains gains;
  Association assoc;
  UtilityConfig util{1.0, {1.0}};
};

inline Case RandomCase(TestRng& rng, int k, int b, double alpha) {
  Eigen::MatrixXd m(k, b);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < b; ++j) {
      m(i, j) = std::exp(rng.Uniform(std::log(0.3), std::log(40.0)));
    }
  }
  std::vector<int> tp(k);
  for (int i = 0; i < k; ++i) {
    if (i < b) {
      tp[i] = i;
    } else {
      Eigen::Index best;
      m.row(i).maxCoeff(&best);
      tp[i] = static_cast<int>(best);
    }
  }
  ChannelGains g;
  g.slow_gain = m;
  return {g, Association::FromTps(tp, b),
          UtilityConfig(alpha, testing::RandomWeights(rng, k))};
}

// Oracle: closed-form rates (no fading) and g from the definition.
inline double OracleG(const Case& c, const std::vector<double>& rho) {
  const int num_tps = c.gains.num_tps();
  const double alpha = c.util.alpha();
  std::vector<double> psi(num_tps, 0.0), wsum(num_tps, 0.0);
  std::vector<int> count(num_tps, 0);
  double g = 0.0;
  for (int k = 0; k < c.gains.num_users(); ++k) {
    const int b = c.assoc.tp_of(k);
    double interference = 0.0;
    for (int j = 0; j < num_tps; ++j) {
      if (j != b) interference += c.gains.slow_gain(k, j) * rho[j];
    }
    const double r =
        rho[b] * std::log(1.0 + c.gains.slow_gain(k, b) / (1.0 + interference));
    const double w = c.util.weight(k);
    ++count[b];
    if (alpha == 1.0) {
      g += w * std::log(w * r);
      wsum[b] += w;
    } else {
      const double wt = std::pow(w / std::abs(alpha - 1.0), 1.0 / alpha);
      psi[b] += wt * std::pow(r, 1.0 / alpha - 1.0);
    }
  }
  for (int b = 0; b < num_tps; ++b) {
    if (count[b] == 0) continue;
    g += alpha == 1.0 ? -wsum[b] * std::log(wsum[b]) : std::pow(psi[b], alpha);
  }
  return g;
}

// Best g over a uniform grid of rho in [lo, 1]^2.
inline double GridOptimum(const Case& c, int steps, double lo = 1e-3) {
  const bool maximize = c.util.alpha() <= 1.0;
  double best = maximize ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps; ++j) {
      const double r0 = lo + (1.0 - lo) * i / steps;
      const double r1 = lo + (1.0 - lo) * j / steps;
      const double g = OracleG(c, {r0, r1});
      best = maximize ? std::max(best, g) : std::min(best, g);
    }
  }
  return best;
}

}  // namespace hetnet::testing

#endif  // HETNET_TESTS_AF_ORACLE_H_
