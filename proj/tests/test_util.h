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

// Oracles and instance builders shared by the tests. Nothing here calls the
// optimizers under test.

#ifndef HETNET_TESTS_TEST_UTIL_H_
#define HETNET_TESTS_TEST_UTIL_H_

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "hetnet/association.h"
#include "hetnet/model.h"
#include "hetnet/rate.h"
#include "hetnet/setfn.h"

namespace hetnet::testing {

// std::mt19937 (32-bit) with <random> distributions: deliberately a
// different generator from the library's mt19937_64 based Rng.
class TestRng {
 public:
  explicit TestRng(uint32_t seed) : engine_(seed) {}
  double Uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  int Int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }
  double Exponential() {
    return std::exponential_distribution<double>(1.0)(engine_);
  }
  std::mt19937& engine() { return engine_; }

 private:
  std::mt19937 engine_;
};

inline Eigen::MatrixXd RandomTheta(TestRng& rng, int k, int b, double lo = 0.1,
                                   double hi = 3.0) {
  Eigen::MatrixXd t(k, b);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < b; ++j) t(i, j) = rng.Uniform(lo, hi);
  }
  return t;
}

inline std::vector<double> RandomWeights(TestRng& rng, int k) {
  std::vector<double> w(k);
  double sum = 0.0;
  for (double& v : w) {
    v = rng.Uniform(0.2, 1.0);
    sum += v;
  }
  for (double& v : w) v /= sum;
  // Put the rounding residue on the last weight.
  double head = 0.0;
  for (int i = 0; i + 1 < k; ++i) head += w[i];
  w[k - 1] = 1.0 - head;
  return w;
}

inline RateMatrix RandomRates(TestRng& rng, int k, int b, double lo = 0.05,
                              double hi = 4.0) {
  RateMatrix r;
  r.rate.resize(k, b);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < b; ++j) r.rate(i, j) = rng.Uniform(lo, hi);
  }
  return r;
}

// Set function for any alpha from random rates and weights.
inline SetFunction RandomSetFunction(TestRng& rng, int k, int b,
                                     double alpha) {
  if (alpha == 1.0) {
    return SetFunction(RandomRates(rng, k, b),
                       UtilityConfig(1.0, RandomWeights(rng, k)));
  }
  return SetFunction::FromTheta(RandomTheta(rng, k, b), alpha);
}

// Independent evaluation of g straight from the definition.
inline double DirectG(const SetFunction& fn, const std::vector<int>& tp_of) {
  const int num_tps = fn.num_tps();
  std::vector<double> load(num_tps, 0.0);
  std::vector<double> logs(num_tps, 0.0);
  std::vector<int> count(num_tps, 0);
  for (int k = 0; k < static_cast<int>(tp_of.size()); ++k) {
    const int b = tp_of[k];
    if (b < 0) continue;
    load[b] += fn.theta(k, b);
    logs[b] += fn.log_term(k, b);
    ++count[b];
  }
  double g = 0.0;
  for (int b = 0; b < num_tps; ++b) {
    if (count[b] == 0) continue;
    if (fn.alpha() == 1.0) {
      g += logs[b] - load[b] * std::log(load[b]);
    } else {
      g += std::pow(load[b], fn.alpha());
    }
  }
  return g;
}

struct EnumResult {
  double best = 0.0;
  std::vector<int> argbest;
  long count = 0;
};

// Exhaustive search over all complete associations using feasible tuples.
inline EnumResult EnumerateOptimum(const SetFunction& fn) {
  const int k = fn.num_users();
  const int b = fn.num_tps();
  std::vector<int> tp(k, 0);
  EnumResult out;
  bool have = false;
  std::function<void(int)> rec = [&](int user) {
    if (user == k) {
      const double g = DirectG(fn, tp);
      ++out.count;
      if (!have || (fn.maximize() ? g > out.best : g < out.best)) {
        have = true;
        out.best = g;
        out.argbest = tp;
      }
      return;
    }
    for (int j = 0; j < b; ++j) {
      if (!fn.IsFeasible(user, j)) continue;
      tp[user] = j;
      rec(user + 1);
    }
  };
  rec(0);
  return out;
}

// Both users start on TP 0. Either one leaving improves g, both leaving at
// once lowers it below the start.
inline SetFunction CollisionInstance() {
  Eigen::MatrixXd t(2, 3);
  t << 1.0, 0.3, 0.01, 1.0, 0.01, 0.3;
  return SetFunction::FromTheta(t, 0.5);
}

}  // namespace hetnet::testing

#endif  // HETNET_TESTS_TEST_UTIL_H_
