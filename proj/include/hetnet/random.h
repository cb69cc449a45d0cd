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

#ifndef HETNET_RANDOM_H_
#define HETNET_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace hetnet {

// Hashes an ordered list of integers into one 64-bit seed. Used to derive
// independent, order-stable streams such as (seed, user) or
// (seed, window, user).
uint64_t MixSeed(std::initializer_list<uint64_t> parts);

// Thin wrapper over mt19937_64. The variate conversions are written out
// here rather than taken from <random> distributions, whose algorithms are
// implementation-defined, so that draws are identical across standard
// libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  // Uniform on (0, 1).
  double UniformOpen();
  // Unit-mean exponential, i.e. |CN(0,1)|^2.
  double Exponential();
  double Normal();
  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace hetnet

#endif  // HETNET_RANDOM_H_
