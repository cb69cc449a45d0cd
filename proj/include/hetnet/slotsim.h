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
// Slot-level check of a solution: per-TP ON-OFF patterns drawn to match
// rho, fast fading redrawn every slot, and a scheduler on every ON TP.
// Rates are in nats per slot.

#ifndef HETNET_SLOTSIM_H_
#define HETNET_SLOTSIM_H_

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hetnet/association.h"
#include "hetnet/model.h"
#include "hetnet/rate.h"

namespace hetnet {

enum class OnOffMode {
  // Each slot ON with probability rho_b, independently across TPs.
  kBernoulli,
  // The first round(rho_b * slots) slots ON. Correlated across TPs; only
  // meant for variance-free tests.
  kDeterministic,
};

enum class Scheduler {
  // Weighted round robin with shares gamma (credit based, so counts are
  // within one slot of gamma times the ON slots).
  kFractionalRR,
  // Standard alpha-fair gradient rule: argmax w_k r_k(t) Rbar_k^-alpha.
  kGradient,
};

std::string ToString(Scheduler s);
Scheduler ParseScheduler(const std::string& s);

struct SlotSimConfig {
  int slots_per_frame = 5000;
  OnOffMode mode = OnOffMode::kBernoulli;
  // Draws for the conservative rates when the gains carry fading.
  int mc_samples = 1000;
  // Frames per verification; each frame gets its own pattern and fading.
  int frames = 1;

  void Validate() const;
};

struct FramePlan {
  int slots_per_frame = 0;
  // B x slots.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> on_off;
  Association association;
  ActivationVector rho;
  // K x B round-robin shares; rows of unassigned users are zero.
  RateAllocation gamma;
  // Initial running average of the gradient rule, per user.
  std::vector<double> warm_rate;

  int num_tps() const { return static_cast<int>(on_off.rows()); }
  void Validate(const ChannelGains& gains) const;
};

// Shares and warm rates come from the conservative rates at rho (KKT
// gamma). Users must sit on TPs with rho > 0.
FramePlan MakeFramePlan(const Association& assoc, const ActivationVector& rho,
                        const ChannelGains& gains, const UtilityConfig& util,
                        const SlotSimConfig& cfg, uint64_t seed);

struct SlotOutcome {
  std::vector<bool> served;
  // Instantaneous rate of served users, 0 otherwise.
  std::vector<double> rate;
  // Average over the slots so far (warm start excluded).
  std::vector<double> average;
};

struct FrameResult {
  std::vector<double> average_rate;
  std::vector<int> served_slots;
};

// w r Rbar^-alpha.
double GradientMetric(double weight, double rate, double average, double alpha);

// Fading draws depend only on (seed, user), so two schedulers run with the
// same seed see the same channel. `trace`, when set, receives every slot.
FrameResult SimulateFrame(const FramePlan& plan, const ChannelGains& gains,
                          const UtilityConfig& util, Scheduler scheduler,
                          uint64_t seed,
                          std::vector<SlotOutcome>* trace = nullptr);

struct VerifyReport {
  double utility_conservative = 0.0;
  double utility_actual_rr = 0.0;
  double utility_actual_gradient = 0.0;
  // Per user, averaged over frames.
  std::vector<double> conservative_rate;
  std::vector<double> rr_rate;
  std::vector<double> gradient_rate;
  // frames x K.
  Eigen::MatrixXd rr_frames;
  Eigen::MatrixXd gradient_frames;
};

// Frames run in parallel; frame f uses MixSeed({seed, f}) for its pattern
// and fading, so results do not depend on the thread count.
VerifyReport VerifySolution(const Association& assoc,
                            const ActivationVector& rho,
                            const ChannelGains& gains,
                            const UtilityConfig& util, uint64_t seed,
                            const SlotSimConfig& cfg = {});

// Columns frame, user, scheduler, rate.
void WriteFrameRatesCsv(const VerifyReport& report, std::ostream& out);

}  // namespace hetnet

#endif  // HETNET_SLOTSIM_H_
