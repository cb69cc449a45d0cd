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

// Activation-fraction (AF) optimization for a fixed association. Each outer
// step fixes the MMSE receivers at the current rho, which turns every link
// rate into a concave lower bound that is tight at rho, and then solves the
// resulting geometric program in log variables. Expectations over fading are
// sample averages on one sample set kept for the whole run.

#ifndef HETNET_AFOPT_H_
#define HETNET_AFOPT_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetnet/association.h"
#include "hetnet/convex.h"
#include "hetnet/model.h"
#include "hetnet/rate.h"

namespace hetnet {

// MMSE receiver of one fading sample: desired power beta, interference
// (without noise) `interference`.
struct MmseSample {
  double filter = 0.0;
  double mse = 0.0;
  double s = 0.0;
  double sinr = 0.0;
};
MmseSample MmseClosedForm(double beta, double interference);

// Rate lower bound of one link with the receivers fixed:
//   rho_b * (1 + E ln s - c0 - sum_b' c1[b'] rho_b').
// It equals the link rate at the rho it was built from.
struct LinkSurrogate {
  int user = 0;
  int tp = 0;
  // Fraction x_kb of the user on this TP (1 for an association).
  double share = 1.0;
  double mean_log_s = 0.0;
  double c0 = 0.0;
  // Indexed by TP; c1[tp] = 0.
  std::vector<double> c1;
  // E ln(1 + beta) with every other TP off.
  double interference_free_rate = 0.0;

  double a() const { return 1.0 / (1.0 + mean_log_s); }
  double Rate(const std::vector<double>& rho) const;
};

struct AfState {
  ActivationVector rho;
  // TP-major.
  std::vector<LinkSurrogate> links;
  // TPs whose rho is optimized (ascending); the rest stay at 0.
  std::vector<int> active;
};

struct LinkSpec {
  int user = 0;
  int tp = 0;
  double share = 1.0;
};

// One link per served user (users_on(b) order); active = TPs serving
// someone.
AfState MmseUpdate(const Association& assoc, const ChannelGains& gains,
                   const ActivationVector& rho, const FadingSamples& fading);
// Arbitrary links, which must be TP-major. Every TP in `active` needs
// rho > 0.
AfState MmseUpdate(std::span<const LinkSpec> links, std::vector<int> active,
                   const ChannelGains& gains, const ActivationVector& rho,
                   const FadingSamples& fading);

struct AfConfig {
  // Relative objective change that ends the outer loop.
  double outer_tol = 1e-6;
  int max_outer = 100;
  // Sample-average size; ignored (0) for gains without fading.
  int mc_samples = 1000;
  uint64_t seed = 0;
  // Floor for TPs that serve someone.
  double rho_min = 1e-4;
  // alpha < 1: condensation loop.
  double inner_tol = 1e-6;
  int max_inner = 50;
  // alpha < 1: C is this factor times the interference-free objective so
  // that the auxiliary y stays positive.
  double c_margin = 1.01;
  convex::Tolerances solver;

  void Validate() const;
};

struct AfStepResult {
  ActivationVector rho;
  // Value of the GP at its solution: sum_b z_b^alpha (alpha != 1) or
  // sum_k w_k ln t_k (alpha = 1).
  double surrogate = 0.0;
  int inner_iterations = 1;
  int newton_iterations = 0;
};

AfStepResult AfStepAlphaGt1(const AfState& state, const Association& assoc,
                            const UtilityConfig& util, const AfConfig& cfg);
AfStepResult AfStepAlphaEq1(const AfState& state, const Association& assoc,
                            const UtilityConfig& util, const AfConfig& cfg);
AfStepResult AfStepAlphaLt1(const AfState& state, const Association& assoc,
                            const UtilityConfig& util, const AfConfig& cfg);
// Dispatches on alpha.
AfStepResult AfStep(const AfState& state, const Association& assoc,
                    const UtilityConfig& util, const AfConfig& cfg);

// Single condensation of sum_i u_i at an expansion point: the monomial
// prod_i (u_i / delta_i)^delta_i with delta_i = u_i(expansion) / sum. Given
// the term values at the expansion point and at x, returns its value at x.
std::vector<double> CondensationWeights(std::span<const double> terms);
double CondensedValue(std::span<const double> terms_at_expansion,
                      std::span<const double> terms_at_x);

// Sample set used by the optimizer (empty for gains without fading).
FadingSamples AfSamples(const ChannelGains& gains, const AfConfig& cfg);
// g(assoc) at rho with the optimizer's sample set.
double AfObjective(const Association& assoc, const ChannelGains& gains,
                   const UtilityConfig& util, const ActivationVector& rho,
                   const FadingSamples& fading);
// rho with idle TPs at 0 and serving TPs clamped to [rho_min, 1].
ActivationVector AfFeasibleStart(const Association& assoc,
                                 const ActivationVector& rho, double rho_min);

struct AfResult {
  ActivationVector rho;
  // g after every accepted outer step, starting with the initial point.
  std::vector<double> history;
  // g at every step's output, accepted or not (same start).
  std::vector<double> raw_history;
  int outer_iterations = 0;
  bool converged = false;
  // True when larger g is better (alpha <= 1).
  bool maximize = true;
  double objective() const { return history.back(); }
};

// AF for a fractional association x (K x B, rows on the simplex). The
// objective is the fractional g of setfn. Every TP stays active; links
// with x_kb <= share_floor are left out of the surrogate GP (they still
// count in the objective).
AfResult OptimizeAfFractional(const Eigen::MatrixXd& x,
                              const ChannelGains& gains,
                              const UtilityConfig& util, const AfConfig& cfg,
                              const std::optional<ActivationVector>& start =
                                  std::nullopt,
                              double share_floor = 1e-6);

// Starts from `start` (all ones by default).
AfResult OptimizeAf(const Association& assoc, const ChannelGains& gains,
                    const UtilityConfig& util, const AfConfig& cfg,
                    const std::optional<ActivationVector>& start = std::nullopt);

struct DistAfConfig {
  AfConfig af;
  // Initial penalty of the consensus step; adapted by residual balancing.
  double penalty = 1.0;
  int max_price_iterations = 3000;
  // Primal (consensus gap) and dual residual target per outer step.
  double price_tol = 1e-6;

  void Validate() const;
};

struct PriceIteration {
  int outer = 0;
  int iteration = 0;
  // max over copies of |local - consensus| in log rho.
  double consensus_gap = 0.0;
  double dual_residual = 0.0;
  double max_price = 0.0;
};

struct DistAfResult {
  AfResult af;
  std::vector<PriceIteration> price_history;
  // Consensus gap at the end of the last price loop.
  double final_consensus_gap = 0.0;
  // False if some price loop hit max_price_iterations.
  bool prices_converged = true;
};

// Same outer loop as OptimizeAf, with each GP split over the TPs: TP b keeps
// local copies of the AFs that interfere with its users and the copies are
// driven to agreement by consistency prices.
DistAfResult OptimizeAfDistributed(
    const Association& assoc, const ChannelGains& gains,
    const UtilityConfig& util, const DistAfConfig& cfg,
    const std::optional<ActivationVector>& start = std::nullopt);

// iteration,objective and iteration,raw_objective columns.
void WriteAfHistoryCsv(const std::string& path, const AfResult& result);
void WritePriceHistoryCsv(const std::string& path, const DistAfResult& result);

}  // namespace hetnet

#endif  // HETNET_AFOPT_H_
