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

// Centralized greedy + local-search association and the computable
// optimality certificates that come with each stage.

#ifndef HETNET_GLS_H_
#define HETNET_GLS_H_

#include <optional>
#include <string>
#include <vector>

#include "hetnet/association.h"
#include "hetnet/setfn.h"

namespace hetnet {

struct GlsConfig {
  double delta = 0.0;
  int max_iter = 100;

  void Validate() const;
};

enum class BoundKind {
  kGreedyHalf,
  kGreedyAdditive2Ln2,
  kGreedyRatio3Minus2Alpha,
  kLocalSearchBound,
};

// Which side of the optimum g* the certificate's bound_value sits on.
enum class BoundSide { kUpper, kLower };

enum class LsExit { kFixedPoint, kIterationCap };

std::string ToString(BoundKind kind);
std::string ToString(LsExit exit);

struct BoundCertificate {
  BoundKind kind = BoundKind::kGreedyHalf;
  BoundSide side = BoundSide::kUpper;
  double g_solution = 0.0;
  // Upper bound on g* (alpha <= 1) or lower bound on g* (alpha > 1). For
  // alpha in (1, log2 3) the greedy ratio gives the lower bound
  // (3 - 2^alpha) g; above that range it is vacuous but still emitted.
  double bound_value = 0.0;
  double h_value = 0.0;
  int omega_tilde_size = 0;
  // Local search only: the bound is only claimed on fixed-point exits.
  bool applies = true;

  // True when g_opt lies on the certified side, up to `tol` relative.
  bool Holds(double g_opt, double tol = 1e-9) const;
};

struct GreedyResult {
  Association association;
  std::vector<Tuple> order;
  // Marginal of each selection, in selection order.
  std::vector<double> marginals;
  long marginal_evaluations = 0;
};

struct LocalSearchResult {
  Association association;
  int swaps = 0;
  LsExit exit = LsExit::kFixedPoint;
  // g before any swap, then after each swap.
  std::vector<double> g_history;
};

struct SwapCandidate {
  int user = 0;
  int from = 0;
  int to = 0;
  double delta_g = 0.0;
};

// Relative acceptance rule for a swap changing g by delta_g from g.
// Includes a 1e-12 relative guard so that rounding noise never counts as
// improvement.
bool SwapQualifies(double delta_g, double g, double alpha, double delta);

// Best move of user k alone (ties: lowest target TP).
std::optional<SwapCandidate> BestSwapForUser(const AssociationState& state,
                                             int k);
// Best move over all users (ties: lowest (k, b)).
std::optional<SwapCandidate> BestSwap(const AssociationState& state);

GreedyResult GreedyStage(const SetFunction& fn);
LocalSearchResult LocalSearchStage(const SetFunction& fn,
                                   const Association& start,
                                   const GlsConfig& cfg);

// Regime-dependent greedy guarantee. If g_opt is given the certificate is
// checked and a violation raises Error.
BoundCertificate GreedyBound(const SetFunction& fn,
                             const Association& greedy,
                             std::optional<double> g_opt = std::nullopt);

// h(G) and the pruned ground set used by the local-search guarantee.
struct LocalSearchTerms {
  double h = 0.0;
  std::vector<Tuple> omega_tilde;
};
LocalSearchTerms ComputeLocalSearchTerms(const SetFunction& fn,
                                         const Association& assoc);

BoundCertificate LocalSearchBound(const SetFunction& fn,
                                  const Association& final_assoc,
                                  const GlsConfig& cfg,
                                  LsExit exit = LsExit::kFixedPoint,
                                  std::optional<double> g_opt = std::nullopt);

struct GlsResult {
  GreedyResult greedy;
  LocalSearchResult local_search;
  std::vector<BoundCertificate> certificates;

  const Association& association() const { return local_search.association; }
};

GlsResult RunGls(const SetFunction& fn, const GlsConfig& cfg);

}  // namespace hetnet

#endif  // HETNET_GLS_H_
