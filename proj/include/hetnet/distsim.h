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

// Windowed message-passing simulation of the distributed greedy and
// distributed local-search association protocols, plus the centralized
// restricted greedy they are compared against.
//
// A window is: every TP broadcasts its load, users send at most one
// request each in arrival order, TPs answer, and accepted changes take
// effect at the end of the window.

#ifndef HETNET_DISTSIM_H_
#define HETNET_DISTSIM_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hetnet/association.h"
#include "hetnet/setfn.h"

namespace hetnet {

enum class AdmissionRule {
  // Admit the first request to arrive.
  kFirstRequester,
  // Admit the request offering the best change of g.
  kBestChange,
};

enum class ArrivalOrder { kAscendingUserId, kSeededShuffle };

enum class DecisionReason {
  kAdmitted,
  // Greedy: an earlier (or better) requester won this TP.
  kLostContention,
  // Local search: this TP already admitted a user this window.
  kAlreadyAdmitted,
  // Local search: the Bernoulli(p) draw said no.
  kRandomizedReject,
};

std::string ToString(DecisionReason r);

struct LoadBroadcast {
  int tp = 0;
  double psi = 0.0;
  double log_term = 0.0;
};

struct Request {
  int user = 0;
  int from_tp = Association::kUnassigned;
  int target_tp = 0;
  double theta = 0.0;
  double change = 0.0;
};

struct Decision {
  int user = 0;
  int tp = 0;
  bool accepted = false;
  DecisionReason reason = DecisionReason::kAdmitted;
};

struct WindowEvent {
  int window = 0;
  std::vector<LoadBroadcast> broadcasts;
  // In arrival order.
  std::vector<Request> requests;
  std::vector<Decision> decisions;
};

struct ProtocolTrace {
  Association initial;
  std::vector<WindowEvent> windows;
  Association final_association;
  bool converged = false;
  int windows_used = 0;
  // Index of the last window that carried any request, -1 if none.
  int last_request_window = -1;
};

struct DistGreedyConfig {
  AdmissionRule rule = AdmissionRule::kFirstRequester;
  ArrivalOrder order = ArrivalOrder::kAscendingUserId;
  uint64_t seed = 0;
};

struct DistLsConfig {
  double accept_probability = 0.5;
  double delta = 0.0;
  // 0 means 10000.
  int max_windows = 0;
  uint64_t rng_seed = 0;
  ArrivalOrder order = ArrivalOrder::kAscendingUserId;

  void Validate() const;
  int EffectiveMaxWindows() const { return max_windows > 0 ? max_windows : 10000; }
};

// Users in the order they were admitted (window by window, then by the
// order of admission decisions inside a window).
std::vector<int> InducedOrdering(const ProtocolTrace& trace);

std::pair<Association, ProtocolTrace> DistributedGreedy(
    const SetFunction& fn, const DistGreedyConfig& cfg = {});

// Users take their best TP one at a time in the order given.
Association RestrictedGreedy(const SetFunction& fn,
                             std::span<const int> ordering);

std::pair<Association, ProtocolTrace> DistributedLocalSearch(
    const SetFunction& fn, const Association& start, const DistLsConfig& cfg);

// Applies the accepted decisions of every window to trace.initial.
Association ReplayTrace(const ProtocolTrace& trace);

// One JSON object per window, newline separated.
std::string TraceToJsonLines(const ProtocolTrace& trace);

}  // namespace hetnet

#endif  // HETNET_DISTSIM_H_
