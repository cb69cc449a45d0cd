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

#include "hetnet/distsim.h"

#include <algorithm>
#include <numeric>

#include "hetnet/error.h"
#include "hetnet/gls.h"
#include "hetnet/random.h"
#include "json.hpp"

namespace hetnet {
namespace {

std::vector<LoadBroadcast> Broadcast(const LoadVector& loads) {
  std::vector<LoadBroadcast> out;
  for (int b = 0; b < static_cast<int>(loads.psi.size()); ++b) {
    out.push_back({b, loads.psi[b], loads.log_term[b]});
  }
  return out;
}

// Fisher-Yates with our own generator so the order is portable.
std::vector<int> Arrival(std::vector<int> users, ArrivalOrder order,
                         uint64_t seed, int window) {
  if (order == ArrivalOrder::kSeededShuffle) {
    Rng rng(MixSeed({seed, static_cast<uint64_t>(window), 0xa11ULL}));
    for (int i = static_cast<int>(users.size()) - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.NextU64() % (i + 1));
      std::swap(users[i], users[j]);
    }
  }
  return users;
}

// Best TP for an unassociated user against fixed loads; ties to lowest b.
std::pair<int, double> BestAdd(const SetFunction& fn, const LoadVector& loads,
                               int k) {
  int best = -1;
  double best_value = 0.0;
  for (int b = 0; b < fn.num_tps(); ++b) {
    if (!fn.IsFeasible(k, b)) continue;
    const double d = fn.MarginalAddUnchecked(loads, k, b);
    if (best < 0 || fn.Better(d, best_value)) {
      best = b;
      best_value = d;
    }
  }
  return {best, best_value};
}

}  // namespace

std::string ToString(DecisionReason r) {
  switch (r) {
    case DecisionReason::kAdmitted:
      return "admitted";
    case DecisionReason::kLostContention:
      return "lost_contention";
    case DecisionReason::kAlreadyAdmitted:
      return "already_admitted";
    case DecisionReason::kRandomizedReject:
      return "randomized_reject";
  }
  return "?";
}

void DistLsConfig::Validate() const {
  if (!(accept_probability > 0.0 && accept_probability < 1.0)) {
    throw ValidationError("accept_probability must be in (0, 1)");
  }
  if (!(delta >= 0.0)) throw ValidationError("delta must be >= 0");
  if (max_windows < 0) throw ValidationError("max_windows must be >= 0");
}

std::vector<int> InducedOrdering(const ProtocolTrace& trace) {
  std::vector<int> out;
  for (const WindowEvent& w : trace.windows) {
    for (const Decision& d : w.decisions) {
      if (d.accepted) out.push_back(d.user);
    }
  }
  return out;
}

std::pair<Association, ProtocolTrace> DistributedGreedy(
    const SetFunction& fn, const DistGreedyConfig& cfg) {
  fn.CheckEveryUserFeasible();
  AssociationState state(fn);
  ProtocolTrace trace;
  trace.initial = state.association();
  for (int window = 0; !state.association().IsComplete(); ++window) {
    WindowEvent ev;
    ev.window = window;
    const LoadVector snapshot = state.loads();
    ev.broadcasts = Broadcast(snapshot);

    std::vector<int> waiting;
    for (int k = 0; k < fn.num_users(); ++k) {
      if (!state.association().IsAssigned(k)) waiting.push_back(k);
    }
    for (int k : Arrival(waiting, cfg.order, cfg.seed, window)) {
      const auto [b, change] = BestAdd(fn, snapshot, k);
      ev.requests.push_back({k, Association::kUnassigned, b, fn.theta(k, b),
                             change});
    }

    // Winner per TP, as an index into ev.requests.
    std::vector<int> winner(fn.num_tps(), -1);
    for (int i = 0; i < static_cast<int>(ev.requests.size()); ++i) {
      const Request& r = ev.requests[i];
      int& w = winner[r.target_tp];
      if (w < 0) {
        w = i;
      } else if (cfg.rule == AdmissionRule::kBestChange &&
                 fn.Better(r.change, ev.requests[w].change)) {
        w = i;
      }
    }
    for (int i = 0; i < static_cast<int>(ev.requests.size()); ++i) {
      const Request& r = ev.requests[i];
      const bool ok = winner[r.target_tp] == i;
      ev.decisions.push_back(
          {r.user, r.target_tp, ok,
           ok ? DecisionReason::kAdmitted : DecisionReason::kLostContention});
      if (ok) state.Add(r.user, r.target_tp);
    }
    trace.last_request_window = window;
    trace.windows.push_back(std::move(ev));
  }
  trace.converged = true;
  trace.windows_used = static_cast<int>(trace.windows.size());
  trace.final_association = state.association();
  return {state.association(), std::move(trace)};
}

Association RestrictedGreedy(const SetFunction& fn,
                             std::span<const int> ordering) {
  fn.CheckEveryUserFeasible();
  AssociationState state(fn);
  for (int k : ordering) {
    state.Add(k, BestAdd(fn, state.loads(), k).first);
  }
  return state.association();
}

std::pair<Association, ProtocolTrace> DistributedLocalSearch(
    const SetFunction& fn, const Association& start, const DistLsConfig& cfg) {
  cfg.Validate();
  if (!start.IsComplete()) {
    throw ValidationError("distributed local search needs a complete start");
  }
  AssociationState state(fn, start);
  ProtocolTrace trace;
  trace.initial = start;
  std::vector<int> everyone(fn.num_users());
  std::iota(everyone.begin(), everyone.end(), 0);
  const int max_windows = cfg.EffectiveMaxWindows();

  for (int window = 0; window < max_windows; ++window) {
    WindowEvent ev;
    ev.window = window;
    ev.broadcasts = Broadcast(state.loads());
    const double g = state.Value();
    for (int k : Arrival(everyone, cfg.order, cfg.rng_seed, window)) {
      const auto c = BestSwapForUser(state, k);
      if (c && SwapQualifies(c->delta_g, g, fn.alpha(), cfg.delta)) {
        ev.requests.push_back({k, c->from, c->to, fn.theta(k, c->to),
                               c->delta_g});
      }
    }
    if (ev.requests.empty()) {
      trace.windows.push_back(std::move(ev));
      trace.converged = true;
      break;
    }
    trace.last_request_window = window;
    std::vector<bool> admitted(fn.num_tps(), false);
    for (const Request& r : ev.requests) {
      Decision d{r.user, r.target_tp, false, DecisionReason::kAdmitted};
      if (admitted[r.target_tp]) {
        d.reason = DecisionReason::kAlreadyAdmitted;
      } else {
        Rng coin(MixSeed({cfg.rng_seed, static_cast<uint64_t>(window),
                          static_cast<uint64_t>(r.user)}));
        if (coin.Bernoulli(cfg.accept_probability)) {
          d.accepted = true;
          admitted[r.target_tp] = true;
        } else {
          d.reason = DecisionReason::kRandomizedReject;
        }
      }
      ev.decisions.push_back(d);
    }
    // Migrations take effect together at the end of the window.
    for (const Decision& d : ev.decisions) {
      if (d.accepted) state.Move(d.user, d.tp);
    }
    trace.windows.push_back(std::move(ev));
  }
  trace.windows_used = static_cast<int>(trace.windows.size());
  trace.final_association = state.association();
  return {state.association(), std::move(trace)};
}

Association ReplayTrace(const ProtocolTrace& trace) {
  Association a = trace.initial;
  for (const WindowEvent& w : trace.windows) {
    for (const Decision& d : w.decisions) {
      if (!d.accepted) continue;
      if (a.IsAssigned(d.user)) {
        a.Move(d.user, d.tp);
      } else {
        a.Assign(d.user, d.tp);
      }
    }
  }
  return a;
}

std::string TraceToJsonLines(const ProtocolTrace& trace) {
  using nlohmann::json;
  std::string out;
  for (const WindowEvent& w : trace.windows) {
    json j;
    j["window"] = w.window;
    json loads = json::array();
    for (const auto& b : w.broadcasts) {
      loads.push_back({b.tp, b.psi, b.log_term});
    }
    j["broadcasts"] = loads;
    json reqs = json::array();
    for (const auto& r : w.requests) {
      reqs.push_back({{"user", r.user},
                      {"from", r.from_tp},
                      {"to", r.target_tp},
                      {"theta", r.theta},
                      {"change", r.change}});
    }
    j["requests"] = reqs;
    json decs = json::array();
    for (const auto& d : w.decisions) {
      decs.push_back({{"user", d.user},
                      {"tp", d.tp},
                      {"accepted", d.accepted},
                      {"reason", ToString(d.reason)}});
    }
    j["decisions"] = decs;
    out += j.dump();
    out += "\n";
  }
  return out;
}

}  // namespace hetnet
