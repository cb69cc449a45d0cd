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

#include "hetnet/gls.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "hetnet/error.h"

namespace hetnet {
namespace {

// Swap improvements below this fraction of |g| are treated as rounding
// noise, otherwise float ties can make the search cycle.
constexpr double kRelativeGuard = 1e-12;

double Sgn(double x) { return x >= 0.0 ? 1.0 : -1.0; }

double SlackScale(double a, double b) {
  return std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

void GlsConfig::Validate() const {
  if (!(delta >= 0.0)) throw ValidationError("delta must be >= 0");
  if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
}

std::string ToString(BoundKind kind) {
  switch (kind) {
    case BoundKind::kGreedyHalf:
      return "greedy_half";
    case BoundKind::kGreedyAdditive2Ln2:
      return "greedy_additive_2ln2";
    case BoundKind::kGreedyRatio3Minus2Alpha:
      return "greedy_ratio_3_minus_2alpha";
    case BoundKind::kLocalSearchBound:
      return "local_search";
  }
  return "?";
}

std::string ToString(LsExit exit) {
  return exit == LsExit::kFixedPoint ? "fixed_point" : "iteration_cap";
}

bool BoundCertificate::Holds(double g_opt, double tol) const {
  const double slack = tol * SlackScale(g_opt, bound_value);
  if (side == BoundSide::kUpper) return g_opt <= bound_value + slack;
  return g_opt >= bound_value - slack;
}

bool SwapQualifies(double delta_g, double g, double alpha, double delta) {
  const double guard = kRelativeGuard * std::max(1.0, std::abs(g));
  if (alpha <= 1.0) return delta_g > delta * Sgn(g) * g + guard;
  return delta_g < -delta * g - guard;
}

std::optional<SwapCandidate> BestSwapForUser(const AssociationState& state,
                                             int k) {
  const SetFunction& fn = state.fn();
  const int from = state.association().tp_of(k);
  if (from == Association::kUnassigned) return std::nullopt;
  std::optional<SwapCandidate> best;
  for (int b = 0; b < fn.num_tps(); ++b) {
    if (b == from || !fn.IsFeasible(k, b)) continue;
    const double d = fn.MarginalSwapUnchecked(state.loads(), k, from, b);
    if (!best || fn.Better(d, best->delta_g)) best = SwapCandidate{k, from, b, d};
  }
  return best;
}

std::optional<SwapCandidate> BestSwap(const AssociationState& state) {
  const SetFunction& fn = state.fn();
  std::optional<SwapCandidate> best;
  for (int k = 0; k < fn.num_users(); ++k) {
    const auto c = BestSwapForUser(state, k);
    if (c && (!best || fn.Better(c->delta_g, best->delta_g))) best = c;
  }
  return best;
}

GreedyResult GreedyStage(const SetFunction& fn) {
  fn.CheckEveryUserFeasible();
  AssociationState state(fn);
  GreedyResult out;
  for (int step = 0; step < fn.num_users(); ++step) {
    bool found = false;
    Tuple pick;
    double pick_value = 0.0;
    for (int k = 0; k < fn.num_users(); ++k) {
      if (state.association().IsAssigned(k)) continue;
      for (int b = 0; b < fn.num_tps(); ++b) {
        if (!fn.IsFeasible(k, b)) continue;
        const double d = fn.MarginalAddUnchecked(state.loads(), k, b);
        ++out.marginal_evaluations;
        if (!found || fn.Better(d, pick_value)) {
          found = true;
          pick = {k, b};
          pick_value = d;
        }
      }
    }
    state.Add(pick.user, pick.tp);
    out.order.push_back(pick);
    out.marginals.push_back(pick_value);
  }
  out.association = state.association();
  return out;
}

LocalSearchResult LocalSearchStage(const SetFunction& fn,
                                   const Association& start,
                                   const GlsConfig& cfg) {
  cfg.Validate();
  if (!start.IsComplete()) {
    throw ValidationError("local search needs a complete association");
  }
  AssociationState state(fn, start);
  LocalSearchResult out;
  out.g_history.push_back(state.Value());
  out.exit = LsExit::kFixedPoint;
  for (int iter = 1;; ++iter) {
    const auto best = BestSwap(state);
    const double g = out.g_history.back();
    if (!best || !SwapQualifies(best->delta_g, g, fn.alpha(), cfg.delta)) {
      break;
    }
    state.Move(best->user, best->to);
    ++out.swaps;
    out.g_history.push_back(state.Value());
    if (iter == cfg.max_iter) {
      out.exit = LsExit::kIterationCap;
      break;
    }
  }
  out.association = state.association();
  return out;
}

BoundCertificate GreedyBound(const SetFunction& fn, const Association& greedy,
                             std::optional<double> g_opt) {
  const double alpha = fn.alpha();
  BoundCertificate c;
  c.g_solution = fn.Value(greedy);
  if (alpha < 1.0) {
    c.kind = BoundKind::kGreedyHalf;
    c.side = BoundSide::kUpper;
    c.bound_value = 2.0 * c.g_solution;
  } else if (alpha == 1.0) {
    c.kind = BoundKind::kGreedyAdditive2Ln2;
    c.side = BoundSide::kUpper;
    c.bound_value = c.g_solution + 2.0 * std::numbers::ln2;
  } else {
    c.kind = BoundKind::kGreedyRatio3Minus2Alpha;
    c.side = BoundSide::kLower;
    c.bound_value = (3.0 - std::pow(2.0, alpha)) * c.g_solution;
  }
  if (g_opt && !c.Holds(*g_opt)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << ToString(c.kind) << " violated: g* = " << *g_opt
        << ", bound = " << c.bound_value;
    throw Error(msg.str());
  }
  return c;
}

LocalSearchTerms ComputeLocalSearchTerms(const SetFunction& fn,
                                         const Association& assoc) {
  LocalSearchTerms out;
  const LoadVector loads = fn.Loads(assoc);
  const double g = fn.ValueFromLoads(loads);

  if (fn.alpha() > 1.0) {
    for (const Tuple& e : fn.GroundSet()) {
      if (std::pow(fn.theta(e.user, e.tp), fn.alpha()) <= g) {
        out.omega_tilde.push_back(e);
      }
    }
  } else {
    out.omega_tilde = fn.GroundSet();
  }
  const LoadVector omega_loads = fn.Loads(out.omega_tilde);

  // g(S) - g(S - e) only touches the TP of e.
  auto removal_gain = [&fn](const LoadVector& l, const Tuple& e) {
    LoadVector after = l;
    fn.RemoveFromLoads(after, e.user, e.tp);
    return fn.TpTerm(l.psi[e.tp], l.log_term[e.tp]) -
           (after.count[e.tp] > 0
                ? fn.TpTerm(after.psi[e.tp], after.log_term[e.tp])
                : 0.0);
  };
  for (const Tuple& e : assoc.Tuples()) {
    out.h += g - removal_gain(loads, e);
    out.h += removal_gain(omega_loads, e);
  }
  return out;
}

BoundCertificate LocalSearchBound(const SetFunction& fn,
                                  const Association& final_assoc,
                                  const GlsConfig& cfg, LsExit exit,
                                  std::optional<double> g_opt) {
  cfg.Validate();
  const LocalSearchTerms terms = ComputeLocalSearchTerms(fn, final_assoc);
  const double g = fn.Value(final_assoc);
  const double num_users = fn.num_users();
  const double alpha = fn.alpha();
  BoundCertificate c;
  c.kind = BoundKind::kLocalSearchBound;
  c.g_solution = g;
  c.h_value = terms.h;
  c.omega_tilde_size = static_cast<int>(terms.omega_tilde.size());
  c.applies = exit == LsExit::kFixedPoint;
  if (alpha > 1.0) {
    c.side = BoundSide::kLower;
    c.bound_value = g + num_users * (1.0 - cfg.delta) * g - terms.h;
  } else if (alpha < 1.0) {
    c.side = BoundSide::kUpper;
    c.bound_value = g + num_users * (1.0 + cfg.delta) * g - terms.h;
  } else {
    c.side = BoundSide::kUpper;
    c.bound_value =
        g + num_users * (1.0 + cfg.delta * Sgn(g)) * g - terms.h;
  }
  if (g_opt && c.applies && !c.Holds(*g_opt)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "local search bound violated: g* = " << *g_opt
        << ", bound = " << c.bound_value;
    throw Error(msg.str());
  }
  return c;
}

GlsResult RunGls(const SetFunction& fn, const GlsConfig& cfg) {
  cfg.Validate();
  GlsResult out;
  out.greedy = GreedyStage(fn);
  out.local_search = LocalSearchStage(fn, out.greedy.association, cfg);
  out.certificates.push_back(GreedyBound(fn, out.greedy.association));
  out.certificates.push_back(LocalSearchBound(
      fn, out.local_search.association, cfg, out.local_search.exit));
  return out;
}

}  // namespace hetnet
