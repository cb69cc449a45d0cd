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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <utility>

#include "hetnet/error.h"
#include "hetnet/setfn.h"

namespace hetnet {
namespace {

using convex::AffineFunction;
using convex::AffineTerm;
using convex::ConvexProblem;
using convex::ExpAffineFunction;
using convex::FunctionPtr;
using convex::LogSumExpFunction;
using convex::SeparableQuadratic;
using convex::SumFunction;
using convex::Vector;

constexpr double kInf = std::numeric_limits<double>::infinity();
// Distance kept from the rho box when building a start point (log space).
constexpr double kBoxMargin = 1e-7;
// Start points sit this far inside the t, z constraints.
constexpr double kSlack = 0.99;

std::string Fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<int> ServingTps(const Association& assoc) {
  std::vector<int> out;
  for (int b = 0; b < assoc.num_tps(); ++b) {
    if (!assoc.users_on(b).empty()) out.push_back(b);
  }
  return out;
}

// Links of `state` grouped by TP.
std::vector<std::vector<int>> LinksByTp(const AfState& state, int num_tps) {
  std::vector<std::vector<int>> out(num_tps);
  for (size_t l = 0; l < state.links.size(); ++l) {
    out[state.links[l].tp].push_back(static_cast<int>(l));
  }
  return out;
}

void CheckState(const AfState& state, const Association& assoc) {
  if (state.rho.size() != assoc.num_tps()) {
    throw ValidationError("AF state and association disagree on B");
  }
}

// Active TPs that carry at least one link.
std::vector<int> TpsWithLinks(const AfState& state,
                              const std::vector<std::vector<int>>& by_tp) {
  std::vector<int> out;
  for (int b : state.active) {
    if (!by_tp[b].empty()) out.push_back(b);
  }
  return out;
}

// ln(a (t / rho_b + c0 + sum_b' c1_b' rho_b')) <= 0, with rho in log form.
// rho_var maps a TP to its variable (-1: TP is off).
FunctionPtr LinkConstraint(const LinkSurrogate& l, int t_var,
                           const std::vector<int>& rho_var) {
  const double log_a = std::log(l.a());
  std::vector<AffineTerm> terms;
  terms.push_back({log_a, {{t_var, 1.0}, {rho_var[l.tp], -1.0}}});
  terms.push_back({log_a + std::log(l.c0), {}});
  for (size_t b = 0; b < l.c1.size(); ++b) {
    // Idle TPs (no variable) stay at rho = 0.
    if (static_cast<int>(b) == l.tp || l.c1[b] <= 0.0 || rho_var[b] < 0) {
      continue;
    }
    terms.push_back({log_a + std::log(l.c1[b]), {{rho_var[b], 1.0}}});
  }
  return std::make_shared<LogSumExpFunction>(std::move(terms));
}

// alpha > 1: ln sum_k w~_k z_b^-1 t_k^(1/alpha - 1) <= 0.
FunctionPtr LoadConstraintGt1(const std::vector<int>& links,
                              const std::vector<double>& w_tilde,
                              const std::vector<int>& t_var, int z_var,
                              double p) {
  std::vector<AffineTerm> terms;
  for (int l : links) {
    terms.push_back({std::log(w_tilde[l]), {{z_var, -1.0}, {t_var[l], p}}});
  }
  return std::make_shared<LogSumExpFunction>(std::move(terms));
}

// alpha < 1: z_b <= condensed sum_k w~_k t_k^p around t_at, i.e.
// z~_b - sum_k d_k (ln w~_k + p t~_k - ln d_k) <= 0.
FunctionPtr LoadConstraintLt1(const std::vector<int>& links,
                              const std::vector<double>& w_tilde,
                              const std::vector<double>& t_at,
                              const std::vector<int>& t_var, int z_var,
                              double p) {
  std::vector<double> u;
  for (int l : links) u.push_back(w_tilde[l] * std::pow(t_at[l], p));
  const std::vector<double> d = CondensationWeights(u);
  std::vector<std::pair<int, double>> coef = {{z_var, 1.0}};
  double constant = 0.0;
  for (size_t i = 0; i < links.size(); ++i) {
    coef.push_back({t_var[links[i]], -d[i] * p});
    constant -= d[i] * (std::log(w_tilde[links[i]]) - std::log(d[i]));
  }
  return std::make_shared<AffineFunction>(std::move(coef), constant);
}

double ClampLogRho(double rho, double rho_min) {
  const double lo = std::log(rho_min) + kBoxMargin;
  return std::clamp(std::log(std::max(rho, rho_min)), lo, -kBoxMargin);
}

std::vector<double> WeightsTilde(const AfState& state,
                                 const UtilityConfig& util) {
  std::vector<double> out;
  for (const auto& l : state.links) {
    out.push_back(l.share * TildeWeight(util.weight(l.user), util.alpha()));
  }
  return out;
}

// Log rho of every serving TP, clamped inside the box.
std::vector<double> StartLogRho(const AfState& state,
                                const std::vector<int>& serving,
                                double rho_min) {
  std::vector<double> out(state.rho.size(), -kInf);
  for (int b : serving) out[b] = ClampLogRho(state.rho[b], rho_min);
  return out;
}

// t_l slightly below the surrogate rate at rho = exp(log_rho).
std::vector<double> StartT(const AfState& state,
                           const std::vector<double>& log_rho) {
  std::vector<double> rho(log_rho.size());
  for (size_t b = 0; b < rho.size(); ++b) rho[b] = std::exp(log_rho[b]);
  std::vector<double> t;
  for (const auto& l : state.links) {
    t.push_back(std::max(kSlack * l.Rate(rho), 1e-300));
  }
  return t;
}

ActivationVector RhoFromLog(const std::vector<double>& log_rho,
                            const std::vector<int>& serving, int num_tps,
                            double rho_min) {
  ActivationVector out{std::vector<double>(num_tps, 0.0)};
  for (int b : serving) {
    out.rho[b] = std::clamp(std::exp(log_rho[b]), rho_min, 1.0);
  }
  return out;
}

// The GP of one step before the objective is chosen: variables, bounds,
// link constraints and a start point.
struct StepProblem {
  ConvexProblem problem;
  std::vector<int> rho_var;
  std::vector<int> t_var;
  std::vector<int> z_var;
  int y_var = -1;
  Vector start;

  int AddVar(double lo, double hi, double x0) {
    const int i = problem.num_vars++;
    lower.push_back(lo);
    upper.push_back(hi);
    x.push_back(x0);
    return i;
  }
  void Finish() {
    problem.lower = Eigen::Map<Vector>(lower.data(), lower.size());
    problem.upper = Eigen::Map<Vector>(upper.data(), upper.size());
    problem.start = Eigen::Map<Vector>(x.data(), x.size());
  }
  std::vector<double> lower, upper, x;
};

// Shared part of the centralized GPs.
StepProblem BuildCentral(const AfState& state, const std::vector<int>& serving,
                         const AfConfig& cfg, std::vector<double>& t_start) {
  const int num_tps = state.rho.size();
  StepProblem sp;
  sp.rho_var.assign(num_tps, -1);
  const std::vector<double> log_rho = StartLogRho(state, serving, cfg.rho_min);
  for (int b : serving) {
    sp.rho_var[b] = sp.AddVar(std::log(cfg.rho_min), 0.0, log_rho[b]);
  }
  t_start = StartT(state, log_rho);
  for (size_t l = 0; l < state.links.size(); ++l) {
    sp.t_var.push_back(sp.AddVar(-kInf, kInf, std::log(t_start[l])));
  }
  for (size_t l = 0; l < state.links.size(); ++l) {
    sp.problem.inequalities.push_back(
        LinkConstraint(state.links[l], sp.t_var[l], sp.rho_var));
  }
  return sp;
}

AfStepResult Extract(const convex::SolveReport& r, const StepProblem& sp,
                     const std::vector<int>& serving, int num_tps,
                     double rho_min) {
  std::vector<double> log_rho(num_tps, -kInf);
  for (int b : serving) log_rho[b] = r.x[sp.rho_var[b]];
  AfStepResult out;
  out.rho = RhoFromLog(log_rho, serving, num_tps, rho_min);
  out.newton_iterations = r.iterations;
  return out;
}

double InterferenceFreeObjective(const AfState& state,
                                 const std::vector<double>& w_tilde,
                                 double alpha, int num_tps) {
  std::vector<double> h(num_tps, 0.0);
  const double p = 1.0 / alpha - 1.0;
  for (size_t l = 0; l < state.links.size(); ++l) {
    h[state.links[l].tp] +=
        w_tilde[l] * std::pow(state.links[l].interference_free_rate, p);
  }
  double c = 0.0;
  for (double v : h) {
    if (v > 0.0) c += std::pow(v, alpha);
  }
  return c;
}

}  // namespace

MmseSample MmseClosedForm(double beta, double interference) {
  MmseSample m;
  const double total = 1.0 + beta + interference;
  m.filter = std::sqrt(beta) / total;
  m.mse = (1.0 + interference) / total;
  m.s = total / (1.0 + interference);
  m.sinr = beta / (1.0 + interference);
  return m;
}

double LinkSurrogate::Rate(const std::vector<double>& rho) const {
  double v = 1.0 + mean_log_s - c0;
  for (size_t b = 0; b < c1.size(); ++b) {
    if (static_cast<int>(b) != tp) v -= c1[b] * rho[b];
  }
  return rho[tp] * v;
}

AfState MmseUpdate(const Association& assoc, const ChannelGains& gains,
                   const ActivationVector& rho, const FadingSamples& fading) {
  if (assoc.num_tps() != gains.num_tps() ||
      assoc.num_users() != gains.num_users()) {
    throw ValidationError("MMSE update: dimension mismatch");
  }
  std::vector<LinkSpec> links;
  for (int b = 0; b < assoc.num_tps(); ++b) {
    for (int k : assoc.users_on(b)) links.push_back({k, b, 1.0});
  }
  return MmseUpdate(links, ServingTps(assoc), gains, rho, fading);
}

AfState MmseUpdate(std::span<const LinkSpec> links, std::vector<int> active,
                   const ChannelGains& gains, const ActivationVector& rho,
                   const FadingSamples& fading) {
  rho.Validate();
  const int num_tps = gains.num_tps();
  if (rho.size() != num_tps) {
    throw ValidationError("MMSE update: dimension mismatch");
  }
  std::sort(active.begin(), active.end());
  std::vector<bool> is_active(num_tps, false);
  for (int b : active) {
    if (b < 0 || b >= num_tps || is_active[b]) {
      throw ValidationError("bad active TP list");
    }
    if (!(rho[b] > 0.0)) {
      throw ValidationError("TP " + std::to_string(b) +
                            " is active but has rho = 0");
    }
    is_active[b] = true;
  }
  const bool closed = fading.empty();
  const int num_samples = closed ? 1 : fading.num_samples();
  AfState st;
  st.rho = rho;
  st.active = std::move(active);
  std::vector<double> power(num_tps);
  int prev_tp = 0;
  for (const LinkSpec& spec : links) {
    const int k = spec.user;
    const int b = spec.tp;
    if (b < prev_tp || b >= num_tps || k < 0 || k >= gains.num_users()) {
      throw ValidationError("links must be valid and TP-major");
    }
    prev_tp = b;
    if (!is_active[b]) {
      throw ValidationError("link on inactive TP " + std::to_string(b));
    }
    if (!(spec.share > 0.0 && spec.share <= 1.0)) {
      throw ValidationError("link share must be in (0, 1]");
    }
    {
      LinkSurrogate l;
      l.user = k;
      l.tp = b;
      l.share = spec.share;
      l.c1.assign(num_tps, 0.0);
      for (int s = 0; s < num_samples; ++s) {
        double interference = 0.0;
        for (int c = 0; c < num_tps; ++c) {
          power[c] = gains.slow_gain(k, c) * (closed ? 1.0 : fading.user(k)(s, c));
          if (c != b) interference += power[c] * rho[c];
        }
        const double beta = power[b];
        const double q = 1.0 + interference;
        const double total = q + beta;
        l.mean_log_s += std::log1p(beta / q);
        // s ((g sqrt(beta) - 1)^2 + g^2) with g the MMSE filter.
        l.c0 += (q * q + beta) / (q * total);
        for (int c = 0; c < num_tps; ++c) {
          if (c != b) l.c1[c] += beta * power[c] / (q * total);
        }
        l.interference_free_rate += std::log1p(beta);
      }
      l.mean_log_s /= num_samples;
      l.c0 /= num_samples;
      for (double& v : l.c1) v /= num_samples;
      l.interference_free_rate /= num_samples;
      if (!(l.mean_log_s > 0.0)) {
        throw ValidationError("user " + std::to_string(k) +
                              " has zero rate on TP " + std::to_string(b));
      }
      st.links.push_back(std::move(l));
    }
  }
  return st;
}

void AfConfig::Validate() const {
  if (!(outer_tol > 0.0)) throw ValidationError("outer_tol must be > 0");
  if (max_outer < 1) throw ValidationError("max_outer must be >= 1");
  if (mc_samples < 0) throw ValidationError("mc_samples must be >= 0");
  if (!(rho_min > 0.0 && rho_min < 1.0)) {
    throw ValidationError("rho_min must be in (0, 1)");
  }
  if (!(inner_tol > 0.0) || max_inner < 1) {
    throw ValidationError("bad condensation loop settings");
  }
  if (!(c_margin > 1.0)) throw ValidationError("c_margin must be > 1");
}

void DistAfConfig::Validate() const {
  af.Validate();
  if (!(penalty > 0.0)) throw ValidationError("penalty must be > 0");
  if (max_price_iterations < 1 || !(price_tol > 0.0)) {
    throw ValidationError("bad price loop settings");
  }
}

std::vector<double> CondensationWeights(std::span<const double> terms) {
  double sum = 0.0;
  for (double u : terms) {
    if (!(u > 0.0)) throw SolverError("condensation of a non-positive term");
    sum += u;
  }
  std::vector<double> d;
  for (double u : terms) d.push_back(u / sum);
  return d;
}

double CondensedValue(std::span<const double> terms_at_expansion,
                      std::span<const double> terms_at_x) {
  const std::vector<double> d = CondensationWeights(terms_at_expansion);
  double log_v = 0.0;
  for (size_t i = 0; i < d.size(); ++i) {
    log_v += d[i] * (std::log(terms_at_x[i]) - std::log(d[i]));
  }
  return std::exp(log_v);
}

AfStepResult AfStepAlphaGt1(const AfState& state, const Association& assoc,
                            const UtilityConfig& util, const AfConfig& cfg) {
  CheckState(state, assoc);
  const double alpha = util.alpha();
  if (!(alpha > 1.0)) throw ValidationError("alpha > 1 step called with alpha <= 1");
  const double p = 1.0 / alpha - 1.0;
  const int num_tps = assoc.num_tps();
  const std::vector<int>& serving = state.active;
  const auto by_tp = LinksByTp(state, num_tps);
  const std::vector<int> loaded = TpsWithLinks(state, by_tp);
  const std::vector<double> w_tilde = WeightsTilde(state, util);
  std::vector<double> t0;
  StepProblem sp = BuildCentral(state, serving, cfg, t0);
  sp.z_var.assign(num_tps, -1);
  std::vector<AffineTerm> obj;
  for (int b : loaded) {
    double h = 0.0;
    for (int l : by_tp[b]) h += w_tilde[l] * std::pow(t0[l], p);
    sp.z_var[b] = sp.AddVar(-kInf, kInf, std::log(h / kSlack));
    sp.problem.inequalities.push_back(
        LoadConstraintGt1(by_tp[b], w_tilde, sp.t_var, sp.z_var[b], p));
    obj.push_back({0.0, {{sp.z_var[b], alpha}}});
  }
  sp.problem.objective = std::make_shared<LogSumExpFunction>(std::move(obj));
  sp.Finish();
  const convex::SolveReport r = convex::Solve(sp.problem, cfg.solver);
  AfStepResult out = Extract(r, sp, serving, num_tps, cfg.rho_min);
  out.surrogate = std::exp(r.objective);
  return out;
}

AfStepResult AfStepAlphaEq1(const AfState& state, const Association& assoc,
                            const UtilityConfig& util, const AfConfig& cfg) {
  CheckState(state, assoc);
  if (util.alpha() != 1.0) throw ValidationError("alpha = 1 step called with alpha != 1");
  const int num_tps = assoc.num_tps();
  const std::vector<int>& serving = state.active;
  std::vector<double> t0;
  StepProblem sp = BuildCentral(state, serving, cfg, t0);
  double total_w = 0.0;
  for (const auto& l : state.links) total_w += l.share * util.weight(l.user);
  std::vector<std::pair<int, double>> coef;
  for (size_t l = 0; l < state.links.size(); ++l) {
    const auto& link = state.links[l];
    coef.push_back({sp.t_var[l], -link.share * util.weight(link.user) / total_w});
  }
  sp.problem.objective = std::make_shared<AffineFunction>(std::move(coef), 0.0);
  sp.Finish();
  const convex::SolveReport r = convex::Solve(sp.problem, cfg.solver);
  AfStepResult out = Extract(r, sp, serving, num_tps, cfg.rho_min);
  out.surrogate = -r.objective * total_w;
  return out;
}

AfStepResult AfStepAlphaLt1(const AfState& state, const Association& assoc,
                            const UtilityConfig& util, const AfConfig& cfg) {
  CheckState(state, assoc);
  const double alpha = util.alpha();
  if (!(alpha < 1.0)) throw ValidationError("alpha < 1 step called with alpha >= 1");
  const double p = 1.0 / alpha - 1.0;
  const int num_tps = assoc.num_tps();
  const std::vector<int>& serving = state.active;
  const auto by_tp = LinksByTp(state, num_tps);
  const std::vector<int> loaded = TpsWithLinks(state, by_tp);
  const std::vector<double> w_tilde = WeightsTilde(state, util);
  const double c =
      cfg.c_margin * InterferenceFreeObjective(state, w_tilde, alpha, num_tps);

  std::vector<double> t_at;
  StepProblem base = BuildCentral(state, serving, cfg, t_at);
  // Current point of the condensation loop.
  std::vector<double> z_at(num_tps, 0.0);
  double sum_z = 0.0;
  for (int b : loaded) {
    double h = 0.0;
    for (int l : by_tp[b]) h += w_tilde[l] * std::pow(t_at[l], p);
    z_at[b] = kSlack * h;
    sum_z += std::pow(z_at[b], alpha);
  }
  if (!(c > sum_z)) throw SolverError("C does not exceed the objective");
  double y_at = (c - sum_z) / kSlack;
  Vector x_at = base.x.empty() ? Vector() : Eigen::Map<Vector>(base.x.data(), base.x.size());

  AfStepResult out;
  out.inner_iterations = 0;
  double prev = sum_z;
  convex::SolveReport last;
  StepProblem sp;
  for (int inner = 0; inner < cfg.max_inner; ++inner) {
    sp = base;
    sp.z_var.assign(num_tps, -1);
    for (int b : loaded) {
      sp.z_var[b] = sp.AddVar(-kInf, kInf, std::log(z_at[b]));
    }
    sp.y_var = sp.AddVar(-kInf, kInf, std::log(y_at));
    // Keep rho and t from the previous solution.
    for (int i = 0; i < static_cast<int>(x_at.size()) && i < base.problem.num_vars; ++i) {
      sp.x[i] = x_at[i];
    }
    for (int b : loaded) {
      sp.problem.inequalities.push_back(LoadConstraintLt1(
          by_tp[b], w_tilde, t_at, sp.t_var, sp.z_var[b], p));
    }
    // ln C - ln f~(y, z) <= 0 with f = y + sum_b z_b^alpha condensed.
    std::vector<double> u = {y_at};
    for (int b : loaded) u.push_back(std::pow(z_at[b], alpha));
    const std::vector<double> d = CondensationWeights(u);
    std::vector<std::pair<int, double>> coef = {{sp.y_var, -d[0]}};
    double constant = std::log(c) + d[0] * std::log(d[0]);
    for (size_t i = 0; i < loaded.size(); ++i) {
      coef.push_back({sp.z_var[loaded[i]], -d[i + 1] * alpha});
      constant += d[i + 1] * std::log(d[i + 1]);
    }
    sp.problem.inequalities.push_back(
        std::make_shared<AffineFunction>(std::move(coef), constant));
    sp.problem.objective = std::make_shared<AffineFunction>(
        std::vector<std::pair<int, double>>{{sp.y_var, 1.0}}, 0.0);
    sp.Finish();
    last = convex::Solve(sp.problem, cfg.solver);
    ++out.inner_iterations;
    out.newton_iterations += last.iterations;

    x_at = last.x.head(base.problem.num_vars);
    for (size_t l = 0; l < state.links.size(); ++l) {
      t_at[l] = std::exp(last.x[sp.t_var[l]]);
    }
    sum_z = 0.0;
    for (int b : loaded) {
      z_at[b] = std::exp(last.x[sp.z_var[b]]);
      sum_z += std::pow(z_at[b], alpha);
    }
    y_at = std::exp(last.x[sp.y_var]);
    const bool done = std::abs(sum_z - prev) <= cfg.inner_tol * prev;
    prev = sum_z;
    if (done) break;
  }
  std::vector<double> log_rho(num_tps, -kInf);
  for (int b : serving) log_rho[b] = last.x[sp.rho_var[b]];
  out.rho = RhoFromLog(log_rho, serving, num_tps, cfg.rho_min);
  out.surrogate = sum_z;
  return out;
}

AfStepResult AfStep(const AfState& state, const Association& assoc,
                    const UtilityConfig& util, const AfConfig& cfg) {
  if (util.alpha() > 1.0) return AfStepAlphaGt1(state, assoc, util, cfg);
  if (util.alpha() == 1.0) return AfStepAlphaEq1(state, assoc, util, cfg);
  return AfStepAlphaLt1(state, assoc, util, cfg);
}

FadingSamples AfSamples(const ChannelGains& gains, const AfConfig& cfg) {
  if (gains.fading_model == FadingModel::kNone) return FadingSamples();
  if (cfg.mc_samples < 1) {
    throw ValidationError("fading gains need mc_samples > 0");
  }
  return FadingSamples::Rayleigh(gains.num_users(), gains.num_tps(),
                                 cfg.mc_samples, cfg.seed);
}

double AfObjective(const Association& assoc, const ChannelGains& gains,
                   const UtilityConfig& util, const ActivationVector& rho,
                   const FadingSamples& fading) {
  const RateMatrix rates = ComputeRateMatrix(gains, rho, fading);
  return SetFunction(rates, util).Value(assoc);
}

ActivationVector AfFeasibleStart(const Association& assoc,
                                 const ActivationVector& rho, double rho_min) {
  if (rho.size() != assoc.num_tps()) {
    throw ValidationError("start rho length differs from B");
  }
  rho.Validate();
  ActivationVector out = rho;
  for (int b = 0; b < assoc.num_tps(); ++b) {
    out.rho[b] = assoc.users_on(b).empty()
                     ? 0.0
                     : std::clamp(rho[b], rho_min, 1.0);
  }
  return out;
}

namespace {

using StepFn = std::function<AfStepResult(const AfState&)>;

// The two-step loop. `update` builds the surrogate state at rho,
// `objective` is the true g on the fixed sample set.
AfResult RunOuter(bool maximize, const AfConfig& cfg, ActivationVector rho,
                  const std::function<AfState(const ActivationVector&)>& update,
                  const std::function<double(const ActivationVector&)>& objective,
                  const StepFn& step) {
  AfResult res;
  res.maximize = maximize;
  double obj = objective(rho);
  res.history = {obj};
  res.raw_history = {obj};
  for (int it = 0; it < cfg.max_outer; ++it) {
    const AfStepResult sr = step(update(rho));
    const double cand = objective(sr.rho);
    res.raw_history.push_back(cand);
    ++res.outer_iterations;
    const bool better = maximize ? cand > obj : cand < obj;
    if (!better) {
      res.converged = true;
      break;
    }
    const double change = std::abs(cand - obj) / std::max(std::abs(obj), 1e-300);
    rho = sr.rho;
    obj = cand;
    res.history.push_back(obj);
    if (change < cfg.outer_tol) {
      res.converged = true;
      break;
    }
  }
  res.rho = rho;
  return res;
}

void CheckInputs(const Association& assoc, const ChannelGains& gains,
                 const UtilityConfig& util, const AfConfig& cfg) {
  cfg.Validate();
  gains.Validate();
  if (util.num_users() != gains.num_users() ||
      assoc.num_users() != gains.num_users() ||
      assoc.num_tps() != gains.num_tps()) {
    throw ValidationError("AF inputs disagree on K or B");
  }
}

// Association-based loop with the given step.
AfResult RunAssociation(const Association& assoc, const ChannelGains& gains,
                        const UtilityConfig& util, const AfConfig& cfg,
                        const std::optional<ActivationVector>& start,
                        const StepFn& step) {
  CheckInputs(assoc, gains, util, cfg);
  const FadingSamples fading = AfSamples(gains, cfg);
  const ActivationVector rho = AfFeasibleStart(
      assoc, start.value_or(ActivationVector::Ones(gains.num_tps())),
      cfg.rho_min);
  return RunOuter(
      util.alpha() <= 1.0, cfg, rho,
      [&](const ActivationVector& r) {
        return MmseUpdate(assoc, gains, r, fading);
      },
      [&](const ActivationVector& r) {
        return AfObjective(assoc, gains, util, r, fading);
      },
      step);
}

// One GP step split over the TPs. Prices and the consensus point persist
// across calls (warm start between outer steps).
class ConsensusSolver {
 public:
  ConsensusSolver(const Association& assoc, const UtilityConfig& util,
                  const DistAfConfig& cfg, DistAfResult& out)
      : assoc_(assoc), util_(util), cfg_(cfg), out_(out),
        num_tps_(assoc.num_tps()) {}

  AfStepResult Step(const AfState& state) {
    CheckState(state, assoc_);
    serving_ = state.active;
    ++outer_;
    const double alpha = util_.alpha();
    const double p = 1.0 / alpha - 1.0;
    const auto by_tp = LinksByTp(state, num_tps_);
    const std::vector<double> w_tilde = WeightsTilde(state, util_);
    const std::vector<double> log_rho =
        StartLogRho(state, serving_, cfg_.af.rho_min);
    std::vector<double> t_at = StartT(state, log_rho);
    consensus_ = log_rho;

    // Which copies each TP keeps: itself and every TP interfering with one
    // of its users.
    std::vector<std::vector<int>> holds(num_tps_);
    for (int b : serving_) {
      holds[b].push_back(b);
      for (int l : by_tp[b]) {
        for (int c : serving_) {
          if (c != b && state.links[l].c1[c] > 0.0) holds[b].push_back(c);
        }
      }
      std::sort(holds[b].begin(), holds[b].end());
      holds[b].erase(std::unique(holds[b].begin(), holds[b].end()),
                     holds[b].end());
    }

    // z at the start and its scale.
    std::vector<double> z_at(num_tps_, 0.0);
    double sum_z = 0.0;
    if (alpha != 1.0) {
      for (int b : serving_) {
        double h = 0.0;
        for (int l : by_tp[b]) h += w_tilde[l] * std::pow(t_at[l], p);
        z_at[b] = alpha > 1.0 ? h / kSlack : kSlack * h;
        sum_z += std::pow(z_at[b], alpha);
      }
    }
    double total_w = 0.0;
    for (const auto& l : state.links) total_w += l.share * util_.weight(l.user);

    // Local problems without the price terms; rebuilt per condensation.
    std::vector<StepProblem> local(num_tps_);
    std::vector<Vector> x(num_tps_);
    AfStepResult result;
    result.inner_iterations = 0;
    const int rounds = alpha < 1.0 ? cfg_.af.max_inner : 1;
    double prev_sum_z = sum_z;
    for (int inner = 0; inner < rounds; ++inner) {
      for (int b : serving_) {
        StepProblem& sp = local[b];
        sp = StepProblem();
        sp.rho_var.assign(num_tps_, -1);
        for (int c : holds[b]) {
          sp.rho_var[c] = sp.AddVar(std::log(cfg_.af.rho_min), 0.0,
                                    x[b].size() ? x[b][sp.problem.num_vars]
                                                : consensus_[c]);
        }
        for (int l : by_tp[b]) {
          const int i = sp.problem.num_vars;
          sp.t_var.resize(state.links.size(), -1);
          sp.t_var[l] = sp.AddVar(-kInf, kInf,
                                  x[b].size() ? x[b][i] : std::log(t_at[l]));
          sp.problem.inequalities.push_back(
              LinkConstraint(state.links[l], sp.t_var[l], sp.rho_var));
        }
        std::vector<FunctionPtr> parts;
        if (alpha == 1.0) {
          std::vector<std::pair<int, double>> coef;
          for (int l : by_tp[b]) {
            const auto& link = state.links[l];
            coef.push_back(
                {sp.t_var[l], -link.share * util_.weight(link.user) / total_w});
          }
          parts.push_back(std::make_shared<AffineFunction>(std::move(coef), 0.0));
        } else {
          sp.z_var.assign(num_tps_, -1);
          sp.z_var[b] = sp.AddVar(-kInf, kInf, std::log(z_at[b]));
          if (alpha > 1.0) {
            sp.problem.inequalities.push_back(
                LoadConstraintGt1(by_tp[b], w_tilde, sp.t_var, sp.z_var[b], p));
            parts.push_back(std::make_shared<ExpAffineFunction>(
                AffineTerm{0.0, {{sp.z_var[b], alpha}}}, 1.0 / sum_z));
          } else {
            sp.problem.inequalities.push_back(LoadConstraintLt1(
                by_tp[b], w_tilde, t_at, sp.t_var, sp.z_var[b], p));
            // Condensed ln sum_b z_b^alpha: weight of TP b times alpha z~_b.
            const double d = std::pow(z_at[b], alpha) / sum_z;
            parts.push_back(std::make_shared<AffineFunction>(
                std::vector<std::pair<int, double>>{{sp.z_var[b], -d * alpha}},
                0.0));
          }
        }
        sp.problem.objective = std::make_shared<SumFunction>(std::move(parts));
        sp.Finish();
      }
      result.newton_iterations += PriceLoop(local, holds, x);
      ++result.inner_iterations;
      if (alpha >= 1.0) break;
      // Next condensation point.
      for (int b : serving_) {
        for (int l : by_tp[b]) t_at[l] = std::exp(x[b][local[b].t_var[l]]);
      }
      sum_z = 0.0;
      for (int b : serving_) {
        z_at[b] = std::exp(x[b][local[b].z_var[b]]);
        sum_z += std::pow(z_at[b], alpha);
      }
      const bool done = std::abs(sum_z - prev_sum_z) <= cfg_.af.inner_tol * prev_sum_z;
      prev_sum_z = sum_z;
      if (done) break;
    }
    result.rho = RhoFromLog(consensus_, serving_, num_tps_, cfg_.af.rho_min);
    if (alpha != 1.0) {
      result.surrogate = 0.0;
      for (int b : serving_) {
        result.surrogate += std::exp(alpha * x[b][local[b].z_var[b]]);
      }
    }
    return result;
  }

 private:
  using CopyKey = std::pair<int, int>;

  // Consensus iterations for fixed local problems. x holds the local
  // solutions (and serves as warm start). Returns Newton steps used.
  int PriceLoop(std::vector<StepProblem>& local,
                const std::vector<std::vector<int>>& holds,
                std::vector<Vector>& x) {
    double rho_pen = penalty_;
    const double lo = std::log(cfg_.af.rho_min);
    int newton = 0;
    bool converged = false;
    double gap = 0.0;
    for (int it = 0; it < cfg_.max_price_iterations; ++it) {
      // Local solves: independent per TP.
      for (int b : serving_) {
        StepProblem& sp = local[b];
        std::vector<std::pair<int, double>> lin;
        std::vector<int> idx;
        std::vector<double> curv, center;
        for (int c : holds[b]) {
          lin.push_back({sp.rho_var[c], prices_[{b, c}]});
          idx.push_back(sp.rho_var[c]);
          curv.push_back(rho_pen);
          center.push_back(consensus_[c]);
        }
        ConvexProblem prob = sp.problem;
        prob.objective = std::make_shared<SumFunction>(std::vector<FunctionPtr>{
            sp.problem.objective,
            std::make_shared<AffineFunction>(std::move(lin), 0.0),
            std::make_shared<SeparableQuadratic>(idx, curv, center)});
        if (x[b].size() == prob.num_vars) prob.start = x[b];
        const convex::SolveReport r = convex::Solve(prob, cfg_.af.solver);
        newton += r.iterations;
        x[b] = r.x;
      }
      // Consensus and prices.
      std::vector<double> sum(num_tps_, 0.0);
      std::vector<int> count(num_tps_, 0);
      for (int b : serving_) {
        for (int c : holds[b]) {
          sum[c] += x[b][local[b].rho_var[c]] + prices_[{b, c}] / rho_pen;
          ++count[c];
        }
      }
      double dual = 0.0;
      for (int c : serving_) {
        const double v = std::clamp(sum[c] / count[c], lo, 0.0);
        dual = std::max(dual, rho_pen * std::abs(v - consensus_[c]));
        consensus_[c] = v;
      }
      gap = 0.0;
      double max_price = 0.0;
      for (int b : serving_) {
        for (int c : holds[b]) {
          const double r = x[b][local[b].rho_var[c]] - consensus_[c];
          prices_[{b, c}] += rho_pen * r;
          gap = std::max(gap, std::abs(r));
          max_price = std::max(max_price, std::abs(prices_[{b, c}]));
        }
      }
      out_.price_history.push_back({outer_, it, gap, dual, max_price});
      if (gap <= cfg_.price_tol && dual <= cfg_.price_tol) {
        converged = true;
        break;
      }
      // Residual balancing. Prices are unscaled, so they carry over as is.
      if (gap > 10.0 * dual) {
        rho_pen = std::min(2.0 * rho_pen, 1e6);
      } else if (dual > 10.0 * gap) {
        rho_pen = std::max(0.5 * rho_pen, 1e-6);
      }
    }
    penalty_ = rho_pen;
    out_.final_consensus_gap = gap;
    if (!converged) out_.prices_converged = false;
    return newton;
  }

  const Association& assoc_;
  const UtilityConfig& util_;
  const DistAfConfig& cfg_;
  DistAfResult& out_;
  int num_tps_;
  std::vector<int> serving_;
  int outer_ = 0;
  double penalty_ = cfg_.penalty;
  std::vector<double> consensus_;
  std::map<CopyKey, double> prices_;
};

}  // namespace

AfResult OptimizeAf(const Association& assoc, const ChannelGains& gains,
                    const UtilityConfig& util, const AfConfig& cfg,
                    const std::optional<ActivationVector>& start) {
  return RunAssociation(assoc, gains, util, cfg, start,
                        [&](const AfState& st) {
                          return AfStep(st, assoc, util, cfg);
                        });
}

AfResult OptimizeAfFractional(const Eigen::MatrixXd& x,
                              const ChannelGains& gains,
                              const UtilityConfig& util, const AfConfig& cfg,
                              const std::optional<ActivationVector>& start,
                              double share_floor) {
  const int num_users = gains.num_users();
  const int num_tps = gains.num_tps();
  const Association none(num_users, num_tps);
  CheckInputs(none, gains, util, cfg);
  if (x.rows() != num_users || x.cols() != num_tps) {
    throw ValidationError("fractional association has the wrong shape");
  }
  if (!(share_floor >= 0.0 && share_floor < 1.0)) {
    throw ValidationError("share_floor must be in [0, 1)");
  }
  std::vector<LinkSpec> links;
  for (int b = 0; b < num_tps; ++b) {
    for (int k = 0; k < num_users; ++k) {
      if (x(k, b) > share_floor) links.push_back({k, b, std::min(x(k, b), 1.0)});
    }
  }
  std::vector<int> active(num_tps);
  for (int b = 0; b < num_tps; ++b) active[b] = b;
  ActivationVector rho = start.value_or(ActivationVector::Ones(num_tps));
  if (rho.size() != num_tps) throw ValidationError("start rho length differs from B");
  rho.Validate();
  for (double& r : rho.rho) r = std::clamp(r, cfg.rho_min, 1.0);
  const FadingSamples fading = AfSamples(gains, cfg);
  return RunOuter(
      util.alpha() <= 1.0, cfg, rho,
      [&](const ActivationVector& r) {
        return MmseUpdate(links, active, gains, r, fading);
      },
      [&](const ActivationVector& r) {
        return FractionalG(x, ComputeRateMatrix(gains, r, fading), util);
      },
      [&](const AfState& st) { return AfStep(st, none, util, cfg); });
}

DistAfResult OptimizeAfDistributed(
    const Association& assoc, const ChannelGains& gains,
    const UtilityConfig& util, const DistAfConfig& cfg,
    const std::optional<ActivationVector>& start) {
  cfg.Validate();
  DistAfResult out;
  ConsensusSolver solver(assoc, util, cfg, out);
  out.af = RunAssociation(assoc, gains, util, cfg.af, start,
                          [&](const AfState& st) { return solver.Step(st); });
  return out;
}

void WriteAfHistoryCsv(const std::string& path, const AfResult& result) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << "iteration,objective,accepted\n";
  // raw_history[i] for step i; accepted steps are the prefix that made it
  // into history.
  for (size_t i = 0; i < result.raw_history.size(); ++i) {
    f << i << ',' << Fmt(result.raw_history[i]) << ','
      << (i < result.history.size() ? 1 : 0) << '\n';
  }
}

void WritePriceHistoryCsv(const std::string& path, const DistAfResult& result) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << "outer,iteration,consensus_gap,dual_residual,max_price\n";
  for (const auto& p : result.price_history) {
    f << p.outer << ',' << p.iteration << ',' << Fmt(p.consensus_gap) << ','
      << Fmt(p.dual_residual) << ',' << Fmt(p.max_price) << '\n';
  }
}

}  // namespace hetnet
