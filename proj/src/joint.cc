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

#include "hetnet/joint.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hetnet/error.h"

namespace hetnet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Score-form (maximized) objective of the relaxation in terms of the TP
// loads: F = sum_b phi(psi_b) + sum c_kb x_kb with
//   alpha < 1: phi = psi^alpha;  alpha > 1: phi = -psi^alpha;
//   alpha = 1: phi = -psi ln psi, c_kb = w_k ln(w_k R_kb).
struct Relaxation {
  double alpha = 1.0;
  Eigen::MatrixXd a;  // load coefficient, 0 if infeasible
  Eigen::MatrixXd c;
  std::vector<std::vector<int>> feasible;

  double Phi(double psi) const {
    if (alpha == 1.0) return psi > 0.0 ? -psi * std::log(psi) : 0.0;
    const double v = std::pow(psi, alpha);
    return alpha < 1.0 ? v : -v;
  }
  double DPhi(double psi) const {
    if (alpha == 1.0) return psi > 0.0 ? -std::log(psi) - 1.0 : kInf;
    if (alpha < 1.0) return psi > 0.0 ? alpha * std::pow(psi, alpha - 1.0) : kInf;
    return -alpha * std::pow(psi, alpha - 1.0);
  }
  // Load at which a * phi'(load) + c_kb = nu.
  double LoadFor(double nu, double a_kb, double c_kb) const {
    const double d = (nu - c_kb) / a_kb;
    if (alpha == 1.0) return std::exp(-d - 1.0);
    if (alpha < 1.0) return d > 0.0 ? std::pow(d / alpha, 1.0 / (alpha - 1.0)) : kInf;
    return d < 0.0 ? std::pow(-d / alpha, 1.0 / (alpha - 1.0)) : 0.0;
  }
  double Objective(const Eigen::MatrixXd& x, const std::vector<double>& psi) const {
    double f = 0.0;
    for (double p : psi) f += Phi(p);
    for (size_t k = 0; k < feasible.size(); ++k) {
      for (int b : feasible[k]) f += c(k, b) * x(k, b);
    }
    return f;
  }
};

// Best row of user k with the others fixed. psi_other excludes user k;
// nu is the row multiplier, used as the starting guess and updated.
void SolveRow(const Relaxation& rel, int k, const std::vector<double>& psi_other,
              Eigen::MatrixXd& x, double& nu) {
  const std::vector<int>& tps = rel.feasible[k];
  if (tps.size() == 1) {
    x(k, tps[0]) = 1.0;
    return;
  }
  // Row sum at multiplier v and its derivative.
  auto total = [&](double v, double* slope) {
    double sum = 0.0, d = 0.0;
    for (int b : tps) {
      const double a = rel.a(k, b);
      const double load = rel.LoadFor(v, a, rel.c(k, b));
      if (!(load > psi_other[b])) continue;
      sum += (load - psi_other[b]) / a;
      if (rel.alpha == 1.0) {
        d -= load / (a * a);
      } else {
        d += load / ((rel.alpha - 1.0) * (v - rel.c(k, b)) * a);
      }
    }
    if (slope) *slope = d;
    return sum;
  };
  // The multiplier lies between the smallest marginal value at x_kb = 1
  // and the largest at x_kb = 0.
  double lo = kInf, hi = -kInf;
  for (int b : tps) {
    const double a = rel.a(k, b);
    lo = std::min(lo, a * rel.DPhi(psi_other[b] + a) + rel.c(k, b));
    hi = std::max(hi, a * rel.DPhi(psi_other[b]) + rel.c(k, b));
  }
  if (!std::isfinite(hi)) {
    double step = std::max(1.0, std::abs(lo));
    hi = lo + step;
    while (total(hi, nullptr) > 1.0) {
      step *= 2.0;
      hi = lo + step;
    }
  }
  double v = nu > lo && nu < hi ? nu : 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double slope = 0.0;
    const double r = total(v, &slope) - 1.0;
    if (std::abs(r) <= 1e-14) break;
    if (r > 0.0) lo = v; else hi = v;
    if (hi - lo <= 1e-14 * std::max(std::abs(lo), std::abs(hi))) break;
    double next = slope < 0.0 ? v - r / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    v = next;
  }
  nu = v;
  double sum = 0.0;
  for (int b : tps) {
    const double load = rel.LoadFor(v, rel.a(k, b), rel.c(k, b));
    x(k, b) = std::max(0.0, (load - psi_other[b]) / rel.a(k, b));
    sum += x(k, b);
  }
  if (!(sum > 0.0)) {
    // Everything collapsed onto the boundary: take the best marginal.
    int best = tps[0];
    double best_v = -kInf;
    for (int b : tps) {
      const double m = rel.a(k, b) * rel.DPhi(psi_other[b]) + rel.c(k, b);
      if (m > best_v) {
        best_v = m;
        best = b;
      }
    }
    for (int b : tps) x(k, b) = b == best ? 1.0 : 0.0;
    return;
  }
  for (int b : tps) x(k, b) /= sum;
}

// F(x) + gap >= max F, from linearizing at x.
double FrankWolfeGap(const Relaxation& rel, const Eigen::MatrixXd& x,
                     const std::vector<double>& psi) {
  double gap = 0.0;
  for (size_t k = 0; k < rel.feasible.size(); ++k) {
    double best = -kInf, at = 0.0;
    for (int b : rel.feasible[k]) {
      const double grad = rel.a(k, b) * rel.DPhi(psi[b]) + rel.c(k, b);
      best = std::max(best, grad);
      at += grad * x(k, b);
    }
    gap += best - at;
  }
  return std::max(0.0, gap);
}

double Direction(const UtilityConfig& util) {
  return util.alpha() <= 1.0 ? 1.0 : -1.0;
}

bool Improves(double gain, double reference, double threshold) {
  return gain >= threshold * std::max(std::abs(reference), 1e-300);
}

}  // namespace

void JointConfig::Validate() const {
  if (!(improvement_threshold > 0.0)) {
    throw ValidationError("improvement_threshold must be > 0");
  }
  if (max_rounds < 1) throw ValidationError("max_rounds must be >= 1");
}

double Score(const SetFunction& fn, const Association& assoc) {
  const double g = fn.Value(assoc);
  return fn.maximize() ? g : -g;
}

double Score(const Association& assoc, const ChannelGains& gains,
             const UtilityConfig& util, const ActivationVector& rho,
             const FadingSamples& fading) {
  return Score(SetFunction(ComputeRateMatrix(gains, rho, fading), util), assoc);
}

void RelaxConfig::Validate() const {
  if (!(tol > 0.0) || max_sweeps < 1) {
    throw ValidationError("bad relaxation settings");
  }
}

RelaxedAssociation RelaxedAssociationSolve(const RateMatrix& rates,
                                           const UtilityConfig& util,
                                           const RelaxConfig& cfg) {
  cfg.Validate();
  const int num_users = rates.num_users();
  const int num_tps = rates.num_tps();
  if (util.num_users() != num_users) {
    throw ValidationError("weights and rate matrix disagree on K");
  }
  Relaxation rel;
  rel.alpha = util.alpha();
  rel.a = Eigen::MatrixXd::Zero(num_users, num_tps);
  rel.c = Eigen::MatrixXd::Zero(num_users, num_tps);
  rel.feasible.resize(num_users);
  for (int k = 0; k < num_users; ++k) {
    const double w = util.weight(k);
    for (int b = 0; b < num_tps; ++b) {
      const double r = rates(k, b);
      if (!(r > 0.0)) continue;
      if (rel.alpha == 1.0) {
        rel.a(k, b) = w;
        rel.c(k, b) = w * std::log(w * r);
      } else {
        rel.a(k, b) = TildeWeight(w, rel.alpha) *
                      std::pow(r, 1.0 / rel.alpha - 1.0);
      }
      rel.feasible[k].push_back(b);
    }
    if (rel.feasible[k].empty()) {
      throw ValidationError("user " + std::to_string(k) + " has no feasible TP");
    }
  }

  // Start: every user on its best single TP given the others so far.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(num_users, num_tps);
  std::vector<double> psi(num_tps, 0.0);
  std::vector<double> nu(num_users, std::numeric_limits<double>::quiet_NaN());
  RelaxedAssociation out;
  double f = 0.0;
  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    for (int k = 0; k < num_users; ++k) {
      for (int b : rel.feasible[k]) psi[b] -= rel.a(k, b) * x(k, b);
      for (int b : rel.feasible[k]) psi[b] = std::max(psi[b], 0.0);
      SolveRow(rel, k, psi, x, nu[k]);
      for (int b : rel.feasible[k]) psi[b] += rel.a(k, b) * x(k, b);
    }
    // Fresh loads against drift.
    std::fill(psi.begin(), psi.end(), 0.0);
    for (int k = 0; k < num_users; ++k) {
      for (int b : rel.feasible[k]) psi[b] += rel.a(k, b) * x(k, b);
    }
    f = rel.Objective(x, psi);
    out.gap = FrankWolfeGap(rel, x, psi);
    out.sweeps = sweep + 1;
    if (out.gap <= cfg.tol * std::max(std::abs(f), 1e-300)) {
      out.converged = true;
      break;
    }
  }
  out.x = x;
  out.value = FractionalG(x, rates, util);
  out.bound = util.alpha() <= 1.0 ? f + out.gap : -f - out.gap;
  return out;
}

Association RoundAssociation(const Eigen::MatrixXd& x) {
  const int num_users = x.rows();
  const int num_tps = x.cols();
  Association out(num_users, num_tps);
  for (int k = 0; k < num_users; ++k) {
    int best = -1;
    for (int b = 0; b < num_tps; ++b) {
      if (x(k, b) > 0.0 && (best < 0 || x(k, b) > x(k, best))) best = b;
    }
    if (best < 0) {
      throw ValidationError("user " + std::to_string(k) + " has an empty row");
    }
    out.Assign(k, best);
  }
  return out;
}

Association MaxSnrAssociation(const ChannelGains& gains) {
  gains.Validate();
  Association out(gains.num_users(), gains.num_tps());
  for (int k = 0; k < gains.num_users(); ++k) {
    int best = 0;
    for (int b = 1; b < gains.num_tps(); ++b) {
      if (gains.slow_gain(k, b) > gains.slow_gain(k, best)) best = b;
    }
    out.Assign(k, best);
  }
  return out;
}

JointResult JointGlsAf(const ChannelGains& gains, const UtilityConfig& util,
                       const GlsConfig& gls, const AfConfig& af,
                       const JointConfig& cfg) {
  gls.Validate();
  af.Validate();
  cfg.Validate();
  gains.Validate();
  const FadingSamples fading = AfSamples(gains, af);
  JointResult res;
  res.rho = ActivationVector::Ones(gains.num_tps());
  RateMatrix rates = ComputeRateMatrix(gains, res.rho, fading);
  bool have = false;
  double reference = 0.0;
  for (int round = 1; round <= cfg.max_rounds; ++round) {
    res.rounds = round;
    const SetFunction fn(rates, util);
    fn.CheckEveryUserFeasible();
    Association cand = RunGls(fn, gls).association();
    if (have) {
      const LocalSearchResult ls = LocalSearchStage(fn, res.association, gls);
      if (fn.Better(fn.Value(ls.association), fn.Value(cand))) {
        cand = ls.association;
      }
    }
    res.association = cand;
    const double after_gls = Score(fn, res.association);
    res.history.push_back({round, "gls", after_gls, 0.0, res.rho.rho});
    if (!have) reference = after_gls;
    have = true;

    const AfResult a = OptimizeAf(res.association, gains, util, af, res.rho);
    res.rho = a.rho;
    rates = ComputeRateMatrix(gains, res.rho, fading);
    res.score = Score(SetFunction(rates, util), res.association);
    res.history.push_back({round, "af", res.score, 0.0, res.rho.rho});
    const bool improved =
        Improves(res.score - reference, reference, cfg.improvement_threshold);
    reference = res.score;
    if (!improved) {
      res.converged = true;
      break;
    }
  }
  return res;
}

JointResult JointRaAf(const ChannelGains& gains, const UtilityConfig& util,
                      const AfConfig& af, const JointConfig& cfg) {
  af.Validate();
  cfg.Validate();
  gains.Validate();
  const FadingSamples fading = AfSamples(gains, af);
  const double dir = Direction(util);
  JointResult res;
  res.rho = ActivationVector::Ones(gains.num_tps());
  RateMatrix rates = ComputeRateMatrix(gains, res.rho, fading);
  Eigen::MatrixXd x;
  bool have = false;
  double reference = 0.0;

  // Score of the rounded association with idle TPs switched off.
  auto rounded = [&](const Eigen::MatrixXd& xf, const ActivationVector& rho,
                     Association& assoc_out, ActivationVector& rho_out) {
    assoc_out = RoundAssociation(xf);
    rho_out = AfFeasibleStart(assoc_out, rho, af.rho_min);
    return Score(assoc_out, gains, util, rho_out, fading);
  };
  Association assoc;
  ActivationVector rho_rounded;

  for (int round = 1; round <= cfg.max_rounds; ++round) {
    res.rounds = round;
    const RelaxedAssociation rel = RelaxedAssociationSolve(rates, util);
    if (!have || dir * (rel.value - FractionalG(x, rates, util)) > 0.0) {
      x = rel.x;
    }
    const double after_relax = dir * FractionalG(x, rates, util);
    res.history.push_back({round, "relax", after_relax,
                           rounded(x, res.rho, assoc, rho_rounded), res.rho.rho});
    if (!have) reference = after_relax;
    have = true;

    const AfResult a = OptimizeAfFractional(x, gains, util, af, res.rho);
    res.rho = a.rho;
    rates = ComputeRateMatrix(gains, res.rho, fading);
    const double after_af = dir * FractionalG(x, rates, util);
    res.history.push_back({round, "af", after_af,
                           rounded(x, res.rho, assoc, rho_rounded), res.rho.rho});
    const bool improved =
        Improves(after_af - reference, reference, cfg.improvement_threshold);
    reference = after_af;
    if (!improved) {
      res.converged = true;
      break;
    }
  }
  res.score = rounded(x, res.rho, res.association, rho_rounded);
  res.rho = rho_rounded;
  return res;
}

}  // namespace hetnet
