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

#include "hetnet/setfn.h"

#include <cmath>
#include <limits>
#include <string>

#include "hetnet/error.h"

namespace hetnet {
namespace {

double XLogX(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

SetFunction::SetFunction(const RateMatrix& rates, const UtilityConfig& util) {
  const GainMatrix gm = ThetaMatrix(rates, util);
  alpha_ = util.alpha();
  theta_ = gm.theta;
  feasible_ = gm.feasible;
  log_term_ = Eigen::MatrixXd::Zero(theta_.rows(), theta_.cols());
  if (alpha_ == 1.0) {
    for (int k = 0; k < num_users(); ++k) {
      const double w = util.weight(k);
      for (int b = 0; b < num_tps(); ++b) {
        if (feasible_(k, b)) log_term_(k, b) = w * std::log(w * rates(k, b));
      }
    }
  }
}

SetFunction SetFunction::FromTheta(const Eigen::MatrixXd& theta,
                                   double alpha) {
  if (alpha == 1.0) {
    throw ValidationError("alpha = 1 needs rates and weights, not Theta");
  }
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
  SetFunction fn;
  fn.alpha_ = alpha;
  fn.theta_ = theta;
  fn.log_term_ = Eigen::MatrixXd::Zero(theta.rows(), theta.cols());
  fn.feasible_.resize(theta.rows(), theta.cols());
  for (int k = 0; k < theta.rows(); ++k) {
    for (int b = 0; b < theta.cols(); ++b) {
      const double v = theta(k, b);
      fn.feasible_(k, b) = v > 0.0 && std::isfinite(v);
      if (!fn.feasible_(k, b)) fn.theta_(k, b) = 0.0;
    }
  }
  return fn;
}

std::vector<Tuple> SetFunction::GroundSet() const {
  std::vector<Tuple> out;
  for (int k = 0; k < num_users(); ++k) {
    for (int b = 0; b < num_tps(); ++b) {
      if (feasible_(k, b)) out.push_back({k, b});
    }
  }
  return out;
}

void SetFunction::CheckEveryUserFeasible() const {
  for (int k = 0; k < num_users(); ++k) {
    if (!feasible_.row(k).any()) {
      throw ValidationError("user " + std::to_string(k) +
                            " has no feasible TP");
    }
  }
}

void SetFunction::CheckFeasible(int k, int b) const {
  if (k < 0 || k >= num_users() || b < 0 || b >= num_tps()) {
    throw MatroidError("tuple (" + std::to_string(k) + ", " +
                       std::to_string(b) + ") out of range");
  }
  if (!feasible_(k, b)) {
    throw MatroidError("tuple (" + std::to_string(k) + ", " +
                       std::to_string(b) + ") is not in the ground set");
  }
}

double SetFunction::TpTerm(double psi, double log_term) const {
  if (alpha_ == 1.0) return log_term - XLogX(psi);
  return psi > 0.0 ? std::pow(psi, alpha_) : 0.0;
}

void SetFunction::AddToLoads(LoadVector& loads, int k, int b) const {
  loads.psi[b] += theta_(k, b);
  loads.log_term[b] += log_term_(k, b);
  ++loads.count[b];
}

void SetFunction::RemoveFromLoads(LoadVector& loads, int k, int b) const {
  if (--loads.count[b] == 0) {
    loads.psi[b] = 0.0;
    loads.log_term[b] = 0.0;
    return;
  }
  loads.psi[b] = std::max(0.0, loads.psi[b] - theta_(k, b));
  loads.log_term[b] -= log_term_(k, b);
}

LoadVector SetFunction::Loads(std::span<const Tuple> tuples) const {
  LoadVector loads(num_tps());
  for (const Tuple& e : tuples) {
    CheckFeasible(e.user, e.tp);
    AddToLoads(loads, e.user, e.tp);
  }
  return loads;
}

LoadVector SetFunction::Loads(const Association& assoc) const {
  const std::vector<Tuple> tuples = assoc.Tuples();
  return Loads(tuples);
}

double SetFunction::ValueFromLoads(const LoadVector& loads) const {
  double total = 0.0;
  for (int b = 0; b < num_tps(); ++b) {
    if (loads.count[b] > 0) total += TpTerm(loads.psi[b], loads.log_term[b]);
  }
  return total;
}

double SetFunction::Value(std::span<const Tuple> tuples) const {
  return ValueFromLoads(Loads(tuples));
}

double SetFunction::Value(const Association& assoc) const {
  return ValueFromLoads(Loads(assoc));
}

double SetFunction::MarginalAddUnchecked(const LoadVector& loads, int k,
                                         int b) const {
  const double psi = loads.psi[b];
  const double th = theta_(k, b);
  if (alpha_ == 1.0) {
    return log_term_(k, b) + XLogX(psi) - XLogX(psi + th);
  }
  return std::pow(psi + th, alpha_) - (psi > 0.0 ? std::pow(psi, alpha_) : 0.0);
}

double SetFunction::MarginalAdd(const Association& assoc,
                                const LoadVector& loads, int k, int b) const {
  CheckFeasible(k, b);
  if (assoc.IsAssigned(k)) {
    throw MatroidError("user " + std::to_string(k) + " already holds TP " +
                       std::to_string(assoc.tp_of(k)));
  }
  return MarginalAddUnchecked(loads, k, b);
}

double SetFunction::MarginalSwapUnchecked(const LoadVector& loads, int k,
                                          int from, int to) const {
  const bool alone = loads.count[from] == 1;
  const double psi_from = loads.psi[from];
  const double psi_from_after =
      alone ? 0.0 : std::max(0.0, psi_from - theta_(k, from));
  const double log_from = loads.log_term[from];
  const double log_from_after = alone ? 0.0 : log_from - log_term_(k, from);
  const double leave =
      TpTerm(psi_from_after, log_from_after) - TpTerm(psi_from, log_from);
  const double psi_to = loads.psi[to];
  const double log_to = loads.log_term[to];
  const double join = TpTerm(psi_to + theta_(k, to), log_to + log_term_(k, to)) -
                      TpTerm(psi_to, log_to);
  return leave + join;
}

double SetFunction::MarginalSwap(const Association& assoc,
                                 const LoadVector& loads, Tuple from,
                                 Tuple to) const {
  if (from.user != to.user) {
    throw MatroidError("swap must move one user: got users " +
                       std::to_string(from.user) + " and " +
                       std::to_string(to.user));
  }
  if (from.user < 0 || from.user >= num_users() ||
      !assoc.Contains(from)) {
    throw MatroidError("swap source is not in the association");
  }
  if (from.tp == to.tp) throw MatroidError("swap to the same TP");
  CheckFeasible(to.user, to.tp);
  return MarginalSwapUnchecked(loads, from.user, from.tp, to.tp);
}

AssociationState::AssociationState(const SetFunction& fn, Association assoc)
    : fn_(&fn), assoc_(std::move(assoc)), loads_(fn.Loads(assoc_)) {}

AssociationState::AssociationState(const SetFunction& fn)
    : AssociationState(fn, Association(fn.num_users(), fn.num_tps())) {}

void AssociationState::Add(int k, int b) {
  if (!fn_->IsFeasible(k, b)) {
    throw MatroidError("tuple (" + std::to_string(k) + ", " +
                       std::to_string(b) + ") is not in the ground set");
  }
  assoc_.Assign(k, b);
  fn_->AddToLoads(loads_, k, b);
}

void AssociationState::Remove(int k) {
  const int b = assoc_.tp_of(k);
  if (b == Association::kUnassigned) return;
  assoc_.Unassign(k);
  fn_->RemoveFromLoads(loads_, k, b);
}

void AssociationState::Move(int k, int to) {
  const int from = assoc_.tp_of(k);
  if (!fn_->IsFeasible(k, to)) {
    throw MatroidError("tuple (" + std::to_string(k) + ", " +
                       std::to_string(to) + ") is not in the ground set");
  }
  assoc_.Move(k, to);
  fn_->RemoveFromLoads(loads_, k, from);
  fn_->AddToLoads(loads_, k, to);
}

double FractionalG(const Eigen::MatrixXd& x, const RateMatrix& rates,
                   const UtilityConfig& util) {
  const int num_users = rates.num_users();
  const int num_tps = rates.num_tps();
  if (x.rows() != num_users || x.cols() != num_tps ||
      util.num_users() != num_users) {
    throw ValidationError("fractional association has the wrong shape");
  }
  const double alpha = util.alpha();
  const double inf = std::numeric_limits<double>::infinity();
  double g = 0.0;
  for (int b = 0; b < num_tps; ++b) {
    double psi = 0.0;
    for (int k = 0; k < num_users; ++k) {
      const double xk = x(k, b);
      if (xk == 0.0) continue;
      if (xk < 0.0) throw ValidationError("negative fractional association");
      const double w = util.weight(k);
      const double r = rates(k, b);
      if (!(r > 0.0)) return alpha > 1.0 ? inf : -inf;
      if (alpha == 1.0) {
        g += xk * w * std::log(w * r);
        psi += xk * w;
      } else {
        psi += xk * TildeWeight(w, alpha) * std::pow(r, 1.0 / alpha - 1.0);
      }
    }
    g += alpha == 1.0 ? -XLogX(psi) : std::pow(psi, alpha);
  }
  return g;
}

}  // namespace hetnet
