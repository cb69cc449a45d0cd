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

// The association set function g(., alpha) over the ground set of feasible
// (user, TP) tuples, its O(1) marginals from cached TP loads, and the load
// bookkeeping shared by the centralized and distributed solvers.
//
//   alpha != 1:  g(G) = sum_b (sum_{(k,b) in G} Theta_kb)^alpha
//   alpha == 1:  g(G) = sum_{(k,b) in G} w_k ln(w_k R_kb) - sum_b W_b ln W_b
//
// with W_b the weight on TP b and 0 ln 0 = 0. For alpha <= 1 larger is
// better, for alpha > 1 smaller is better.

#ifndef HETNET_SETFN_H_
#define HETNET_SETFN_H_

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "hetnet/association.h"
#include "hetnet/rate.h"

namespace hetnet {

// Per-TP broadcast: Psi_b (sum of Theta, i.e. the weight sum W_b when
// alpha = 1) and, for alpha = 1, the sum of w_k ln(w_k R_kb).
struct LoadVector {
  std::vector<double> psi;
  std::vector<double> log_term;
  std::vector<int> count;

  explicit LoadVector(int num_tps = 0)
      : psi(num_tps, 0.0), log_term(num_tps, 0.0), count(num_tps, 0) {}
};

class SetFunction {
 public:
  SetFunction(const RateMatrix& rates, const UtilityConfig& util);
  // alpha != 1 only needs Theta. Non-positive entries are infeasible.
  static SetFunction FromTheta(const Eigen::MatrixXd& theta, double alpha);

  double alpha() const { return alpha_; }
  bool maximize() const { return alpha_ <= 1.0; }
  int num_users() const { return static_cast<int>(theta_.rows()); }
  int num_tps() const { return static_cast<int>(theta_.cols()); }
  bool IsFeasible(int k, int b) const { return feasible_(k, b); }
  double theta(int k, int b) const { return theta_(k, b); }
  // w_k ln(w_k R_kb); alpha = 1 only.
  double log_term(int k, int b) const { return log_term_(k, b); }
  const Eigen::MatrixXd& theta() const { return theta_; }

  // Feasible tuples in lexicographic order.
  std::vector<Tuple> GroundSet() const;
  // Throws ValidationError naming the first user without a feasible TP.
  void CheckEveryUserFeasible() const;

  double Value(const Association& assoc) const;
  // Any set of feasible tuples, several per user allowed (used for the
  // local-search certificate).
  double Value(std::span<const Tuple> tuples) const;
  // The "better" test in the regime's direction.
  bool Better(double a, double b) const { return maximize() ? a > b : a < b; }

  LoadVector Loads(const Association& assoc) const;
  LoadVector Loads(std::span<const Tuple> tuples) const;
  double ValueFromLoads(const LoadVector& loads) const;

  // Load bookkeeping for one tuple entering / leaving a TP.
  void AddToLoads(LoadVector& loads, int k, int b) const;
  void RemoveFromLoads(LoadVector& loads, int k, int b) const;

  // Contribution of TP b alone; g is the sum over b.
  double TpTerm(double psi, double log_term) const;

  // g(G + (k,b)) - g(G) given the loads of G. Throws MatroidError if k is
  // already associated or (k,b) is infeasible.
  double MarginalAdd(const Association& assoc, const LoadVector& loads, int k,
                     int b) const;
  // Same without the matroid checks; k must not be counted in loads[b].
  double MarginalAddUnchecked(const LoadVector& loads, int k, int b) const;
  // g(G - from + to) - g(G). Throws MatroidError on mismatched users, from
  // not in G, to infeasible, or from == to.
  double MarginalSwap(const Association& assoc, const LoadVector& loads,
                      Tuple from, Tuple to) const;
  double MarginalSwapUnchecked(const LoadVector& loads, int k, int from,
                               int to) const;

 private:
  SetFunction() = default;
  void CheckFeasible(int k, int b) const;

  double alpha_ = 1.0;
  Eigen::MatrixXd theta_;
  Eigen::MatrixXd log_term_;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> feasible_;
};

// Association plus its loads, updated together.
class AssociationState {
 public:
  AssociationState(const SetFunction& fn, Association assoc);
  explicit AssociationState(const SetFunction& fn);

  const SetFunction& fn() const { return *fn_; }
  const Association& association() const { return assoc_; }
  const LoadVector& loads() const { return loads_; }
  double Value() const { return fn_->ValueFromLoads(loads_); }

  double MarginalAdd(int k, int b) const {
    return fn_->MarginalAdd(assoc_, loads_, k, b);
  }
  double MarginalSwap(int k, int to) const {
    return fn_->MarginalSwap(assoc_, loads_, {k, assoc_.tp_of(k)}, {k, to});
  }
  void Add(int k, int b);
  void Remove(int k);
  void Move(int k, int to);

 private:
  const SetFunction* fn_;
  Association assoc_;
  LoadVector loads_;
};

// g of a fractional association x (K x B): Psi_b = sum_k x_kb Theta_kb,
// and for alpha = 1, sum x_kb w_k ln(w_k R_kb) - sum_b W_b ln W_b with
// W_b = sum_k x_kb w_k. Entries with x_kb = 0 are skipped; x_kb > 0 on a
// zero rate gives -inf (alpha <= 1) or +inf (alpha > 1).
double FractionalG(const Eigen::MatrixXd& x, const RateMatrix& rates,
                   const UtilityConfig& util);

}  // namespace hetnet

#endif  // HETNET_SETFN_H_
