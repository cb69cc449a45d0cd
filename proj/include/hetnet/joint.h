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

// Alternating association / activation-fraction optimization (GLS-AF and
// the relaxed RA-AF variant) and the RU, RRA and MSA baselines.
//
// Histories use one "score" for every alpha: the system utility, which is
// g for alpha <= 1 and -g for alpha > 1, so larger is always better.

#ifndef HETNET_JOINT_H_
#define HETNET_JOINT_H_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hetnet/afopt.h"
#include "hetnet/association.h"
#include "hetnet/convex.h"
#include "hetnet/gls.h"
#include "hetnet/model.h"
#include "hetnet/rate.h"
#include "hetnet/setfn.h"

namespace hetnet {

struct JointConfig {
  // Relative score gain per round below which the loop stops.
  double improvement_threshold = 1e-3;
  int max_rounds = 10;

  void Validate() const;
};

struct JointRecord {
  int round = 0;
  // "gls" or "af" (GLS-AF); "relax" or "af" (RA-AF).
  std::string stage;
  double score = 0.0;
  // RA-AF only: score of the rounded association (idle TPs off).
  double rounded_score = 0.0;
  std::vector<double> rho;
};

struct JointResult {
  Association association;
  ActivationVector rho;
  std::vector<JointRecord> history;
  int rounds = 0;
  bool converged = false;
  // Score of (association, rho).
  double score = 0.0;
};

double Score(const SetFunction& fn, const Association& assoc);
double Score(const Association& assoc, const ChannelGains& gains,
             const UtilityConfig& util, const ActivationVector& rho,
             const FadingSamples& fading);

struct RelaxConfig {
  // Stop when the Frank-Wolfe gap is below tol * |objective|.
  double tol = 1e-8;
  int max_sweeps = 20000;

  void Validate() const;
};

struct RelaxedAssociation {
  // K x B, rows on the simplex; zero on infeasible tuples.
  Eigen::MatrixXd x;
  // Fractional g at x.
  double value = 0.0;
  // Frank-Wolfe gap at x (in score units, >= 0).
  double gap = 0.0;
  // value +- gap: above the relaxed optimum (and so above g*) for
  // alpha <= 1, below it for alpha > 1. Valid at any x.
  double bound = 0.0;
  int sweeps = 0;
  bool converged = false;
};

// Continuous relaxation of the association problem over row simplices,
// solved by cyclic exact maximization over one user's row at a time.
// Throws ValidationError if a user has no feasible TP.
RelaxedAssociation RelaxedAssociationSolve(const RateMatrix& rates,
                                           const UtilityConfig& util,
                                           const RelaxConfig& cfg = {});

// Row argmax, ties to the lowest TP.
Association RoundAssociation(const Eigen::MatrixXd& x);
// Strongest slow gain per user, ties to the lowest TP.
Association MaxSnrAssociation(const ChannelGains& gains);

// Starts at rho = 1. Each round: association at fixed rho (better of a
// fresh GLS run and local search from the current association), then AF
// at fixed association warm-started from the current rho.
JointResult JointGlsAf(const ChannelGains& gains, const UtilityConfig& util,
                       const GlsConfig& gls, const AfConfig& af,
                       const JointConfig& cfg);

// Same loop with the relaxed association and fractional AF; every TP stays
// active until the final rounding, after which TPs left without users are
// switched off.
JointResult JointRaAf(const ChannelGains& gains, const UtilityConfig& util,
                      const AfConfig& af, const JointConfig& cfg);

}  // namespace hetnet

#endif  // HETNET_JOINT_H_
