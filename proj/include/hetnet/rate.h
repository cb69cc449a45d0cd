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

// Conservative per-link rates, the per-tuple gains Theta used by the set
// function, and the KKT time fractions gamma. All logs are natural.

#ifndef HETNET_RATE_H_
#define HETNET_RATE_H_

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hetnet/association.h"
#include "hetnet/model.h"

namespace hetnet {

struct ActivationVector {
  std::vector<double> rho;

  static ActivationVector Ones(int num_tps) {
    return {std::vector<double>(num_tps, 1.0)};
  }
  int size() const { return static_cast<int>(rho.size()); }
  double operator[](int b) const { return rho[b]; }
  // Throws ValidationError unless every entry is in [0, 1].
  void Validate() const;
};

// Fast-fading power draws. User k gets an S x B matrix drawn from its own
// stream MixSeed({seed, k}), shared by every TP of that user so that
// rates of one user are compared on common random numbers.
class FadingSamples {
 public:
  // Empty set: closed-form rates, no fading.
  FadingSamples() = default;
  static FadingSamples Rayleigh(int num_users, int num_tps, int num_samples,
                                uint64_t seed);
  static Eigen::MatrixXd RayleighForUser(int k, int num_tps, int num_samples,
                                         uint64_t seed);

  bool empty() const { return per_user_.empty(); }
  int num_samples() const { return num_samples_; }
  const Eigen::MatrixXd& user(int k) const { return per_user_[k]; }

 private:
  int num_samples_ = 0;
  std::vector<Eigen::MatrixXd> per_user_;
};

struct RateMatrix {
  Eigen::MatrixXd rate;
  // 0 for the closed form.
  int mc_samples = 0;

  int num_users() const { return static_cast<int>(rate.rows()); }
  int num_tps() const { return static_cast<int>(rate.cols()); }
  double operator()(int k, int b) const { return rate(k, b); }
};

struct GainMatrix {
  Eigen::MatrixXd theta;
  // feasible(k, b) iff R(k, b) > 0; infeasible entries of theta are 0.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> feasible;
  double alpha = 1.0;

  int num_users() const { return static_cast<int>(theta.rows()); }
  int num_tps() const { return static_cast<int>(theta.cols()); }
};

struct RateAllocation {
  Eigen::MatrixXd gamma;
};

// rho_b * E[ln(1 + beta_kb / (1 + sum_{b' != b} beta_kb' rho_b'))] for one
// user, with the expectation over `fading` (S x B power draws) or closed
// form when `fading` has no rows.
double ConservativeRateFromDraws(const Eigen::Ref<const Eigen::VectorXd>& beta,
                                 const std::vector<double>& rho, int b,
                                 const Eigen::MatrixXd& fading);

// mc_samples must be 0 exactly when the gains carry no fading. The draws are
// the same as those RateMatrix uses for user k with the same seed.
double ConservativeRate(const ChannelGains& gains, const ActivationVector& rho,
                        int k, int b, int mc_samples, uint64_t seed = 0);

RateMatrix ComputeRateMatrix(const ChannelGains& gains,
                             const ActivationVector& rho,
                             const FadingSamples& fading);
RateMatrix ComputeRateMatrix(const ChannelGains& gains,
                             const ActivationVector& rho, int mc_samples,
                             uint64_t seed = 0);

// Scale of the alpha-dependent gain: Theta = (w_tilde * R^(1/alpha - 1)) for
// alpha != 1, where w_tilde = (w / |alpha - 1|)^(1/alpha).
double TildeWeight(double w, double alpha);
GainMatrix ThetaMatrix(const RateMatrix& rates, const UtilityConfig& util);

RateAllocation KktGamma(const Association& assoc, const RateMatrix& rates,
                        const UtilityConfig& util);

// Per-user alpha-fair utility of rate r (r^(1-a)/(1-a), or ln r).
double AlphaUtility(double r, double alpha);

// sum_k w_k u(gamma_k R_k). Unassigned users are skipped. A served user
// with zero rate gives -infinity when alpha >= 1.
double SystemUtility(const Association& assoc, const RateAllocation& gamma,
                     const RateMatrix& rates, const UtilityConfig& util);
// Same with explicit per-user rates.
double SystemUtility(const std::vector<double>& user_rates,
                     const UtilityConfig& util);

}  // namespace hetnet

#endif  // HETNET_RATE_H_
