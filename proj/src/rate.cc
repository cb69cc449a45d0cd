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

#include "hetnet/rate.h"

#include <cmath>
#include <limits>
#include <string>

#include "hetnet/error.h"
#include "hetnet/random.h"

namespace hetnet {
namespace {

// Rates of one user to every TP. `fading` is S x B, or empty for the
// closed form. Interference is formed as (total - own) so that one pass
// over the TPs serves all B links.
Eigen::VectorXd UserRates(const Eigen::Ref<const Eigen::VectorXd>& beta,
                          const std::vector<double>& rho,
                          const Eigen::MatrixXd& fading) {
  const int num_tps = static_cast<int>(beta.size());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(num_tps);
  const bool closed_form = fading.rows() == 0;
  const int num_samples = closed_form ? 1 : static_cast<int>(fading.rows());
  Eigen::VectorXd power(num_tps);
  for (int s = 0; s < num_samples; ++s) {
    double total = 0.0;
    for (int b = 0; b < num_tps; ++b) {
      power[b] = closed_form ? beta[b] : beta[b] * fading(s, b);
      total += power[b] * rho[b];
    }
    for (int b = 0; b < num_tps; ++b) {
      if (rho[b] <= 0.0 || power[b] <= 0.0) continue;
      const double interference = std::max(0.0, total - power[b] * rho[b]);
      acc[b] += std::log1p(power[b] / (1.0 + interference));
    }
  }
  for (int b = 0; b < num_tps; ++b) {
    acc[b] = rho[b] * acc[b] / num_samples;
  }
  return acc;
}

void CheckSampleCount(const ChannelGains& gains, int mc_samples) {
  if (mc_samples < 0) throw ValidationError("mc_samples must be >= 0");
  if (gains.fading_model == FadingModel::kNone && mc_samples != 0) {
    throw ValidationError("mc_samples must be 0 without fading");
  }
  if (gains.fading_model != FadingModel::kNone && mc_samples == 0) {
    throw ValidationError("fading gains need mc_samples > 0");
  }
}

}  // namespace

void ActivationVector::Validate() const {
  for (size_t b = 0; b < rho.size(); ++b) {
    if (!(rho[b] >= 0.0 && rho[b] <= 1.0)) {
      throw ValidationError("rho[" + std::to_string(b) + "] = " +
                            std::to_string(rho[b]) + " outside [0, 1]");
    }
  }
}

Eigen::MatrixXd FadingSamples::RayleighForUser(int k, int num_tps,
                                               int num_samples,
                                               uint64_t seed) {
  Rng rng(MixSeed({seed, static_cast<uint64_t>(k)}));
  Eigen::MatrixXd draws(num_samples, num_tps);
  for (int s = 0; s < num_samples; ++s) {
    for (int b = 0; b < num_tps; ++b) draws(s, b) = rng.Exponential();
  }
  return draws;
}

FadingSamples FadingSamples::Rayleigh(int num_users, int num_tps,
                                      int num_samples, uint64_t seed) {
  if (num_samples < 1) throw ValidationError("need at least one sample");
  FadingSamples out;
  out.num_samples_ = num_samples;
  out.per_user_.reserve(num_users);
  for (int k = 0; k < num_users; ++k) {
    out.per_user_.push_back(RayleighForUser(k, num_tps, num_samples, seed));
  }
  return out;
}

double ConservativeRateFromDraws(const Eigen::Ref<const Eigen::VectorXd>& beta,
                                 const std::vector<double>& rho, int b,
                                 const Eigen::MatrixXd& fading) {
  return UserRates(beta, rho, fading)[b];
}

double ConservativeRate(const ChannelGains& gains, const ActivationVector& rho,
                        int k, int b, int mc_samples, uint64_t seed) {
  CheckSampleCount(gains, mc_samples);
  rho.Validate();
  Eigen::MatrixXd fading;
  if (mc_samples > 0) {
    fading = FadingSamples::RayleighForUser(k, gains.num_tps(), mc_samples,
                                            seed);
  }
  const Eigen::VectorXd beta = gains.slow_gain.row(k).transpose();
  return UserRates(beta, rho.rho, fading)[b];
}

RateMatrix ComputeRateMatrix(const ChannelGains& gains,
                             const ActivationVector& rho,
                             const FadingSamples& fading) {
  rho.Validate();
  if (rho.size() != gains.num_tps()) {
    throw ValidationError("rho length differs from B");
  }
  RateMatrix out;
  out.mc_samples = fading.num_samples();
  out.rate.resize(gains.num_users(), gains.num_tps());
  const Eigen::MatrixXd none;
  for (int k = 0; k < gains.num_users(); ++k) {
    const Eigen::VectorXd beta = gains.slow_gain.row(k).transpose();
    out.rate.row(k) =
        UserRates(beta, rho.rho, fading.empty() ? none : fading.user(k))
            .transpose();
  }
  return out;
}

RateMatrix ComputeRateMatrix(const ChannelGains& gains,
                             const ActivationVector& rho, int mc_samples,
                             uint64_t seed) {
  CheckSampleCount(gains, mc_samples);
  if (mc_samples == 0) return ComputeRateMatrix(gains, rho, FadingSamples());
  return ComputeRateMatrix(
      gains, rho,
      FadingSamples::Rayleigh(gains.num_users(), gains.num_tps(), mc_samples,
                              seed));
}

double TildeWeight(double w, double alpha) {
  if (alpha == 1.0) return w;
  return std::pow(w / std::abs(alpha - 1.0), 1.0 / alpha);
}

GainMatrix ThetaMatrix(const RateMatrix& rates, const UtilityConfig& util) {
  const double alpha = util.alpha();
  if (util.num_users() != rates.num_users()) {
    throw ValidationError("weights and rate matrix disagree on K");
  }
  GainMatrix out;
  out.alpha = alpha;
  out.theta = Eigen::MatrixXd::Zero(rates.num_users(), rates.num_tps());
  out.feasible.resize(rates.num_users(), rates.num_tps());
  for (int k = 0; k < rates.num_users(); ++k) {
    const double w = util.weight(k);
    const double w_tilde = TildeWeight(w, alpha);
    for (int b = 0; b < rates.num_tps(); ++b) {
      const double r = rates(k, b);
      const bool ok = r > 0.0;
      out.feasible(k, b) = ok;
      if (!ok) continue;
      out.theta(k, b) =
          alpha == 1.0 ? w : w_tilde * std::pow(r, 1.0 / alpha - 1.0);
    }
  }
  return out;
}

RateAllocation KktGamma(const Association& assoc, const RateMatrix& rates,
                        const UtilityConfig& util) {
  const double alpha = util.alpha();
  RateAllocation out;
  out.gamma = Eigen::MatrixXd::Zero(rates.num_users(), rates.num_tps());
  for (int b = 0; b < assoc.num_tps(); ++b) {
    const auto& users = assoc.users_on(b);
    if (users.empty()) continue;
    double sum = 0.0;
    for (int k : users) {
      const double r = rates(k, b);
      if (!(r > 0.0)) {
        throw ValidationError("user " + std::to_string(k) +
                              " has zero rate on its TP " + std::to_string(b));
      }
      const double v =
          std::pow(util.weight(k) * std::pow(r, 1.0 - alpha), 1.0 / alpha);
      out.gamma(k, b) = v;
      sum += v;
    }
    for (int k : users) out.gamma(k, b) /= sum;
  }
  return out;
}

double AlphaUtility(double r, double alpha) {
  if (alpha == 1.0) {
    return r > 0.0 ? std::log(r) : -std::numeric_limits<double>::infinity();
  }
  if (alpha > 1.0 && r <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::pow(r, 1.0 - alpha) / (1.0 - alpha);
}

double SystemUtility(const std::vector<double>& user_rates,
                     const UtilityConfig& util) {
  double total = 0.0;
  for (int k = 0; k < util.num_users(); ++k) {
    total += util.weight(k) * AlphaUtility(user_rates[k], util.alpha());
  }
  return total;
}

double SystemUtility(const Association& assoc, const RateAllocation& gamma,
                     const RateMatrix& rates, const UtilityConfig& util) {
  double total = 0.0;
  for (int k = 0; k < assoc.num_users(); ++k) {
    if (!assoc.IsAssigned(k)) continue;
    const int b = assoc.tp_of(k);
    total += util.weight(k) *
             AlphaUtility(gamma.gamma(k, b) * rates(k, b), util.alpha());
  }
  return total;
}

}  // namespace hetnet
