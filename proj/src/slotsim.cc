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
#include "hetnet/slotsim.h"

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <thread>

#include "hetnet/error.h"
#include "hetnet/random.h"

namespace hetnet {
namespace {

// Stream tags so patterns and fading never share a seed.
constexpr uint64_t kPatternTag = 1;
constexpr uint64_t kFadingTag = 2;

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> MakePattern(
    const ActivationVector& rho, int slots, OnOffMode mode, uint64_t seed) {
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> on(rho.size(), slots);
  for (int b = 0; b < rho.size(); ++b) {
    if (mode == OnOffMode::kDeterministic) {
      const int n = static_cast<int>(std::lround(rho[b] * slots));
      for (int t = 0; t < slots; ++t) on(b, t) = t < n;
    } else {
      Rng rng(MixSeed({seed, kPatternTag, static_cast<uint64_t>(b)}));
      for (int t = 0; t < slots; ++t) on(b, t) = rng.Bernoulli(rho[b]);
    }
  }
  return on;
}

RateMatrix ConservativeRates(const ChannelGains& gains,
                             const ActivationVector& rho,
                             const SlotSimConfig& cfg, uint64_t seed) {
  const int mc = gains.fading_model == FadingModel::kNone ? 0 : cfg.mc_samples;
  return ComputeRateMatrix(gains, rho, mc, seed);
}

FramePlan PlanFrom(const Association& assoc, const ActivationVector& rho,
                   const RateMatrix& rates, const UtilityConfig& util,
                   const SlotSimConfig& cfg, uint64_t seed) {
  FramePlan plan;
  plan.slots_per_frame = cfg.slots_per_frame;
  plan.on_off = MakePattern(rho, cfg.slots_per_frame, cfg.mode, seed);
  plan.association = assoc;
  plan.rho = rho;
  plan.gamma = KktGamma(assoc, rates, util);
  plan.warm_rate.assign(rates.num_users(), 0.0);
  for (int k = 0; k < rates.num_users(); ++k) {
    if (assoc.IsAssigned(k)) {
      const int b = assoc.tp_of(k);
      plan.warm_rate[k] = plan.gamma.gamma(k, b) * rates(k, b);
    }
  }
  return plan;
}

}  // namespace

std::string ToString(Scheduler s) {
  return s == Scheduler::kFractionalRR ? "rr" : "gradient";
}

Scheduler ParseScheduler(const std::string& s) {
  if (s == "rr") return Scheduler::kFractionalRR;
  if (s == "gradient") return Scheduler::kGradient;
  throw ValidationError("unknown scheduler '" + s + "'");
}

void SlotSimConfig::Validate() const {
  if (slots_per_frame < 1) throw ValidationError("slots_per_frame must be >= 1");
  if (mc_samples < 1) throw ValidationError("mc_samples must be >= 1");
  if (frames < 1) throw ValidationError("frames must be >= 1");
}

void FramePlan::Validate(const ChannelGains& gains) const {
  const int k = gains.num_users(), b = gains.num_tps();
  if (slots_per_frame < 1 || on_off.cols() != slots_per_frame ||
      on_off.rows() != b) {
    throw ValidationError("on_off pattern must be B x slots_per_frame");
  }
  if (association.num_users() != k || association.num_tps() != b) {
    throw ValidationError("association does not match the gains");
  }
  if (rho.size() != b) throw ValidationError("rho size does not match the gains");
  rho.Validate();
  if (gamma.gamma.rows() != k || gamma.gamma.cols() != b ||
      static_cast<int>(warm_rate.size()) != k) {
    throw ValidationError("gamma / warm_rate do not match the gains");
  }
  for (int u = 0; u < k; ++u) {
    if (!association.IsAssigned(u)) continue;
    if (!(warm_rate[u] > 0.0)) {
      throw ValidationError("warm rate of user " + std::to_string(u) +
                            " must be positive");
    }
  }
}

FramePlan MakeFramePlan(const Association& assoc, const ActivationVector& rho,
                        const ChannelGains& gains, const UtilityConfig& util,
                        const SlotSimConfig& cfg, uint64_t seed) {
  cfg.Validate();
  gains.Validate();
  rho.Validate();
  if (rho.size() != gains.num_tps()) {
    throw ValidationError("rho size does not match the gains");
  }
  FramePlan plan =
      PlanFrom(assoc, rho, ConservativeRates(gains, rho, cfg, seed), util, cfg, seed);
  plan.Validate(gains);
  return plan;
}

double GradientMetric(double weight, double rate, double average, double alpha) {
  return weight * rate * std::pow(average, -alpha);
}

FrameResult SimulateFrame(const FramePlan& plan, const ChannelGains& gains,
                          const UtilityConfig& util, Scheduler scheduler,
                          uint64_t seed, std::vector<SlotOutcome>* trace) {
  plan.Validate(gains);
  const int nk = gains.num_users(), nb = gains.num_tps();
  const int slots = plan.slots_per_frame;
  const bool fading = gains.fading_model != FadingModel::kNone;
  const Eigen::MatrixXd& beta = gains.slow_gain;
  const Association& assoc = plan.association;

  std::vector<Rng> fade_rng;
  for (int k = 0; k < nk; ++k) {
    fade_rng.emplace_back(MixSeed({seed, kFadingTag, static_cast<uint64_t>(k)}));
  }
  Eigen::MatrixXd h = Eigen::MatrixXd::Ones(nk, nb);
  std::vector<double> credit(nk, 0.0), sum(nk, 0.0);
  std::vector<double> inst(nk, 0.0);
  FrameResult out;
  out.served_slots.assign(nk, 0);
  if (trace) trace->clear();

  auto link_rate = [&](int k, int b, int t) {
    double interference = 0.0;
    for (int j = 0; j < nb; ++j) {
      if (j != b && plan.on_off(j, t)) interference += beta(k, j) * h(k, j);
    }
    return std::log1p(beta(k, b) * h(k, b) / (1.0 + interference));
  };

  for (int t = 0; t < slots; ++t) {
    if (fading) {
      for (int k = 0; k < nk; ++k) {
        for (int b = 0; b < nb; ++b) h(k, b) = fade_rng[k].Exponential();
      }
    }
    SlotOutcome slot;
    if (trace) {
      slot.served.assign(nk, false);
      slot.rate.assign(nk, 0.0);
    }
    for (int b = 0; b < nb; ++b) {
      const auto& users = assoc.users_on(b);
      if (users.empty() || !plan.on_off(b, t)) continue;
      int pick = -1;
      if (scheduler == Scheduler::kFractionalRR) {
        for (int k : users) {
          credit[k] += plan.gamma.gamma(k, b);
          if (pick < 0 || credit[k] > credit[pick]) pick = k;
        }
        credit[pick] -= 1.0;
        inst[pick] = link_rate(pick, b, t);
      } else {
        double best = 0.0;
        for (int k : users) {
          inst[k] = link_rate(k, b, t);
          const double avg = (plan.warm_rate[k] + sum[k]) / (t + 1);
          const double m = GradientMetric(util.weight(k), inst[k], avg, util.alpha());
          if (pick < 0 || m > best) {
            pick = k;
            best = m;
          }
        }
      }
      sum[pick] += inst[pick];
      ++out.served_slots[pick];
      if (trace) {
        slot.served[pick] = true;
        slot.rate[pick] = inst[pick];
      }
    }
    if (trace) {
      slot.average.resize(nk);
      for (int k = 0; k < nk; ++k) slot.average[k] = sum[k] / (t + 1);
      trace->push_back(std::move(slot));
    }
  }
  out.average_rate.resize(nk);
  for (int k = 0; k < nk; ++k) out.average_rate[k] = sum[k] / slots;
  return out;
}

VerifyReport VerifySolution(const Association& assoc,
                            const ActivationVector& rho,
                            const ChannelGains& gains,
                            const UtilityConfig& util, uint64_t seed,
                            const SlotSimConfig& cfg) {
  cfg.Validate();
  if (!assoc.IsComplete()) {
    throw ValidationError("verification needs every user associated");
  }
  const int nk = gains.num_users();
  VerifyReport rep;
  const RateMatrix rates = ConservativeRates(gains, rho, cfg, seed);
  const RateAllocation gamma = KktGamma(assoc, rates, util);
  rep.utility_conservative = SystemUtility(assoc, gamma, rates, util);
  rep.conservative_rate.resize(nk);
  for (int k = 0; k < nk; ++k) {
    rep.conservative_rate[k] = gamma.gamma(k, assoc.tp_of(k)) * rates(k, assoc.tp_of(k));
  }

  rep.rr_frames.resize(cfg.frames, nk);
  rep.gradient_frames.resize(cfg.frames, nk);
  auto run = [&](int f) {
    const uint64_t s = MixSeed({seed, static_cast<uint64_t>(f)});
    const FramePlan plan = PlanFrom(assoc, rho, rates, util, cfg, s);
    const FrameResult rr =
        SimulateFrame(plan, gains, util, Scheduler::kFractionalRR, s);
    const FrameResult gr = SimulateFrame(plan, gains, util, Scheduler::kGradient, s);
    for (int k = 0; k < nk; ++k) {
      rep.rr_frames(f, k) = rr.average_rate[k];
      rep.gradient_frames(f, k) = gr.average_rate[k];
    }
  };
  const int workers = std::max(
      1, std::min<int>(cfg.frames, static_cast<int>(std::thread::hardware_concurrency())));
  std::vector<std::future<void>> jobs;
  for (int w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (int f = w; f < cfg.frames; f += workers) run(f);
    }));
  }
  for (auto& j : jobs) j.get();

  rep.rr_rate.resize(nk);
  rep.gradient_rate.resize(nk);
  for (int k = 0; k < nk; ++k) {
    rep.rr_rate[k] = rep.rr_frames.col(k).mean();
    rep.gradient_rate[k] = rep.gradient_frames.col(k).mean();
  }
  rep.utility_actual_rr = SystemUtility(rep.rr_rate, util);
  rep.utility_actual_gradient = SystemUtility(rep.gradient_rate, util);
  return rep;
}

void WriteFrameRatesCsv(const VerifyReport& report, std::ostream& out) {
  out << "frame,user,scheduler,rate\n";
  out.precision(17);
  for (int f = 0; f < report.rr_frames.rows(); ++f) {
    for (int k = 0; k < report.rr_frames.cols(); ++k) {
      out << f << ',' << k << ",rr," << report.rr_frames(f, k) << '\n';
      out << f << ',' << k << ",gradient," << report.gradient_frames(f, k) << '\n';
    }
  }
}

}  // namespace hetnet
