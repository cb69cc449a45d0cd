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

// Network instances: topology, noise-normalized slow-fading gains, utility
// weights and the synthetic scenario generator.

#ifndef HETNET_MODEL_H_
#define HETNET_MODEL_H_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace hetnet {

enum class TpKind { kMacro, kPico };

// Per-slot multiplicative fast fading applied to every slow gain.
enum class FadingModel {
  kNone,
  // i.i.d. unit-mean exponential power, |CN(0,1)|^2.
  kRayleighUnit,
};

std::string ToString(TpKind kind);
std::string ToString(FadingModel model);
TpKind ParseTpKind(const std::string& s);
FadingModel ParseFadingModel(const std::string& s);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Topology {
  int num_users = 0;
  int num_tps = 0;
  std::vector<TpKind> tp_kind;
  // Optional; only filled by the generator.
  std::vector<Point> tp_position;
  std::vector<Point> user_position;

  void Validate() const;
};

struct ChannelGains {
  // K x B mean channel gains, already divided by the noise power.
  Eigen::MatrixXd slow_gain;
  FadingModel fading_model = FadingModel::kNone;

  int num_users() const { return static_cast<int>(slow_gain.rows()); }
  int num_tps() const { return static_cast<int>(slow_gain.cols()); }

  // Entries finite and non-negative, every user reaches some TP. Errors name
  // the offending (k, b).
  void Validate() const;
};

// Fairness parameter and user weights. Weights must lie on the simplex.
class UtilityConfig {
 public:
  static constexpr double kWeightSumTolerance = 1e-12;

  UtilityConfig(double alpha, std::vector<double> weights);
  static UtilityConfig Uniform(double alpha, int num_users);

  double alpha() const { return alpha_; }
  const std::vector<double>& weights() const { return weights_; }
  double weight(int k) const { return weights_[k]; }
  int num_users() const { return static_cast<int>(weights_.size()); }

  UtilityConfig WithAlpha(double alpha) const {
    return UtilityConfig(alpha, weights_);
  }

 private:
  double alpha_;
  std::vector<double> weights_;
};

struct TpKindParams {
  double tx_power_dbm = 46.0;
  // Pathloss at 1 km and slope in tens of dB per decade of distance.
  double pathloss_db_at_1km = 128.1;
  double pathloss_exponent = 3.76;
  double shadowing_sigma_db = 8.0;
  double min_distance_m = 35.0;
};

// Parameters of the synthetic single-site layout: `num_sectors` discs
// arranged around the site, each holding one macro TP (at the site) plus
// uniformly dropped picos and users.
struct ScenarioConfig {
  uint64_t rng_seed = 1;
  int num_sectors = 3;
  int picos_per_sector = 10;
  int users_per_sector = 33;
  double sector_radius_m = 250.0;
  double sector_offset_m = 250.0;
  TpKindParams macro{46.0, 128.1, 3.76, 8.0, 35.0};
  TpKindParams pico{30.0, 140.7, 3.67, 10.0, 10.0};
  // Thermal noise over 10 MHz plus a 9 dB noise figure.
  double noise_power_dbm = -95.0;
  FadingModel fading_model = FadingModel::kNone;

  void Validate() const;
};

struct Instance {
  Topology topology;
  ChannelGains gains;
  UtilityConfig utility;
};

std::pair<Topology, ChannelGains> GenerateTopology(const ScenarioConfig& cfg);

// Topology plus uniform weights.
Instance GenerateInstance(const ScenarioConfig& cfg, double alpha);

Instance LoadInstance(const std::filesystem::path& path);
void SaveInstance(const Instance& instance, const std::filesystem::path& path);
// String forms of the above, used by the file variants and by tests.
Instance ParseInstance(const std::string& json_text);
std::string SerializeInstance(const Instance& instance);

ScenarioConfig LoadScenarioConfig(const std::filesystem::path& path);
ScenarioConfig ParseScenarioConfig(const std::string& json_text);
std::string SerializeScenarioConfig(const ScenarioConfig& cfg);

void WriteGainsCsv(const ChannelGains& gains, std::ostream& out);

}  // namespace hetnet

#endif  // HETNET_MODEL_H_
