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

#include "hetnet/model.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "hetnet/error.h"
#include "hetnet/random.h"
#include "json.hpp"

namespace hetnet {
namespace {

using nlohmann::json;

double DbToLinear(double db) { return std::pow(10.0, db / 10.0); }

// Uniform point in a disc of `radius` around `center`, at least `min_dist`
// from `avoid` (rejection sampling; the excluded area is tiny).
Point DropInDisc(Rng& rng, Point center, double radius, Point avoid,
                 double min_dist) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double r = radius * std::sqrt(rng.Uniform());
    const double a = 2.0 * std::numbers::pi * rng.Uniform();
    Point p{center.x + r * std::cos(a), center.y + r * std::sin(a)};
    if (std::hypot(p.x - avoid.x, p.y - avoid.y) >= min_dist) return p;
  }
  throw ValidationError("cannot drop a node: disc too small for min distance");
}

void CheckPositive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ValidationError(what + " must be positive and finite");
  }
}

template <typename T>
T Field(const json& j, const char* name) {
  if (!j.contains(name)) {
    throw ParseError(std::string("missing field '") + name + "'");
  }
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("field '") + name + "': " + e.what());
  }
}

double NumberAt(const json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + " is not a number");
  return j.get<double>();
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json KindParamsToJson(const TpKindParams& p) {
  return json{{"tx_power_dbm", p.tx_power_dbm},
              {"pathloss_db_at_1km", p.pathloss_db_at_1km},
              {"pathloss_exponent", p.pathloss_exponent},
              {"shadowing_sigma_db", p.shadowing_sigma_db},
              {"min_distance_m", p.min_distance_m}};
}

TpKindParams KindParamsFromJson(const json& j, TpKindParams p) {
  if (!j.is_object()) throw ParseError("TP kind parameters must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const double v = NumberAt(it.value(), key);
    if (key == "tx_power_dbm") {
      p.tx_power_dbm = v;
    } else if (key == "pathloss_db_at_1km") {
      p.pathloss_db_at_1km = v;
    } else if (key == "pathloss_exponent") {
      p.pathloss_exponent = v;
    } else if (key == "shadowing_sigma_db") {
      p.shadowing_sigma_db = v;
    } else if (key == "min_distance_m") {
      p.min_distance_m = v;
    } else {
      throw ParseError("unknown TP kind field '" + key + "'");
    }
  }
  return p;
}

}  // namespace

std::string ToString(TpKind kind) {
  return kind == TpKind::kMacro ? "macro" : "pico";
}

std::string ToString(FadingModel model) {
  return model == FadingModel::kNone ? "none" : "rayleigh";
}

TpKind ParseTpKind(const std::string& s) {
  if (s == "macro") return TpKind::kMacro;
  if (s == "pico") return TpKind::kPico;
  throw ParseError("unknown tp_kind '" + s + "'");
}

FadingModel ParseFadingModel(const std::string& s) {
  if (s == "none") return FadingModel::kNone;
  if (s == "rayleigh") return FadingModel::kRayleighUnit;
  throw ParseError("unknown fading_model '" + s + "'");
}

void Topology::Validate() const {
  if (num_users < 1) throw ValidationError("topology needs at least one user");
  if (num_tps < 1) throw ValidationError("topology needs at least one TP");
  if (static_cast<int>(tp_kind.size()) != num_tps) {
    throw ValidationError("tp_kind length differs from B");
  }
}

void ChannelGains::Validate() const {
  if (slow_gain.rows() < 1 || slow_gain.cols() < 1) {
    throw ValidationError("gain matrix is empty");
  }
  for (int k = 0; k < num_users(); ++k) {
    bool reachable = false;
    for (int b = 0; b < num_tps(); ++b) {
      const double v = slow_gain(k, b);
      if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream msg;
        msg << "slow_gain(" << k << ", " << b << ") = " << v
            << " is not a finite non-negative number";
        throw ValidationError(msg.str());
      }
      reachable = reachable || v > 0.0;
    }
    if (!reachable) {
      throw ValidationError("user " + std::to_string(k) +
                            " has zero gain to every TP");
    }
  }
}

UtilityConfig::UtilityConfig(double alpha, std::vector<double> weights)
    : alpha_(alpha), weights_(std::move(weights)) {
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) {
    throw ValidationError("alpha must be positive");
  }
  if (weights_.empty()) throw ValidationError("weights are empty");
  double sum = 0.0;
  for (size_t k = 0; k < weights_.size(); ++k) {
    if (!(weights_[k] > 0.0) || !std::isfinite(weights_[k])) {
      throw ValidationError("weight of user " + std::to_string(k) +
                            " must be positive");
    }
    sum += weights_[k];
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "weights must sum to 1, got " << sum;
    throw ValidationError(msg.str());
  }
}

UtilityConfig UtilityConfig::Uniform(double alpha, int num_users) {
  if (num_users < 1) throw ValidationError("need at least one user");
  return UtilityConfig(alpha, std::vector<double>(num_users, 1.0 / num_users));
}

void ScenarioConfig::Validate() const {
  if (num_sectors < 1) throw ValidationError("num_sectors must be >= 1");
  if (picos_per_sector < 0) {
    throw ValidationError("picos_per_sector must be >= 0");
  }
  if (users_per_sector < 1) {
    throw ValidationError("users_per_sector must be >= 1");
  }
  CheckPositive(sector_radius_m, "sector_radius_m");
  if (!(sector_offset_m >= 0.0)) {
    throw ValidationError("sector_offset_m must be >= 0");
  }
  for (const TpKindParams* p : {&macro, &pico}) {
    // Powers are given in dBm; the linear value is always positive, but the
    // dB figure itself must be finite.
    if (!std::isfinite(p->tx_power_dbm)) {
      throw ValidationError("tx power must be finite");
    }
    CheckPositive(p->pathloss_exponent, "pathloss_exponent");
    if (!(p->shadowing_sigma_db >= 0.0)) {
      throw ValidationError("shadowing sigma must be >= 0");
    }
    CheckPositive(p->min_distance_m, "min_distance_m");
  }
  if (!std::isfinite(noise_power_dbm)) {
    throw ValidationError("noise power must be finite");
  }
}

std::pair<Topology, ChannelGains> GenerateTopology(const ScenarioConfig& cfg) {
  cfg.Validate();
  Rng rng(cfg.rng_seed);
  Topology topo;
  const int tps_per_sector = 1 + cfg.picos_per_sector;
  topo.num_tps = cfg.num_sectors * tps_per_sector;
  topo.num_users = cfg.num_sectors * cfg.users_per_sector;

  const Point site{0.0, 0.0};
  std::vector<Point> sector_center(cfg.num_sectors);
  for (int s = 0; s < cfg.num_sectors; ++s) {
    const double a = 2.0 * std::numbers::pi * s / cfg.num_sectors;
    sector_center[s] = {cfg.sector_offset_m * std::cos(a),
                        cfg.sector_offset_m * std::sin(a)};
  }
  // TP order: per sector, macro first then its picos.
  for (int s = 0; s < cfg.num_sectors; ++s) {
    topo.tp_kind.push_back(TpKind::kMacro);
    topo.tp_position.push_back(site);
    for (int p = 0; p < cfg.picos_per_sector; ++p) {
      topo.tp_kind.push_back(TpKind::kPico);
      topo.tp_position.push_back(DropInDisc(rng, sector_center[s],
                                            cfg.sector_radius_m, site,
                                            cfg.macro.min_distance_m));
    }
  }
  for (int s = 0; s < cfg.num_sectors; ++s) {
    for (int u = 0; u < cfg.users_per_sector; ++u) {
      topo.user_position.push_back(DropInDisc(rng, sector_center[s],
                                              cfg.sector_radius_m, site,
                                              cfg.macro.min_distance_m));
    }
  }

  ChannelGains gains;
  gains.fading_model = cfg.fading_model;
  gains.slow_gain.resize(topo.num_users, topo.num_tps);
  for (int k = 0; k < topo.num_users; ++k) {
    for (int b = 0; b < topo.num_tps; ++b) {
      const TpKindParams& p =
          topo.tp_kind[b] == TpKind::kMacro ? cfg.macro : cfg.pico;
      const Point& u = topo.user_position[k];
      const Point& t = topo.tp_position[b];
      const double d_m =
          std::max(std::hypot(u.x - t.x, u.y - t.y), p.min_distance_m);
      const double pathloss_db = p.pathloss_db_at_1km +
                                 10.0 * p.pathloss_exponent *
                                     std::log10(d_m / 1000.0);
      const double shadow_db = p.shadowing_sigma_db * rng.Normal();
      gains.slow_gain(k, b) = DbToLinear(p.tx_power_dbm - pathloss_db -
                                         shadow_db - cfg.noise_power_dbm);
    }
  }
  topo.Validate();
  gains.Validate();
  return {std::move(topo), std::move(gains)};
}

Instance GenerateInstance(const ScenarioConfig& cfg, double alpha) {
  auto [topo, gains] = GenerateTopology(cfg);
  UtilityConfig util = UtilityConfig::Uniform(alpha, topo.num_users);
  return Instance{std::move(topo), std::move(gains), std::move(util)};
}

Instance ParseInstance(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("instance is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("instance must be a JSON object");
  const int num_users = Field<int>(j, "K");
  const int num_tps = Field<int>(j, "B");
  if (num_users < 1 || num_tps < 1) {
    throw ValidationError("K and B must be >= 1");
  }

  Topology topo;
  topo.num_users = num_users;
  topo.num_tps = num_tps;
  const auto kinds = Field<std::vector<std::string>>(j, "tp_kind");
  if (static_cast<int>(kinds.size()) != num_tps) {
    throw ParseError("tp_kind has " + std::to_string(kinds.size()) +
                     " entries, expected B = " + std::to_string(num_tps));
  }
  for (const auto& s : kinds) topo.tp_kind.push_back(ParseTpKind(s));

  ChannelGains gains;
  if (j.contains("fading_model")) {
    gains.fading_model =
        ParseFadingModel(Field<std::string>(j, "fading_model"));
  }
  const json& rows = j.contains("slow_gain") ? j.at("slow_gain") : json();
  if (!rows.is_array() || static_cast<int>(rows.size()) != num_users) {
    throw ParseError("slow_gain must be an array of K rows");
  }
  gains.slow_gain.resize(num_users, num_tps);
  for (int k = 0; k < num_users; ++k) {
    const json& row = rows[k];
    if (!row.is_array() || static_cast<int>(row.size()) != num_tps) {
      throw ParseError("slow_gain row " + std::to_string(k) +
                       " must have B entries");
    }
    for (int b = 0; b < num_tps; ++b) {
      gains.slow_gain(k, b) =
          NumberAt(row[b], "slow_gain(" + std::to_string(k) + ", " +
                               std::to_string(b) + ")");
    }
  }
  const auto weights = Field<std::vector<double>>(j, "weights");
  if (static_cast<int>(weights.size()) != num_users) {
    throw ParseError("weights has " + std::to_string(weights.size()) +
                     " entries, expected K = " + std::to_string(num_users));
  }
  const double alpha = Field<double>(j, "alpha");

  topo.Validate();
  gains.Validate();
  UtilityConfig util(alpha, weights);
  return Instance{std::move(topo), std::move(gains), std::move(util)};
}

std::string SerializeInstance(const Instance& instance) {
  const ChannelGains& g = instance.gains;
  json rows = json::array();
  for (int k = 0; k < g.num_users(); ++k) {
    json row = json::array();
    for (int b = 0; b < g.num_tps(); ++b) row.push_back(g.slow_gain(k, b));
    rows.push_back(std::move(row));
  }
  json kinds = json::array();
  for (TpKind kind : instance.topology.tp_kind) kinds.push_back(ToString(kind));
  json j{{"K", instance.topology.num_users},
         {"B", instance.topology.num_tps},
         {"tp_kind", kinds},
         {"slow_gain", rows},
         {"weights", instance.utility.weights()},
         {"alpha", instance.utility.alpha()},
         {"fading_model", ToString(g.fading_model)}};
  return j.dump(1);
}

Instance LoadInstance(const std::filesystem::path& path) {
  return ParseInstance(ReadFile(path));
}

void SaveInstance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << SerializeInstance(instance) << "\n";
}

ScenarioConfig ParseScenarioConfig(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("scenario must be a JSON object");
  ScenarioConfig cfg;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    try {
      if (key == "rng_seed") {
        cfg.rng_seed = v.get<uint64_t>();
      } else if (key == "num_sectors") {
        cfg.num_sectors = v.get<int>();
      } else if (key == "picos_per_sector") {
        cfg.picos_per_sector = v.get<int>();
      } else if (key == "users_per_sector") {
        cfg.users_per_sector = v.get<int>();
      } else if (key == "sector_radius_m") {
        cfg.sector_radius_m = NumberAt(v, key);
      } else if (key == "sector_offset_m") {
        cfg.sector_offset_m = NumberAt(v, key);
      } else if (key == "macro") {
        cfg.macro = KindParamsFromJson(v, cfg.macro);
      } else if (key == "pico") {
        cfg.pico = KindParamsFromJson(v, cfg.pico);
      } else if (key == "noise_power_dbm") {
        cfg.noise_power_dbm = NumberAt(v, key);
      } else if (key == "fading_model") {
        cfg.fading_model = ParseFadingModel(v.get<std::string>());
      } else {
        throw ParseError("unknown scenario field '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError("scenario field '" + key + "': " + e.what());
    }
  }
  cfg.Validate();
  return cfg;
}

ScenarioConfig LoadScenarioConfig(const std::filesystem::path& path) {
  return ParseScenarioConfig(ReadFile(path));
}

std::string SerializeScenarioConfig(const ScenarioConfig& cfg) {
  json j{{"rng_seed", cfg.rng_seed},
         {"num_sectors", cfg.num_sectors},
         {"picos_per_sector", cfg.picos_per_sector},
         {"users_per_sector", cfg.users_per_sector},
         {"sector_radius_m", cfg.sector_radius_m},
         {"sector_offset_m", cfg.sector_offset_m},
         {"macro", KindParamsToJson(cfg.macro)},
         {"pico", KindParamsToJson(cfg.pico)},
         {"noise_power_dbm", cfg.noise_power_dbm},
         {"fading_model", ToString(cfg.fading_model)}};
  return j.dump(1);
}

void WriteGainsCsv(const ChannelGains& gains, std::ostream& out) {
  out << "user,tp,slow_gain\n";
  out.precision(17);
  for (int k = 0; k < gains.num_users(); ++k) {
    for (int b = 0; b < gains.num_tps(); ++b) {
      out << k << "," << b << "," << gains.slow_gain(k, b) << "\n";
    }
  }
}

}  // namespace hetnet
