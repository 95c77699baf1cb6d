// Copyright 2026 The ssmpc Authors
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

#ifndef SSMPC__TYPES_HPP_
#define SSMPC__TYPES_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ssmpc
{

/// Raised when a scenario or controller configuration violates its invariants.
/// `field()` names the offending field using its serialized name.
class ConfigError : public std::invalid_argument
{
public:
  ConfigError(std::string field, const std::string & what)
  : std::invalid_argument(field + ": " + what), field_(std::move(field))
  {
  }

  const std::string & field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Longitudinal vehicle state. The vehicle drives in +x along the lane at y_lane.
struct VehicleState
{
  double x{-12.5};
  double v{6.0};
  double y_lane{0.0};
};

/// Pedestrian state. The pedestrian walks along the crossing line x = x_cross in +y.
struct PedestrianState
{
  double x_cross{0.0};
  double y{-3.5};
  double vy{1.4};
  double intention{1.0};
};

struct WorldState
{
  VehicleState vehicle{};
  PedestrianState pedestrian{};
  double t{0.0};
  std::int64_t step_index{0};
};

enum class Zone { Safe, Near, OnLane, Crossed };

enum class IntentionMode { Crossing, Yielding, Random, Manual };

/// Pedestrian behaviour used by the simulation plant.
enum class PedModel { Sfm, Constant, Mixed, Sigmoid, Manual };

/// Normal distribution descriptor with an optional lower clamp, N(mean, std) then max(., min).
struct NormalDist
{
  double mean{0.0};
  double std{0.0};
  double min{-INFINITY};
};

struct UniformDist
{
  double lo{0.0};
  double hi{1.0};
};

/// Initial-state perturbation model. Pedestrian y is placed at lane_y - y_offset.
struct InitDistributions
{
  NormalDist x_ped{0.0, 1.0};
  NormalDist y_offset{3.5, 0.5, 2.0};
  NormalDist vy{1.4, 0.1};
  NormalDist v_veh{6.0, 0.5};
  double x_veh{-12.5};
  UniformDist intention_crossing{0.5, 1.0};
  UniformDist intention_yielding{0.0, 0.5};
};

/// Social force parameters. `goal_offset` places the goal at lane_y + goal_offset on the
/// crossing line; `goal_x`/`goal_y` hold the resolved absolute goal for one episode.
struct SfmParams
{
  double tau{0.5};
  double A{2.0};
  double B{1.0};
  double radius{1.0};
  double desired_speed{1.4};
  double goal_x{0.0};
  double goal_y{5.0};
  double goal_offset{5.0};
};

/// Behaviour of the simulated pedestrian around the curb.
struct CrossingBehavior
{
  /// Lateral offset from the lane centre where a yielding pedestrian waits.
  double wait_offset{1.75};
  /// Distance before the wait point over which a yielding pedestrian slows to a stop.
  double slow_radius{1.0};
  /// Seconds a yielding pedestrian waits for a vehicle stopped short of the crossing
  /// before crossing anyway. Non-positive disables the patience rule.
  double patience{5.0};
  /// Vehicle speed below which it counts as stopped for the patience rule.
  double stopped_speed{0.1};
};

struct ScenarioSpec
{
  double dt{0.1};
  double max_time{30.0};
  double lane_y{0.0};
  double lane_half_width{0.5};
  std::pair<double, double> zone_near{-2.0, -0.5};
  double zone_safe_boundary{-2.0};
  InitDistributions init_distributions{};
  double v_ped_ref{1.4};
  double v_veh_ref{6.0};
  IntentionMode intention_mode{IntentionMode::Crossing};
  /// Probability of a crossing-intent pedestrian in IntentionMode::Random.
  double p_cross{0.5};
  PedModel ped_model{PedModel::Sfm};
  /// Probability of the SFM plant in PedModel::Mixed.
  double p_sfm{0.5};
  SfmParams sfm{};
  CrossingBehavior crossing{};
  double collision_radius{1.0};
  double pass_clearance{5.0};
  bool intention_lowering{true};
  std::uint64_t seed{42};
};

struct ControllerConfig
{
  double w1{1.0};
  double w2{1.0};
  double w3{10.0};
  int n{20};
  double c{2.0};
  double d_min{3.0};
  double v_min{0.0};
  double v_max{8.3};
  double a_min{-3.0};
  double a_max{2.0};
  double collision_radius{1.0};
  /// Rule-based baseline: braking TTC threshold and proportional speed gain.
  double t_brake{2.5};
  double k_p{1.0};
};

struct RunMetrics
{
  double ttc_min{INFINITY};
  double t_total{0.0};
  double a_max_abs{0.0};
  bool collided{false};
  bool timed_out{false};
  std::vector<double> compute_times{};

  double mean_compute_time() const
  {
    if (compute_times.empty()) {
      return 0.0;
    }
    double sum = 0.0;
    for (double t : compute_times) {
      sum += t;
    }
    return sum / static_cast<double>(compute_times.size());
  }
};

/// Horizon-indexed pedestrian prediction, entries i = 0..n.
struct PredictionTrace
{
  double x_cross{0.0};
  std::vector<double> y{};
  std::vector<double> vy{};

  std::size_t size() const noexcept { return y.size(); }
};

inline std::string_view to_string(Zone z)
{
  switch (z) {
    case Zone::Safe:
      return "safe";
    case Zone::Near:
      return "near";
    case Zone::OnLane:
      return "on_lane";
    case Zone::Crossed:
      return "crossed";
  }
  return "safe";
}

inline std::string_view to_string(IntentionMode m)
{
  switch (m) {
    case IntentionMode::Crossing:
      return "crossing";
    case IntentionMode::Yielding:
      return "yielding";
    case IntentionMode::Random:
      return "random";
    case IntentionMode::Manual:
      return "manual";
  }
  return "crossing";
}

inline std::string_view to_string(PedModel m)
{
  switch (m) {
    case PedModel::Sfm:
      return "sfm";
    case PedModel::Constant:
      return "constant";
    case PedModel::Mixed:
      return "mixed";
    case PedModel::Sigmoid:
      return "sigmoid";
    case PedModel::Manual:
      return "manual";
  }
  return "sfm";
}

inline bool all_finite(const WorldState & w)
{
  return std::isfinite(w.vehicle.x) && std::isfinite(w.vehicle.v) &&
         std::isfinite(w.vehicle.y_lane) && std::isfinite(w.pedestrian.x_cross) &&
         std::isfinite(w.pedestrian.y) && std::isfinite(w.pedestrian.vy) &&
         std::isfinite(w.pedestrian.intention);
}

inline double distance(const VehicleState & veh, const PedestrianState & ped)
{
  return std::hypot(veh.x - ped.x_cross, veh.y_lane - ped.y);
}

inline void validate(const ControllerConfig & cfg)
{
  if (cfg.n < 1) {
    throw ConfigError("n", "horizon must be at least 1");
  }
  if (!(cfg.v_min <= cfg.v_max)) {
    throw ConfigError("v_min", "must not exceed v_max");
  }
  if (!(cfg.a_min < 0.0)) {
    throw ConfigError("a_min", "must be negative");
  }
  if (!(cfg.a_max > 0.0)) {
    throw ConfigError("a_max", "must be positive");
  }
  if (!(cfg.collision_radius > 0.0)) {
    throw ConfigError("collision_radius", "must be positive");
  }
  if (!(cfg.d_min > cfg.collision_radius)) {
    throw ConfigError("d_min", "must exceed collision_radius");
  }
  if (!(cfg.w1 >= 0.0) || !std::isfinite(cfg.w1)) {
    throw ConfigError("w1", "must be finite and non-negative");
  }
  if (!(cfg.w2 >= 0.0) || !std::isfinite(cfg.w2)) {
    throw ConfigError("w2", "must be finite and non-negative");
  }
  if (!(cfg.w3 >= 0.0) || !std::isfinite(cfg.w3)) {
    throw ConfigError("w3", "must be finite and non-negative");
  }
  if (!std::isfinite(cfg.c)) {
    throw ConfigError("c", "must be finite");
  }
}

inline void validate_normal(const NormalDist & d, const std::string & name)
{
  if (!std::isfinite(d.mean) || !std::isfinite(d.std) || d.std < 0.0) {
    throw ConfigError("init_distributions." + name, "mean/std must be finite, std >= 0");
  }
  if (std::isnan(d.min)) {
    throw ConfigError("init_distributions." + name, "min must not be NaN");
  }
}

inline void validate_uniform(const UniformDist & d, const std::string & name)
{
  if (!std::isfinite(d.lo) || !std::isfinite(d.hi) || d.lo > d.hi || d.lo < 0.0 || d.hi > 1.0) {
    throw ConfigError("init_distributions." + name, "bounds must satisfy 0 <= lo <= hi <= 1");
  }
}

inline void validate(const ScenarioSpec & spec)
{
  if (!(spec.dt > 0.0) || !std::isfinite(spec.dt)) {
    throw ConfigError("dt", "must be positive");
  }
  if (!(spec.max_time > 0.0) || !std::isfinite(spec.max_time)) {
    throw ConfigError("max_time", "must be positive");
  }
  if (!std::isfinite(spec.lane_y)) {
    throw ConfigError("lane_y", "must be finite");
  }
  if (!(spec.lane_half_width >= 0.0)) {
    throw ConfigError("lane_half_width", "must be non-negative");
  }
  const auto [near_lo, near_hi] = spec.zone_near;
  if (!std::isfinite(near_lo) || !std::isfinite(near_hi) || !(near_lo < near_hi) ||
      !(near_hi <= spec.lane_y))
  {
    throw ConfigError("zone_near", "band must satisfy lo < hi <= lane_y");
  }
  if (!std::isfinite(spec.zone_safe_boundary) || !(spec.zone_safe_boundary <= near_lo)) {
    throw ConfigError("zone_safe_boundary", "must not lie inside or past the near band");
  }
  if (!(spec.v_ped_ref > 0.0) || !std::isfinite(spec.v_ped_ref)) {
    throw ConfigError("v_ped_ref", "must be positive");
  }
  if (!(spec.v_veh_ref >= 0.0) || !std::isfinite(spec.v_veh_ref)) {
    throw ConfigError("v_veh_ref", "must be non-negative");
  }
  if (!(spec.p_cross >= 0.0 && spec.p_cross <= 1.0)) {
    throw ConfigError("p_cross", "must be a probability");
  }
  if (!(spec.p_sfm >= 0.0 && spec.p_sfm <= 1.0)) {
    throw ConfigError("p_sfm", "must be a probability");
  }
  if (!(spec.sfm.tau > 0.0) || !(spec.sfm.B > 0.0) || !(spec.sfm.A >= 0.0) ||
      !(spec.sfm.radius >= 0.0) || !(spec.sfm.desired_speed >= 0.0))
  {
    throw ConfigError("sfm", "requires tau > 0, B > 0, A >= 0, radius >= 0, desired_speed >= 0");
  }
  if (!(spec.collision_radius > 0.0)) {
    throw ConfigError("collision_radius", "must be positive");
  }
  if (!(spec.pass_clearance >= 0.0)) {
    throw ConfigError("pass_clearance", "must be non-negative");
  }
  const auto & d = spec.init_distributions;
  validate_normal(d.x_ped, "x_ped");
  validate_normal(d.y_offset, "y_offset");
  validate_normal(d.vy, "vy");
  validate_normal(d.v_veh, "v_veh");
  if (!std::isfinite(d.x_veh)) {
    throw ConfigError("init_distributions.x_veh", "must be finite");
  }
  validate_uniform(d.intention_crossing, "intention_crossing");
  validate_uniform(d.intention_yielding, "intention_yielding");
}

}  // namespace ssmpc

#endif  // SSMPC__TYPES_HPP_
