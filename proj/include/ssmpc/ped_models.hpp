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

#ifndef SSMPC__PED_MODELS_HPP_
#define SSMPC__PED_MODELS_HPP_

#include "ssmpc/rng.hpp"
#include "ssmpc/types.hpp"

#include <algorithm>
#include <cmath>

namespace ssmpc
{

/// Vehicle speed floor in the arrival-time quotient.
inline constexpr double kTtcSpeedFloor = 0.1;

/// Sigmoid exponent clamp.
inline constexpr double kSigmoidExpClamp = 500.0;

/// Arrival-time difference between vehicle and pedestrian at the crossing point.
/// Negative when the vehicle arrives first, positive when the pedestrian does.
inline double ttc(
  double x_ped, double x_veh, double v_veh, double y_ped, double lane_y, double v_ped_ref)
{
  return (x_ped - x_veh) / std::max(v_veh, kTtcSpeedFloor) - (lane_y - y_ped) / v_ped_ref;
}

inline double ttc(const WorldState & world, double v_ped_ref, double lane_y)
{
  return ttc(
    world.pedestrian.x_cross, world.vehicle.x, world.vehicle.v, world.pedestrian.y, lane_y,
    v_ped_ref);
}

/// Pedestrian speed of the explicit model: the reference speed scaled by the logistic of
/// (ttc - c).
inline double sigmoid_speed(double ttc_value, double c, double v_ped_ref)
{
  const double z = std::clamp(-ttc_value + c, -kSigmoidExpClamp, kSigmoidExpClamp);
  return v_ped_ref / (1.0 + std::exp(z));
}

/// Acceleration along y of the social force model. The x component is projected out so the
/// pedestrian stays on its crossing line.
inline double sfm_acceleration(
  const PedestrianState & ped, const VehicleState & vehicle, const SfmParams & p)
{
  const double gx = p.goal_x - ped.x_cross;
  const double gy = p.goal_y - ped.y;
  const double g_norm = std::hypot(gx, gy);
  const double desired_vy = g_norm > 0.0 ? p.desired_speed * gy / g_norm : 0.0;
  double a = (desired_vy - ped.vy) / p.tau;

  const double dx = ped.x_cross - vehicle.x;
  const double dy = ped.y - vehicle.y_lane;
  const double d = std::hypot(dx, dy);
  // Coincident positions push the pedestrian back, away from the lane.
  const double ny = d > 0.0 ? dy / d : -1.0;
  a += p.A * std::exp((p.radius - d) / p.B) * ny;
  return a;
}

/// One semi-implicit Euler step of the social force model. Speed is kept non-negative
/// (the pedestrian only moves forward along the crossing line).
inline PedestrianState sfm_step(
  const PedestrianState & ped, const VehicleState & vehicle, const SfmParams & p, double dt)
{
  PedestrianState next = ped;
  next.vy = std::max(0.0, ped.vy + dt * sfm_acceleration(ped, vehicle, p));
  next.y = ped.y + dt * next.vy;
  return next;
}

/// Rolls the social force model forward with the vehicle extrapolated at constant speed.
inline PredictionTrace sfm_predict(
  const WorldState & world, const SfmParams & p, int n, double dt, double assumed_vehicle_speed)
{
  PredictionTrace trace;
  trace.x_cross = world.pedestrian.x_cross;
  trace.y.reserve(static_cast<std::size_t>(n) + 1);
  trace.vy.reserve(static_cast<std::size_t>(n) + 1);
  PedestrianState ped = world.pedestrian;
  VehicleState veh = world.vehicle;
  trace.y.push_back(ped.y);
  trace.vy.push_back(ped.vy);
  for (int i = 0; i < n; ++i) {
    ped = sfm_step(ped, veh, p, dt);
    veh.x += assumed_vehicle_speed * dt;
    trace.y.push_back(ped.y);
    trace.vy.push_back(ped.vy);
  }
  return trace;
}

inline PredictionTrace constant_speed_predict(const PedestrianState & ped, int n, double dt)
{
  PredictionTrace trace;
  trace.x_cross = ped.x_cross;
  trace.y.reserve(static_cast<std::size_t>(n) + 1);
  trace.vy.assign(static_cast<std::size_t>(n) + 1, ped.vy);
  for (int i = 0; i <= n; ++i) {
    trace.y.push_back(ped.y + static_cast<double>(i) * dt * ped.vy);
  }
  return trace;
}

/// Per-episode choice of the simulated pedestrian for the mixed evaluation.
inline PedModel mixed_model_sample(Rng & rng, double p_sfm)
{
  return rng.bernoulli(p_sfm) ? PedModel::Sfm : PedModel::Constant;
}

}  // namespace ssmpc

#endif  // SSMPC__PED_MODELS_HPP_
