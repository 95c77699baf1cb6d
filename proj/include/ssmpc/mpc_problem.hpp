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

#ifndef SSMPC__MPC_PROBLEM_HPP_
#define SSMPC__MPC_PROBLEM_HPP_

#include "ssmpc/ped_models.hpp"
#include "ssmpc/solver.hpp"
#include "ssmpc/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ssmpc
{

/// Squared-distance floor in the inverse-distance cost.
inline constexpr double kMinSquaredDistance = 1e-6;

/// One state of the coupled vehicle/pedestrian rollout.
struct RolloutState
{
  double x_veh{0.0};
  double v_veh{0.0};
  double y_ped{0.0};
  double vy_ped{0.0};
};

struct CostBreakdown
{
  double j_mpc{0.0};
  double j_acc{0.0};
  double j_speed{0.0};
  double j_dis{0.0};
};

/// Input actually realized by a speed-bounded vehicle: the part of u that would push the
/// speed outside [v_lo, v_hi] within one step is discarded.
inline double effective_input(double v, double u, double dt, double v_lo, double v_hi)
{
  const double hi = (v_hi - v) / dt;
  const double lo = (v_lo - v) / dt;
  return std::min(std::max(u, lo), hi);
}

inline void advance_vehicle(double & x, double & v, double u, double dt, double v_lo, double v_hi)
{
  const double ue = effective_input(v, u, dt, v_lo, v_hi);
  x += v * dt + 0.5 * ue * dt * dt;
  v += dt * ue;
  v = std::clamp(v, v_lo, v_hi);
}

/// Coupled rollout of the vehicle and the sigmoid pedestrian model. Returns n+1 states
/// (index 0 is the initial state).
inline std::vector<RolloutState> rollout_explicit(
  const WorldState & world, std::span<const double> u_seq, const ControllerConfig & cfg,
  const ScenarioSpec & spec)
{
  std::vector<RolloutState> states;
  states.reserve(u_seq.size() + 1);
  RolloutState s{world.vehicle.x, world.vehicle.v, world.pedestrian.y, world.pedestrian.vy};
  states.push_back(s);
  const double x_ped = world.pedestrian.x_cross;
  for (double u : u_seq) {
    const double tc = ttc(x_ped, s.x_veh, s.v_veh, s.y_ped, spec.lane_y, spec.v_ped_ref);
    RolloutState next = s;
    advance_vehicle(next.x_veh, next.v_veh, u, spec.dt, cfg.v_min, cfg.v_max);
    next.y_ped = s.y_ped + spec.dt * s.vy_ped;
    next.vy_ped = sigmoid_speed(tc, cfg.c, spec.v_ped_ref);
    states.push_back(next);
    s = next;
  }
  return states;
}

/// Vehicle-only rollout. Pedestrian fields are copied from `trace` when given, otherwise
/// held at the initial pedestrian state.
inline std::vector<RolloutState> rollout_vehicle(
  const WorldState & world, std::span<const double> u_seq, const ControllerConfig & cfg,
  const ScenarioSpec & spec, const PredictionTrace * trace = nullptr)
{
  std::vector<RolloutState> states;
  states.reserve(u_seq.size() + 1);
  RolloutState s{world.vehicle.x, world.vehicle.v, world.pedestrian.y, world.pedestrian.vy};
  states.push_back(s);
  for (std::size_t i = 0; i < u_seq.size(); ++i) {
    advance_vehicle(s.x_veh, s.v_veh, u_seq[i], spec.dt, cfg.v_min, cfg.v_max);
    if (trace != nullptr && i + 1 < trace->size()) {
      s.y_ped = trace->y[i + 1];
      s.vy_ped = trace->vy[i + 1];
    }
    states.push_back(s);
  }
  return states;
}

/// MPC cost of a rollout against the pedestrian positions stored in the states.
inline CostBreakdown mpc_cost(
  std::span<const RolloutState> states, std::span<const double> u_seq, const ControllerConfig & cfg,
  const ScenarioSpec & spec, double x_ped)
{
  if (states.size() != u_seq.size() + 1) {
    throw std::invalid_argument("mpc_cost: states must hold one more entry than u_seq");
  }
  CostBreakdown c;
  for (double u : u_seq) {
    c.j_acc += cfg.w1 * u * u;
  }
  for (std::size_t i = 1; i < states.size(); ++i) {
    const double dv = states[i].v_veh - spec.v_veh_ref;
    c.j_speed += cfg.w2 * dv * dv;
    const double dx = states[i].x_veh - x_ped;
    const double dy = spec.lane_y - states[i].y_ped;
    const double inv = 1.0 / std::max(dx * dx + dy * dy, kMinSquaredDistance);
    c.j_dis += cfg.w3 * inv * inv;
  }
  c.j_mpc = c.j_acc + c.j_speed + c.j_dis;
  return c;
}

/// Where the optimizer takes pedestrian positions from. With `explicit_sigmoid` the
/// pedestrian is simulated inside the rollout and reacts to the candidate inputs; every
/// trace is a fixed prediction. At each step the closest pedestrian hypothesis is used.
struct PredictionSource
{
  bool explicit_sigmoid{true};
  std::vector<PredictionTrace> traces{};
};

/// Finite-horizon MPC problem over u(0..n-1) with the distance constraint and a
/// speed-clamped vehicle. Satisfies the InputProblem concept.
///
/// The distance constraint d >= max(d_min, collision_radius) binds only while the vehicle
/// has not passed the crossing line, since a vehicle ahead of the pedestrian only moves
/// away from it. The floor keeps an intention-lowered d_min above the collision envelope.
class MpcProblem
{
public:
  MpcProblem(
    const WorldState & initial, const ControllerConfig & cfg, const ScenarioSpec & spec,
    PredictionSource source)
  : initial_(initial), cfg_(cfg), dt_(spec.dt), lane_y_(spec.lane_y), v_ped_ref_(spec.v_ped_ref),
    v_veh_ref_(spec.v_veh_ref), source_(std::move(source))
  {
    if (!source_.explicit_sigmoid && source_.traces.empty()) {
      throw std::invalid_argument("MpcProblem: no pedestrian prediction");
    }
    for (const auto & t : source_.traces) {
      if (t.size() != static_cast<std::size_t>(cfg_.n) + 1) {
        throw std::invalid_argument("MpcProblem: trace length must be n + 1");
      }
    }
  }

  int horizon() const { return cfg_.n; }
  double lower() const { return cfg_.a_min; }
  double upper() const { return cfg_.a_max; }
  const ControllerConfig & config() const { return cfg_; }
  const WorldState & initial() const { return initial_; }
  const PredictionSource & source() const { return source_; }
  double safe_distance() const { return std::max(cfg_.d_min, cfg_.collision_radius); }

  Evaluation evaluate(std::span<const double> u) const
  {
    Evaluation e;
    const double x_ped = initial_.pedestrian.x_cross;
    const double d_safe = safe_distance();
    double x = initial_.vehicle.x;
    double v = initial_.vehicle.v;
    double y = initial_.pedestrian.y;
    double vy = initial_.pedestrian.vy;
    double j_acc = 0.0;
    double j_speed = 0.0;
    double j_dis = 0.0;
    const std::size_t n = u.size();
    for (std::size_t i = 0; i < n; ++i) {
      j_acc += u[i] * u[i];
      if (source_.explicit_sigmoid) {
        const double tc = ttc(x_ped, x, v, y, lane_y_, v_ped_ref_);
        y += dt_ * vy;
        vy = sigmoid_speed(tc, cfg_.c, v_ped_ref_);
      }
      advance_vehicle(x, v, u[i], dt_, cfg_.v_min, cfg_.v_max);

      const double dv = v - v_veh_ref_;
      j_speed += dv * dv;

      const double dx = x - x_ped;
      double d2 = std::numeric_limits<double>::infinity();
      if (source_.explicit_sigmoid) {
        const double dy = lane_y_ - y;
        d2 = dx * dx + dy * dy;
      }
      for (const auto & t : source_.traces) {
        const double dy = lane_y_ - t.y[i + 1];
        d2 = std::min(d2, dx * dx + dy * dy);
      }
      const double inv = 1.0 / std::max(d2, kMinSquaredDistance);
      j_dis += inv * inv;

      if (x <= x_ped) {
        const double viol = std::max(0.0, d_safe - std::sqrt(d2));
        e.violation_sum += viol;
        e.violation_max = std::max(e.violation_max, viol);
      }
    }
    e.cost = cfg_.w1 * j_acc + cfg_.w2 * j_speed + cfg_.w3 * j_dis;
    return e;
  }

  /// Rollout with the pedestrian taken from the explicit model when active, otherwise
  /// from the first trace.
  std::vector<RolloutState> rollout(std::span<const double> u, const ScenarioSpec & spec) const
  {
    if (source_.explicit_sigmoid) {
      return rollout_explicit(initial_, u, cfg_, spec);
    }
    return rollout_vehicle(initial_, u, cfg_, spec, &source_.traces.front());
  }

private:
  WorldState initial_;
  ControllerConfig cfg_;
  double dt_;
  double lane_y_;
  double v_ped_ref_;
  double v_veh_ref_;
  PredictionSource source_;
};

static_assert(InputProblem<MpcProblem>);

}  // namespace ssmpc

#endif  // SSMPC__MPC_PROBLEM_HPP_
