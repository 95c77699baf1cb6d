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

#ifndef SSMPC__SCENARIO_HPP_
#define SSMPC__SCENARIO_HPP_

#include "ssmpc/rng.hpp"
#include "ssmpc/types.hpp"

#include <algorithm>

namespace ssmpc
{

/// Classifies the pedestrian by lateral position. Boundary values go to the zone closer to
/// the lane, so the classification is monotone in y.
inline Zone zone_of(const PedestrianState & ped, const ScenarioSpec & spec)
{
  const double y = ped.y;
  if (y < spec.zone_near.first) {
    return Zone::Safe;
  }
  if (y < spec.zone_near.second) {
    return Zone::Near;
  }
  if (y <= spec.lane_y + spec.lane_half_width) {
    return Zone::OnLane;
  }
  return Zone::Crossed;
}

inline double sample_clamped(Rng & rng, const NormalDist & d)
{
  return std::max(rng.normal(d.mean, d.std), d.min);
}

/// Draws the intention for the given mode. Manual mode starts at full intention; the live
/// operator overrides it.
inline double sample_intention(Rng & rng, const ScenarioSpec & spec)
{
  const auto & d = spec.init_distributions;
  switch (spec.intention_mode) {
    case IntentionMode::Crossing:
      return rng.uniform(d.intention_crossing.lo, d.intention_crossing.hi);
    case IntentionMode::Yielding:
      return rng.uniform(d.intention_yielding.lo, d.intention_yielding.hi);
    case IntentionMode::Random: {
      const bool crossing = rng.bernoulli(spec.p_cross);
      const auto & u = crossing ? d.intention_crossing : d.intention_yielding;
      return rng.uniform(u.lo, u.hi);
    }
    case IntentionMode::Manual:
      return 1.0;
  }
  return 1.0;
}

/// Samples a perturbed initial world. Draw order is fixed: x_ped, y offset, vy, v_veh,
/// intention. Negative pedestrian speeds and non-positive vehicle speeds are redrawn; a
/// pedestrian may start at rest.
inline WorldState sample_scenario(Rng & rng, const ScenarioSpec & spec)
{
  const auto & d = spec.init_distributions;
  WorldState w{};
  w.vehicle.x = d.x_veh;
  w.vehicle.y_lane = spec.lane_y;
  w.pedestrian.x_cross = sample_clamped(rng, d.x_ped);
  w.pedestrian.y = spec.lane_y - sample_clamped(rng, d.y_offset);

  constexpr int kMaxRedraws = 1000;
  double vy = sample_clamped(rng, d.vy);
  for (int i = 0; vy < 0.0 && i < kMaxRedraws; ++i) {
    vy = sample_clamped(rng, d.vy);
  }
  if (vy < 0.0) {
    throw ConfigError("init_distributions.vy", "distribution yields no non-negative speed");
  }
  w.pedestrian.vy = vy;

  double v = sample_clamped(rng, d.v_veh);
  for (int i = 0; v <= 0.0 && i < kMaxRedraws; ++i) {
    v = sample_clamped(rng, d.v_veh);
  }
  if (v <= 0.0) {
    throw ConfigError("init_distributions.v_veh", "distribution yields no positive speed");
  }
  w.vehicle.v = v;
  w.pedestrian.intention = std::clamp(sample_intention(rng, spec), 0.0, 1.0);
  w.t = 0.0;
  w.step_index = 0;
  return w;
}

}  // namespace ssmpc

#endif  // SSMPC__SCENARIO_HPP_
