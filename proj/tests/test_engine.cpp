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

#include "ssmpc/engine.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace
{

using ssmpc::ControllerConfig;
using ssmpc::ControllerKind;
using ssmpc::PedModel;
using ssmpc::PlantState;
using ssmpc::ScenarioSpec;
using ssmpc::TerminalReason;
using ssmpc::WorldState;

PlantState constant_plant(const WorldState & w, const ScenarioSpec & spec)
{
  return ssmpc::make_plant(PedModel::Constant, w, spec);
}

TEST(Step, AdvancesVehicleAndPedestrianByHand)
{
  const ScenarioSpec spec;
  const WorldState w;
  PlantState plant = constant_plant(w, spec);
  const WorldState n = ssmpc::step(w, 1.0, spec, plant);
  EXPECT_NEAR(n.vehicle.x, -11.895, 1e-12);
  EXPECT_NEAR(n.vehicle.v, 6.1, 1e-12);
  EXPECT_NEAR(n.pedestrian.y, -3.36, 1e-12);
  EXPECT_DOUBLE_EQ(n.pedestrian.vy, 1.4);
  EXPECT_EQ(n.step_index, 1);
  EXPECT_DOUBLE_EQ(n.t, 0.1);
}

TEST(Step, BrakingNeverReversesTheVehicle)
{
  const ScenarioSpec spec;
  WorldState w;
  w.vehicle.v = 0.1;
  PlantState plant = constant_plant(w, spec);
  const WorldState n = ssmpc::step(w, -3.0, spec, plant);
  EXPECT_DOUBLE_EQ(n.vehicle.v, 0.0);
  EXPECT_NEAR(n.vehicle.x, -12.5 + 0.005, 1e-12);
  const WorldState m = ssmpc::step(n, -3.0, spec, plant);
  EXPECT_DOUBLE_EQ(m.vehicle.x, n.vehicle.x);
}

TEST(Step, SigmoidPlantMatchesExplicitRollout)
{
  ScenarioSpec spec;
  ControllerConfig cfg;
  cfg.c = 0.7;
  ssmpc::Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    WorldState w;
    w.vehicle.x = rng.uniform(-20.0, -5.0);
    w.vehicle.v = rng.uniform(3.0, 5.0);
    w.pedestrian.y = rng.uniform(-4.0, -2.0);
    std::vector<double> u(20);
    for (auto & x : u) {
      x = rng.uniform(-1.0, 1.0);
    }
    PlantState plant = ssmpc::make_plant(PedModel::Sigmoid, w, spec);
    plant.c = cfg.c;
    const auto roll = ssmpc::rollout_explicit(w, u, cfg, spec);
    WorldState s = w;
    for (std::size_t i = 0; i < u.size(); ++i) {
      s = ssmpc::step(s, u[i], spec, plant);
      ASSERT_NEAR(s.vehicle.x, roll[i + 1].x_veh, 1e-9);
      ASSERT_NEAR(s.vehicle.v, roll[i + 1].v_veh, 1e-9);
      ASSERT_NEAR(s.pedestrian.y, roll[i + 1].y_ped, 1e-9);
      ASSERT_NEAR(s.pedestrian.vy, roll[i + 1].vy_ped, 1e-9);
    }
  }
}

TEST(Step, WaitingPedestrianIsReleasedByPatience)
{
  ScenarioSpec spec;
  WorldState w;
  w.vehicle.x = -6.0;
  w.vehicle.v = 0.0;
  w.pedestrian.y = -1.8;
  w.pedestrian.vy = 0.0;
  w.pedestrian.intention = 0.2;
  PlantState plant = ssmpc::make_plant(PedModel::Sfm, w, spec);
  // Half the patience: still waiting short of the lane edge.
  for (int i = 0; i < 25; ++i) {
    w = ssmpc::step(w, 0.0, spec, plant);
  }
  EXPECT_FALSE(plant.released);
  EXPECT_LT(w.pedestrian.y, spec.lane_y - spec.lane_half_width);
  for (int i = 0; i < 25; ++i) {
    w = ssmpc::step(w, 0.0, spec, plant);
  }
  EXPECT_TRUE(plant.released);
  for (int i = 0; i < 40; ++i) {
    w = ssmpc::step(w, 0.0, spec, plant);
  }
  EXPECT_EQ(ssmpc::zone_of(w.pedestrian, spec), ssmpc::Zone::Crossed);
}

TEST(Terminal, ReasonsAndPrecedence)
{
  const ScenarioSpec spec;
  WorldState w;
  EXPECT_FALSE(ssmpc::terminal_reason(w, spec).has_value());
  w.vehicle.x = 5.01;
  EXPECT_EQ(ssmpc::terminal_reason(w, spec), TerminalReason::Passed);
  w.vehicle.x = -0.5;
  w.pedestrian.y = 0.0;
  EXPECT_EQ(ssmpc::terminal_reason(w, spec), TerminalReason::Collision);
  WorldState late;
  late.step_index = ssmpc::max_steps(spec);
  EXPECT_EQ(ssmpc::terminal_reason(late, spec), TerminalReason::Timeout);
  EXPECT_EQ(ssmpc::max_steps(spec), 300);
}

TEST(Score, HandComputedExamples)
{
  ssmpc::RunMetrics m;
  m.ttc_min = 1.0;
  m.t_total = 3.0;
  m.a_max_abs = 2.0;
  EXPECT_DOUBLE_EQ(ssmpc::score(m), -4.0);
  m.collided = true;
  EXPECT_DOUBLE_EQ(ssmpc::score(m), -104.0);
  ssmpc::ScoreWeights k{2.0, 0.5, 1.0, 50.0};
  EXPECT_DOUBLE_EQ(ssmpc::score(m, k), 2.0 - 1.5 - 2.0 - 50.0);
}

TEST(Episode, PedestrianOnTheVehicleCollidesAtStepZero)
{
  ScenarioSpec spec;
  WorldState w;
  w.vehicle.x = -0.5;
  w.pedestrian.y = 0.0;
  auto c = ssmpc::make_controller(ControllerKind::RuleBased, spec);
  const auto ep = ssmpc::run_episode_from(w, constant_plant(w, spec), spec, *c, ControllerConfig{});
  EXPECT_EQ(ep.reason, TerminalReason::Collision);
  EXPECT_TRUE(ep.steps.empty());
  EXPECT_DOUBLE_EQ(ep.metrics.t_total, 0.0);
  EXPECT_DOUBLE_EQ(ep.score, ep.metrics.ttc_min - 100.0);
}

TEST(Episode, StandingVehicleTimesOut)
{
  ScenarioSpec spec;
  spec.max_time = 2.0;
  WorldState w;
  w.vehicle.v = 0.0;
  w.pedestrian.vy = 0.0;
  ControllerConfig cfg;
  cfg.v_max = 0.0;
  auto c = ssmpc::make_controller(ControllerKind::RuleBased, spec);
  const auto ep = ssmpc::run_episode_from(w, constant_plant(w, spec), spec, *c, cfg);
  EXPECT_EQ(ep.reason, TerminalReason::Timeout);
  EXPECT_EQ(ep.steps.size(), 20u);
  EXPECT_DOUBLE_EQ(ep.final_state.vehicle.x, -12.5);
  EXPECT_TRUE(ep.metrics.timed_out);
}

TEST(Episode, UnobstructedVehiclePasses)
{
  ScenarioSpec spec;
  WorldState w;
  w.pedestrian.vy = 0.0;
  w.pedestrian.y = -5.0;
  auto c = ssmpc::make_controller(ControllerKind::RuleBased, spec);
  const auto ep = ssmpc::run_episode_from(w, constant_plant(w, spec), spec, *c, ControllerConfig{});
  EXPECT_EQ(ep.reason, TerminalReason::Passed);
  // 17.5 m at a constant 6 m/s needs 30 steps.
  EXPECT_EQ(ep.steps.size(), 30u);
  EXPECT_DOUBLE_EQ(ep.metrics.a_max_abs, 0.0);
}

class EpisodeProperties : public ::testing::TestWithParam<ControllerKind>
{
};

TEST_P(EpisodeProperties, MetricsAreConsistentWithTheTrace)
{
  ScenarioSpec spec;
  spec.intention_mode = ssmpc::IntentionMode::Random;
  ssmpc::BatchOptions opt;
  opt.keep_episodes = true;
  opt.threads = 1;
  const auto b = ssmpc::run_batch(spec, GetParam(), ControllerConfig{}, 12, 5, opt);
  for (const auto & ep : b.episodes) {
    ASSERT_DOUBLE_EQ(ep.metrics.t_total, static_cast<double>(ep.steps.size()) * spec.dt);
    double ttc_min = ssmpc::ttc(ep.final_state, spec.v_ped_ref, spec.lane_y);
    double a_max = 0.0;
    double d_min = ssmpc::distance(ep.final_state.vehicle, ep.final_state.pedestrian);
    for (const auto & s : ep.steps) {
      ttc_min = std::min(ttc_min, ssmpc::ttc(s.world, spec.v_ped_ref, spec.lane_y));
      a_max = std::max(a_max, std::abs(s.u));
      d_min = std::min(d_min, ssmpc::distance(s.world.vehicle, s.world.pedestrian));
      ASSERT_GE(s.world.vehicle.v, 0.0);
    }
    ASSERT_DOUBLE_EQ(ep.metrics.ttc_min, ttc_min);
    ASSERT_DOUBLE_EQ(ep.metrics.a_max_abs, a_max);
    if (!ep.metrics.collided) {
      ASSERT_GE(d_min, spec.collision_radius);
    }
    ASSERT_DOUBLE_EQ(ep.score, ssmpc::score(ep.metrics));
  }
}

INSTANTIATE_TEST_SUITE_P(
  AllControllers, EpisodeProperties,
  ::testing::Values(ControllerKind::Explicit, ControllerKind::Implicit, ControllerKind::RuleBased));

TEST(Batch, DeterministicAndIndependentOfThreadCount)
{
  ScenarioSpec spec;
  spec.ped_model = PedModel::Mixed;
  ssmpc::BatchOptions one;
  one.threads = 1;
  ssmpc::BatchOptions three;
  three.threads = 3;
  const auto a = ssmpc::run_batch(spec, ControllerKind::Explicit, ControllerConfig{}, 6, 9, one);
  const auto b = ssmpc::run_batch(spec, ControllerKind::Explicit, ControllerConfig{}, 6, 9, three);
  const auto c = ssmpc::run_batch(spec, ControllerKind::Explicit, ControllerConfig{}, 6, 9, one);
  ASSERT_EQ(a.runs.size(), 6u);
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].seed, ssmpc::run_seed(9, static_cast<int>(i)));
    EXPECT_EQ(a.runs[i].score, b.runs[i].score);
    EXPECT_EQ(a.runs[i].score, c.runs[i].score);
    EXPECT_EQ(a.runs[i].steps, b.runs[i].steps);
    EXPECT_EQ(a.runs[i].plant_model, b.runs[i].plant_model);
  }
  EXPECT_EQ(a.mean_score, b.mean_score);
}

TEST(Batch, SameSeedGivesSameScenarioForEveryController)
{
  ScenarioSpec spec;
  for (int i = 0; i < 5; ++i) {
    const auto s = ssmpc::run_seed(42, i);
    const auto [w1, p1] = ssmpc::sample_episode(spec, s);
    const auto [w2, p2] = ssmpc::sample_episode(spec, s);
    EXPECT_EQ(w1.vehicle.v, w2.vehicle.v);
    EXPECT_EQ(w1.pedestrian.y, w2.pedestrian.y);
    EXPECT_EQ(p1.model, p2.model);
  }
}

TEST(Batch, RejectsInvalidArguments)
{
  EXPECT_THROW(
    ssmpc::run_batch(ScenarioSpec{}, ControllerKind::RuleBased, ControllerConfig{}, 0, 1),
    std::invalid_argument);
  ControllerConfig bad;
  bad.n = 0;
  EXPECT_THROW(
    ssmpc::run_batch(ScenarioSpec{}, ControllerKind::RuleBased, bad, 1, 1), ssmpc::ConfigError);
}

}  // namespace
