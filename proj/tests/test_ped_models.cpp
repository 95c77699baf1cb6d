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

#include "ssmpc/ped_models.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace
{

using ssmpc::PedestrianState;
using ssmpc::SfmParams;
using ssmpc::VehicleState;

TEST(Ttc, NominalStart)
{
  // Vehicle 12.5 m away at 6 m/s, pedestrian 3.5 m from the lane at 1.4 m/s.
  const double expected = 12.5 / 6.0 - 3.5 / 1.4;
  EXPECT_NEAR(ssmpc::ttc(0.0, -12.5, 6.0, -3.5, 0.0, 1.4), expected, 1e-12);
  EXPECT_LT(expected, 0.0);
}

TEST(Ttc, SignConvention)
{
  // Pedestrian right at the lane edge, vehicle far away: pedestrian first, positive.
  EXPECT_GT(ssmpc::ttc(0.0, -30.0, 5.0, -0.1, 0.0, 1.4), 0.0);
  // Vehicle nearly at the crossing, pedestrian far: vehicle first, negative.
  EXPECT_LT(ssmpc::ttc(0.0, -0.5, 5.0, -5.0, 0.0, 1.4), 0.0);
}

TEST(Ttc, SpeedFloorAvoidsDivisionByZero)
{
  const double stopped = ssmpc::ttc(0.0, -2.0, 0.0, -1.4, 0.0, 1.4);
  EXPECT_NEAR(stopped, 2.0 / 0.1 - 1.0, 1e-12);
  EXPECT_TRUE(std::isfinite(stopped));
}

TEST(Ttc, WorldOverloadAgrees)
{
  ssmpc::WorldState w;
  w.vehicle = {-7.0, 4.0, 0.5};
  w.pedestrian = {1.5, -2.0, 1.2, 0.7};
  EXPECT_DOUBLE_EQ(ssmpc::ttc(w, 1.4, 0.5), ssmpc::ttc(1.5, -7.0, 4.0, -2.0, 0.5, 1.4));
}

TEST(SigmoidSpeed, HalfSpeedWhereTtcEqualsOffset)
{
  EXPECT_DOUBLE_EQ(ssmpc::sigmoid_speed(2.0, 2.0, 1.4), 0.7);
  EXPECT_DOUBLE_EQ(ssmpc::sigmoid_speed(-1.0, -1.0, 1.0), 0.5);
}

TEST(SigmoidSpeed, SpotValues)
{
  // 1.4 / (1 + e^(-(ttc - c))) with ttc = 3, c = 2.
  EXPECT_NEAR(ssmpc::sigmoid_speed(3.0, 2.0, 1.4), 1.4 / (1.0 + std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(ssmpc::sigmoid_speed(0.0, 2.0, 1.4), 1.4 / (1.0 + std::exp(2.0)), 1e-15);
}

TEST(SigmoidSpeed, BoundedAndFiniteAtExtremes)
{
  for (double t : {-1e9, -1e3, -50.0, 0.0, 50.0, 1e3, 1e9}) {
    const double v = ssmpc::sigmoid_speed(t, 2.0, 1.4);
    ASSERT_TRUE(std::isfinite(v));
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.4);
  }
}

TEST(SigmoidSpeed, StrictlyMonotoneInTtc)
{
  ssmpc::Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    double a = rng.uniform(-15.0, 15.0);
    double b = rng.uniform(-15.0, 15.0);
    if (a == b) {
      continue;
    }
    if (a > b) {
      std::swap(a, b);
    }
    const double c = rng.uniform(-3.0, 3.0);
    ASSERT_LT(ssmpc::sigmoid_speed(a, c, 1.4), ssmpc::sigmoid_speed(b, c, 1.4))
      << "a=" << a << " b=" << b << " c=" << c;
  }
}

SfmParams goal_ahead()
{
  SfmParams p;
  p.goal_x = 0.0;
  p.goal_y = 5.0;
  return p;
}

TEST(Sfm, RelaxesTowardDesiredSpeedWithoutVehicle)
{
  const PedestrianState ped{0.0, -3.0, 0.4, 1.0};
  const VehicleState far{-1e6, 0.0, 0.0};
  const SfmParams p = goal_ahead();
  // Goal straight ahead: driving term (1.4 - 0.4) / 0.5 = 2, repulsion vanishes.
  EXPECT_NEAR(ssmpc::sfm_acceleration(ped, far, p), 2.0, 1e-9);
}

TEST(Sfm, VehicleRepelsPedestrianAwayFromLane)
{
  const PedestrianState ped{0.0, -1.5, 1.4, 1.0};
  const VehicleState near{0.0, 5.0, 0.0};
  const SfmParams p = goal_ahead();
  // Driving term is 0 at desired speed; repulsion 2 e^{(1 - 1.5)/1} toward -y.
  EXPECT_NEAR(ssmpc::sfm_acceleration(ped, near, p), -2.0 * std::exp(-0.5), 1e-12);
}

TEST(Sfm, StepKeepsSpeedNonNegative)
{
  PedestrianState ped{0.0, -0.8, 0.1, 1.0};
  const VehicleState on_top{0.0, 5.0, 0.0};
  const SfmParams p = goal_ahead();
  for (int i = 0; i < 50; ++i) {
    ped = ssmpc::sfm_step(ped, on_top, p, 0.1);
    ASSERT_GE(ped.vy, 0.0);
  }
}

TEST(Sfm, PredictionHasHorizonPlusOneEntries)
{
  ssmpc::WorldState w;
  const auto trace = ssmpc::sfm_predict(w, goal_ahead(), 20, 0.1, w.vehicle.v);
  ASSERT_EQ(trace.size(), 21u);
  EXPECT_EQ(trace.y.front(), w.pedestrian.y);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    EXPECT_NEAR(trace.y[i], trace.y[i - 1] + 0.1 * trace.vy[i], 1e-12);
  }
}

TEST(ConstantSpeed, LinearPrediction)
{
  const PedestrianState ped{1.0, -3.0, 1.2, 0.5};
  const auto t = ssmpc::constant_speed_predict(ped, 10, 0.1);
  ASSERT_EQ(t.size(), 11u);
  EXPECT_NEAR(t.y[10], -3.0 + 1.2, 1e-12);
  EXPECT_EQ(t.vy[5], 1.2);
  EXPECT_EQ(t.x_cross, 1.0);
}

TEST(MixedModel, ChoosesBothModelsAtTheGivenRate)
{
  ssmpc::Rng rng(8);
  int sfm = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    sfm += ssmpc::mixed_model_sample(rng, 0.5) == ssmpc::PedModel::Sfm ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(sfm) / n, 0.5, 0.02);
}

}  // namespace
