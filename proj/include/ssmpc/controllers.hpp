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

#ifndef SSMPC__CONTROLLERS_HPP_
#define SSMPC__CONTROLLERS_HPP_

#include "ssmpc/mpc_problem.hpp"
#include "ssmpc/ped_models.hpp"
#include "ssmpc/scenario.hpp"
#include "ssmpc/solver.hpp"
#include "ssmpc/types.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ssmpc
{

struct ControlDecision
{
  /// Acceleration applied this step, already limited so the speed stays in bounds.
  double u0{0.0};
  std::vector<double> u_seq{};
  double predicted_cost{0.0};
  double solve_time{0.0};
  /// Set when the optimizer found no feasible plan and full braking was commanded.
  bool fallback{false};
  int iterations{0};
  double violation_max{0.0};
};

/// Shrinks the distance weight and the safe distance by the pedestrian's intention while
/// the pedestrian stands in the near zone. Returns a modified copy.
inline ControllerConfig apply_intention_lowering(ControllerConfig cfg, double intention, Zone zone)
{
  if (!(intention >= 0.0 && intention <= 1.0)) {
    throw std::invalid_argument("apply_intention_lowering: intention must lie in [0, 1]");
  }
  if (zone == Zone::Near) {
    cfg.w3 *= intention;
    cfg.d_min *= intention;
  }
  return cfg;
}

/// Shifts a plan by one step, repeating the last input.
inline std::vector<double> shift_plan(std::span<const double> u, int n)
{
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  if (u.empty()) {
    return out;
  }
  for (int i = 0; i < n; ++i) {
    const std::size_t src = std::min(static_cast<std::size_t>(i) + 1, u.size() - 1);
    out[static_cast<std::size_t>(i)] = u[src];
  }
  return out;
}

namespace detail
{

inline ControlDecision decision_from_report(
  const SolveReport & r, const WorldState & world, const ControllerConfig & cfg,
  const ScenarioSpec & spec)
{
  ControlDecision d;
  d.u_seq = r.u;
  d.predicted_cost = r.objective;
  d.solve_time = r.wall_time;
  d.iterations = r.iterations;
  d.violation_max = r.violation_max;
  double u0 = r.u.empty() ? 0.0 : r.u.front();
  if (!r.feasible) {
    d.fallback = true;
    u0 = cfg.a_min;
    std::fill(d.u_seq.begin(), d.u_seq.end(), cfg.a_min);
  }
  d.u0 = effective_input(world.vehicle.v, u0, spec.dt, cfg.v_min, cfg.v_max);
  if (!d.u_seq.empty()) {
    d.u_seq.front() = d.u0;
  }
  return d;
}

}  // namespace detail

/// Explicit-model MPC step: the pedestrian speed inside the prediction follows the
/// sigmoid of the time-to-collision, so it responds to the candidate inputs. `extra`
/// traces (the constant-speed hypothesis in the mixed evaluation) are checked as well.
inline ControlDecision explicit_mpc_control(
  const WorldState & world, const ControllerConfig & cfg, const ScenarioSpec & spec,
  std::span<const double> warm_start, const SolverOptions & solver = {},
  std::vector<PredictionTrace> extra = {}, SolveReport * report_out = nullptr)
{
  MpcProblem problem(world, cfg, spec, PredictionSource{true, std::move(extra)});
  SolveReport r = solve(problem, warm_start, solver);
  ControlDecision d = detail::decision_from_report(r, world, cfg, spec);
  if (report_out != nullptr) {
    *report_out = std::move(r);
  }
  return d;
}

/// Implicit-model MPC step: vehicle-only dynamics against fixed pedestrian predictions.
inline ControlDecision implicit_mpc_control(
  const WorldState & world, const ControllerConfig & cfg, const ScenarioSpec & spec,
  std::vector<PredictionTrace> traces, std::span<const double> warm_start,
  const SolverOptions & solver = {}, SolveReport * report_out = nullptr)
{
  MpcProblem problem(world, cfg, spec, PredictionSource{false, std::move(traces)});
  SolveReport r = solve(problem, warm_start, solver);
  ControlDecision d = detail::decision_from_report(r, world, cfg, spec);
  if (report_out != nullptr) {
    *report_out = std::move(r);
  }
  return d;
}

/// Distance-and-speed rule: full braking while an unpassed pedestrian in the near zone or
/// on the lane has a time-to-collision below t_brake, otherwise proportional speed tracking.
inline ControlDecision rule_based_control(
  const WorldState & world, const ControllerConfig & cfg, const ScenarioSpec & spec)
{
  const auto t0 = std::chrono::steady_clock::now();
  const Zone zone = zone_of(world.pedestrian, spec);
  const bool ahead = world.vehicle.x < world.pedestrian.x_cross;
  const double tc = ttc(world, spec.v_ped_ref, spec.lane_y);
  double u = 0.0;
  if ((zone == Zone::Near || zone == Zone::OnLane) && ahead && tc < cfg.t_brake) {
    u = cfg.a_min;
  } else if (world.vehicle.v < spec.v_veh_ref) {
    u = std::min(cfg.a_max, cfg.k_p * (spec.v_veh_ref - world.vehicle.v));
  }
  u = std::clamp(u, cfg.a_min, cfg.a_max);
  ControlDecision d;
  d.u0 = effective_input(world.vehicle.v, u, spec.dt, cfg.v_min, cfg.v_max);
  d.u_seq = {d.u0};
  d.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return d;
}

enum class ControllerKind { Explicit, Implicit, RuleBased };

inline std::string_view to_string(ControllerKind k)
{
  switch (k) {
    case ControllerKind::Explicit:
      return "explicit";
    case ControllerKind::Implicit:
      return "implicit";
    case ControllerKind::RuleBased:
      return "rule";
  }
  return "explicit";
}

inline constexpr std::string_view kControllerNames = "explicit, implicit, rule";

inline ControllerKind parse_controller_kind(std::string_view name)
{
  if (name == "explicit") {
    return ControllerKind::Explicit;
  }
  if (name == "implicit") {
    return ControllerKind::Implicit;
  }
  if (name == "rule" || name == "rule-based" || name == "rule_based") {
    return ControllerKind::RuleBased;
  }
  throw std::invalid_argument(
    "unknown controller '" + std::string(name) + "' (valid: " + std::string(kControllerNames) + ")");
}

/// Stateful per-episode decision maker. The only state is the warm start.
class Controller
{
public:
  virtual ~Controller() = default;
  virtual ControllerKind kind() const = 0;
  /// Whether intention lowering is applied to this controller's configuration.
  virtual bool uses_intention_lowering() const = 0;
  virtual ControlDecision decide(const WorldState & world, const ControllerConfig & cfg) = 0;
  virtual void reset() {}
  std::string_view name() const { return to_string(kind()); }
};

/// Options shared by both MPC variants.
struct MpcOptions
{
  SolverOptions solver{};
  /// Adds a constant-speed pedestrian hypothesis, evaluated worst-case.
  bool dual_prediction{false};
};

class ExplicitMpcController : public Controller
{
public:
  ExplicitMpcController(ScenarioSpec spec, MpcOptions opt) : spec_(std::move(spec)), opt_(opt) {}

  ControllerKind kind() const override { return ControllerKind::Explicit; }
  bool uses_intention_lowering() const override { return true; }
  void reset() override { plan_.clear(); }

  ControlDecision decide(const WorldState & world, const ControllerConfig & cfg) override
  {
    const auto warm = shift_plan(plan_, cfg.n);
    std::vector<PredictionTrace> extra;
    if (opt_.dual_prediction) {
      extra.push_back(constant_speed_predict(world.pedestrian, cfg.n, spec_.dt));
    }
    SolveReport r;
    ControlDecision d = explicit_mpc_control(world, cfg, spec_, warm, opt_.solver, std::move(extra), &r);
    plan_ = std::move(r.u);
    return d;
  }

private:
  ScenarioSpec spec_;
  MpcOptions opt_;
  std::vector<double> plan_{};
};

/// Social-force prediction parameters for a given world: the goal sits on the crossing
/// line past the lane.
inline SfmParams resolve_sfm_goal(SfmParams p, const WorldState & world, const ScenarioSpec & spec)
{
  p.goal_x = world.pedestrian.x_cross;
  p.goal_y = spec.lane_y + p.goal_offset;
  return p;
}

class ImplicitMpcController : public Controller
{
public:
  ImplicitMpcController(ScenarioSpec spec, MpcOptions opt) : spec_(std::move(spec)), opt_(opt) {}

  ControllerKind kind() const override { return ControllerKind::Implicit; }
  bool uses_intention_lowering() const override { return true; }
  void reset() override { plan_.clear(); }

  ControlDecision decide(const WorldState & world, const ControllerConfig & cfg) override
  {
    const auto warm = shift_plan(plan_, cfg.n);
    std::vector<PredictionTrace> traces;
    const SfmParams p = resolve_sfm_goal(spec_.sfm, world, spec_);
    traces.push_back(sfm_predict(world, p, cfg.n, spec_.dt, world.vehicle.v));
    if (opt_.dual_prediction) {
      traces.push_back(constant_speed_predict(world.pedestrian, cfg.n, spec_.dt));
    }
    SolveReport r;
    ControlDecision d = implicit_mpc_control(world, cfg, spec_, std::move(traces), warm, opt_.solver, &r);
    plan_ = std::move(r.u);
    return d;
  }

private:
  ScenarioSpec spec_;
  MpcOptions opt_;
  std::vector<double> plan_{};
};

class RuleBasedController : public Controller
{
public:
  explicit RuleBasedController(ScenarioSpec spec) : spec_(std::move(spec)) {}

  ControllerKind kind() const override { return ControllerKind::RuleBased; }
  bool uses_intention_lowering() const override { return false; }

  ControlDecision decide(const WorldState & world, const ControllerConfig & cfg) override
  {
    return rule_based_control(world, cfg, spec_);
  }

private:
  ScenarioSpec spec_;
};

/// Builds a fresh controller. Both MPCs get the constant-speed hypothesis when the
/// scenario uses the mixed pedestrian model.
inline std::unique_ptr<Controller> make_controller(
  ControllerKind kind, const ScenarioSpec & spec, SolverOptions solver = {})
{
  MpcOptions opt{solver, spec.ped_model == PedModel::Mixed};
  switch (kind) {
    case ControllerKind::Explicit:
      return std::make_unique<ExplicitMpcController>(spec, opt);
    case ControllerKind::Implicit:
      return std::make_unique<ImplicitMpcController>(spec, opt);
    case ControllerKind::RuleBased:
      return std::make_unique<RuleBasedController>(spec);
  }
  throw std::invalid_argument("make_controller: unknown kind");
}

}  // namespace ssmpc

#endif  // SSMPC__CONTROLLERS_HPP_
