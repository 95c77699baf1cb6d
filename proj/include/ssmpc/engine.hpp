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

#ifndef SSMPC__ENGINE_HPP_
#define SSMPC__ENGINE_HPP_

/**
 * @file
 * @brief Fixed-step closed-loop simulation, episode scoring and Monte-Carlo batches.
 */

#include "ssmpc/controllers.hpp"
#include "ssmpc/mpc_problem.hpp"
#include "ssmpc/ped_models.hpp"
#include "ssmpc/rng.hpp"
#include "ssmpc/scenario.hpp"
#include "ssmpc/types.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace ssmpc
{

enum class TerminalReason { Passed, Collision, Timeout };

inline std::string_view to_string(TerminalReason r)
{
  switch (r) {
    case TerminalReason::Passed:
      return "passed";
    case TerminalReason::Collision:
      return "collision";
    case TerminalReason::Timeout:
      return "timeout";
  }
  return "passed";
}

struct ScoreWeights
{
  double k1{1.0};
  double k2{1.0};
  double k3{1.0};
  double collision_penalty{100.0};
};

/// Episode score: k1 ttc_min - k2 t_total - k3 |a|max, minus the penalty on collision.
inline double score(const RunMetrics & m, const ScoreWeights & k = {})
{
  double j = k.k1 * m.ttc_min - k.k2 * m.t_total - k.k3 * m.a_max_abs;
  if (m.collided) {
    j -= k.collision_penalty;
  }
  return j;
}

/// Per-episode state of the simulated pedestrian that is not part of the world.
struct PlantState
{
  PedModel model{PedModel::Sfm};
  SfmParams sfm{};
  /// Correction factor of the sigmoid plant.
  double c{2.0};
  /// Seconds the vehicle has been standing still.
  double stopped_time{0.0};
  /// A yielding pedestrian stops waiting once released.
  bool released{false};
};

inline PlantState make_plant(PedModel model, const WorldState & world, const ScenarioSpec & spec)
{
  PlantState p;
  p.model = model;
  p.sfm = resolve_sfm_goal(spec.sfm, world, spec);
  return p;
}

/// Advances the world by one step. The pedestrian update reads the vehicle state at the
/// start of the step. In PedModel::Manual and PedModel::Constant the pedestrian walks at
/// its current vy (the live session writes overrides into it).
inline WorldState step(
  const WorldState & world, double u, const ScenarioSpec & spec, PlantState & plant)
{
  WorldState next = world;
  auto & ped = next.pedestrian;
  switch (plant.model) {
    case PedModel::Sfm: {
      const bool waiting = ped.intention < 0.5 && !plant.released;
      SfmParams p = plant.sfm;
      if (waiting) {
        p.goal_y = spec.lane_y - spec.crossing.wait_offset;
        const double remaining = std::max(0.0, p.goal_y - world.pedestrian.y);
        const double r = spec.crossing.slow_radius;
        p.desired_speed *= r > 0.0 ? std::min(1.0, remaining / r) : 1.0;
      }
      ped = sfm_step(world.pedestrian, world.vehicle, p, spec.dt);
      break;
    }
    case PedModel::Sigmoid: {
      const double tc = ttc(world, spec.v_ped_ref, spec.lane_y);
      ped.y = world.pedestrian.y + spec.dt * world.pedestrian.vy;
      ped.vy = sigmoid_speed(tc, plant.c, spec.v_ped_ref);
      break;
    }
    case PedModel::Constant:
    case PedModel::Manual:
    case PedModel::Mixed:
      ped.y = world.pedestrian.y + spec.dt * world.pedestrian.vy;
      break;
  }
  advance_vehicle(
    next.vehicle.x, next.vehicle.v, u, spec.dt, 0.0, std::numeric_limits<double>::infinity());
  next.step_index = world.step_index + 1;
  next.t = static_cast<double>(next.step_index) * spec.dt;

  // Only a vehicle standing short of the crossing line counts as yielding.
  const bool yielding_vehicle =
    next.vehicle.v < spec.crossing.stopped_speed &&
    next.vehicle.x < next.pedestrian.x_cross - spec.collision_radius;
  if (yielding_vehicle) {
    plant.stopped_time += spec.dt;
  } else {
    plant.stopped_time = 0.0;
  }
  if (next.vehicle.x > next.pedestrian.x_cross + spec.collision_radius) {
    plant.released = true;
  }
  if (spec.crossing.patience > 0.0 && plant.stopped_time >= spec.crossing.patience - 1e-9) {
    plant.released = true;
  }
  return next;
}

struct StepRecord
{
  WorldState world{};
  Zone zone{Zone::Safe};
  double ttc{0.0};
  double u{0.0};
  double compute_time{0.0};
  bool fallback{false};
  bool controller_failed{false};
};

struct EpisodeRecord
{
  std::vector<StepRecord> steps{};
  WorldState final_state{};
  PedModel plant_model{PedModel::Sfm};
  RunMetrics metrics{};
  TerminalReason reason{TerminalReason::Timeout};
  double score{0.0};
  std::uint64_t seed{0};
};

/// Hooks for driving an episode from outside (the live session).
struct EpisodeHooks
{
  /// Called before each decision; may modify the pedestrian (manual overrides).
  std::function<void(WorldState &)> before_step{};
};

inline std::int64_t max_steps(const ScenarioSpec & spec)
{
  return static_cast<std::int64_t>(std::floor(spec.max_time / spec.dt + 1e-9));
}

/// Terminal check on a world state, or nothing while the episode continues.
inline std::optional<TerminalReason> terminal_reason(const WorldState & w, const ScenarioSpec & spec)
{
  if (distance(w.vehicle, w.pedestrian) < spec.collision_radius) {
    return TerminalReason::Collision;
  }
  if (w.vehicle.x > w.pedestrian.x_cross + spec.pass_clearance) {
    return TerminalReason::Passed;
  }
  if (w.step_index >= max_steps(spec)) {
    return TerminalReason::Timeout;
  }
  return std::nullopt;
}

/// Configuration handed to the controller for this step.
inline ControllerConfig step_config(
  const ControllerConfig & cfg, const Controller & controller, const WorldState & world,
  const ScenarioSpec & spec)
{
  if (spec.intention_lowering && controller.uses_intention_lowering()) {
    return apply_intention_lowering(cfg, world.pedestrian.intention, zone_of(world.pedestrian, spec));
  }
  return cfg;
}

/// One closed-loop control step: decision (timed, failures become full braking) then plant.
inline StepRecord control_step(
  WorldState & world, Controller & controller, const ControllerConfig & cfg,
  const ScenarioSpec & spec, PlantState & plant)
{
  StepRecord rec;
  rec.world = world;
  rec.zone = zone_of(world.pedestrian, spec);
  rec.ttc = ttc(world, spec.v_ped_ref, spec.lane_y);
  const ControllerConfig eff = step_config(cfg, controller, world, spec);
  const auto t0 = std::chrono::steady_clock::now();
  double u = cfg.a_min;
  try {
    const ControlDecision d = controller.decide(world, eff);
    u = d.u0;
    rec.fallback = d.fallback;
    if (!std::isfinite(u)) {
      throw std::runtime_error("non-finite control");
    }
  } catch (const std::exception &) {
    rec.controller_failed = true;
    u = cfg.a_min;
  }
  rec.compute_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  u = effective_input(world.vehicle.v, u, spec.dt, 0.0, std::numeric_limits<double>::infinity());
  rec.u = u;
  world = step(world, u, spec, plant);
  return rec;
}

inline RunMetrics metrics_from(const EpisodeRecord & ep, const ScenarioSpec & spec)
{
  RunMetrics m;
  m.ttc_min = ttc(ep.final_state, spec.v_ped_ref, spec.lane_y);
  for (const auto & s : ep.steps) {
    m.ttc_min = std::min(m.ttc_min, s.ttc);
    m.a_max_abs = std::max(m.a_max_abs, std::abs(s.u));
    m.compute_times.push_back(s.compute_time);
  }
  m.t_total = static_cast<double>(ep.final_state.step_index) * spec.dt;
  m.collided = ep.reason == TerminalReason::Collision;
  m.timed_out = ep.reason == TerminalReason::Timeout;
  return m;
}

/// Runs one episode from a given initial world until pass, collision or timeout.
inline EpisodeRecord run_episode_from(
  const WorldState & initial, PlantState plant, const ScenarioSpec & spec, Controller & controller,
  const ControllerConfig & cfg, const ScoreWeights & weights = {}, const EpisodeHooks & hooks = {})
{
  EpisodeRecord ep;
  ep.plant_model = plant.model;
  WorldState world = initial;
  controller.reset();
  while (true) {
    if (hooks.before_step) {
      hooks.before_step(world);
    }
    if (auto r = terminal_reason(world, spec)) {
      ep.reason = *r;
      break;
    }
    ep.steps.push_back(control_step(world, controller, cfg, spec, plant));
  }
  ep.final_state = world;
  ep.metrics = metrics_from(ep, spec);
  ep.score = score(ep.metrics, weights);
  return ep;
}

/// Initial world and plant for a seeded episode. The same seed yields the same scenario
/// for every controller.
inline std::pair<WorldState, PlantState> sample_episode(const ScenarioSpec & spec, std::uint64_t seed)
{
  Rng rng(seed);
  WorldState w = sample_scenario(rng, spec);
  PedModel model = spec.ped_model;
  if (model == PedModel::Mixed) {
    model = mixed_model_sample(rng, spec.p_sfm);
  }
  return {w, make_plant(model, w, spec)};
}

inline EpisodeRecord run_episode(
  const ScenarioSpec & spec, Controller & controller, const ControllerConfig & cfg,
  std::uint64_t seed, const ScoreWeights & weights = {})
{
  auto [world, plant] = sample_episode(spec, seed);
  EpisodeRecord ep = run_episode_from(world, plant, spec, controller, cfg, weights);
  ep.seed = seed;
  return ep;
}

/// Compact per-run result kept by batches.
struct RunSummary
{
  int run{0};
  std::uint64_t seed{0};
  double ttc_min{0.0};
  double t_total{0.0};
  double a_max{0.0};
  bool collided{false};
  bool timed_out{false};
  bool failed{false};
  double score{0.0};
  double mean_solve_time{0.0};
  double total_solve_time{0.0};
  std::int64_t steps{0};
  TerminalReason reason{TerminalReason::Timeout};
  PedModel plant_model{PedModel::Sfm};
};

struct BatchResult
{
  std::vector<RunSummary> runs{};
  std::vector<EpisodeRecord> episodes{};
  double mean_score{0.0};
  /// Controller wall time per control step, pooled over all steps of all runs.
  double mean_compute_time{0.0};
  int collisions{0};
  int timeouts{0};
};

struct BatchOptions
{
  /// Worker threads; 0 reads SSMPC_THREADS, falling back to the hardware concurrency.
  unsigned threads{0};
  bool keep_episodes{false};
  ScoreWeights weights{};
  SolverOptions solver{};
};

inline std::uint64_t run_seed(std::uint64_t batch_seed, int run)
{
  return derive_seed(batch_seed, static_cast<std::uint64_t>(run));
}

inline unsigned resolve_threads(unsigned requested)
{
  if (requested > 0) {
    return requested;
  }
  if (const char * env = std::getenv("SSMPC_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) {
      return static_cast<unsigned>(v);
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline RunSummary summarize(const EpisodeRecord & ep, int run)
{
  RunSummary s;
  s.run = run;
  s.seed = ep.seed;
  s.ttc_min = ep.metrics.ttc_min;
  s.t_total = ep.metrics.t_total;
  s.a_max = ep.metrics.a_max_abs;
  s.collided = ep.metrics.collided;
  s.timed_out = ep.metrics.timed_out;
  s.score = ep.score;
  s.steps = static_cast<std::int64_t>(ep.steps.size());
  for (double t : ep.metrics.compute_times) {
    s.total_solve_time += t;
  }
  s.mean_solve_time = ep.metrics.mean_compute_time();
  s.reason = ep.reason;
  s.plant_model = ep.plant_model;
  return s;
}

/// Aggregates run summaries; the result does not depend on their order.
inline void aggregate(BatchResult & b)
{
  double score_sum = 0.0;
  double time_sum = 0.0;
  std::int64_t steps = 0;
  b.collisions = 0;
  b.timeouts = 0;
  for (const auto & r : b.runs) {
    score_sum += r.score;
    time_sum += r.total_solve_time;
    steps += r.steps;
    b.collisions += r.collided ? 1 : 0;
    b.timeouts += r.timed_out ? 1 : 0;
  }
  b.mean_score = b.runs.empty() ? 0.0 : score_sum / static_cast<double>(b.runs.size());
  b.mean_compute_time = steps > 0 ? time_sum / static_cast<double>(steps) : 0.0;
}

/// Runs n_runs seeded episodes, in parallel when allowed. Run i always uses
/// run_seed(seed, i), so the result is independent of scheduling.
inline BatchResult run_batch(
  const ScenarioSpec & spec, ControllerKind kind, const ControllerConfig & cfg, int n_runs,
  std::uint64_t seed, const BatchOptions & opt = {})
{
  if (n_runs < 1) {
    throw std::invalid_argument("run_batch: n_runs must be at least 1");
  }
  validate(spec);
  validate(cfg);
  BatchResult out;
  out.runs.resize(static_cast<std::size_t>(n_runs));
  if (opt.keep_episodes) {
    out.episodes.resize(static_cast<std::size_t>(n_runs));
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    auto controller = make_controller(kind, spec, opt.solver);
    for (int i = next++; i < n_runs; i = next++) {
      const std::uint64_t s = run_seed(seed, i);
      try {
        EpisodeRecord ep = run_episode(spec, *controller, cfg, s, opt.weights);
        out.runs[static_cast<std::size_t>(i)] = summarize(ep, i);
        if (opt.keep_episodes) {
          out.episodes[static_cast<std::size_t>(i)] = std::move(ep);
        }
      } catch (const std::exception &) {
        RunSummary r;
        r.run = i;
        r.seed = s;
        r.failed = true;
        r.collided = true;
        r.reason = TerminalReason::Collision;
        r.t_total = spec.max_time;
        r.ttc_min = 0.0;
        RunMetrics m;
        m.collided = true;
        m.t_total = spec.max_time;
        m.ttc_min = 0.0;
        r.score = score(m, opt.weights);
        out.runs[static_cast<std::size_t>(i)] = r;
      }
    }
  };
  const unsigned threads = std::min<unsigned>(resolve_threads(opt.threads), static_cast<unsigned>(n_runs));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
    for (auto & th : pool) {
      th.join();
    }
  }
  aggregate(out);
  return out;
}

}  // namespace ssmpc

#endif  // SSMPC__ENGINE_HPP_
