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

#ifndef SSMPC__IO_HPP_
#define SSMPC__IO_HPP_

/**
 * @file
 * @brief File formats: scenario and controller JSON, episode logs, metric and trace CSV.
 *
 * Parsing is strict. Unknown keys and wrongly typed values raise ConfigError naming the
 * field by its dotted path; missing keys keep their defaults.
 */

#include "ssmpc/controllers.hpp"
#include "ssmpc/engine.hpp"
#include "ssmpc/types.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

namespace ssmpc
{

using json = nlohmann::json;

namespace io_detail
{

inline std::string join_path(const std::string & prefix, std::string_view key)
{
  return prefix.empty() ? std::string(key) : prefix + "." + std::string(key);
}

inline void require_object(const json & j, const std::string & path)
{
  if (!j.is_object()) {
    throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  }
}

inline void reject_unknown(
  const json & j, std::initializer_list<std::string_view> known, const std::string & prefix)
{
  for (const auto & [key, value] : j.items()) {
    bool ok = false;
    for (auto k : known) {
      ok = ok || key == k;
    }
    if (!ok) {
      throw ConfigError(join_path(prefix, key), "unknown field");
    }
  }
}

inline void read(const json & j, std::string_view key, double & out, const std::string & prefix)
{
  const auto it = j.find(key);
  if (it == j.end()) {
    return;
  }
  if (!it->is_number()) {
    throw ConfigError(join_path(prefix, key), "expected a number");
  }
  out = it->get<double>();
}

inline void read(const json & j, std::string_view key, int & out, const std::string & prefix)
{
  const auto it = j.find(key);
  if (it == j.end()) {
    return;
  }
  if (!it->is_number_integer()) {
    throw ConfigError(join_path(prefix, key), "expected an integer");
  }
  out = it->get<int>();
}

inline void read(const json & j, std::string_view key, bool & out, const std::string & prefix)
{
  const auto it = j.find(key);
  if (it == j.end()) {
    return;
  }
  if (!it->is_boolean()) {
    throw ConfigError(join_path(prefix, key), "expected true or false");
  }
  out = it->get<bool>();
}

inline void read(
  const json & j, std::string_view key, std::uint64_t & out, const std::string & prefix)
{
  const auto it = j.find(key);
  if (it == j.end()) {
    return;
  }
  if (!it->is_number_unsigned()) {
    throw ConfigError(join_path(prefix, key), "expected a non-negative integer");
  }
  out = it->get<std::uint64_t>();
}

inline void read_normal(const json & j, std::string_view key, NormalDist & d, const std::string & prefix)
{
  const auto it = j.find(key);
  if (it == j.end()) {
    return;
  }
  const std::string path = join_path(prefix, key);
  require_object(*it, path);
  reject_unknown(*it, {"mean", "std", "min"}, path);
  read(*it, "mean", d.mean, path);
  read(*it, "std", d.std, path);
  if (auto m = it->find("min"); m != it->end() && m->is_null()) {
    d.min = -INFINITY;
  } else {
    read(*it, "min", d.min, path);
  }
}

inline void read_uniform(
  const json & j, std::string_view key, UniformDist & d, const std::string & prefix)
{
  const auto it = j.find(key);
  if (it == j.end()) {
    return;
  }
  const std::string path = join_path(prefix, key);
  require_object(*it, path);
  reject_unknown(*it, {"lo", "hi"}, path);
  read(*it, "lo", d.lo, path);
  read(*it, "hi", d.hi, path);
}

template <class Enum, std::size_t N>
Enum read_enum(
  const json & j, std::string_view key, Enum current, const std::array<Enum, N> & values,
  const std::string & prefix)
{
  const auto it = j.find(key);
  if (it == j.end()) {
    return current;
  }
  const std::string path = join_path(prefix, key);
  if (!it->is_string()) {
    throw ConfigError(path, "expected a string");
  }
  const auto s = it->get<std::string>();
  std::string valid;
  for (Enum v : values) {
    if (s == to_string(v)) {
      return v;
    }
    valid += (valid.empty() ? "" : ", ") + std::string(to_string(v));
  }
  throw ConfigError(path, "unknown value '" + s + "' (valid: " + valid + ")");
}

inline json normal_json(const NormalDist & d)
{
  json j{{"mean", d.mean}, {"std", d.std}};
  j["min"] = std::isfinite(d.min) ? json(d.min) : json(nullptr);
  return j;
}

}  // namespace io_detail

inline constexpr std::array kIntentionModes{
  IntentionMode::Crossing, IntentionMode::Yielding, IntentionMode::Random, IntentionMode::Manual};
inline constexpr std::array kPedModels{
  PedModel::Sfm, PedModel::Constant, PedModel::Mixed, PedModel::Sigmoid, PedModel::Manual};

inline ScenarioSpec scenario_from_json(const json & j)
{
  using namespace io_detail;
  ScenarioSpec s;
  require_object(j, "");
  reject_unknown(
    j,
    {"dt", "max_time", "lane_y", "lane_half_width", "zone_near", "zone_safe_boundary",
     "init_distributions", "v_ped_ref", "v_veh_ref", "intention_mode", "p_cross", "ped_model",
     "p_sfm", "sfm", "crossing", "collision_radius", "pass_clearance", "intention_lowering",
     "seed"},
    "");
  read(j, "dt", s.dt, "");
  read(j, "max_time", s.max_time, "");
  read(j, "lane_y", s.lane_y, "");
  read(j, "lane_half_width", s.lane_half_width, "");
  if (auto it = j.find("zone_near"); it != j.end()) {
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
      throw ConfigError("zone_near", "expected [lo, hi]");
    }
    s.zone_near = {(*it)[0].get<double>(), (*it)[1].get<double>()};
  }
  read(j, "zone_safe_boundary", s.zone_safe_boundary, "");
  if (auto it = j.find("init_distributions"); it != j.end()) {
    const std::string p = "init_distributions";
    require_object(*it, p);
    reject_unknown(
      *it, {"x_ped", "y_offset", "vy", "v_veh", "x_veh", "intention_crossing", "intention_yielding"},
      p);
    auto & d = s.init_distributions;
    read_normal(*it, "x_ped", d.x_ped, p);
    read_normal(*it, "y_offset", d.y_offset, p);
    read_normal(*it, "vy", d.vy, p);
    read_normal(*it, "v_veh", d.v_veh, p);
    read(*it, "x_veh", d.x_veh, p);
    read_uniform(*it, "intention_crossing", d.intention_crossing, p);
    read_uniform(*it, "intention_yielding", d.intention_yielding, p);
  }
  read(j, "v_ped_ref", s.v_ped_ref, "");
  read(j, "v_veh_ref", s.v_veh_ref, "");
  s.intention_mode = read_enum(j, "intention_mode", s.intention_mode, kIntentionModes, "");
  read(j, "p_cross", s.p_cross, "");
  s.ped_model = read_enum(j, "ped_model", s.ped_model, kPedModels, "");
  read(j, "p_sfm", s.p_sfm, "");
  if (auto it = j.find("sfm"); it != j.end()) {
    require_object(*it, "sfm");
    reject_unknown(*it, {"tau", "A", "B", "radius", "desired_speed", "goal_offset"}, "sfm");
    read(*it, "tau", s.sfm.tau, "sfm");
    read(*it, "A", s.sfm.A, "sfm");
    read(*it, "B", s.sfm.B, "sfm");
    read(*it, "radius", s.sfm.radius, "sfm");
    read(*it, "desired_speed", s.sfm.desired_speed, "sfm");
    read(*it, "goal_offset", s.sfm.goal_offset, "sfm");
  }
  if (auto it = j.find("crossing"); it != j.end()) {
    require_object(*it, "crossing");
    reject_unknown(*it, {"wait_offset", "slow_radius", "patience", "stopped_speed"}, "crossing");
    read(*it, "wait_offset", s.crossing.wait_offset, "crossing");
    read(*it, "slow_radius", s.crossing.slow_radius, "crossing");
    read(*it, "patience", s.crossing.patience, "crossing");
    read(*it, "stopped_speed", s.crossing.stopped_speed, "crossing");
  }
  read(j, "collision_radius", s.collision_radius, "");
  read(j, "pass_clearance", s.pass_clearance, "");
  read(j, "intention_lowering", s.intention_lowering, "");
  read(j, "seed", s.seed, "");
  validate(s);
  return s;
}

inline json to_json(const ScenarioSpec & s)
{
  const auto & d = s.init_distributions;
  return json{
    {"dt", s.dt},
    {"max_time", s.max_time},
    {"lane_y", s.lane_y},
    {"lane_half_width", s.lane_half_width},
    {"zone_near", {s.zone_near.first, s.zone_near.second}},
    {"zone_safe_boundary", s.zone_safe_boundary},
    {"init_distributions",
     {{"x_ped", io_detail::normal_json(d.x_ped)},
      {"y_offset", io_detail::normal_json(d.y_offset)},
      {"vy", io_detail::normal_json(d.vy)},
      {"v_veh", io_detail::normal_json(d.v_veh)},
      {"x_veh", d.x_veh},
      {"intention_crossing", {{"lo", d.intention_crossing.lo}, {"hi", d.intention_crossing.hi}}},
      {"intention_yielding", {{"lo", d.intention_yielding.lo}, {"hi", d.intention_yielding.hi}}}}},
    {"v_ped_ref", s.v_ped_ref},
    {"v_veh_ref", s.v_veh_ref},
    {"intention_mode", to_string(s.intention_mode)},
    {"p_cross", s.p_cross},
    {"ped_model", to_string(s.ped_model)},
    {"p_sfm", s.p_sfm},
    {"sfm",
     {{"tau", s.sfm.tau},
      {"A", s.sfm.A},
      {"B", s.sfm.B},
      {"radius", s.sfm.radius},
      {"desired_speed", s.sfm.desired_speed},
      {"goal_offset", s.sfm.goal_offset}}},
    {"crossing",
     {{"wait_offset", s.crossing.wait_offset},
      {"slow_radius", s.crossing.slow_radius},
      {"patience", s.crossing.patience},
      {"stopped_speed", s.crossing.stopped_speed}}},
    {"collision_radius", s.collision_radius},
    {"pass_clearance", s.pass_clearance},
    {"intention_lowering", s.intention_lowering},
    {"seed", s.seed}};
}

/// Applies the fields present in `j` on top of `base`.
inline ControllerConfig controller_config_from_json(const json & j, ControllerConfig base = {})
{
  using namespace io_detail;
  require_object(j, "");
  reject_unknown(
    j,
    {"w1", "w2", "w3", "n", "c", "d_min", "v_min", "v_max", "a_min", "a_max", "collision_radius",
     "t_brake", "k_p"},
    "");
  read(j, "w1", base.w1, "");
  read(j, "w2", base.w2, "");
  read(j, "w3", base.w3, "");
  read(j, "n", base.n, "");
  read(j, "c", base.c, "");
  read(j, "d_min", base.d_min, "");
  read(j, "v_min", base.v_min, "");
  read(j, "v_max", base.v_max, "");
  read(j, "a_min", base.a_min, "");
  read(j, "a_max", base.a_max, "");
  read(j, "collision_radius", base.collision_radius, "");
  read(j, "t_brake", base.t_brake, "");
  read(j, "k_p", base.k_p, "");
  validate(base);
  return base;
}

inline json to_json(const ControllerConfig & c)
{
  return json{{"w1", c.w1},       {"w2", c.w2},         {"w3", c.w3},
              {"n", c.n},         {"c", c.c},           {"d_min", c.d_min},
              {"v_min", c.v_min}, {"v_max", c.v_max},   {"a_min", c.a_min},
              {"a_max", c.a_max}, {"collision_radius", c.collision_radius},
              {"t_brake", c.t_brake}, {"k_p", c.k_p}};
}

/// Tuned configuration for one controller, as written by `ssmpc tune`.
struct ConfigFragment
{
  ControllerKind controller{ControllerKind::Explicit};
  ControllerConfig config{};
  std::optional<double> score{};
};

inline ConfigFragment fragment_from_json(const json & j)
{
  io_detail::require_object(j, "");
  io_detail::reject_unknown(j, {"controller", "config", "score"}, "");
  ConfigFragment f;
  const auto c = j.find("controller");
  if (c == j.end() || !c->is_string()) {
    throw ConfigError("controller", "expected a controller name");
  }
  try {
    f.controller = parse_controller_kind(c->get<std::string>());
  } catch (const std::invalid_argument & e) {
    throw ConfigError("controller", e.what());
  }
  const auto cfg = j.find("config");
  if (cfg == j.end()) {
    throw ConfigError("config", "missing");
  }
  try {
    f.config = controller_config_from_json(*cfg);
  } catch (const ConfigError & e) {
    throw ConfigError("config." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
  }
  if (auto s = j.find("score"); s != j.end() && s->is_number()) {
    f.score = s->get<double>();
  }
  return f;
}

inline json to_json(const ConfigFragment & f)
{
  json j{{"controller", to_string(f.controller)}, {"config", to_json(f.config)}};
  if (f.score) {
    j["score"] = *f.score;
  }
  return j;
}

inline json read_json_file(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error & e) {
    throw ConfigError("<root>", "'" + path + "' is not valid JSON: " + e.what());
  }
}

inline ScenarioSpec load_scenario(const std::string & path)
{
  return scenario_from_json(read_json_file(path));
}

inline ConfigFragment load_fragment(const std::string & path)
{
  return fragment_from_json(read_json_file(path));
}

inline void write_text_file(const std::string & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  out << text;
}

// ---------------------------------------------------------------------------------------
// Episode logs and CSV

/// Fixed-format number for CSV output so files compare byte for byte across runs.
inline std::string fmt(double v, int precision = 9)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

inline json to_json(const WorldState & w)
{
  return json{
    {"t", w.t},
    {"step", w.step_index},
    {"vehicle", {{"x", w.vehicle.x}, {"v", w.vehicle.v}, {"y_lane", w.vehicle.y_lane}}},
    {"pedestrian",
     {{"x_cross", w.pedestrian.x_cross},
      {"y", w.pedestrian.y},
      {"vy", w.pedestrian.vy},
      {"intention", w.pedestrian.intention}}}};
}

inline json metrics_json(const RunMetrics & m, bool with_timing = true)
{
  json j{{"ttc_min", m.ttc_min}, {"t_total", m.t_total}, {"a_max", m.a_max_abs},
         {"collided", m.collided}, {"timed_out", m.timed_out}};
  if (with_timing) {
    j["mean_solve_ms"] = 1e3 * m.mean_compute_time();
  }
  return j;
}

/// Writes one episode as line-delimited JSON: a header line, one line per control step
/// and a closing line with the terminal reason and metrics.
inline void write_episode_jsonl(
  std::ostream & os, const EpisodeRecord & ep, std::string_view controller, int run,
  bool with_timing = true)
{
  os << json{{"type", "episode"}, {"run", run}, {"seed", ep.seed}, {"controller", controller},
             {"plant", to_string(ep.plant_model)}}
          .dump()
     << '\n';
  for (const auto & s : ep.steps) {
    json j{{"type", "step"},           {"run", run},
           {"world", to_json(s.world)}, {"zone", to_string(s.zone)},
           {"ttc", s.ttc},             {"u", s.u},
           {"fallback", s.fallback},   {"controller_failed", s.controller_failed}};
    if (with_timing) {
      j["solve_ms"] = 1e3 * s.compute_time;
    }
    os << j.dump() << '\n';
  }
  os << json{{"type", "end"},
             {"run", run},
             {"reason", to_string(ep.reason)},
             {"score", ep.score},
             {"final", to_json(ep.final_state)},
             {"metrics", metrics_json(ep.metrics, with_timing)}}
          .dump()
     << '\n';
}

inline constexpr std::string_view kMetricsCsvHeader =
  "run,seed,ttc_min,t_total,a_max,collided,score,mean_solve_ms";

/// Per-run metrics. With timing off the solve-time column is left empty.
inline void write_metrics_csv(std::ostream & os, const BatchResult & b, bool with_timing = true)
{
  os << kMetricsCsvHeader << '\n';
  for (const auto & r : b.runs) {
    os << r.run << ',' << r.seed << ',' << fmt(r.ttc_min) << ',' << fmt(r.t_total) << ','
       << fmt(r.a_max) << ',' << (r.collided ? 1 : 0) << ',' << fmt(r.score) << ',';
    if (with_timing) {
      os << fmt(1e3 * r.mean_solve_time, 6);
    }
    os << '\n';
  }
}

inline constexpr std::string_view kTraceCsvHeader = "t,x_veh,v_veh,y_ped,vy_ped,intention,u,ttc";

/// One row per control step, in the order applied.
inline void write_trace_csv(std::ostream & os, const EpisodeRecord & ep)
{
  os << kTraceCsvHeader << '\n';
  for (const auto & s : ep.steps) {
    const auto & w = s.world;
    os << fmt(w.t) << ',' << fmt(w.vehicle.x) << ',' << fmt(w.vehicle.v) << ','
       << fmt(w.pedestrian.y) << ',' << fmt(w.pedestrian.vy) << ',' << fmt(w.pedestrian.intention)
       << ',' << fmt(s.u) << ',' << fmt(s.ttc) << '\n';
  }
}

}  // namespace ssmpc

#endif  // SSMPC__IO_HPP_
