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

#ifndef SSMPC__LIVE__SESSION_HPP_
#define SSMPC__LIVE__SESSION_HPP_

/**
 * @file
 * @brief Transport-free live session: protocol messages in, Tick/Ended/Error out.
 *
 * The session never reads a clock. Whoever owns it calls tick() once per simulation step
 * (the server paces this against wall time, tests call it directly), so a recorded
 * message sequence replays to the identical Tick stream.
 *
 * Client to server, one JSON object per text frame:
 *   {"type":"hello","controller":"explicit","scenario":{...},"config":{...},"seed":7}
 *   {"type":"set_ped_speed","vy":1.2}
 *   {"type":"set_intention","i":0.3}
 *   {"type":"pause"}  {"type":"resume"}  {"type":"reset","seed":8}
 * Server to client:
 *   {"type":"tick","t":..,"step":..,"vehicle":{..},"pedestrian":{..},"u":..,"ttc":..,
 *    "zone":"near","score":..,"ack":..}
 *   {"type":"ended","reason":"passed","metrics":{..},"score":..}
 *   {"type":"error","code":"bad_frame","text":".."}
 */

#include "ssmpc/controllers.hpp"
#include "ssmpc/engine.hpp"
#include "ssmpc/io.hpp"
#include "ssmpc/types.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ssmpc::live
{

using nlohmann::json;

inline json error_message(std::string_view code, std::string_view text)
{
  return json{{"type", "error"}, {"code", code}, {"text", text}};
}

/// Result of feeding one inbound frame.
struct Reply
{
  std::vector<json> messages{};
  /// The connection must be closed after sending `messages`.
  bool close{false};
};

struct Overrides
{
  std::optional<double> vy{};
  std::optional<double> intention{};
};

class Session
{
public:
  explicit Session(ScenarioSpec defaults = {}) : defaults_(std::move(defaults)) {}

  bool started() const { return controller_ != nullptr; }
  bool paused() const { return paused_; }
  bool ended() const { return ended_; }
  /// Ticks are due while the episode is started, running and not yet ended.
  bool running() const { return started() && !paused_ && !ended_; }
  const WorldState & world() const { return world_; }
  const ScenarioSpec & spec() const { return spec_; }
  const Overrides & overrides() const { return overrides_; }
  std::uint64_t acknowledged() const { return ack_; }

  Reply handle(std::string_view frame)
  {
    Reply r;
    json msg;
    try {
      msg = json::parse(frame);
    } catch (const json::parse_error & e) {
      return bad_frame(std::string("not JSON: ") + e.what());
    }
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
      return bad_frame("message must be an object with a string 'type'");
    }
    const std::string type = msg["type"].get<std::string>();
    if (!started() && type != "hello") {
      r.messages.push_back(error_message("protocol", "first message must be hello"));
      r.close = true;
      return r;
    }
    try {
      if (type == "hello") {
        return on_hello(msg);
      }
      if (type == "set_ped_speed") {
        overrides_.vy = std::clamp(number(msg, "vy"), 0.0, 2.0 * spec_.v_ped_ref);
      } else if (type == "set_intention") {
        overrides_.intention = std::clamp(number(msg, "i"), 0.0, 1.0);
      } else if (type == "pause") {
        paused_ = true;
      } else if (type == "resume") {
        paused_ = false;
      } else if (type == "reset") {
        std::uint64_t seed = seed_;
        if (auto it = msg.find("seed"); it != msg.end()) {
          if (!it->is_number_unsigned()) {
            return bad_frame("reset.seed must be a non-negative integer");
          }
          seed = it->get<std::uint64_t>();
        }
        ++ack_;
        start_episode(seed);
        r.messages.push_back(tick_message(0.0));
        return r;
      } else {
        return bad_frame("unknown message type '" + type + "'");
      }
    } catch (const ConfigError & e) {
      return bad_frame(e.what());
    }
    ++ack_;
    return r;
  }

  /// Advances one simulation step. Returns the Tick, or Ended when the episode finishes,
  /// or nothing while paused, ended or not started.
  std::optional<json> tick()
  {
    if (!running()) {
      return std::nullopt;
    }
    apply_overrides(world_);
    if (auto reason = terminal_reason(world_, spec_)) {
      return finish(*reason);
    }
    const StepRecord rec = control_step(world_, *controller_, cfg_, spec_, plant_);
    episode_.steps.push_back(rec);
    apply_overrides(world_);
    if (auto reason = terminal_reason(world_, spec_)) {
      // Report the terminal state before the end message.
      pending_end_ = reason;
    }
    return tick_message(rec.u);
  }

private:
  Reply bad_frame(const std::string & text)
  {
    return Reply{{error_message("bad_frame", text)}, false};
  }

  static double number(const json & msg, const char * key)
  {
    const auto it = msg.find(key);
    if (it == msg.end() || !it->is_number() || !std::isfinite(it->get<double>())) {
      throw ConfigError(key, "expected a finite number");
    }
    return it->get<double>();
  }

  Reply on_hello(const json & msg)
  {
    if (started()) {
      return bad_frame("hello already received");
    }
    ScenarioSpec spec = defaults_;
    ControllerConfig cfg{};
    ControllerKind kind = ControllerKind::Explicit;
    try {
      if (auto it = msg.find("scenario"); it != msg.end()) {
        spec = scenario_from_json(*it);
      }
      if (auto it = msg.find("config"); it != msg.end()) {
        cfg = controller_config_from_json(*it);
      }
      if (auto it = msg.find("controller"); it != msg.end()) {
        if (!it->is_string()) {
          return bad_frame("controller must be a string");
        }
        kind = parse_controller_kind(it->get<std::string>());
      }
      seed_ = spec.seed;
      if (auto it = msg.find("seed"); it != msg.end()) {
        if (!it->is_number_unsigned()) {
          return bad_frame("seed must be a non-negative integer");
        }
        seed_ = it->get<std::uint64_t>();
      }
    } catch (const std::invalid_argument & e) {
      return bad_frame(e.what());
    }
    spec_ = spec;
    cfg_ = cfg;
    kind_ = kind;
    controller_ = make_controller(kind_, spec_);
    ++ack_;
    start_episode(seed_);
    return Reply{{tick_message(0.0)}, false};
  }

  void start_episode(std::uint64_t seed)
  {
    seed_ = seed;
    auto [world, plant] = sample_episode(spec_, seed);
    // The operator drives the pedestrian; it walks at whatever speed it was given.
    plant.model = PedModel::Manual;
    world_ = world;
    plant_ = plant;
    overrides_ = {};
    episode_ = {};
    episode_.seed = seed;
    episode_.plant_model = PedModel::Manual;
    controller_->reset();
    ended_ = false;
    pending_end_.reset();
  }

  void apply_overrides(WorldState & w) const
  {
    if (overrides_.vy) {
      w.pedestrian.vy = *overrides_.vy;
    }
    if (overrides_.intention) {
      w.pedestrian.intention = *overrides_.intention;
    }
  }

  double score_so_far() const
  {
    EpisodeRecord ep;
    ep.final_state = world_;
    ep.steps = episode_.steps;
    ep.reason = pending_end_.value_or(TerminalReason::Passed);
    return score(metrics_from(ep, spec_));
  }

  json tick_message(double u) const
  {
    return json{
      {"type", "tick"},
      {"t", world_.t},
      {"step", world_.step_index},
      {"vehicle", {{"x", world_.vehicle.x}, {"v", world_.vehicle.v}, {"y", world_.vehicle.y_lane}}},
      {"pedestrian",
       {{"x", world_.pedestrian.x_cross},
        {"y", world_.pedestrian.y},
        {"vy", world_.pedestrian.vy},
        {"intention", world_.pedestrian.intention}}},
      {"u", u},
      {"ttc", ttc(world_, spec_.v_ped_ref, spec_.lane_y)},
      {"zone", to_string(zone_of(world_.pedestrian, spec_))},
      {"score", score_so_far()},
      {"ack", ack_}};
  }

  json finish(TerminalReason reason)
  {
    ended_ = true;
    episode_.final_state = world_;
    episode_.reason = reason;
    episode_.metrics = metrics_from(episode_, spec_);
    episode_.score = score(episode_.metrics);
    return json{
      {"type", "ended"},
      {"reason", to_string(reason)},
      {"metrics", metrics_json(episode_.metrics, false)},
      {"score", episode_.score}};
  }

  ScenarioSpec defaults_;
  ScenarioSpec spec_{};
  ControllerConfig cfg_{};
  ControllerKind kind_{ControllerKind::Explicit};
  std::unique_ptr<Controller> controller_{};
  WorldState world_{};
  PlantState plant_{};
  EpisodeRecord episode_{};
  Overrides overrides_{};
  std::uint64_t seed_{0};
  std::uint64_t ack_{0};
  bool paused_{false};
  bool ended_{false};
  std::optional<TerminalReason> pending_end_{};
};

/// Fixed-rate schedule against an arbitrary clock. Deadlines are absolute, so a late
/// wake-up does not shift later ticks.
template <class Clock = std::chrono::steady_clock>
class Pacer
{
public:
  using time_point = typename Clock::time_point;
  using duration = typename Clock::duration;

  Pacer(time_point start, duration period) : next_(start + period), period_(period) {}

  time_point next_deadline() const { return next_; }

  /// Number of ticks due at `now`; consumes them.
  int take_due(time_point now)
  {
    int n = 0;
    while (next_ <= now) {
      next_ += period_;
      ++n;
    }
    return n;
  }

  /// Restarts the schedule, used after a pause so no burst of ticks follows it.
  void restart(time_point now) { next_ = now + period_; }

private:
  time_point next_;
  duration period_;
};

}  // namespace ssmpc::live

#endif  // SSMPC__LIVE__SESSION_HPP_
