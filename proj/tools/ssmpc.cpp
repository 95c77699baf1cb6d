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

// ssmpc command-line tool: compare, tune, trace and serve.

#include "ssmpc/io.hpp"
#include "ssmpc/live/server.hpp"
#include "ssmpc/report.hpp"

#include <CLI11.hpp>
#include <boost/asio/signal_set.hpp>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace
{

using namespace ssmpc;

ScenarioSpec scenario_or_default(const std::string & path)
{
  return path.empty() ? ScenarioSpec{} : load_scenario(path);
}

std::string scenario_label(const std::string & path)
{
  return path.empty() ? std::string("default") : std::filesystem::path(path).filename().string();
}

std::vector<ControllerKind> parse_controller_list(const std::string & list)
{
  std::vector<ControllerKind> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) {
      out.push_back(parse_controller_kind(item));
    }
  }
  return out;
}

/// Config fragments keyed by controller. A fragment may also be applied to a controller
/// other than the one it names by passing `name=path`.
std::map<ControllerKind, ControllerConfig> load_configs(const std::vector<std::string> & specs)
{
  std::map<ControllerKind, ControllerConfig> out;
  for (const auto & s : specs) {
    const auto eq = s.find('=');
    if (eq != std::string::npos) {
      const ControllerKind k = parse_controller_kind(s.substr(0, eq));
      out[k] = load_fragment(s.substr(eq + 1)).config;
    } else {
      const ConfigFragment f = load_fragment(s);
      out[f.controller] = f.config;
    }
  }
  return out;
}

int run_compare(
  const std::string & scenario, const std::string & controllers, int runs,
  std::optional<std::uint64_t> seed, const std::string & out, const std::vector<std::string> & configs,
  const std::string & timing, const std::string & safety, unsigned threads, bool episodes)
{
  CompareOptions o;
  o.spec = scenario_or_default(scenario);
  o.scenario_name = scenario_label(scenario);
  o.controllers = parse_controller_list(controllers);
  o.configs = load_configs(configs);
  o.runs = runs;
  o.seed = seed;
  o.out_dir = out;
  o.timing = timing != "off";
  o.threads = threads;
  o.write_episodes = episodes;
  std::optional<ControllerKind> safety_kind;
  if (!safety.empty()) {
    safety_kind = parse_controller_kind(safety);
  }
  const CompareResult r = cmd_compare(o);
  std::cout << report_text(r.table);
  return compare_exit_status(r, safety_kind);
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Cooperative vehicle/pedestrian MPC: benchmark, tuning and live sessions"};
  app.require_subcommand(1);

  std::string scenario;
  std::vector<std::string> configs;
  unsigned threads = 0;

  auto * compare = app.add_subcommand("compare", "Paired comparison of controllers");
  std::string controllers = "explicit,implicit,rule";
  int runs = 100;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string timing = "wall";
  std::string safety;
  bool no_episodes = false;
  compare->add_option("--scenario", scenario, "Scenario JSON file")->check(CLI::ExistingFile);
  compare->add_option("--controllers", controllers, "Comma-separated controller names");
  compare->add_option("--runs", runs, "Episodes per controller")->check(CLI::PositiveNumber);
  compare->add_option("--seed", seed, "Batch seed (defaults to the scenario seed)");
  compare->add_option("--out", out_dir, "Output directory for report and per-run logs");
  compare->add_option("--config", configs, "Config fragment file, or controller=file");
  compare->add_option("--timing", timing, "Wall-clock timing columns: wall or off")
    ->check(CLI::IsMember({"wall", "off"}));
  compare->add_option(
    "--safety-critical", safety, "Exit with status 2 if this controller collides");
  compare->add_option("--threads", threads, "Worker threads (default: SSMPC_THREADS or all cores)");
  compare->add_flag("--no-episodes", no_episodes, "Skip the per-step episode logs");

  auto * tune_cmd = app.add_subcommand("tune", "Random search with successive halving");
  std::string tune_controller = "explicit";
  int budget = 40;
  std::uint64_t tune_seed = 1;
  std::optional<std::uint64_t> eval_seed;
  int screen_runs = 20;
  int final_runs = 100;
  std::string tune_out;
  std::string tune_log;
  std::string base_config;
  tune_cmd->add_option("--scenario", scenario, "Scenario JSON file")->check(CLI::ExistingFile);
  tune_cmd->add_option("--controller", tune_controller, "Controller to tune");
  tune_cmd->add_option("--budget", budget, "Sampled points")->check(CLI::PositiveNumber);
  tune_cmd->add_option("--seed", tune_seed, "Search seed");
  tune_cmd->add_option("--eval-seed", eval_seed, "Evaluation batch seed (defaults to --seed)");
  tune_cmd->add_option("--screen-runs", screen_runs, "Episodes per screening batch")
    ->check(CLI::PositiveNumber);
  tune_cmd->add_option("--final-runs", final_runs, "Episodes per full batch")->check(CLI::PositiveNumber);
  tune_cmd->add_option("--base", base_config, "Config fragment with the fixed parameters");
  tune_cmd->add_option("--out", tune_out, "Where to write the tuned config fragment")->required();
  tune_cmd->add_option("--log", tune_log, "Trial log CSV");
  tune_cmd->add_option("--threads", threads, "Worker threads");

  auto * trace_cmd = app.add_subcommand("trace", "Per-step trace of one episode");
  std::string trace_controller = "explicit";
  std::optional<std::uint64_t> trace_seed;
  int trace_run = 0;
  std::string trace_out;
  bool no_lowering = false;
  trace_cmd->add_option("--scenario", scenario, "Scenario JSON file")->check(CLI::ExistingFile);
  trace_cmd->add_option("--controller", trace_controller, "Controller name");
  trace_cmd->add_option("--seed", trace_seed, "Batch seed (defaults to the scenario seed)");
  trace_cmd->add_option("--run", trace_run, "Episode index in the seeded stream")
    ->check(CLI::NonNegativeNumber);
  trace_cmd->add_option("--config", configs, "Config fragment file, or controller=file");
  trace_cmd->add_option("--out", trace_out, "Trace CSV (stdout when omitted)");
  trace_cmd->add_flag("--no-lowering", no_lowering, "Disable intention lowering");

  auto * serve = app.add_subcommand("serve", "Live session server (WebSocket, JSON frames)");
  std::string bind = "127.0.0.1:8787";
  double speed = 1.0;
  serve->add_option("--bind", bind, "host:port to listen on");
  serve->add_option("--speed", speed, "Simulation speed relative to wall clock")
    ->check(CLI::PositiveNumber);
  serve->add_option("--scenario", scenario, "Default scenario for sessions")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*compare) {
      return run_compare(
        scenario, controllers, runs, seed, out_dir, configs, timing, safety, threads, !no_episodes);
    }
    if (*tune_cmd) {
      TuneCommandOptions o;
      o.spec = scenario_or_default(scenario);
      o.controller = parse_controller_kind(tune_controller);
      if (!base_config.empty()) {
        o.base = load_fragment(base_config).config;
      }
      o.budget = budget;
      o.seed = tune_seed;
      o.eval_seed = eval_seed;
      o.tune.screen_runs = screen_runs;
      o.tune.final_runs = final_runs;
      o.out_config = tune_out;
      o.out_log = tune_log;
      o.threads = threads;
      const TuneCommandResult r = cmd_tune(o);
      std::cout << to_json(r.fragment).dump(2) << '\n';
      return 0;
    }
    if (*trace_cmd) {
      TraceOptions o;
      o.spec = scenario_or_default(scenario);
      if (no_lowering) {
        o.spec.intention_lowering = false;
      }
      o.controller = parse_controller_kind(trace_controller);
      const auto cfgs = load_configs(configs);
      if (auto it = cfgs.find(o.controller); it != cfgs.end()) {
        o.config = it->second;
      }
      o.seed = trace_seed;
      o.run = trace_run;
      o.out = trace_out;
      const EpisodeRecord ep = cmd_trace(o);
      if (trace_out.empty()) {
        write_trace_csv(std::cout, ep);
      }
      std::cerr << "reason=" << to_string(ep.reason) << " score=" << fmt(ep.score, 6) << '\n';
      return 0;
    }
    if (*serve) {
      live::ServerOptions o;
      o.bind = bind;
      o.speed = speed;
      o.defaults = scenario_or_default(scenario);
      live::net::io_context ioc{1};
      live::Server server(ioc, o);
      server.start();
      live::net::signal_set signals(ioc, SIGINT, SIGTERM);
      signals.async_wait([&](const boost::system::error_code &, int) {
        server.stop();
        ioc.stop();
      });
      std::cerr << "listening on " << bind << " (port " << server.port() << ")\n";
      ioc.run();
      return 0;
    }
  } catch (const ConfigError & e) {
    std::cerr << "error: invalid field '" << e.field() << "': " << e.what() << '\n';
    return 1;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
