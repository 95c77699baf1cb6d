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

#ifndef SSMPC__REPORT_HPP_
#define SSMPC__REPORT_HPP_

/**
 * @file
 * @brief Command implementations behind the `ssmpc` tool: compare, tune and trace.
 *
 * Each command takes a plain options struct and writes its files itself, so the tests
 * drive exactly what the binary runs.
 */

#include "ssmpc/controllers.hpp"
#include "ssmpc/engine.hpp"
#include "ssmpc/io.hpp"
#include "ssmpc/tuner.hpp"
#include "ssmpc/types.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace ssmpc
{

struct ReportRow
{
  std::string name;
  int runs{0};
  double mean_score{0.0};
  double mean_compute_time{0.0};
  int collisions{0};
  int timeouts{0};
  double min_score{0.0};
  double max_score{0.0};
  double std_score{0.0};
};

struct ReportTable
{
  std::vector<ReportRow> rows{};
  std::string scenario{};
  std::uint64_t seed{0};
  bool timing{true};

  const ReportRow * find(std::string_view name) const
  {
    for (const auto & r : rows) {
      if (r.name == name) {
        return &r;
      }
    }
    return nullptr;
  }
};

inline ReportRow make_row(std::string name, const BatchResult & b)
{
  ReportRow r;
  r.name = std::move(name);
  r.runs = static_cast<int>(b.runs.size());
  r.mean_score = b.mean_score;
  r.mean_compute_time = b.mean_compute_time;
  r.collisions = b.collisions;
  r.timeouts = b.timeouts;
  r.min_score = INFINITY;
  r.max_score = -INFINITY;
  double ss = 0.0;
  for (const auto & run : b.runs) {
    r.min_score = std::min(r.min_score, run.score);
    r.max_score = std::max(r.max_score, run.score);
    ss += (run.score - b.mean_score) * (run.score - b.mean_score);
  }
  r.std_score = r.runs > 1 ? std::sqrt(ss / static_cast<double>(r.runs - 1)) : 0.0;
  return r;
}

inline std::string report_text(const ReportTable & t)
{
  std::ostringstream os;
  os << "scenario: " << t.scenario << "\nseed: " << t.seed << "\n\n";
  char line[256];
  std::snprintf(
    line, sizeof(line), "%-10s %6s %10s %8s %8s %12s %6s %9s %9s\n", "controller", "runs",
    "mean_J", "std_J", "min_J", "comp_time_s", "coll", "timeouts", "max_J");
  os << line;
  for (const auto & r : t.rows) {
    char comp[32];
    if (t.timing) {
      std::snprintf(comp, sizeof(comp), "%.6f", r.mean_compute_time);
    } else {
      std::snprintf(comp, sizeof(comp), "-");
    }
    std::snprintf(
      line, sizeof(line), "%-10s %6d %10.3f %8.3f %8.3f %12s %6d %9d %9.3f\n", r.name.c_str(),
      r.runs, r.mean_score, r.std_score, r.min_score, comp, r.collisions, r.timeouts, r.max_score);
    os << line;
  }
  os << "\nlarger J is better\n";
  return os.str();
}

inline std::string report_csv(const ReportTable & t)
{
  std::ostringstream os;
  os << "controller,runs,mean_score,std_score,min_score,max_score,mean_compute_s,collisions,"
        "timeouts\n";
  for (const auto & r : t.rows) {
    os << r.name << ',' << r.runs << ',' << fmt(r.mean_score) << ',' << fmt(r.std_score) << ','
       << fmt(r.min_score) << ',' << fmt(r.max_score) << ',';
    if (t.timing) {
      os << fmt(r.mean_compute_time, 6);
    }
    os << ',' << r.collisions << ',' << r.timeouts << '\n';
  }
  return os.str();
}

struct CompareOptions
{
  ScenarioSpec spec{};
  std::string scenario_name{"default"};
  std::vector<ControllerKind> controllers{
    ControllerKind::Explicit, ControllerKind::Implicit, ControllerKind::RuleBased};
  /// Per-controller configuration; controllers without an entry use the defaults.
  std::map<ControllerKind, ControllerConfig> configs{};
  int runs{100};
  std::optional<std::uint64_t> seed{};
  /// Output directory; empty writes nothing.
  std::string out_dir{};
  /// Wall-clock columns make files differ between runs; off leaves them empty.
  bool timing{true};
  bool write_episodes{true};
  unsigned threads{0};
};

struct CompareResult
{
  ReportTable table{};
  std::map<ControllerKind, BatchResult> batches{};
};

inline ControllerConfig config_for(const CompareOptions & o, ControllerKind k)
{
  const auto it = o.configs.find(k);
  return it == o.configs.end() ? ControllerConfig{} : it->second;
}

/// Runs every controller on the same seeded scenario stream and writes the report files.
inline CompareResult cmd_compare(const CompareOptions & o)
{
  validate(o.spec);
  if (o.controllers.empty()) {
    throw std::invalid_argument("compare: no controllers given");
  }
  CompareResult out;
  out.table.scenario =
    o.scenario_name + " (ped_model=" + std::string(to_string(o.spec.ped_model)) + ")";
  out.table.seed = o.seed.value_or(o.spec.seed);
  out.table.timing = o.timing;
  const bool write = !o.out_dir.empty();
  if (write) {
    std::filesystem::create_directories(o.out_dir);
  }
  for (ControllerKind k : o.controllers) {
    BatchOptions bo;
    bo.threads = o.threads;
    bo.keep_episodes = write && o.write_episodes;
    BatchResult b = run_batch(o.spec, k, config_for(o, k), o.runs, out.table.seed, bo);
    out.table.rows.push_back(make_row(std::string(to_string(k)), b));
    if (write) {
      const std::string name(to_string(k));
      std::ostringstream m;
      write_metrics_csv(m, b, o.timing);
      write_text_file(o.out_dir + "/metrics_" + name + ".csv", m.str());
      if (o.write_episodes) {
        std::ostringstream e;
        for (std::size_t i = 0; i < b.episodes.size(); ++i) {
          write_episode_jsonl(e, b.episodes[i], name, static_cast<int>(i), o.timing);
        }
        write_text_file(o.out_dir + "/episodes_" + name + ".jsonl", e.str());
      }
      b.episodes.clear();
    }
    out.batches.emplace(k, std::move(b));
  }
  if (write) {
    write_text_file(o.out_dir + "/report.txt", report_text(out.table));
    write_text_file(o.out_dir + "/report.csv", report_csv(out.table));
  }
  return out;
}

/// Process exit status for compare: nonzero exactly when the safety-critical controller
/// collided in any episode.
inline int compare_exit_status(const CompareResult & r, std::optional<ControllerKind> safety_critical)
{
  if (!safety_critical) {
    return 0;
  }
  const auto it = r.batches.find(*safety_critical);
  return it != r.batches.end() && it->second.collisions > 0 ? 2 : 0;
}

struct TuneCommandOptions
{
  ScenarioSpec spec{};
  ControllerKind controller{ControllerKind::Explicit};
  ControllerConfig base{};
  int budget{40};
  std::uint64_t seed{1};
  /// Seed of the evaluation batches; defaults to the search seed.
  std::optional<std::uint64_t> eval_seed{};
  TuneOptions tune{};
  std::string out_config{};
  std::string out_log{};
  unsigned threads{0};
};

struct TuneCommandResult
{
  ConfigFragment fragment{};
  TuneResult result{};
  SearchSpace space{};
};

inline TuneCommandResult cmd_tune(const TuneCommandOptions & o)
{
  validate(o.spec);
  validate(o.base);
  TuneCommandResult out;
  out.space = default_search_space(o.controller, o.budget, o.seed);
  BatchOptions bo;
  bo.threads = o.threads;
  const auto objective =
    batch_objective(o.spec, o.controller, o.base, out.space, o.eval_seed.value_or(o.seed), bo);
  out.result = tune(out.space, objective, o.tune);
  out.fragment.controller = o.controller;
  out.fragment.config = apply_params(o.base, out.space, out.result.best_params);
  if (std::isfinite(out.result.best_score)) {
    out.fragment.score = out.result.best_score;
  }
  if (!o.out_config.empty()) {
    write_text_file(o.out_config, to_json(out.fragment).dump(2) + "\n");
  }
  if (!o.out_log.empty()) {
    std::ostringstream os;
    write_trial_log_csv(os, out.space, out.result);
    write_text_file(o.out_log, os.str());
  }
  return out;
}

struct TraceOptions
{
  ScenarioSpec spec{};
  ControllerKind controller{ControllerKind::Explicit};
  ControllerConfig config{};
  std::optional<std::uint64_t> seed{};
  /// Episode index within the seeded stream, matching run i of compare.
  int run{0};
  std::string out{};
};

inline EpisodeRecord cmd_trace(const TraceOptions & o)
{
  validate(o.spec);
  validate(o.config);
  auto controller = make_controller(o.controller, o.spec);
  EpisodeRecord ep =
    run_episode(o.spec, *controller, o.config, run_seed(o.seed.value_or(o.spec.seed), o.run));
  if (!o.out.empty()) {
    std::ostringstream os;
    write_trace_csv(os, ep);
    write_text_file(o.out, os.str());
  }
  return ep;
}

}  // namespace ssmpc

#endif  // SSMPC__REPORT_HPP_
