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

#ifndef SSMPC__TUNER_HPP_
#define SSMPC__TUNER_HPP_

/**
 * @file
 * @brief Random search with successive halving over controller parameters.
 *
 * Every sampled point is screened on a short batch; the best quarter is re-evaluated on
 * the full batch and the incumbent is taken from those full evaluations only, so scores
 * of different fidelity are never compared.
 */

#include "ssmpc/controllers.hpp"
#include "ssmpc/engine.hpp"
#include "ssmpc/rng.hpp"
#include "ssmpc/types.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssmpc
{

struct ParamRange
{
  std::string name;
  double lo{0.0};
  double hi{1.0};
  /// Sample uniformly in log space; requires lo > 0.
  bool log_scale{false};
};

struct SearchSpace
{
  std::vector<ParamRange> params{};
  int budget{40};
  std::uint64_t seed{1};

  void validate() const
  {
    if (params.empty()) {
      throw std::invalid_argument("SearchSpace: no parameters");
    }
    if (budget < 1) {
      throw std::invalid_argument("SearchSpace: budget must be at least 1");
    }
    for (const auto & p : params) {
      if (!(p.lo <= p.hi) || !std::isfinite(p.lo) || !std::isfinite(p.hi)) {
        throw std::invalid_argument("SearchSpace: empty range for " + p.name);
      }
      if (p.log_scale && !(p.lo > 0.0)) {
        throw std::invalid_argument("SearchSpace: log range for " + p.name + " must be positive");
      }
    }
  }

  std::vector<double> sample(Rng & rng) const
  {
    std::vector<double> x;
    x.reserve(params.size());
    for (const auto & p : params) {
      if (p.log_scale) {
        x.push_back(std::exp(rng.uniform(std::log(p.lo), std::log(p.hi))));
      } else {
        x.push_back(rng.uniform(p.lo, p.hi));
      }
      // exp(log(hi)) can round a hair past hi.
      x.back() = std::clamp(x.back(), p.lo, p.hi);
    }
    return x;
  }

  bool contains(const std::vector<double> & x) const
  {
    if (x.size() != params.size()) {
      return false;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(x[i] >= params[i].lo && x[i] <= params[i].hi)) {
        return false;
      }
    }
    return true;
  }
};

struct TuneOptions
{
  int screen_runs{20};
  int final_runs{100};
  /// Fraction of screened points promoted to the full evaluation.
  double promote_fraction{0.25};
  /// Without halving every point gets the full evaluation.
  bool successive_halving{true};
};

enum class TrialStage { Screen, Final };

inline std::string_view to_string(TrialStage s)
{
  return s == TrialStage::Screen ? "screen" : "final";
}

struct Trial
{
  int id{0};
  TrialStage stage{TrialStage::Final};
  int runs{0};
  std::vector<double> params{};
  double score{-std::numeric_limits<double>::infinity()};
  /// Best full-evaluation score so far; -inf until the first one.
  double incumbent{-std::numeric_limits<double>::infinity()};
  std::string error{};
};

struct TuneResult
{
  std::vector<double> best_params{};
  double best_score{-std::numeric_limits<double>::infinity()};
  std::vector<Trial> trials{};
};

/// Objective: parameters and batch size to a mean score (larger is better).
using TuneObjective = std::function<double(const std::vector<double> &, int runs)>;

inline TuneResult tune(const SearchSpace & space, const TuneObjective & objective, const TuneOptions & opt = {})
{
  space.validate();
  constexpr double kFail = -std::numeric_limits<double>::infinity();
  Rng rng(space.seed);
  TuneResult out;
  double incumbent = kFail;

  auto evaluate = [&](const std::vector<double> & x, int runs, TrialStage stage, int id) {
    Trial t;
    t.id = id;
    t.stage = stage;
    t.runs = runs;
    t.params = x;
    try {
      t.score = objective(x, runs);
      if (std::isnan(t.score)) {
        throw std::runtime_error("objective returned NaN");
      }
    } catch (const std::exception & e) {
      t.score = kFail;
      t.error = e.what();
    }
    if (stage == TrialStage::Final && t.score > incumbent) {
      incumbent = t.score;
      out.best_params = x;
      out.best_score = t.score;
    }
    t.incumbent = incumbent;
    out.trials.push_back(t);
    return t.score;
  };

  std::vector<std::vector<double>> points;
  points.reserve(static_cast<std::size_t>(space.budget));
  for (int i = 0; i < space.budget; ++i) {
    points.push_back(space.sample(rng));
  }

  if (!opt.successive_halving) {
    for (int i = 0; i < space.budget; ++i) {
      evaluate(points[static_cast<std::size_t>(i)], opt.final_runs, TrialStage::Final, i);
    }
  } else {
    std::vector<double> screen(points.size());
    for (int i = 0; i < space.budget; ++i) {
      screen[static_cast<std::size_t>(i)] =
        evaluate(points[static_cast<std::size_t>(i)], opt.screen_runs, TrialStage::Screen, i);
    }
    std::vector<int> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    // Stable on ties so the promoted set does not depend on the sort implementation.
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return screen[static_cast<std::size_t>(a)] > screen[static_cast<std::size_t>(b)];
    });
    const int promoted = std::max(
      1, static_cast<int>(std::ceil(opt.promote_fraction * static_cast<double>(space.budget))));
    for (int k = 0; k < promoted; ++k) {
      const int i = order[static_cast<std::size_t>(k)];
      evaluate(points[static_cast<std::size_t>(i)], opt.final_runs, TrialStage::Final, i);
    }
  }
  if (out.best_params.empty()) {
    // Every full evaluation failed; report the first point with a failing score.
    out.best_params = points.front();
  }
  return out;
}

inline void write_trial_log_csv(std::ostream & os, const SearchSpace & space, const TuneResult & r)
{
  os << "trial,stage,runs";
  for (const auto & p : space.params) {
    os << ',' << p.name;
  }
  os << ",score,incumbent,error\n";
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf);
  };
  for (const auto & t : r.trials) {
    os << t.id << ',' << to_string(t.stage) << ',' << t.runs;
    for (double v : t.params) {
      os << ',' << num(v);
    }
    std::string err = t.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << ',' << num(t.score) << ',' << num(t.incumbent) << ',' << err << '\n';
  }
}

// ---------------------------------------------------------------------------------------
// Controller tuning

/// Writes a named parameter into a controller configuration.
inline void set_param(ControllerConfig & cfg, const std::string & name, double value)
{
  if (name == "w1") {
    cfg.w1 = value;
  } else if (name == "w2") {
    cfg.w2 = value;
  } else if (name == "w3") {
    cfg.w3 = value;
  } else if (name == "c") {
    cfg.c = value;
  } else if (name == "d_min") {
    cfg.d_min = value;
  } else if (name == "t_brake") {
    cfg.t_brake = value;
  } else if (name == "k_p") {
    cfg.k_p = value;
  } else {
    throw std::invalid_argument("set_param: unknown parameter '" + name + "'");
  }
}

inline ControllerConfig apply_params(
  ControllerConfig cfg, const SearchSpace & space, const std::vector<double> & x)
{
  for (std::size_t i = 0; i < space.params.size(); ++i) {
    set_param(cfg, space.params[i].name, x.at(i));
  }
  return cfg;
}

/// Default search space per controller. The explicit MPC also calibrates the sigmoid
/// offset of its pedestrian model; the rule-based baseline tunes its two thresholds.
inline SearchSpace default_search_space(ControllerKind kind, int budget, std::uint64_t seed)
{
  SearchSpace s;
  s.budget = budget;
  s.seed = seed;
  switch (kind) {
    case ControllerKind::Explicit:
      s.params = {{"w1", 0.01, 10.0, true}, {"w2", 0.01, 10.0, true}, {"w3", 0.1, 1000.0, true},
                  {"c", -3.0, 3.0, false}};
      break;
    case ControllerKind::Implicit:
      s.params = {{"w1", 0.01, 10.0, true}, {"w2", 0.01, 10.0, true}, {"w3", 0.1, 1000.0, true}};
      break;
    case ControllerKind::RuleBased:
      s.params = {{"t_brake", 0.5, 8.0, false}, {"k_p", 0.1, 5.0, true}};
      break;
  }
  return s;
}

/// Objective that scores a parameter vector by the mean batch score on a fixed seed.
inline TuneObjective batch_objective(
  const ScenarioSpec & spec, ControllerKind kind, const ControllerConfig & base,
  const SearchSpace & space, std::uint64_t eval_seed, const BatchOptions & batch = {})
{
  return [=](const std::vector<double> & x, int runs) {
    const ControllerConfig cfg = apply_params(base, space, x);
    return run_batch(spec, kind, cfg, runs, eval_seed, batch).mean_score;
  };
}

}  // namespace ssmpc

#endif  // SSMPC__TUNER_HPP_
