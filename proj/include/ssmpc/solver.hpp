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

#ifndef SSMPC__SOLVER_HPP_
#define SSMPC__SOLVER_HPP_

/**
 * @file
 * @brief Box-constrained single-shooting optimizer over an input sequence.
 *
 * The decision vector is the input sequence u(0..n-1). Box bounds are enforced by
 * projection; every other constraint is reported by the problem as a violation and folded
 * into the objective as an exact (L1) penalty. Descent is projected gradient with central
 * finite-difference gradients, Barzilai-Borwein trial steps and Armijo backtracking.
 */

#include <algorithm>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace ssmpc
{

/// Result of evaluating one candidate input sequence.
struct Evaluation
{
  /// Unpenalized objective.
  double cost{0.0};
  /// Sum of constraint violations (each >= 0).
  double violation_sum{0.0};
  /// Largest single constraint violation.
  double violation_max{0.0};
};

/// An input-sequence optimization problem with scalar box bounds on every input.
template<class P>
concept InputProblem = requires(const P & p, std::span<const double> u) {
  { p.horizon() } -> std::convertible_to<int>;
  { p.lower() } -> std::convertible_to<double>;
  { p.upper() } -> std::convertible_to<double>;
  { p.evaluate(u) } -> std::same_as<Evaluation>;
};

struct SolverOptions
{
  double penalty_weight{1e4};
  double fd_step{1e-4};
  int max_iterations{200};
  double min_step{1e-6};
  double feasibility_tol{1e-3};
  /// Also descend from zero, full-brake and full-throttle sequences and keep the best.
  bool multi_start{true};
};

struct SolveReport
{
  std::vector<double> u{};
  /// Unpenalized objective at u.
  double objective{std::numeric_limits<double>::infinity()};
  /// Objective including the exact penalty term.
  double penalized{std::numeric_limits<double>::infinity()};
  int iterations{0};
  /// Objective evaluations spent, finite differences included.
  std::int64_t evaluations{0};
  bool converged{false};
  bool feasible{false};
  double violation_max{std::numeric_limits<double>::infinity()};
  double wall_time{0.0};
  /// Penalized objective after each accepted iterate of the selected descent.
  std::vector<double> history{};
};

struct Gradient
{
  std::vector<double> g{};
  /// Coordinates whose probe produced a non-finite objective. Their entry is set to 0.
  std::vector<bool> flagged{};

  bool any_flagged() const { return std::find(flagged.begin(), flagged.end(), true) != flagged.end(); }
};

/// Central-difference gradient of `objective` at u.
template<class F>
Gradient finite_diff_gradient(F && objective, std::span<const double> u, double h)
{
  if (!(h > 0.0)) {
    throw std::invalid_argument("finite_diff_gradient: h must be positive");
  }
  Gradient out;
  out.g.assign(u.size(), 0.0);
  out.flagged.assign(u.size(), false);
  std::vector<double> probe(u.begin(), u.end());
  for (std::size_t k = 0; k < u.size(); ++k) {
    probe[k] = u[k] + h;
    const double fp = objective(std::span<const double>(probe));
    probe[k] = u[k] - h;
    const double fm = objective(std::span<const double>(probe));
    probe[k] = u[k];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      out.flagged[k] = true;
      continue;
    }
    out.g[k] = (fp - fm) / (2.0 * h);
  }
  return out;
}

namespace detail
{

inline void project(std::vector<double> & u, double lo, double hi)
{
  for (double & v : u) {
    v = std::clamp(v, lo, hi);
  }
}

inline double dot(const std::vector<double> & a, const std::vector<double> & b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += a[i] * b[i];
  }
  return s;
}

template<InputProblem P>
class PenalizedObjective
{
public:
  PenalizedObjective(const P & problem, double weight) : problem_(problem), weight_(weight) {}

  double operator()(std::span<const double> u) const
  {
    ++evaluations_;
    const Evaluation e = problem_.evaluate(u);
    return e.cost + weight_ * e.violation_sum;
  }

  std::int64_t evaluations() const { return evaluations_; }

private:
  const P & problem_;
  double weight_;
  mutable std::int64_t evaluations_{0};
};

struct Descent
{
  std::vector<double> u;
  double f{std::numeric_limits<double>::infinity()};
  int iterations{0};
  bool stationary{false};
  std::vector<double> history{};
};

template<class F>
Descent descend(F & f, std::vector<double> u, double lo, double hi, const SolverOptions & opt)
{
  project(u, lo, hi);
  Descent d;
  double fu = f(std::span<const double>(u));
  if (!std::isfinite(fu)) {
    d.u = std::move(u);
    return d;
  }
  d.history.push_back(fu);
  Gradient grad = finite_diff_gradient(f, u, opt.fd_step);
  double alpha = 1.0 / std::max(1.0, [&] {
    double m = 0.0;
    for (double g : grad.g) {
      m = std::max(m, std::abs(g));
    }
    return m;
  }());

  std::vector<double> trial(u.size());
  std::vector<double> step(u.size());
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    bool accepted = false;
    double f_trial = fu;
    while (true) {
      double step_norm = 0.0;
      for (std::size_t k = 0; k < u.size(); ++k) {
        trial[k] = std::clamp(u[k] - alpha * grad.g[k], lo, hi);
        step[k] = trial[k] - u[k];
        step_norm = std::max(step_norm, std::abs(step[k]));
      }
      if (step_norm < opt.min_step) {
        break;
      }
      f_trial = f(std::span<const double>(trial));
      if (std::isfinite(f_trial) && f_trial <= fu + 1e-4 * dot(grad.g, step)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      d.stationary = true;
      break;
    }
    Gradient next = finite_diff_gradient(f, trial, opt.fd_step);
    double sy = 0.0;
    double ss = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double yk = next.g[k] - grad.g[k];
      sy += step[k] * yk;
      ss += step[k] * step[k];
    }
    alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : std::min(alpha * 4.0, 1e10);
    u.swap(trial);
    fu = f_trial;
    d.history.push_back(fu);
    grad = std::move(next);
  }
  d.u = std::move(u);
  d.f = fu;
  d.iterations = it;
  return d;
}

}  // namespace detail

/// Minimizes problem cost + penalty over the box, starting from `warm_start`.
/// A warm start of the wrong length is replaced by zeros.
template<InputProblem P>
SolveReport solve(const P & problem, std::span<const double> warm_start, const SolverOptions & opt = {})
{
  const auto t0 = std::chrono::steady_clock::now();
  const int n = problem.horizon();
  const double lo = problem.lower();
  const double hi = problem.upper();
  detail::PenalizedObjective<P> f(problem, opt.penalty_weight);

  std::vector<std::vector<double>> starts;
  const std::vector<double> zeros(static_cast<std::size_t>(n), 0.0);
  if (static_cast<int>(warm_start.size()) == n) {
    std::vector<double> w(warm_start.begin(), warm_start.end());
    detail::project(w, lo, hi);
    if (std::isfinite(f(std::span<const double>(w)))) {
      starts.push_back(std::move(w));
    }
  }
  auto add_start = [&](std::vector<double> s) {
    detail::project(s, lo, hi);
    if (std::find(starts.begin(), starts.end(), s) == starts.end()) {
      starts.push_back(std::move(s));
    }
  };
  if (starts.empty() || opt.multi_start) {
    add_start(zeros);
  }
  if (opt.multi_start) {
    add_start(std::vector<double>(static_cast<std::size_t>(n), lo));
    add_start(std::vector<double>(static_cast<std::size_t>(n), hi));
  }

  SolveReport report;
  bool have = false;
  Evaluation best_eval{};
  bool best_stationary = false;
  for (const auto & s : starts) {
    detail::Descent d = detail::descend(f, s, lo, hi, opt);
    report.iterations += d.iterations;
    if (!std::isfinite(d.f)) {
      continue;
    }
    const Evaluation e = problem.evaluate(std::span<const double>(d.u));
    const bool feasible = e.violation_max <= opt.feasibility_tol;
    const bool better = !have || (feasible && !report.feasible) ||
                        (feasible == report.feasible && d.f < report.penalized);
    if (better) {
      have = true;
      report.u = d.u;
      report.penalized = d.f;
      report.feasible = feasible;
      best_eval = e;
      best_stationary = d.stationary;
      report.history = std::move(d.history);
    }
  }
  report.evaluations = f.evaluations();
  if (have) {
    report.objective = best_eval.cost;
    report.violation_max = best_eval.violation_max;
    report.converged = best_stationary && report.feasible;
  } else {
    report.u = zeros;
  }
  report.wall_time =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

template<InputProblem P>
SolveReport solve(const P & problem, const SolverOptions & opt = {})
{
  return solve(problem, std::span<const double>{}, opt);
}

/// Largest enumeration the oracle accepts.
inline constexpr double kGridOracleBudget = 1e7;

/// Exhaustive search over `levels` evenly spaced inputs per step, bounds included.
/// Returns the feasible minimum of the unpenalized cost; when nothing is feasible the
/// report holds the least-violating point with feasible = false.
template<InputProblem P>
SolveReport grid_oracle(const P & problem, int levels, double feasibility_tol = 1e-3)
{
  const auto t0 = std::chrono::steady_clock::now();
  const int n = problem.horizon();
  if (levels < 2) {
    throw std::invalid_argument("grid_oracle: levels must be at least 2");
  }
  if (std::pow(static_cast<double>(levels), n) > kGridOracleBudget) {
    throw std::length_error("grid_oracle: levels^n exceeds the enumeration budget");
  }
  const double lo = problem.lower();
  const double hi = problem.upper();
  std::vector<double> grid(static_cast<std::size_t>(levels));
  for (int k = 0; k < levels; ++k) {
    grid[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(levels - 1);
  }

  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  std::vector<double> u(static_cast<std::size_t>(n), lo);
  SolveReport report;
  double least_violation = std::numeric_limits<double>::infinity();
  std::vector<double> least_violating;
  Evaluation least_eval{};
  while (true) {
    const Evaluation e = problem.evaluate(std::span<const double>(u));
    ++report.evaluations;
    if (std::isfinite(e.cost)) {
      if (e.violation_max <= feasibility_tol) {
        if (!report.feasible || e.cost < report.objective) {
          report.feasible = true;
          report.objective = e.cost;
          report.violation_max = e.violation_max;
          report.u = u;
        }
      } else if (!report.feasible && e.violation_max < least_violation) {
        least_violation = e.violation_max;
        least_violating = u;
        least_eval = e;
      }
    }
    int k = 0;
    while (k < n && ++idx[k] == levels) {
      idx[k] = 0;
      u[k] = grid[0];
      ++k;
    }
    if (k == n) {
      break;
    }
    u[k] = grid[idx[k]];
  }
  if (!report.feasible && !least_violating.empty()) {
    report.u = least_violating;
    report.objective = least_eval.cost;
    report.violation_max = least_eval.violation_max;
  }
  report.penalized = report.objective;
  report.converged = report.feasible;
  report.iterations = 1;
  report.wall_time =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace ssmpc

#endif  // SSMPC__SOLVER_HPP_
