// Copyright 2026 The coopadmm Authors
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

#ifndef COOPADMM_SIMULATION_HPP
#define COOPADMM_SIMULATION_HPP

/**
 * @file
 * @brief Receding-horizon closed loop.
 *
 * Each cycle rebuilds the constraint graph from the true positions, shifts the
 * previous plan into a seed, convexifies around it, solves, applies the first
 * steering of every vehicle and advances the nonlinear plants by one step.
 */

#include "coopadmm/admm.hpp"
#include "coopadmm/reference.hpp"
#include "coopadmm/scenario.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace coopadmm {

enum class SolverMode { parallel_admm, centralized };

inline const char * to_string(SolverMode m)
{
  return m == SolverMode::parallel_admm ? "parallel_admm" : "centralized";
}

inline SolverMode parse_solver_mode(std::string_view s)
{
  if (s == "parallel_admm" || s == "admm") { return SolverMode::parallel_admm; }
  if (s == "centralized") { return SolverMode::centralized; }
  throw ParameterError("unknown solver mode '" + std::string(s) +
                       "' (expected parallel_admm or centralized)");
}

/**
 * @brief Seed for the next cycle.
 *
 * With a previous plan [a, b, c] the seed controls are [b, c, c]; without one
 * they are all zero. Controls are clipped to the steering limits and rolled out
 * through the nonlinear model from `current`.
 */
inline HorizonTrajectory make_seed(const std::optional<HorizonTrajectory> & previous,
  const VehicleState & current, const VehicleSpec & spec, int Np, double Ts)
{
  if (Np < 1 || !(Ts > 0.0)) { throw ParameterError("make_seed needs Np >= 1 and Ts > 0"); }
  std::vector<double> u(static_cast<std::size_t>(Np), 0.0);
  if (previous && previous->horizon() > 0) {
    const auto & prev = previous->controls;
    for (int k = 0; k < Np; ++k) {
      const std::size_t src = std::min(static_cast<std::size_t>(k + 1), prev.size() - 1);
      u[static_cast<std::size_t>(k)] = std::clamp(prev[src], spec.steer_min, spec.steer_max);
    }
  }
  return rollout(current, u, spec.speed, spec.wheelbase, Ts);
}

/// Everything a cycle is convexified from.
struct CycleInputs
{
  ConstraintGraph graph{};
  std::vector<HorizonTrajectory> seeds{};
  std::vector<Vector> references{};

  std::vector<Vector> seed_controls() const
  {
    std::vector<Vector> out;
    out.reserve(seeds.size());
    for (const auto & s : seeds) { out.push_back(s.control_vector()); }
    return out;
  }
};

/// Graph from the true states, shifted seeds and reference windows at time t.
inline CycleInputs prepare_cycle(const Scenario & sc, std::span<const VehicleState> states,
  std::span<const std::optional<HorizonTrajectory>> plan, double t)
{
  const std::size_t N = sc.vehicles.size();
  if (states.size() != N || plan.size() != N) { throw DimensionError("one state and plan per vehicle"); }
  const auto ids = sc.ids();
  CycleInputs in;
  in.graph = build_constraint_graph(ids, states, sc.perception_distance(), sc.params.d_safe);
  for (std::size_t v = 0; v < N; ++v) {
    in.seeds.push_back(make_seed(plan[v], states[v], sc.vehicles[v], sc.params.Np, sc.params.Ts));
    in.references.push_back(sc.params.reference_anchor == ReferenceAnchor::clock
        ? reference_window(sc.vehicles[v], t, sc.params.Np, sc.params.Ts)
        : reference_window(sc.vehicles[v], states[v], sc.params.Np, sc.params.Ts));
  }
  return in;
}

inline ConvexifiedProblem convexify_cycle(const Scenario & sc, const CycleInputs & in)
{
  const auto & p = sc.params;
  return convexify(sc.vehicles, in.seeds, in.references, in.graph,
    CostWeights{p.q_position, p.q_heading, p.r_weight}, p.slack_penalty);
}

inline AdmmConfig admm_config(const ScenarioParams & p)
{
  AdmmConfig cfg;
  cfg.rho0 = p.rho0;
  cfg.eps_abs = p.eps_abs;
  cfg.eps_rel = p.eps_rel;
  cfg.max_iters = p.max_iters;
  return cfg;
}

/// Smallest distance between any two positions; +inf for fewer than two.
inline double min_pairwise_distance(std::span<const VehicleState> states)
{
  double best = kInf;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      best = std::min(best, (states[i].position() - states[j].position()).norm());
    }
  }
  return best;
}

struct ViolationEvent
{
  int step{0};  ///< index into SimulationRun::times
  double time{0.0};
  VehicleId a{};
  VehicleId b{};
  double distance{0.0};
};

struct CycleRecord
{
  int cycle{0};
  double time{0.0};
  std::vector<std::pair<VehicleId, VehicleId>> edges{};
  ResidualReport report{};  ///< centralized mode: QP status and iterations in the same fields
  bool capped{false};       ///< ADMM stopped at max_iters without converging
  double objective{0.0};    ///< convexified objective at the applied plan
  double solve_seconds{0.0};  ///< parallel accounting for ADMM, QP time for centralized
  double min_distance{0.0};   ///< true distance at the start of the cycle
};

struct SimulationRun
{
  std::string scenario{};
  SolverMode mode{SolverMode::parallel_admm};
  double Ts{0.1};
  double d_safe{5.0};
  std::vector<VehicleId> ids{};
  std::vector<double> times{};                          ///< K + 1 samples
  std::vector<std::vector<VehicleState>> states{};      ///< [step][vehicle], K + 1 steps
  std::vector<std::vector<double>> controls{};          ///< [cycle][vehicle], K cycles
  std::vector<std::vector<HorizonTrajectory>> predictions{};  ///< [cycle][vehicle]
  std::vector<CycleRecord> cycles{};
  std::vector<double> min_distance{};                   ///< per step
  std::vector<ViolationEvent> violations{};             ///< true distance < d_safe
  double wall_seconds{0.0};

  int num_cycles() const noexcept { return static_cast<int>(cycles.size()); }

  double overall_min_distance() const
  {
    return min_distance.empty() ? kInf : *std::min_element(min_distance.begin(), min_distance.end());
  }

  int capped_cycles() const
  {
    return static_cast<int>(std::count_if(cycles.begin(), cycles.end(),
      [](const CycleRecord & c) { return c.capped; }));
  }
};

struct SimulationOptions
{
  std::size_t workers{0};  ///< 0 = default_worker_count()
  QpSettings qp{};
  /// Called after every ADMM iteration with the cycle index.
  std::function<void(int, const TraceEntry &)> trace{};
};

namespace detail {

inline std::string state_dump(const Scenario & sc, std::span<const VehicleState> states)
{
  std::ostringstream os;
  os.precision(9);
  for (std::size_t v = 0; v < states.size(); ++v) {
    os << (v ? "; " : "") << "vehicle " << sc.vehicles[v].id << " at (" << states[v].rx << ", "
       << states[v].ry << ", " << states[v].theta << ")";
  }
  return os.str();
}

inline void record_violations(SimulationRun & run, int step, std::span<const VehicleState> states)
{
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      const double d = (states[i].position() - states[j].position()).norm();
      if (d < run.d_safe) {
        run.violations.push_back({step, run.times[static_cast<std::size_t>(step)], run.ids[i],
          run.ids[j], d});
      }
    }
  }
}

}  // namespace detail

/**
 * @brief Closed-loop run of `duration` seconds (a multiple of Ts).
 *
 * Solver failures abort with NumericalError naming the cycle and the true
 * states; safety breaches are only recorded.
 */
inline SimulationRun run_simulation(const Scenario & scenario, SolverMode mode, double duration,
  const SimulationOptions & options = {})
{
  scenario.validate();
  const auto & prm = scenario.params;
  const double Ts = prm.Ts;
  if (!(duration > 0.0)) { throw ParameterError("duration must be > 0"); }
  const double steps = duration / Ts;
  const int K = static_cast<int>(std::llround(steps));
  if (K < 1 || std::abs(steps - K) > 1e-9 * std::max(1.0, steps)) {
    throw ParameterError("duration must be a positive multiple of Ts");
  }

  const auto t_start = std::chrono::steady_clock::now();
  const std::size_t N = scenario.vehicles.size();
  const std::vector<VehicleId> ids = scenario.ids();
  AdmmConfig cfg = admm_config(prm);
  cfg.qp = options.qp;
  WorkerPool pool(options.workers == 0 ? default_worker_count() : options.workers);

  SimulationRun run;
  run.scenario = scenario.name;
  run.mode = mode;
  run.Ts = Ts;
  run.d_safe = prm.d_safe;
  run.ids = ids;
  std::vector<VehicleState> x(N);
  for (std::size_t v = 0; v < N; ++v) { x[v] = scenario.vehicles[v].initial_state; }
  run.times.push_back(0.0);
  run.states.push_back(x);
  run.min_distance.push_back(min_pairwise_distance(x));
  detail::record_violations(run, 0, x);

  std::vector<std::optional<HorizonTrajectory>> plan(N);
  for (int k = 0; k < K; ++k) {
    const double t = k * Ts;
    CycleInputs in = prepare_cycle(scenario, x, plan, t);

    CycleRecord rec;
    rec.cycle = k;
    rec.time = t;
    rec.min_distance = run.min_distance.back();
    for (const auto & e : in.graph.edges()) { rec.edges.emplace_back(e.a, e.b); }

    std::vector<Vector> u;
    try {
      const ConvexifiedProblem problem = convexify_cycle(scenario, in);
      if (mode == SolverMode::parallel_admm) {
        std::function<void(const TraceEntry &)> trace;
        if (options.trace) {
          trace = [&](const TraceEntry & e) { options.trace(k, e); };
        }
        AdmmResult res =
          admm_solve(problem, initial_state(problem, in.seed_controls(), cfg.rho0), cfg, pool, trace);
        rec.objective = admm_objective(problem, res);
        rec.report = std::move(res.report);
        rec.capped = !rec.report.converged;
        rec.solve_seconds = rec.report.parallel_seconds;
        u = std::move(res.z);
      } else {
        CentralizedResult res = solve_centralized(problem, options.qp);
        rec.objective = res.objective;
        rec.report.converged = res.qp.status == QpStatus::optimal;
        rec.report.iterations_used = res.qp.iterations;
        rec.report.slack_max = res.slack.size() > 0 ? res.slack.maxCoeff() : 0.0;
        rec.report.parallel_seconds = res.seconds;
        rec.report.serial_seconds = res.seconds;
        rec.report.wall_seconds = res.seconds;
        rec.solve_seconds = res.seconds;
        u = std::move(res.controls);
      }
    } catch (const NumericalError & e) {
      throw NumericalError("cycle " + std::to_string(k) + " (t = " + std::to_string(t) + " s): " +
                             e.what() + "; " + detail::state_dump(scenario, x),
        e.iteration());
    }

    std::vector<double> applied(N);
    std::vector<HorizonTrajectory> predicted(N);
    for (std::size_t v = 0; v < N; ++v) {
      const auto & spec = scenario.vehicles[v];
      std::vector<double> uv(u[v].data(), u[v].data() + u[v].size());
      for (double & d : uv) { d = std::clamp(d, spec.steer_min, spec.steer_max); }
      predicted[v] = rollout(x[v], uv, spec.speed, spec.wheelbase, Ts);
      applied[v] = uv.front();
      plan[v] = predicted[v];
    }
    for (std::size_t v = 0; v < N; ++v) {
      const auto & spec = scenario.vehicles[v];
      x[v] = step_nonlinear(x[v], applied[v], spec.speed, spec.wheelbase, Ts);
    }

    run.controls.push_back(std::move(applied));
    run.predictions.push_back(std::move(predicted));
    run.cycles.push_back(std::move(rec));
    run.times.push_back((k + 1) * Ts);
    run.states.push_back(x);
    run.min_distance.push_back(min_pairwise_distance(x));
    detail::record_violations(run, k + 1, x);
  }
  run.wall_seconds =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return run;
}

/// Largest distance from vehicle v to its reference path at steps with time >= from_time.
inline double max_lateral_deviation(const Scenario & sc, const SimulationRun & run, std::size_t v,
  double from_time)
{
  const ReferencePath path(sc.vehicles[v].reference_path);
  double worst = 0.0;
  for (std::size_t k = 0; k < run.times.size(); ++k) {
    if (run.times[k] + 1e-12 < from_time) { continue; }
    const auto & s = run.states[k][v];
    worst = std::max(worst, path.project(s.rx, s.ry).distance);
  }
  return worst;
}

/// Arc-length progress of vehicle v along its reference at every recorded step.
inline std::vector<double> progress_along_reference(const Scenario & sc, const SimulationRun & run,
  std::size_t v)
{
  const ReferencePath path(sc.vehicles[v].reference_path);
  std::vector<double> out;
  out.reserve(run.states.size());
  for (const auto & step : run.states) { out.push_back(path.project(step[v].rx, step[v].ry).arc_length); }
  return out;
}

}  // namespace coopadmm

#endif  // COOPADMM_SIMULATION_HPP
