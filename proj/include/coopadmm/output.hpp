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

#ifndef COOPADMM_OUTPUT_HPP
#define COOPADMM_OUTPUT_HPP

/// @file
/// @brief Run artifacts: trajectory CSV and summary JSON, floats at 9 significant digits.

#include "coopadmm/simulation.hpp"

#include <json.hpp>

#include <cstdio>
#include <ostream>
#include <string>

namespace coopadmm {

/// %.9g formatting; "nan", "inf" and "-inf" for non-finite values.
inline std::string fmt9(double x)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

/// x rounded to 9 significant digits, or null when not finite.
inline nlohmann::json json9(double x)
{
  if (!std::isfinite(x)) { return nullptr; }
  return std::stod(fmt9(x));
}

/**
 * @brief One row per vehicle per step: time, vehicle_id, rx, ry, theta, delta,
 * min_pairwise_distance. The final step has no applied steering and leaves delta empty.
 */
inline void write_trajectories_csv(std::ostream & os, const SimulationRun & run)
{
  os << "time,vehicle_id,rx,ry,theta,delta,min_pairwise_distance\n";
  for (std::size_t k = 0; k < run.times.size(); ++k) {
    for (std::size_t v = 0; v < run.ids.size(); ++v) {
      const auto & s = run.states[k][v];
      os << fmt9(run.times[k]) << ',' << run.ids[v] << ',' << fmt9(s.rx) << ',' << fmt9(s.ry) << ','
         << fmt9(s.theta) << ',';
      if (k < run.controls.size()) { os << fmt9(run.controls[k][v]); }
      os << ',' << fmt9(run.min_distance[k]) << '\n';
    }
  }
}

inline nlohmann::json summary_json(const SimulationRun & run)
{
  using nlohmann::json;
  json cycles = json::array();
  int converged = 0;
  long iterations = 0;
  double solve_total = 0.0;
  for (const auto & c : run.cycles) {
    const auto & r = c.report;
    converged += r.converged ? 1 : 0;
    iterations += r.iterations_used;
    solve_total += c.solve_seconds;
    json edges = json::array();
    for (const auto & [a, b] : c.edges) { edges.push_back({a, b}); }
    cycles.push_back({{"cycle", c.cycle}, {"time", json9(c.time)}, {"converged", r.converged},
      {"capped", c.capped}, {"iterations", r.iterations_used}, {"r_norm", json9(r.r_norm)},
      {"s_norm", json9(r.s_norm)}, {"eps_pri", json9(r.eps_pri)}, {"eps_dual", json9(r.eps_dual)},
      {"rho", json9(r.rho)}, {"slack_max", json9(r.slack_max)}, {"objective", json9(c.objective)},
      {"min_distance", json9(c.min_distance)}, {"edges", std::move(edges)},
      {"solve_seconds", json9(c.solve_seconds)}, {"serial_seconds", json9(r.serial_seconds)},
      {"wall_seconds", json9(r.wall_seconds)}});
  }
  json violations = json::array();
  for (const auto & v : run.violations) {
    violations.push_back({{"time", json9(v.time)}, {"a", v.a}, {"b", v.b}, {"distance", json9(v.distance)}});
  }
  json min_distance = json::array();
  for (const double d : run.min_distance) { min_distance.push_back(json9(d)); }
  const std::size_t n = run.cycles.size();
  return {{"scenario", run.scenario}, {"mode", to_string(run.mode)}, {"Ts", json9(run.Ts)},
    {"d_safe", json9(run.d_safe)}, {"vehicles", run.ids}, {"num_cycles", n},
    {"converged_cycles", converged}, {"capped_cycles", run.capped_cycles()},
    {"mean_iterations", json9(n ? static_cast<double>(iterations) / static_cast<double>(n) : 0.0)},
    {"overall_min_distance", json9(run.overall_min_distance())},
    {"mean_solve_seconds", json9(n ? solve_total / static_cast<double>(n) : 0.0)},
    {"wall_seconds", json9(run.wall_seconds)}, {"violations", std::move(violations)},
    {"min_distance_per_step", std::move(min_distance)}, {"cycles", std::move(cycles)}};
}

inline void write_summary_json(std::ostream & os, const SimulationRun & run)
{
  os << summary_json(run).dump(2) << '\n';
}

}  // namespace coopadmm

#endif  // COOPADMM_OUTPUT_HPP
