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

#ifndef COOPADMM_BENCH_HPP
#define COOPADMM_BENCH_HPP

/**
 * @file
 * @brief Scaling benchmark: parallel ADMM against the centralized QP.
 *
 * ADMM drives the closed loop. At every cycle the centralized QP is solved on
 * the same convexified problem, so both modes see identical inputs.
 */

#include "coopadmm/output.hpp"
#include "coopadmm/simulation.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace coopadmm {

/**
 * @brief N vehicles in two lanes 3.5 m apart, alternating lanes every 35 m.
 *
 * Consecutive vehicles sit in adjacent lanes well within perception range, so
 * the constraint graph is a path and no vehicle has more than two neighbours.
 * Speeds (40..50 km/h), initial lateral offsets (+-0.5 m) and heading errors
 * (+-0.05 rad) are drawn with `seed`.
 */
inline Scenario generate_scaled_scenario(int N, std::uint64_t seed)
{
  if (N < 1) { throw ParameterError("generate_scaled_scenario needs N >= 1"); }
  constexpr double kLane = 3.5;
  constexpr double kSpacing = 35.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> kmh(40.0, 50.0);
  std::uniform_real_distribution<double> offset(-0.5, 0.5);
  std::uniform_real_distribution<double> heading(-0.05, 0.05);
  Scenario sc;
  sc.name = "scaled_" + std::to_string(N);
  sc.params.sim_duration = 1.0;
  for (int i = 0; i < N; ++i) {
    VehicleSpec v;
    v.id = i + 1;
    v.speed = kmh(rng) / 3.6;
    const double x = i * kSpacing;
    const double y = (i % 2) * kLane;
    const double dy = offset(rng);
    v.initial_state = {x, y + dy, heading(rng)};
    v.position_bounds = {-kInf, kInf, -0.5 * kLane, 1.5 * kLane};
    v.reference_path = {{x, y, 0.0}, {x + 500.0, y, 0.0}};
    sc.vehicles.push_back(v);
  }
  sc.validate();
  return sc;
}

struct BenchmarkRecord
{
  int N{0};
  SolverMode mode{SolverMode::parallel_admm};
  int cycle{0};
  double seconds{0.0};       ///< ADMM: sum over iterations of the slowest node; centralized: QP time
  double wall_seconds{0.0};  ///< real elapsed time of the solve
  int iterations{0};
  bool converged{false};
};

struct BenchOptions
{
  int cycles{10};
  std::uint64_t seed{0};
  std::size_t workers{1};
  /// Called after each size completes.
  std::function<void(int N)> progress{};
};

/// Run `cycles` closed-loop cycles per size and time both modes on each cycle.
/// Each size starts with one untimed solve of both modes.
inline std::vector<BenchmarkRecord> run_benchmark(std::span<const int> sizes, const BenchOptions & opt = {})
{
  if (opt.cycles < 1) { throw ParameterError("cycles must be >= 1"); }
  std::vector<BenchmarkRecord> out;
  WorkerPool pool(opt.workers == 0 ? default_worker_count() : opt.workers);
  for (const int N : sizes) {
    const Scenario sc = generate_scaled_scenario(N, opt.seed);
    const AdmmConfig cfg = admm_config(sc.params);
    std::vector<VehicleState> x;
    for (const auto & v : sc.vehicles) { x.push_back(v.initial_state); }
    std::vector<std::optional<HorizonTrajectory>> plan(x.size());
    {
      const CycleInputs in = prepare_cycle(sc, x, plan, 0.0);
      const ConvexifiedProblem problem = convexify_cycle(sc, in);
      admm_solve(problem, initial_state(problem, in.seed_controls(), cfg.rho0), cfg, pool);
      solve_centralized(problem, cfg.qp);
    }
    for (int k = 0; k < opt.cycles; ++k) {
      const CycleInputs in = prepare_cycle(sc, x, plan, k * sc.params.Ts);
      const ConvexifiedProblem problem = convexify_cycle(sc, in);

      const AdmmResult a =
        admm_solve(problem, initial_state(problem, in.seed_controls(), cfg.rho0), cfg, pool);
      out.push_back({N, SolverMode::parallel_admm, k, a.report.parallel_seconds, a.report.wall_seconds,
        a.report.iterations_used, a.report.converged});

      const CentralizedResult c = solve_centralized(problem, cfg.qp);
      out.push_back({N, SolverMode::centralized, k, c.seconds, c.seconds, c.qp.iterations,
        c.qp.status == QpStatus::optimal});

      for (std::size_t v = 0; v < x.size(); ++v) {
        const auto & spec = sc.vehicles[v];
        std::vector<double> u(a.z[v].data(), a.z[v].data() + a.z[v].size());
        for (double & d : u) { d = std::clamp(d, spec.steer_min, spec.steer_max); }
        plan[v] = rollout(x[v], u, spec.speed, spec.wheelbase, sc.params.Ts);
        x[v] = plan[v]->states[1];
      }
    }
    if (opt.progress) { opt.progress(N); }
  }
  return out;
}

struct BenchRow
{
  int N{0};
  SolverMode mode{SolverMode::parallel_admm};
  int samples{0};
  double median_seconds{0.0};
  double median_wall_seconds{0.0};
  double median_iterations{0.0};
};

struct BenchSummary
{
  std::vector<BenchRow> rows{};            ///< sorted by mode, then N
  std::optional<double> flatness_ratio{};  ///< parallel median at largest N / at smallest N
  std::optional<double> growth_ratio{};    ///< same for centralized
  int flatness_from{0};
  int flatness_to{0};
  int growth_from{0};
  int growth_to{0};
  std::vector<std::string> gaps{};         ///< missing data, human readable
};

inline double median(std::vector<double> v)
{
  if (v.empty()) { throw ParameterError("median of an empty set"); }
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline BenchSummary summarize_bench(std::span<const BenchmarkRecord> records)
{
  std::map<std::pair<int, int>, std::vector<const BenchmarkRecord *>> groups;
  std::map<int, std::set<int>> sizes_by_mode;
  std::set<int> all_sizes;
  for (const auto & r : records) {
    groups[{static_cast<int>(r.mode), r.N}].push_back(&r);
    sizes_by_mode[static_cast<int>(r.mode)].insert(r.N);
    all_sizes.insert(r.N);
  }
  BenchSummary s;
  for (const auto & [key, rs] : groups) {
    std::vector<double> t, w, it;
    for (const auto * r : rs) {
      t.push_back(r->seconds);
      w.push_back(r->wall_seconds);
      it.push_back(r->iterations);
    }
    s.rows.push_back({key.second, static_cast<SolverMode>(key.first), static_cast<int>(rs.size()),
      median(t), median(w), median(it)});
  }
  const auto ratio = [&](SolverMode m, std::optional<double> & out, int & from, int & to) {
    const auto & sizes = sizes_by_mode[static_cast<int>(m)];
    for (const int N : all_sizes) {
      if (!sizes.count(N)) {
        s.gaps.push_back(std::string(to_string(m)) + ": no data at N=" + std::to_string(N));
      }
    }
    if (sizes.size() < 2) {
      s.gaps.push_back(std::string(to_string(m)) + ": ratio undefined (fewer than two sizes)");
      return;
    }
    from = *sizes.begin();
    to = *sizes.rbegin();
    double lo = 0.0, hi = 0.0;
    for (const auto & row : s.rows) {
      if (row.mode != m) { continue; }
      if (row.N == from) { lo = row.median_seconds; }
      if (row.N == to) { hi = row.median_seconds; }
    }
    if (lo > 0.0) {
      out = hi / lo;
    } else {
      s.gaps.push_back(std::string(to_string(m)) + ": zero time at N=" + std::to_string(from));
    }
  };
  ratio(SolverMode::parallel_admm, s.flatness_ratio, s.flatness_from, s.flatness_to);
  ratio(SolverMode::centralized, s.growth_ratio, s.growth_from, s.growth_to);
  return s;
}

inline void write_bench_records_csv(std::ostream & os, std::span<const BenchmarkRecord> records)
{
  os << "N,mode,cycle,seconds,wall_seconds,iterations,converged\n";
  for (const auto & r : records) {
    os << r.N << ',' << to_string(r.mode) << ',' << r.cycle << ',' << fmt9(r.seconds) << ','
       << fmt9(r.wall_seconds) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

inline void write_bench_summary_csv(std::ostream & os, const BenchSummary & s)
{
  os << "N,mode,samples,median_seconds,median_wall_seconds,median_iterations\n";
  for (const auto & r : s.rows) {
    os << r.N << ',' << to_string(r.mode) << ',' << r.samples << ',' << fmt9(r.median_seconds) << ','
       << fmt9(r.median_wall_seconds) << ',' << fmt9(r.median_iterations) << '\n';
  }
}

/// Aligned text table plus the two ratios and any gaps.
inline void print_bench_summary(std::ostream & os, const BenchSummary & s)
{
  char line[160];
  std::snprintf(line, sizeof line, "%6s  %-14s  %8s  %16s  %16s  %10s\n", "N", "mode", "samples",
    "median_s", "median_wall_s", "median_it");
  os << line;
  for (const auto & r : s.rows) {
    std::snprintf(line, sizeof line, "%6d  %-14s  %8d  %16.9g  %16.9g  %10.9g\n", r.N, to_string(r.mode),
      r.samples, r.median_seconds, r.median_wall_seconds, r.median_iterations);
    os << line;
  }
  if (s.flatness_ratio) {
    os << "parallel flatness ratio N=" << s.flatness_to << "/N=" << s.flatness_from << ": "
       << fmt9(*s.flatness_ratio) << '\n';
  }
  if (s.growth_ratio) {
    os << "centralized growth ratio N=" << s.growth_to << "/N=" << s.growth_from << ": "
       << fmt9(*s.growth_ratio) << '\n';
  }
  for (const auto & g : s.gaps) { os << "gap: " << g << '\n'; }
}

}  // namespace coopadmm

#endif  // COOPADMM_BENCH_HPP
