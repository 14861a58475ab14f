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

#ifndef COOPADMM_ADMM_HPP
#define COOPADMM_ADMM_HPP

/**
 * @file
 * @brief Consensus ADMM over local (per vehicle) and link (per edge) nodes.
 *
 * Every vehicle v owns a consensus sequence z_v. Its local node keeps one copy
 * u_v, and each incident edge e keeps another copy u_v^e. One iteration is
 *   1. all local and edge QPs (independent, run on the worker pool),
 *   2. z_v = weighted average of (copy + scaled dual) over v's copies,
 *   3. scaled dual ascent lambda += copy - z,
 * followed by the residual test and the penalty update.
 */

#include "coopadmm/parallel.hpp"
#include "coopadmm/subproblems.hpp"

#include <array>
#include <chrono>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace coopadmm {

struct AdmmConfig
{
  double rho0{1.0};
  double eps_abs{0.01};
  double eps_rel{0.01};
  int max_iters{200};
  bool adapt_rho{true};
  double mu{5.0};
  double tau_incr{2.0};
  double tau_decr{2.0};
  /// Weight the local proximal term by max(1, degree) instead of 1.
  bool degree_weighted_prox{false};
  QpSettings qp{};
  /// Execution order of the Step-1 tasks (locals first, then edges); empty = natural.
  std::vector<std::size_t> task_order{};
};

struct AdmmState
{
  std::vector<Vector> u{};       ///< local copies
  std::vector<Vector> z{};       ///< consensus
  std::vector<Vector> lambda{};  ///< scaled duals of the local copies
  std::vector<std::array<Vector, 2>> u_edge{};       ///< [edge][endpoint i, j]
  std::vector<std::array<Vector, 2>> lambda_edge{};
  std::vector<Vector> slack{};   ///< edge slacks from the last edge solve
  double rho{1.0};
  int iteration{0};
};

/// z = seed steering, every copy = z, duals zero.
inline AdmmState initial_state(const ConvexifiedProblem & p, std::span<const Vector> seed_controls,
  double rho0)
{
  if (seed_controls.size() != p.num_vehicles()) { throw DimensionError("one seed per vehicle"); }
  if (!(rho0 > 0.0)) { throw ParameterError("rho0 must be > 0"); }
  AdmmState s;
  const Eigen::Index Np = p.horizon;
  for (const auto & seed : seed_controls) {
    if (seed.size() != Np) { throw DimensionError("seed controls must have Np entries"); }
    s.z.push_back(seed);
    s.u.push_back(seed);
    s.lambda.push_back(Vector::Zero(Np));
  }
  for (const auto & e : p.edges) {
    s.u_edge.push_back({s.z[e.i], s.z[e.j]});
    s.lambda_edge.push_back({Vector::Zero(Np), Vector::Zero(Np)});
    s.slack.push_back(Vector::Zero(Np));
  }
  s.rho = rho0;
  return s;
}

/// Weight of vehicle v's local copy in the augmented Lagrangian.
inline double local_copy_weight(const ConvexifiedProblem & p, std::size_t v, bool degree_weighted)
{
  return degree_weighted ? std::max(1.0, static_cast<double>(p.locals[v].edge_count)) : 1.0;
}

/// Proximal weight of the local solve: zero for a vehicle without edges.
inline double local_prox_weight(const ConvexifiedProblem & p, std::size_t v, bool degree_weighted)
{
  return p.locals[v].edge_count == 0 ? 0.0 : local_copy_weight(p, v, degree_weighted);
}

/**
 * @brief Step 2: z_v = (w (u_v + lambda_v) + sum_e (u_v^e + lambda_v^e)) / (w + deg v).
 *
 * With w = 1 this is the plain mean over the 1 + deg(v) copies.
 */
inline std::vector<Vector> update_consensus(const ConvexifiedProblem & p, const AdmmState & s,
  bool degree_weighted = false)
{
  std::vector<Vector> z(p.num_vehicles());
  std::vector<double> weight(p.num_vehicles());
  for (std::size_t v = 0; v < p.num_vehicles(); ++v) {
    weight[v] = local_copy_weight(p, v, degree_weighted);
    z[v] = weight[v] * (s.u[v] + s.lambda[v]);
  }
  for (std::size_t e = 0; e < p.num_edges(); ++e) {
    const auto & ep = p.edges[e];
    z[ep.i] += s.u_edge[e][0] + s.lambda_edge[e][0];
    z[ep.j] += s.u_edge[e][1] + s.lambda_edge[e][1];
    weight[ep.i] += 1.0;
    weight[ep.j] += 1.0;
  }
  for (std::size_t v = 0; v < z.size(); ++v) { z[v] /= weight[v]; }
  return z;
}

/// Step 3: lambda += copy - z for every copy, using the state's current z.
inline void update_duals(const ConvexifiedProblem & p, AdmmState & s)
{
  for (std::size_t v = 0; v < p.num_vehicles(); ++v) { s.lambda[v] += s.u[v] - s.z[v]; }
  for (std::size_t e = 0; e < p.num_edges(); ++e) {
    s.lambda_edge[e][0] += s.u_edge[e][0] - s.z[p.edges[e].i];
    s.lambda_edge[e][1] += s.u_edge[e][1] - s.z[p.edges[e].j];
  }
}

struct ResidualReport
{
  double r_norm{0.0};
  double s_norm{0.0};
  double eps_pri{0.0};
  double eps_dual{0.0};
  bool converged{false};
  int iterations_used{0};
  double rho{1.0};             ///< penalty after the last update
  double slack_max{0.0};       ///< largest edge slack at the final iterate, m^2
  std::vector<double> local_solve_seconds{};  ///< cumulative per local node
  std::vector<double> edge_solve_seconds{};   ///< cumulative per link node
  double parallel_seconds{0.0};  ///< sum over iterations of the slowest node's solve time
  double serial_seconds{0.0};    ///< sum of every solve time
  double wall_seconds{0.0};
};

/**
 * @brief Residuals of the iterate `s` against the previous consensus `z_prev`.
 *
 * r = |copies - z| stacked over all N + 2M copies, s = rho |z - z_prev| with z
 * replicated once per copy, and the thresholds
 *   eps_pri  = eps_abs sqrt((N + 2M) Np) + eps_rel max(|u|, |z|),
 *   eps_dual = eps_abs sqrt((N + 2M) Np) + eps_rel |lambda| / rho.
 */
inline ResidualReport compute_residuals(const ConvexifiedProblem & p, const AdmmState & s,
  std::span<const Vector> z_prev, double eps_abs, double eps_rel)
{
  const std::size_t N = p.num_vehicles();
  const std::size_t M = p.num_edges();
  double r2 = 0.0;
  double dz2 = 0.0;
  double u2 = 0.0;
  double z2 = 0.0;
  double l2 = 0.0;
  const auto copy = [&](const Vector & u, const Vector & lambda, std::size_t v) {
    r2 += (u - s.z[v]).squaredNorm();
    dz2 += (s.z[v] - z_prev[v]).squaredNorm();
    u2 += u.squaredNorm();
    z2 += s.z[v].squaredNorm();
    l2 += lambda.squaredNorm();
  };
  for (std::size_t v = 0; v < N; ++v) { copy(s.u[v], s.lambda[v], v); }
  for (std::size_t e = 0; e < M; ++e) {
    copy(s.u_edge[e][0], s.lambda_edge[e][0], p.edges[e].i);
    copy(s.u_edge[e][1], s.lambda_edge[e][1], p.edges[e].j);
  }
  ResidualReport rep;
  rep.r_norm = std::sqrt(r2);
  rep.s_norm = s.rho * std::sqrt(dz2);
  const double dim = std::sqrt(static_cast<double>((N + 2 * M) * static_cast<std::size_t>(p.horizon)));
  rep.eps_pri = eps_abs * dim + eps_rel * std::max(std::sqrt(u2), std::sqrt(z2));
  rep.eps_dual = eps_abs * dim + eps_rel * std::sqrt(l2) / s.rho;
  rep.converged = rep.r_norm <= rep.eps_pri && rep.s_norm <= rep.eps_dual;
  rep.rho = s.rho;
  rep.iterations_used = s.iteration;
  for (const auto & sl : s.slack) {
    if (sl.size() > 0) { rep.slack_max = std::max(rep.slack_max, sl.maxCoeff()); }
  }
  return rep;
}

/// Residual balancing: rho *= tau_incr if r > mu s, rho /= tau_decr if s > mu r.
/// Scaled duals are multiplied by rho_old / rho_new so rho * lambda is unchanged.
inline bool adapt_rho(AdmmState & s, double r_norm, double s_norm, double mu = 5.0,
  double tau_incr = 2.0, double tau_decr = 2.0)
{
  if (!(s.rho > 0.0)) { throw ParameterError("rho must be > 0"); }
  double next = s.rho;
  if (r_norm > mu * s_norm) {
    next = s.rho * tau_incr;
  } else if (s_norm > mu * r_norm) {
    next = s.rho / tau_decr;
  }
  if (next == s.rho) { return false; }
  const double scale = s.rho / next;
  for (auto & l : s.lambda) { l *= scale; }
  for (auto & pair : s.lambda_edge) {
    pair[0] *= scale;
    pair[1] *= scale;
  }
  s.rho = next;
  return true;
}

struct TraceEntry
{
  int iteration{0};
  double r_norm{0.0};
  double s_norm{0.0};
  double rho{0.0};
  double max_node_seconds{0.0};
};

inline void write_trace_line(std::ostream & os, const TraceEntry & t)
{
  const auto old = os.precision(9);
  os << "admm k=" << t.iteration << " r=" << t.r_norm << " s=" << t.s_norm << " rho=" << t.rho
     << " max_node_s=" << t.max_node_seconds << '\n';
  os.precision(old);
}

struct AdmmResult
{
  std::vector<Vector> z{};
  ResidualReport report{};
  AdmmState state{};
  std::vector<TraceEntry> trace{};
};

/**
 * Consensus objective: the tracking costs at z plus the slack cost reported by
 * the edge nodes.
 */
inline double admm_objective(const ConvexifiedProblem & p, const AdmmResult & r)
{
  double J = 0.0;
  for (std::size_t v = 0; v < p.num_vehicles(); ++v) { J += p.locals[v].objective(r.z[v]); }
  for (std::size_t e = 0; e < p.num_edges(); ++e) {
    J += p.edges[e].slack_penalty * r.state.slack[e].sum();
  }
  return J;
}

namespace detail {

inline bool all_finite(const AdmmState & s)
{
  const auto ok = [](const Vector & v) { return v.allFinite(); };
  for (std::size_t v = 0; v < s.u.size(); ++v) {
    if (!ok(s.u[v]) || !ok(s.z[v]) || !ok(s.lambda[v])) { return false; }
  }
  for (std::size_t e = 0; e < s.u_edge.size(); ++e) {
    if (!ok(s.u_edge[e][0]) || !ok(s.u_edge[e][1]) || !ok(s.lambda_edge[e][0]) ||
        !ok(s.lambda_edge[e][1]) || !ok(s.slack[e])) {
      return false;
    }
  }
  return std::isfinite(s.rho);
}

}  // namespace detail

/**
 * @brief Iterate until the residual test passes or max_iters is reached.
 *
 * On the cap the last consensus iterate is returned with converged = false.
 * Throws NumericalError carrying the iteration index if any iterate is not
 * finite. Results do not depend on the pool size or task order.
 */
inline AdmmResult admm_solve(const ConvexifiedProblem & p, AdmmState state, const AdmmConfig & cfg,
  WorkerPool & pool, const std::function<void(const TraceEntry &)> & trace = {})
{
  using Clock = std::chrono::steady_clock;
  const std::size_t N = p.num_vehicles();
  const std::size_t M = p.num_edges();
  if (state.u.size() != N || state.u_edge.size() != M) {
    throw DimensionError("ADMM state does not match the problem");
  }
  if (cfg.max_iters < 1) { throw ParameterError("max_iters must be >= 1"); }
  if (!(cfg.eps_abs > 0.0) || cfg.eps_rel < 0.0) { throw ParameterError("invalid tolerances"); }

  AdmmResult out;
  out.report.local_solve_seconds.assign(N, 0.0);
  out.report.edge_solve_seconds.assign(M, 0.0);
  std::vector<double> task_seconds(N + M, 0.0);
  std::vector<int> task_failed(N + M, 0);
  const auto t_start = Clock::now();

  if (!detail::all_finite(state)) { throw NumericalError("non-finite ADMM initial state", 0); }

  ResidualReport rep;
  for (int k = 0; k < cfg.max_iters; ++k) {
    // Step 1: every local and link node, independently.
    const AdmmState & cur = state;
    std::vector<Vector> u_new(N);
    std::vector<std::array<Vector, 2>> ue_new(M);
    std::vector<Vector> slack_new(M);
    pool.run(
      N + M,
      [&](std::size_t t) {
        const auto t0 = Clock::now();
        QpSolution sol;
        if (t < N) {
          const double w = local_prox_weight(p, t, cfg.degree_weighted_prox);
          sol = solve_qp(build_local(p.locals[t], cur.z[t], cur.lambda[t], cur.rho, w),
            std::nullopt, cfg.qp);
          u_new[t] = sol.u_star;
        } else {
          const std::size_t e = t - N;
          const auto & ep = p.edges[e];
          sol = solve_qp(build_edge(ep, cur.z[ep.i], cur.z[ep.j], cur.lambda_edge[e][0],
                           cur.lambda_edge[e][1], cur.rho),
            std::nullopt, cfg.qp);
          const Eigen::Index Np = p.horizon;
          ue_new[e] = {sol.u_star.head(Np), sol.u_star.segment(Np, Np)};
          slack_new[e] = sol.u_star.tail(Np);
        }
        task_failed[t] = sol.status == QpStatus::infeasible ? 1 : 0;
        task_seconds[t] = std::chrono::duration<double>(Clock::now() - t0).count();
      },
      cfg.task_order);

    double max_node = 0.0;
    for (std::size_t t = 0; t < N + M; ++t) {
      if (task_failed[t]) {
        throw NumericalError(t < N ? "local QP infeasible for vehicle " +
                                       std::to_string(p.locals[t].id)
                                   : "edge QP infeasible", k + 1);
      }
      max_node = std::max(max_node, task_seconds[t]);
      out.report.serial_seconds += task_seconds[t];
      if (t < N) {
        out.report.local_solve_seconds[t] += task_seconds[t];
      } else {
        out.report.edge_solve_seconds[t - N] += task_seconds[t];
      }
    }
    out.report.parallel_seconds += max_node;

    state.u = std::move(u_new);
    state.u_edge = std::move(ue_new);
    state.slack = std::move(slack_new);

    // Step 2 and 3.
    const std::vector<Vector> z_prev = state.z;
    state.z = update_consensus(p, state, cfg.degree_weighted_prox);
    update_duals(p, state);
    state.iteration = k + 1;
    if (!detail::all_finite(state)) { throw NumericalError("non-finite ADMM iterate", k + 1); }

    rep = compute_residuals(p, state, z_prev, cfg.eps_abs, cfg.eps_rel);
    const TraceEntry entry{k + 1, rep.r_norm, rep.s_norm, state.rho, max_node};
    out.trace.push_back(entry);
    if (trace) { trace(entry); }
    if (rep.converged) { break; }
    if (cfg.adapt_rho) { adapt_rho(state, rep.r_norm, rep.s_norm, cfg.mu, cfg.tau_incr, cfg.tau_decr); }
  }

  rep.rho = state.rho;
  rep.local_solve_seconds = std::move(out.report.local_solve_seconds);
  rep.edge_solve_seconds = std::move(out.report.edge_solve_seconds);
  rep.parallel_seconds = out.report.parallel_seconds;
  rep.serial_seconds = out.report.serial_seconds;
  rep.wall_seconds = std::chrono::duration<double>(Clock::now() - t_start).count();
  out.report = std::move(rep);
  out.z = state.z;
  out.state = std::move(state);
  return out;
}

inline AdmmResult admm_solve(const ConvexifiedProblem & p, AdmmState state, const AdmmConfig & cfg)
{
  WorkerPool pool(1);
  return admm_solve(p, std::move(state), cfg, pool);
}

struct CentralizedResult
{
  std::vector<Vector> controls{};
  Vector slack{};          ///< stacked edge slacks
  double objective{0.0};   ///< same scale as centralized_objective()
  QpSolution qp{};
  double seconds{0.0};
};

/// Baseline: one QP over every vehicle's steering and every edge slack.
inline CentralizedResult solve_centralized(const ConvexifiedProblem & p,
  const QpSettings & settings = {})
{
  const auto t0 = std::chrono::steady_clock::now();
  CentralizedResult out;
  out.qp = solve_qp(build_centralized(p), std::nullopt, settings);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (out.qp.status == QpStatus::infeasible) {
    throw NumericalError("centralized QP infeasible", out.qp.iterations);
  }
  out.controls = split_controls(p, out.qp.u_star);
  const Eigen::Index nu = static_cast<Eigen::Index>(p.num_vehicles()) * p.horizon;
  out.slack = out.qp.u_star.tail(out.qp.u_star.size() - nu);
  out.objective = out.qp.objective + centralized_constant(p);
  return out;
}

}  // namespace coopadmm

#endif  // COOPADMM_ADMM_HPP
