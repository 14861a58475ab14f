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

#ifndef COOPADMM_SUBPROBLEMS_HPP
#define COOPADMM_SUBPROBLEMS_HPP

/**
 * @file
 * @brief QP builders for the consensus decomposition.
 *
 * Every vehicle contributes a tracking problem (own cost, steering box, road
 * box along the predicted path). Every graph edge contributes a collision
 * problem over copies of both endpoints' steering sequences, with the
 * separation constraint linearised about the seed positions and softened by a
 * nonnegative slack per step. The centralized problem stacks all of them over
 * a single steering vector.
 */

#include "coopadmm/dynamics.hpp"
#include "coopadmm/qp.hpp"
#include "coopadmm/scenario.hpp"

#include <span>
#include <vector>

namespace coopadmm {

class DegenerateSeedError : public DomainError
{
public:
  using DomainError::DomainError;
};

/// normal^T (p_i - p_j) >= offset.
struct CollisionHalfspace
{
  Eigen::Vector2d normal{Eigen::Vector2d::Zero()};
  double offset{0.0};

  double margin(const Eigen::Vector2d & p_i, const Eigen::Vector2d & p_j) const
  {
    return normal.dot(p_i - p_j) - offset;
  }
  bool satisfied(const Eigen::Vector2d & p_i, const Eigen::Vector2d & p_j) const
  {
    return margin(p_i, p_j) >= 0.0;
  }
};

/**
 * First-order expansion of ||p_i - p_j|| >= d_safe about the seed pair:
 *   2 (p_i0 - p_j0)^T (p_i - p_j) - ||p_i0 - p_j0||^2 >= d_safe^2.
 * The squared norm is convex, so the halfspace is contained in the true set.
 */
inline CollisionHalfspace linearize_collision(const Eigen::Vector2d & p_i0,
  const Eigen::Vector2d & p_j0, double d_safe)
{
  const Eigen::Vector2d d = p_i0 - p_j0;
  if (d.squaredNorm() == 0.0) { throw DegenerateSeedError("coincident seed positions"); }
  return {2.0 * d, d.squaredNorm() + d_safe * d_safe};
}

/// As linearize_collision, but a coincident seed pair falls back to the unit
/// direction between the current positions, then to the x axis.
inline CollisionHalfspace linearize_collision_or_recover(const Eigen::Vector2d & p_i0,
  const Eigen::Vector2d & p_j0, double d_safe, const Eigen::Vector2d & p_i_now,
  const Eigen::Vector2d & p_j_now)
{
  if ((p_i0 - p_j0).squaredNorm() > 0.0) { return linearize_collision(p_i0, p_j0, d_safe); }
  Eigen::Vector2d dir = p_i_now - p_j_now;
  dir = dir.squaredNorm() > 0.0 ? dir.normalized() : Eigen::Vector2d::UnitX();
  return {2.0 * dir, dir.squaredNorm() + d_safe * d_safe};
}

struct CostWeights
{
  double q_position{1.0};
  double q_heading{1.0};
  double r{0.1};
};

/// Tracking problem of one vehicle. The quadratic in u is cached on construction.
struct LocalProblem
{
  VehicleId id{};
  CondensedPrediction condensed{};
  Vector reference{};  ///< stacked (r_x, r_y, theta) for steps 1..Np
  CostWeights weights{};
  double steer_min{-0.5};
  double steer_max{0.5};
  Box position_bounds{};
  int edge_count{0};
  VehicleState current{};

  // objective(u) = 0.5 u^T hessian u + gradient^T u + constant
  Matrix hessian{};
  Vector gradient{};
  double constant{0.0};
  // Road box mapped onto the steering sequence: rows^T u <= bounds.
  Matrix road_rows{};
  Vector road_bounds{};

  int horizon() const noexcept { return condensed.horizon(); }

  /// Sum over the horizon of Q-weighted tracking error plus R |u|^2.
  double objective(const Vector & u) const
  {
    return 0.5 * u.dot(hessian * u) + gradient.dot(u) + constant;
  }
};

inline LocalProblem make_local_problem(VehicleId id, CondensedPrediction condensed,
  Vector reference, const CostWeights & weights, double steer_min, double steer_max,
  const Box & position_bounds, int edge_count = 0, const VehicleState & current = {})
{
  const int Np = condensed.horizon();
  if (reference.size() != 3 * Np) { throw DimensionError("reference must have 3 Np entries"); }
  if (weights.q_position < 0.0 || weights.q_heading < 0.0 || weights.r < 0.0) {
    throw ParameterError("cost weights must be >= 0");
  }
  if (weights.q_position == 0.0 && weights.q_heading == 0.0 && weights.r == 0.0) {
    throw ParameterError("cost must be nontrivial");
  }
  if (!(steer_min < steer_max)) { throw ParameterError("steer_min must be < steer_max"); }

  LocalProblem p;
  p.id = id;
  p.condensed = std::move(condensed);
  p.reference = std::move(reference);
  p.weights = weights;
  p.steer_min = steer_min;
  p.steer_max = steer_max;
  p.position_bounds = position_bounds;
  p.edge_count = edge_count;
  p.current = current;

  Vector q(3 * Np);
  for (int k = 0; k < Np; ++k) {
    q.segment(3 * k, 3) << weights.q_position, weights.q_position, weights.q_heading;
  }
  const Matrix & Phi = p.condensed.Phi;
  const Vector offset = p.condensed.gamma - p.reference;
  p.hessian = 2.0 * (Phi.transpose() * q.asDiagonal() * Phi);
  p.hessian.diagonal().array() += 2.0 * weights.r;
  p.gradient = 2.0 * (Phi.transpose() * q.cwiseProduct(offset));
  p.constant = offset.dot(q.cwiseProduct(offset));

  // Road limits per prediction step. Rows that u cannot influence (step 1) are dropped.
  std::vector<Vector> rows;
  std::vector<double> bounds;
  const auto add = [&](const Vector & row, double bound) {
    if (row.cwiseAbs().maxCoeff() <= 1e-14 || !std::isfinite(bound)) { return; }
    rows.push_back(row);
    bounds.push_back(bound);
  };
  const Box & box = position_bounds;
  for (int k = 1; k <= Np; ++k) {
    const Vector rx = p.condensed.position_row(k, 0).transpose();
    const Vector ry = p.condensed.position_row(k, 1).transpose();
    const double gx = p.condensed.position_offset(k, 0);
    const double gy = p.condensed.position_offset(k, 1);
    add(rx, box.x_max - gx);
    add(-rx, gx - box.x_min);
    add(ry, box.y_max - gy);
    add(-ry, gy - box.y_min);
  }
  p.road_rows.resize(static_cast<Eigen::Index>(rows.size()), Np);
  p.road_bounds.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    p.road_rows.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    p.road_bounds(static_cast<Eigen::Index>(r)) = bounds[r];
  }
  return p;
}

/**
 * @brief Local step QP: tracking cost plus (rho w / 2) |u - z + lambda|^2.
 *
 * `prox_weight` is 1 for the single-term local proximal penalty; the
 * degree-weighted variant passes max(1, degree).
 */
inline DenseQp build_local(const LocalProblem & p, const Vector & z, const Vector & lambda,
  double rho, double prox_weight = 1.0)
{
  const int Np = p.horizon();
  if (!(rho > 0.0)) { throw ParameterError("rho must be > 0"); }
  if (z.size() != Np || lambda.size() != Np) { throw DimensionError("z/lambda must have Np entries"); }
  Matrix H = p.hessian;
  H.diagonal().array() += rho * prox_weight;
  Vector f = p.gradient + rho * prox_weight * (lambda - z);
  return DenseQp(std::move(H), std::move(f), p.road_rows, p.road_bounds,
    Vector::Constant(Np, p.steer_min), Vector::Constant(Np, p.steer_max));
}

/// Collision problem of one edge over (u_i, u_j, s) with s >= 0 per step.
struct EdgeProblem
{
  std::size_t i{};  ///< index of the first endpoint in ConvexifiedProblem::locals
  std::size_t j{};
  VehicleId id_i{};
  VehicleId id_j{};
  int horizon{0};
  double d_safe{5.0};
  double slack_penalty{1e4};
  std::vector<CollisionHalfspace> halfspaces{};  ///< one per step 1..Np
  std::vector<Eigen::Vector2d> seed_i{};         ///< seed positions, steps 1..Np
  std::vector<Eigen::Vector2d> seed_j{};
  Matrix position_map_i{};  ///< rows (x_k, y_k), k = 1..Np, as affine maps of u_i
  Vector position_offset_i{};
  Matrix position_map_j{};
  Vector position_offset_j{};
  Matrix rows{};    ///< halfspaces over (u_i, u_j, s): rows * [u_i; u_j; s] <= bounds
  Vector bounds{};
  double steer_min_i{-kInf};  ///< endpoint steering limits, repeated on the edge copies
  double steer_max_i{kInf};
  double steer_min_j{-kInf};
  double steer_max_j{kInf};

  Eigen::Vector2d position_i(const Vector & u_i, int k) const
  {
    return position_map_i.middleRows(2 * (k - 1), 2) * u_i + position_offset_i.segment(2 * (k - 1), 2);
  }
  Eigen::Vector2d position_j(const Vector & u_j, int k) const
  {
    return position_map_j.middleRows(2 * (k - 1), 2) * u_j + position_offset_j.segment(2 * (k - 1), 2);
  }

  /// Per-step shortfall max(0, offset - normal^T (p_i - p_j)), in m^2.
  Vector shortfall(const Vector & u_i, const Vector & u_j) const
  {
    Vector out(horizon);
    for (int k = 1; k <= horizon; ++k) {
      out(k - 1) = std::max(0.0, -halfspaces[static_cast<std::size_t>(k - 1)].margin(
                                   position_i(u_i, k), position_j(u_j, k)));
    }
    return out;
  }

  /// Minimal slack cost for the given steering copies.
  double penalty(const Vector & u_i, const Vector & u_j) const
  {
    return slack_penalty * shortfall(u_i, u_j).sum();
  }
};

namespace detail {

inline void position_rows(const CondensedPrediction & c, Matrix & map, Vector & offset)
{
  const int Np = c.horizon();
  map.resize(2 * Np, Np);
  offset.resize(2 * Np);
  for (int k = 1; k <= Np; ++k) {
    for (int comp = 0; comp < 2; ++comp) {
      map.row(2 * (k - 1) + comp) = c.position_row(k, comp);
      offset(2 * (k - 1) + comp) = c.position_offset(k, comp);
    }
  }
}

}  // namespace detail

/**
 * Build the collision problem of an edge from the endpoints' local problems
 * and seed trajectories (Np + 1 states each, first one is the current state).
 */
inline EdgeProblem make_edge_problem(std::size_t i, std::size_t j, const LocalProblem & a,
  const LocalProblem & b, const HorizonTrajectory & seed_a, const HorizonTrajectory & seed_b,
  double d_safe, double slack_penalty)
{
  const int Np = a.horizon();
  if (b.horizon() != Np || seed_a.horizon() != Np || seed_b.horizon() != Np) {
    throw DimensionError("edge endpoints must share the horizon");
  }
  if (!(d_safe > 0.0) || !(slack_penalty > 0.0)) {
    throw ParameterError("d_safe and slack_penalty must be > 0");
  }
  EdgeProblem e;
  e.i = i;
  e.j = j;
  e.id_i = a.id;
  e.id_j = b.id;
  e.horizon = Np;
  e.d_safe = d_safe;
  e.slack_penalty = slack_penalty;
  e.steer_min_i = a.steer_min;
  e.steer_max_i = a.steer_max;
  e.steer_min_j = b.steer_min;
  e.steer_max_j = b.steer_max;
  detail::position_rows(a.condensed, e.position_map_i, e.position_offset_i);
  detail::position_rows(b.condensed, e.position_map_j, e.position_offset_j);

  const Eigen::Vector2d now_i = seed_a.states.front().position();
  const Eigen::Vector2d now_j = seed_b.states.front().position();
  e.rows = Matrix::Zero(Np, 3 * Np);
  e.bounds.resize(Np);
  for (int k = 1; k <= Np; ++k) {
    const Eigen::Vector2d pi0 = seed_a.states[static_cast<std::size_t>(k)].position();
    const Eigen::Vector2d pj0 = seed_b.states[static_cast<std::size_t>(k)].position();
    e.seed_i.push_back(pi0);
    e.seed_j.push_back(pj0);
    const CollisionHalfspace hs = linearize_collision_or_recover(pi0, pj0, d_safe, now_i, now_j);
    e.halfspaces.push_back(hs);
    // n^T (P_i u_i + g_i - P_j u_j - g_j) + s >= offset
    const auto Pi = e.position_map_i.middleRows(2 * (k - 1), 2);
    const auto Pj = e.position_map_j.middleRows(2 * (k - 1), 2);
    const auto gi = e.position_offset_i.segment(2 * (k - 1), 2);
    const auto gj = e.position_offset_j.segment(2 * (k - 1), 2);
    e.rows.block(k - 1, 0, 1, Np) = -hs.normal.transpose() * Pi;
    e.rows.block(k - 1, Np, 1, Np) = hs.normal.transpose() * Pj;
    e.rows(k - 1, 2 * Np + (k - 1)) = -1.0;
    e.bounds(k - 1) = hs.normal.dot(gi - gj) - hs.offset;
  }
  return e;
}

/// Edge step QP over (u_i^e, u_j^e, s).
inline DenseQp build_edge(const EdgeProblem & e, const Vector & z_i, const Vector & z_j,
  const Vector & lambda_i, const Vector & lambda_j, double rho)
{
  const int Np = e.horizon;
  if (!(rho > 0.0)) { throw ParameterError("rho must be > 0"); }
  if (z_i.size() != Np || z_j.size() != Np || lambda_i.size() != Np || lambda_j.size() != Np) {
    throw DimensionError("edge consensus vectors must have Np entries");
  }
  Matrix H = Matrix::Zero(3 * Np, 3 * Np);
  H.diagonal().head(2 * Np).setConstant(rho);
  Vector f(3 * Np);
  f.head(Np) = rho * (lambda_i - z_i);
  f.segment(Np, Np) = rho * (lambda_j - z_j);
  f.tail(Np).setConstant(e.slack_penalty);
  Vector lb(3 * Np);
  Vector ub(3 * Np);
  lb << Vector::Constant(Np, e.steer_min_i), Vector::Constant(Np, e.steer_min_j), Vector::Zero(Np);
  ub << Vector::Constant(Np, e.steer_max_i), Vector::Constant(Np, e.steer_max_j),
    Vector::Constant(Np, kInf);
  return DenseQp(std::move(H), std::move(f), e.rows, e.bounds, std::move(lb), std::move(ub));
}

/// All subproblems of one receding-horizon cycle, convexified at the seeds.
struct ConvexifiedProblem
{
  int horizon{0};
  std::vector<LocalProblem> locals{};
  std::vector<EdgeProblem> edges{};

  std::size_t num_vehicles() const noexcept { return locals.size(); }
  std::size_t num_edges() const noexcept { return edges.size(); }

  /// Incident edge indices per vehicle, ascending.
  std::vector<std::vector<std::size_t>> incidence() const
  {
    std::vector<std::vector<std::size_t>> inc(locals.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
      inc[edges[e].i].push_back(e);
      inc[edges[e].j].push_back(e);
    }
    return inc;
  }
};

/// Rotate reference headings by multiples of 2 pi to lie within pi of `seed`.
inline void align_reference_headings(Vector & reference, const HorizonTrajectory & seed)
{
  const int Np = seed.horizon();
  for (int k = 0; k < Np; ++k) {
    const double target = seed.states[static_cast<std::size_t>(k + 1)].theta;
    reference(3 * k + 2) = target + normalize_angle(reference(3 * k + 2) - target);
  }
}

/**
 * @brief Convexify one cycle: linearize dynamics along each seed, condense,
 * build every local problem and one edge problem per graph edge.
 *
 * `specs`, `seeds` and `references` are indexed like the graph nodes.
 */
inline ConvexifiedProblem convexify(std::span<const VehicleSpec> specs,
  std::span<const HorizonTrajectory> seeds, std::span<const Vector> references,
  const ConstraintGraph & graph, const CostWeights & weights, double slack_penalty)
{
  const std::size_t N = specs.size();
  if (seeds.size() != N || references.size() != N || graph.num_nodes() != N) {
    throw DimensionError("convexify: specs, seeds, references and graph disagree in size");
  }
  ConvexifiedProblem out;
  out.horizon = N > 0 ? seeds[0].horizon() : 0;
  out.locals.reserve(N);
  for (std::size_t v = 0; v < N; ++v) {
    const auto & spec = specs[v];
    if (graph.nodes()[v] != spec.id) { throw ScenarioError("graph node order differs from specs"); }
    const auto models = linearize(seeds[v], spec.speed, spec.wheelbase);
    Vector ref = references[v];
    align_reference_headings(ref, seeds[v]);
    out.locals.push_back(make_local_problem(spec.id, condense(models, seeds[v].states.front()),
      std::move(ref), weights, spec.steer_min, spec.steer_max, spec.position_bounds,
      static_cast<int>(graph.incident_edges(v).size()), seeds[v].states.front()));
  }
  out.edges.reserve(graph.num_edges());
  for (const auto & ge : graph.edges()) {
    out.edges.push_back(make_edge_problem(ge.ia, ge.ib, out.locals[ge.ia], out.locals[ge.ib],
      seeds[ge.ia], seeds[ge.ib], graph.d_safe(), slack_penalty));
  }
  return out;
}

/// Objective of the convexified centralized problem at a joint steering choice,
/// with each edge slack at its minimal value.
inline double centralized_objective(const ConvexifiedProblem & p, std::span<const Vector> controls)
{
  if (controls.size() != p.num_vehicles()) { throw DimensionError("one control vector per vehicle"); }
  double J = 0.0;
  for (std::size_t v = 0; v < p.locals.size(); ++v) { J += p.locals[v].objective(controls[v]); }
  for (const auto & e : p.edges) { J += e.penalty(controls[e.i], controls[e.j]); }
  return J;
}

/**
 * @brief Single QP over [u_1 .. u_N, s_1 .. s_M]: all tracking costs, steering
 * and road limits, and every edge's softened collision halfspaces.
 *
 * Its objective differs from centralized_objective() by the sum of the local
 * constants (see centralized_constant()).
 */
inline DenseQp build_centralized(const ConvexifiedProblem & p)
{
  const Eigen::Index Np = p.horizon;
  const auto N = static_cast<Eigen::Index>(p.num_vehicles());
  const auto M = static_cast<Eigen::Index>(p.num_edges());
  const Eigen::Index n = N * Np + M * Np;

  Eigen::Index road_rows = 0;
  for (const auto & l : p.locals) { road_rows += l.road_rows.rows(); }
  const Eigen::Index m = road_rows + M * Np;

  Matrix H = Matrix::Zero(n, n);
  Vector f = Vector::Zero(n);
  Matrix G = Matrix::Zero(m, n);
  Vector h = Vector::Zero(m);
  Vector lb = Vector::Constant(n, -kInf);
  Vector ub = Vector::Constant(n, kInf);

  Eigen::Index row = 0;
  for (Eigen::Index v = 0; v < N; ++v) {
    const auto & l = p.locals[static_cast<std::size_t>(v)];
    H.block(v * Np, v * Np, Np, Np) = l.hessian;
    f.segment(v * Np, Np) = l.gradient;
    lb.segment(v * Np, Np).setConstant(l.steer_min);
    ub.segment(v * Np, Np).setConstant(l.steer_max);
    const Eigen::Index r = l.road_rows.rows();
    G.block(row, v * Np, r, Np) = l.road_rows;
    h.segment(row, r) = l.road_bounds;
    row += r;
  }
  for (Eigen::Index e = 0; e < M; ++e) {
    const auto & ep = p.edges[static_cast<std::size_t>(e)];
    const Eigen::Index si = N * Np + e * Np;
    G.block(row, static_cast<Eigen::Index>(ep.i) * Np, Np, Np) = ep.rows.leftCols(Np);
    G.block(row, static_cast<Eigen::Index>(ep.j) * Np, Np, Np) = ep.rows.middleCols(Np, Np);
    G.block(row, si, Np, Np) = ep.rows.rightCols(Np);
    h.segment(row, Np) = ep.bounds;
    f.segment(si, Np).setConstant(ep.slack_penalty);
    lb.segment(si, Np).setZero();
    row += Np;
  }
  return DenseQp(std::move(H), std::move(f), std::move(G), std::move(h), std::move(lb),
    std::move(ub));
}

inline double centralized_constant(const ConvexifiedProblem & p)
{
  double c = 0.0;
  for (const auto & l : p.locals) { c += l.constant; }
  return c;
}

/// Split a centralized solution vector into per-vehicle steering sequences.
inline std::vector<Vector> split_controls(const ConvexifiedProblem & p, const Vector & x)
{
  std::vector<Vector> out;
  const Eigen::Index Np = p.horizon;
  for (std::size_t v = 0; v < p.num_vehicles(); ++v) {
    out.push_back(x.segment(static_cast<Eigen::Index>(v) * Np, Np));
  }
  return out;
}

}  // namespace coopadmm

#endif  // COOPADMM_SUBPROBLEMS_HPP
