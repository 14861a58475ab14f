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

#ifndef COOPADMM_SCENARIO_HPP
#define COOPADMM_SCENARIO_HPP

#include "coopadmm/types.hpp"

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace coopadmm {

/// Unordered vehicle pair, stored with `a < b`. `ia`/`ib` index the node list.
struct GraphEdge
{
  VehicleId a{};
  VehicleId b{};
  std::size_t ia{};
  std::size_t ib{};

  friend bool operator==(const GraphEdge &, const GraphEdge &) = default;
};

/**
 * @brief Proximity constraint topology.
 *
 * Vehicles are nodes; a pair is an edge iff the rear-axle points are no farther
 * apart than the perception distance when the graph is built. The graph is then
 * frozen for the prediction horizon.
 */
class ConstraintGraph
{
public:
  ConstraintGraph() = default;

  ConstraintGraph(std::vector<VehicleId> nodes, std::vector<GraphEdge> edges, double d_perc,
    double d_safe)
      : nodes_(std::move(nodes)), edges_(std::move(edges)), d_perc_(d_perc), d_safe_(d_safe)
  {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!index_.emplace(nodes_[i], i).second) {
        throw ScenarioError("duplicate vehicle id " + std::to_string(nodes_[i]));
      }
    }
    adjacency_.resize(nodes_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      adjacency_[edges_[e].ia].push_back(e);
      adjacency_[edges_[e].ib].push_back(e);
    }
  }

  const std::vector<VehicleId> & nodes() const noexcept { return nodes_; }
  const std::vector<GraphEdge> & edges() const noexcept { return edges_; }
  double d_perc() const noexcept { return d_perc_; }
  double d_safe() const noexcept { return d_safe_; }
  std::size_t num_nodes() const noexcept { return nodes_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  std::size_t index_of(VehicleId id) const
  {
    const auto it = index_.find(id);
    if (it == index_.end()) { throw LookupError("unknown vehicle id " + std::to_string(id)); }
    return it->second;
  }

  bool contains(VehicleId id) const { return index_.contains(id); }

  /// Edge indices incident to the node at `index`, in ascending order.
  const std::vector<std::size_t> & incident_edges(std::size_t index) const
  {
    return adjacency_.at(index);
  }

  /// Ids adjacent to `id`, sorted ascending.
  std::vector<VehicleId> neighbors(VehicleId id) const
  {
    const std::size_t i = index_of(id);
    std::vector<VehicleId> out;
    out.reserve(adjacency_[i].size());
    for (const std::size_t e : adjacency_[i]) {
      out.push_back(edges_[e].a == id ? edges_[e].b : edges_[e].a);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  std::size_t degree(VehicleId id) const { return adjacency_[index_of(id)].size(); }

  bool has_edge(VehicleId a, VehicleId b) const
  {
    if (!contains(a) || !contains(b)) { return false; }
    const auto nb = neighbors(a);
    return std::binary_search(nb.begin(), nb.end(), b);
  }

  std::size_t max_degree() const
  {
    std::size_t m = 0;
    for (const auto & adj : adjacency_) { m = std::max(m, adj.size()); }
    return m;
  }

private:
  std::vector<VehicleId> nodes_;
  std::vector<GraphEdge> edges_;
  double d_perc_{0.0};
  double d_safe_{0.0};
  std::unordered_map<VehicleId, std::size_t> index_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

/// Connect every pair whose rear-axle distance is <= d_perc. Edges come out
/// ordered by node index pair.
inline ConstraintGraph build_constraint_graph(std::span<const VehicleId> ids,
  std::span<const VehicleState> states, double d_perc, double d_safe)
{
  if (!(d_safe > 0.0) || !(d_perc > 0.0)) {
    throw ParameterError("d_perc and d_safe must be positive");
  }
  if (d_perc < d_safe) { throw ParameterError("d_perc must be >= d_safe"); }
  if (ids.size() != states.size()) { throw DimensionError("ids and states differ in length"); }
  if (ids.empty()) { throw ScenarioError("at least one vehicle is required"); }

  std::vector<GraphEdge> edges;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const double dist = (states[i].position() - states[j].position()).norm();
      if (dist <= d_perc) {
        if (ids[i] < ids[j]) {
          edges.push_back({ids[i], ids[j], i, j});
        } else {
          edges.push_back({ids[j], ids[i], j, i});
        }
      }
    }
  }
  return ConstraintGraph({ids.begin(), ids.end()}, std::move(edges), d_perc, d_safe);
}

/**
 * @brief Placement of each cycle's reference window along the path.
 *
 * projection: starts at the arc length closest to the current position.
 * clock: starts at the initial projection plus speed times elapsed time.
 */
enum class ReferenceAnchor { projection, clock };

inline const char * to_string(ReferenceAnchor a)
{
  return a == ReferenceAnchor::clock ? "clock" : "projection";
}

/// Global parameters of a scenario. SI units throughout.

struct ScenarioParams
{
  double Ts{0.1};
  int Np{15};
  double d_safe{5.0};
  std::optional<double> d_perc{};
  double q_position{1.0};
  double q_heading{1.0};
  double r_weight{0.1};
  double rho0{1.0};
  double eps_abs{0.01};
  double eps_rel{0.01};
  int max_iters{200};
  double sim_duration{20.0};
  double slack_penalty{1e4};
  ReferenceAnchor reference_anchor{ReferenceAnchor::projection};

  friend bool operator==(const ScenarioParams &, const ScenarioParams &) = default;
};

struct Scenario
{
  std::string name{"scenario"};
  ScenarioParams params{};
  std::vector<VehicleSpec> vehicles{};

  double max_speed() const
  {
    double v = 0.0;
    for (const auto & s : vehicles) { v = std::max(v, s.speed); }
    return v;
  }

  /// Explicit d_perc if given, else d_safe + 2 * v_max * Np * Ts.
  double perception_distance() const
  {
    if (params.d_perc) { return *params.d_perc; }
    return params.d_safe + 2.0 * max_speed() * params.Np * params.Ts;
  }

  std::vector<VehicleId> ids() const
  {
    std::vector<VehicleId> out;
    out.reserve(vehicles.size());
    for (const auto & s : vehicles) { out.push_back(s.id); }
    return out;
  }

  void validate() const
  {
    if (vehicles.empty()) { throw ScenarioError("scenario has no vehicles"); }
    const auto & p = params;
    if (!(p.Ts > 0.0)) { throw ParameterError("Ts must be > 0"); }
    if (p.Np < 1) { throw ParameterError("Np must be >= 1"); }
    if (!(p.d_safe > 0.0)) { throw ParameterError("d_safe must be > 0"); }
    if (p.d_perc && *p.d_perc < p.d_safe) { throw ParameterError("d_perc must be >= d_safe"); }
    if (p.q_position < 0.0 || p.q_heading < 0.0 || p.r_weight < 0.0) {
      throw ParameterError("cost weights must be >= 0");
    }
    if (p.q_position == 0.0 && p.q_heading == 0.0 && p.r_weight == 0.0) {
      throw ParameterError("at least one cost weight must be positive");
    }
    if (!(p.rho0 > 0.0)) { throw ParameterError("rho0 must be > 0"); }
    if (!(p.eps_abs > 0.0) || p.eps_rel < 0.0) { throw ParameterError("invalid tolerances"); }
    if (p.max_iters < 1) { throw ParameterError("max_iters must be >= 1"); }
    if (!(p.sim_duration > 0.0)) { throw ParameterError("sim_duration must be > 0"); }
    if (!(p.slack_penalty > 0.0)) { throw ParameterError("slack_penalty must be > 0"); }
    std::vector<VehicleId> seen;
    for (const auto & v : vehicles) {
      v.validate();
      if (std::find(seen.begin(), seen.end(), v.id) != seen.end()) {
        throw ScenarioError("duplicate vehicle id " + std::to_string(v.id));
      }
      seen.push_back(v.id);
    }
  }

  friend bool operator==(const Scenario &, const Scenario &) = default;
};

/// Fill waypoint headings with the tangent of the outgoing segment (last
/// waypoint takes the incoming one). A single waypoint keeps its heading.
inline void assign_tangent_headings(std::vector<Waypoint> & path)
{
  if (path.size() < 2) { return; }
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const double dx = path[k + 1].x - path[k].x;
    const double dy = path[k + 1].y - path[k].y;
    path[k].heading = (dx == 0.0 && dy == 0.0) ? (k > 0 ? path[k - 1].heading : 0.0)
                                               : std::atan2(dy, dx);
  }
  path.back().heading = path[path.size() - 2].heading;
}

}  // namespace coopadmm

#endif  // COOPADMM_SCENARIO_HPP
