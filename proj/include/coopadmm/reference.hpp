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

#ifndef COOPADMM_REFERENCE_HPP
#define COOPADMM_REFERENCE_HPP

/// @file
/// @brief Arc-length view of a reference polyline.

#include "coopadmm/types.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <vector>

namespace coopadmm {

struct PathProjection
{
  double arc_length{0.0};  ///< along the polyline, from its first waypoint
  double distance{0.0};    ///< to the closest point of the polyline
};

/// Polyline through the waypoints. Zero-length segments are dropped.
class ReferencePath
{
public:
  explicit ReferencePath(const std::vector<Waypoint> & waypoints)
  {
    if (waypoints.empty()) { throw ScenarioError("reference path is empty"); }
    points_.push_back(waypoints.front());
    cumulative_.push_back(0.0);
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
      const double dx = waypoints[i].x - points_.back().x;
      const double dy = waypoints[i].y - points_.back().y;
      const double len = std::hypot(dx, dy);
      if (len <= 0.0) { continue; }
      points_.push_back(waypoints[i]);
      cumulative_.push_back(cumulative_.back() + len);
    }
  }

  double length() const noexcept { return cumulative_.back(); }
  std::size_t num_segments() const noexcept { return points_.size() - 1; }

  /// Point and tangent heading at arc length s; clamped to the ends.
  Waypoint sample(double s) const
  {
    if (num_segments() == 0) { return points_.front(); }
    if (s <= 0.0) { return at(0, 0.0); }
    if (s >= length()) { return at(num_segments() - 1, 1.0); }
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    const std::size_t seg = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    const double t = (s - cumulative_[seg]) / (cumulative_[seg + 1] - cumulative_[seg]);
    return at(seg, t);
  }

  /// Closest point on the polyline (first one on ties).
  PathProjection project(double x, double y) const
  {
    if (num_segments() == 0) {
      return {0.0, std::hypot(x - points_.front().x, y - points_.front().y)};
    }
    PathProjection best{0.0, kInf};
    for (std::size_t seg = 0; seg < num_segments(); ++seg) {
      const Eigen::Vector2d a(points_[seg].x, points_[seg].y);
      const Eigen::Vector2d b(points_[seg + 1].x, points_[seg + 1].y);
      const Eigen::Vector2d ab = b - a;
      const double t = std::clamp((Eigen::Vector2d(x, y) - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
      const double d = (a + t * ab - Eigen::Vector2d(x, y)).norm();
      if (d < best.distance) {
        best = {cumulative_[seg] + t * (cumulative_[seg + 1] - cumulative_[seg]), d};
      }
    }
    return best;
  }

private:
  Waypoint at(std::size_t seg, double t) const
  {
    const auto & a = points_[seg];
    const auto & b = points_[seg + 1];
    return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), std::atan2(b.y - a.y, b.x - a.x)};
  }

  std::vector<Waypoint> points_{};
  std::vector<double> cumulative_{};
};

/// Stacked (x, y, heading) samples at arc lengths s_start + v k Ts, k = 1..Np.
inline Vector reference_window_at(const ReferencePath & path, double s_start, double v, int Np, double Ts)
{
  if (Np < 1 || !(Ts > 0.0)) { throw ParameterError("reference window needs Np >= 1 and Ts > 0"); }
  Vector ref(3 * Np);
  for (int k = 1; k <= Np; ++k) {
    const Waypoint w = path.sample(s_start + v * k * Ts);
    ref.segment<3>(3 * (k - 1)) << w.x, w.y, w.heading;
  }
  return ref;
}

/**
 * @brief Time-indexed window for the cycle at time t.
 *
 * Samples the path at arc length s0 + v (t + k Ts), where s0 is the projection
 * of the vehicle's initial position. Past the end, the terminal point is held.
 */
inline Vector reference_window(const VehicleSpec & spec, double t, int Np, double Ts)
{
  const ReferencePath path(spec.reference_path);
  const double s0 = path.project(spec.initial_state.rx, spec.initial_state.ry).arc_length;
  return reference_window_at(path, s0 + spec.speed * t, spec.speed, Np, Ts);
}

/// Window anchored at the projection of the current position instead of the clock.
inline Vector reference_window(const VehicleSpec & spec, const VehicleState & current, int Np, double Ts)
{
  const ReferencePath path(spec.reference_path);
  return reference_window_at(path, path.project(current.rx, current.ry).arc_length, spec.speed, Np, Ts);
}

}  // namespace coopadmm

#endif  // COOPADMM_REFERENCE_HPP
