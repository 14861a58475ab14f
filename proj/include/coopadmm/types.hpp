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

#ifndef COOPADMM_TYPES_HPP
#define COOPADMM_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace coopadmm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VehicleId = int;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = std::numbers::pi;

/// Base class of every error thrown by this library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A numeric parameter is out of its admissible range.
class ParameterError : public Error
{
public:
  using Error::Error;
};

/// The scenario (vehicle set, paths, bounds) is inconsistent.
class ScenarioError : public Error
{
public:
  using Error::Error;
};

/// A scenario document could not be parsed; `field()` names the offending key.
class ParseError : public ScenarioError
{
public:
  ParseError(std::string field, const std::string & message)
      : ScenarioError(message), field_(std::move(field))
  {}
  const std::string & field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Unknown vehicle id.
class LookupError : public Error
{
public:
  using Error::Error;
};

/// Input outside the domain of a model (e.g. steering at the tan singularity).
class DomainError : public Error
{
public:
  using Error::Error;
};

/// Vectors or matrices of incompatible shape.
class DimensionError : public Error
{
public:
  using Error::Error;
};

/// NaN/Inf appeared inside an iterative method.
class NumericalError : public Error
{
public:
  NumericalError(const std::string & message, int iteration)
      : Error(message), iteration_(iteration)
  {}
  int iteration() const noexcept { return iteration_; }

private:
  int iteration_;
};

/// Wrap an angle to (-pi, pi].
inline double normalize_angle(double a)
{
  if (a > -kPi && a <= kPi) { return a; }
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) { a += 2.0 * kPi; }
  return a;
}

/// Pose of the rear-axle centre. Heading is positive counter-clockwise.
struct VehicleState
{
  double rx{0.0};
  double ry{0.0};
  double theta{0.0};

  Eigen::Vector3d as_vector() const { return {rx, ry, theta}; }
  Eigen::Vector2d position() const { return {rx, ry}; }
  static VehicleState from_vector(const Eigen::Vector3d & x) { return {x(0), x(1), x(2)}; }

  friend bool operator==(const VehicleState &, const VehicleState &) = default;
};

struct Waypoint
{
  double x{0.0};
  double y{0.0};
  double heading{0.0};

  friend bool operator==(const Waypoint &, const Waypoint &) = default;
};

/// Axis-aligned rectangle; infinite sides are allowed.
struct Box
{
  double x_min{-kInf};
  double x_max{kInf};
  double y_min{-kInf};
  double y_max{kInf};

  bool contains(double x, double y) const
  {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }

  friend bool operator==(const Box &, const Box &) = default;
};

/// Static parameters of one vehicle. Speed is SI (m/s) and constant over a horizon.
struct VehicleSpec
{
  VehicleId id{0};
  double wheelbase{2.4};
  double speed{10.0};
  double steer_min{-0.5};
  double steer_max{0.5};
  Box position_bounds{};
  std::vector<Waypoint> reference_path{};
  VehicleState initial_state{};

  /// Throws ScenarioError naming the first violated invariant.
  void validate() const
  {
    const auto fail = [this](const std::string & what) {
      throw ScenarioError("vehicle " + std::to_string(id) + ": " + what);
    };
    if (!(wheelbase > 0.0) || !std::isfinite(wheelbase)) { fail("wheelbase must be > 0"); }
    if (!(speed > 0.0) || !std::isfinite(speed)) { fail("speed must be > 0"); }
    if (!(steer_min < steer_max)) { fail("steer_min must be < steer_max"); }
    if (steer_min <= -kPi / 2 || steer_max >= kPi / 2) {
      fail("steering bounds must lie strictly inside (-pi/2, pi/2)");
    }
    if (!(position_bounds.x_min < position_bounds.x_max) ||
        !(position_bounds.y_min < position_bounds.y_max)) {
      fail("position bounds are empty");
    }
    if (reference_path.empty()) { fail("reference path is empty"); }
    for (const auto & w : reference_path) {
      if (!std::isfinite(w.x) || !std::isfinite(w.y)) { fail("reference waypoint is not finite"); }
    }
    if (!position_bounds.contains(initial_state.rx, initial_state.ry)) {
      fail("initial state lies outside the position bounds");
    }
  }

  friend bool operator==(const VehicleSpec &, const VehicleSpec &) = default;
};

}  // namespace coopadmm

#endif  // COOPADMM_TYPES_HPP
