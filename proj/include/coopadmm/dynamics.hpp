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

#ifndef COOPADMM_DYNAMICS_HPP
#define COOPADMM_DYNAMICS_HPP

/**
 * @file
 * @brief Kinematic bicycle model at constant speed.
 *
 * State is (r_x, r_y, theta) of the rear axle, input is the steering angle.
 * Continuous model
 *   r_x' = v cos(theta),  r_y' = v sin(theta),  theta' = (v / L) tan(delta),
 * discretised with forward Euler. Linearisation is time varying: one affine
 * model per step of a seed trajectory.
 */

#include "coopadmm/types.hpp"

#include <span>
#include <vector>

namespace coopadmm {

inline void check_steering_domain(double delta)
{
  if (!(std::abs(delta) < kPi / 2)) {
    throw DomainError("steering angle " + std::to_string(delta) + " is outside (-pi/2, pi/2)");
  }
}

/// One forward-Euler step of the bicycle model. Heading is renormalised.
inline VehicleState step_nonlinear(const VehicleState & x, double delta, double v, double L,
  double Ts)
{
  if (!(Ts > 0.0)) { throw ParameterError("Ts must be > 0"); }
  if (!(L > 0.0)) { throw ParameterError("wheelbase must be > 0"); }
  check_steering_domain(delta);
  return {
    x.rx + Ts * v * std::cos(x.theta),
    x.ry + Ts * v * std::sin(x.theta),
    normalize_angle(x.theta + Ts * (v / L) * std::tan(delta)),
  };
}

/// x_{k+1} = A x_k + B u_k + c, valid around (x_bar, u_bar).
struct LinearModel
{
  Eigen::Matrix3d A{Eigen::Matrix3d::Identity()};
  Eigen::Vector3d B{Eigen::Vector3d::Zero()};
  Eigen::Vector3d c{Eigen::Vector3d::Zero()};
  VehicleState x_bar{};
  double u_bar{0.0};

  Eigen::Vector3d apply(const Eigen::Vector3d & x, double u) const { return A * x + B * u + c; }
};

/// Predicted (or seed) trajectory over a horizon: Np+1 states, Np controls.
struct HorizonTrajectory
{
  std::vector<VehicleState> states{};
  std::vector<double> controls{};
  double Ts{0.1};

  int horizon() const noexcept { return static_cast<int>(controls.size()); }

  Vector control_vector() const
  {
    return Eigen::Map<const Vector>(controls.data(), static_cast<Eigen::Index>(controls.size()));
  }
};

/// Nonlinear rollout of `controls` from `x0`.
inline HorizonTrajectory rollout(const VehicleState & x0, std::span<const double> controls,
  double v, double L, double Ts)
{
  HorizonTrajectory traj;
  traj.Ts = Ts;
  traj.controls.assign(controls.begin(), controls.end());
  traj.states.reserve(controls.size() + 1);
  traj.states.push_back(x0);
  for (const double u : controls) {
    traj.states.push_back(step_nonlinear(traj.states.back(), u, v, L, Ts));
  }
  return traj;
}

/// First-order Taylor model of step_nonlinear about (x_bar, u_bar).
inline LinearModel linearize_step(const VehicleState & x_bar, double u_bar, double v, double L,
  double Ts)
{
  check_steering_domain(u_bar);
  LinearModel m;
  m.x_bar = x_bar;
  m.u_bar = u_bar;
  const double s = std::sin(x_bar.theta);
  const double c = std::cos(x_bar.theta);
  const double cd = std::cos(u_bar);
  m.A << 1.0, 0.0, -Ts * v * s,
         0.0, 1.0, Ts * v * c,
         0.0, 0.0, 1.0;
  m.B << 0.0, 0.0, Ts * v / (L * cd * cd);
  // c absorbs the heading wrap of the nonlinear step so the expansion point is exact.
  const Eigen::Vector3d f_bar = step_nonlinear(x_bar, u_bar, v, L, Ts).as_vector();
  m.c = f_bar - m.A * x_bar.as_vector() - m.B * u_bar;
  return m;
}

/// One linear model per step of the seed.
inline std::vector<LinearModel> linearize(const HorizonTrajectory & seed, double v, double L)
{
  if (seed.states.size() != seed.controls.size() + 1) {
    throw DimensionError("seed needs exactly one more state than controls");
  }
  std::vector<LinearModel> models;
  models.reserve(seed.controls.size());
  for (std::size_t k = 0; k < seed.controls.size(); ++k) {
    models.push_back(linearize_step(seed.states[k], seed.controls[k], v, L, seed.Ts));
  }
  return models;
}

/**
 * @brief Stacked affine prediction x = Phi u + gamma.
 *
 * Rows 3k..3k+2 hold (r_x, r_y, theta) at step k+1; the initial state is not
 * part of the stack.
 */
struct CondensedPrediction
{
  Matrix Phi{};
  Vector gamma{};

  int horizon() const noexcept { return static_cast<int>(Phi.cols()); }

  Vector predict(const Vector & u) const { return Phi * u + gamma; }

  /// Row of Phi for r_x (component 0) or r_y (component 1) at step k (1-based).
  auto position_row(int k, int component) const { return Phi.row(3 * (k - 1) + component); }
  double position_offset(int k, int component) const { return gamma(3 * (k - 1) + component); }
};

inline CondensedPrediction condense(std::span<const LinearModel> models, const VehicleState & x0)
{
  const auto Np = static_cast<Eigen::Index>(models.size());
  if (Np == 0) { throw DimensionError("condense needs at least one model"); }
  CondensedPrediction out;
  out.Phi = Matrix::Zero(3 * Np, Np);
  out.gamma = Vector::Zero(3 * Np);

  Eigen::Vector3d g = x0.as_vector();
  Matrix block = Matrix::Zero(3, Np);  // d x_k / d u
  for (Eigen::Index k = 0; k < Np; ++k) {
    const auto & m = models[static_cast<std::size_t>(k)];
    block = (m.A * block).eval();
    block.col(k) += m.B;
    g = m.A * g + m.c;
    out.Phi.middleRows(3 * k, 3) = block;
    out.gamma.segment(3 * k, 3) = g;
  }
  return out;
}

}  // namespace coopadmm

#endif  // COOPADMM_DYNAMICS_HPP
