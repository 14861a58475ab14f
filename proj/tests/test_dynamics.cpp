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

#include <coopadmm/dynamics.hpp>

#include <gtest/gtest.h>

#include <random>

#include "support/rk4.hpp"

using namespace coopadmm;

TEST(Dynamics, StraightStep)
{
  const VehicleState x = step_nonlinear({0.0, 0.0, 0.0}, 0.0, 10.0, 2.4, 0.1);
  EXPECT_DOUBLE_EQ(x.rx, 1.0);
  EXPECT_DOUBLE_EQ(x.ry, 0.0);
  EXPECT_DOUBLE_EQ(x.theta, 0.0);
}

TEST(Dynamics, HeadingAdvanceAtFortyKmh)
{
  const double v = 40.0 / 3.6;
  const VehicleState x = step_nonlinear({0.0, 0.0, 0.0}, 0.1, v, 2.4, 0.1);
  EXPECT_NEAR(x.theta, v / 2.4 * std::tan(0.1) * 0.1, 1e-15);
}

TEST(Dynamics, SteeringSingularityRejected)
{
  EXPECT_THROW(step_nonlinear({}, kPi / 2, 10.0, 2.4, 0.1), DomainError);
  EXPECT_THROW(step_nonlinear({}, -2.0, 10.0, 2.4, 0.1), DomainError);
  EXPECT_THROW(step_nonlinear({}, 0.0, 10.0, 0.0, 0.1), ParameterError);
  EXPECT_THROW(step_nonlinear({}, 0.0, 10.0, 2.4, 0.0), ParameterError);
  HorizonTrajectory seed{{VehicleState{}, VehicleState{}}, {1.6}, 0.1};
  EXPECT_THROW(linearize(seed, 10.0, 2.4), DomainError);
}

TEST(Dynamics, EulerStepIsFirstOrderAccurate)
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-50.0, 50.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> steer(-0.4, 0.4);
  std::uniform_real_distribution<double> speed(8.0, 16.0);
  for (int trial = 0; trial < 100; ++trial) {
    const VehicleState x{pos(rng), pos(rng), ang(rng)};
    const double delta = steer(rng);
    const double v = speed(rng);
    for (const double Ts : {0.1, 0.05}) {
      const Eigen::Vector3d exact = oracle::rk4_step(x.as_vector(), delta, v, 2.4, Ts);
      const VehicleState euler = step_nonlinear(x, delta, v, 2.4, Ts);
      const Eigen::Vector2d dp = euler.position() - exact.head<2>();
      const double dtheta = normalize_angle(euler.theta - exact(2));
      // Local truncation error of forward Euler: (Ts^2 / 2) |x''| with |x''| <= v * |theta'|.
      const double bound = 0.5 * Ts * Ts * v * (v / 2.4) * std::tan(0.4) * 1.01;
      EXPECT_LE(dp.norm(), bound);
      EXPECT_LE(std::abs(dtheta), 1e-12);  // heading rate is constant in a step
    }
  }
}

TEST(Dynamics, HeadingStaysNormalized)
{
  VehicleState x{0.0, 0.0, 3.1};
  for (int k = 0; k < 200; ++k) {
    x = step_nonlinear(x, 0.45, 14.0, 2.4, 0.1);
    EXPECT_GT(x.theta, -kPi);
    EXPECT_LE(x.theta, kPi);
  }
}

TEST(Dynamics, InputMatrixAtStraightSeed)
{
  const LinearModel m = linearize_step({0.0, 0.0, 0.0}, 0.0, 10.0, 2.4, 0.1);
  EXPECT_DOUBLE_EQ(m.B(0), 0.0);
  EXPECT_DOUBLE_EQ(m.B(1), 0.0);
  EXPECT_NEAR(m.B(2), 10.0 / 2.4 * 0.1, 1e-15);
}

TEST(Dynamics, ExactAtExpansionPoint)
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> steer(-0.4, 0.4);
  for (int trial = 0; trial < 200; ++trial) {
    const VehicleState x{10.0 * ang(rng), 10.0 * ang(rng), ang(rng)};
    const double d = steer(rng);
    const LinearModel m = linearize_step(x, d, 12.5, 2.4, 0.1);
    const Eigen::Vector3d lin = m.apply(x.as_vector(), d);
    const Eigen::Vector3d nl = step_nonlinear(x, d, 12.5, 2.4, 0.1).as_vector();
    EXPECT_LE((lin - nl).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Dynamics, JacobiansMatchFiniteDifferences)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> steer(-0.4, 0.4);
  std::uniform_real_distribution<double> speed(8.0, 16.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const VehicleState x{20.0 * ang(rng), 20.0 * ang(rng), ang(rng)};
    const double d = steer(rng);
    const double v = speed(rng);
    const LinearModel m = linearize_step(x, d, v, 2.4, 0.1);
    Eigen::Matrix<double, 3, 4> analytic;
    analytic << m.A, m.B;
    const auto fd = oracle::finite_difference_jacobian(x, d, v, 2.4, 0.1);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        const double err = std::abs(analytic(r, c) - fd(r, c)) / std::max(1.0, std::abs(fd(r, c)));
        EXPECT_LE(err, 1e-5) << r << "," << c;
      }
    }
  }
}

TEST(Dynamics, CondenseSingleStep)
{
  const VehicleState x0{1.0, 2.0, 0.3};
  const LinearModel m = linearize_step(x0, 0.1, 12.0, 2.4, 0.1);
  const std::vector<LinearModel> models{m};
  const CondensedPrediction c = condense(models, x0);
  EXPECT_LE((c.Phi - Matrix(m.B)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((c.gamma - (m.A * x0.as_vector() + m.c)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Dynamics, CondensedEqualsLinearRollout)
{
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> steer(-0.4, 0.4);
  const int Np = 15;
  std::vector<double> seed_u(Np);
  for (auto & u : seed_u) { u = steer(rng); }
  const VehicleState x0{-3.0, 4.0, 2.9};
  const HorizonTrajectory seed = rollout(x0, seed_u, 13.0, 2.4, 0.1);
  const auto models = linearize(seed, 13.0, 2.4);
  const CondensedPrediction c = condense(models, x0);

  // u = 0 and 100 random sequences against step-by-step rollout of the linear models.
  for (int trial = 0; trial <= 100; ++trial) {
    Vector u = Vector::Zero(Np);
    if (trial > 0) {
      for (int k = 0; k < Np; ++k) { u(k) = steer(rng); }
    }
    const Vector stacked = c.predict(u);
    Eigen::Vector3d x = x0.as_vector();
    for (int k = 0; k < Np; ++k) {
      x = models[static_cast<std::size_t>(k)].apply(x, u(k));
      EXPECT_LE((stacked.segment<3>(3 * k) - x).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
  // At the seed the condensed map reproduces the nonlinear seed states.
  const Vector at_seed = c.predict(seed.control_vector());
  for (int k = 0; k < Np; ++k) {
    const auto & s = seed.states[static_cast<std::size_t>(k + 1)];
    EXPECT_NEAR(at_seed(3 * k), s.rx, 1e-9);
    EXPECT_NEAR(at_seed(3 * k + 1), s.ry, 1e-9);
    EXPECT_NEAR(normalize_angle(at_seed(3 * k + 2) - s.theta), 0.0, 1e-9);
  }
}

TEST(Dynamics, FirstStepPositionIndependentOfInput)
{
  const HorizonTrajectory seed = rollout({0.0, 0.0, 0.4}, std::vector<double>(5, 0.2), 12.0, 2.4, 0.1);
  const CondensedPrediction c = condense(linearize(seed, 12.0, 2.4), seed.states.front());
  EXPECT_EQ(c.position_row(1, 0).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(c.position_row(1, 1).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(c.position_row(2, 1).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Dynamics, RolloutShape)
{
  const std::vector<double> u{0.1, -0.1, 0.0};
  const HorizonTrajectory t = rollout({}, u, 10.0, 2.4, 0.1);
  EXPECT_EQ(t.horizon(), 3);
  EXPECT_EQ(t.states.size(), 4u);
  EXPECT_EQ(t.states[2], step_nonlinear(t.states[1], -0.1, 10.0, 2.4, 0.1));
  EXPECT_THROW(condense(std::vector<LinearModel>{}, VehicleState{}), DimensionError);
}
