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

#ifndef COOPADMM_TESTS_QP_ORACLE_HPP
#define COOPADMM_TESTS_QP_ORACLE_HPP

// Exhaustive active-set enumeration for small strictly convex QPs. Every subset
// of at most n constraint rows is treated as active; the equality-constrained
// KKT system is solved and the feasible candidate of least objective is kept.

#include <coopadmm/qp.hpp>

#include <optional>
#include <random>
#include <vector>

namespace coopadmm::oracle {

struct OracleResult
{
  Vector u;
  double objective{kInf};
  Vector multipliers;  // layout as QpSolution
};

inline std::optional<OracleResult> enumerate_active_sets(const DenseQp & qp, double feas_tol = 1e-9)
{
  const auto n = qp.size();
  const auto m = qp.num_inequalities();
  // Rows a^T u <= b; slot indexes the multiplier layout.
  struct Row { Vector a; double b; Eigen::Index slot; };
  std::vector<Row> rows;
  for (Eigen::Index r = 0; r < m; ++r) { rows.push_back({qp.G.row(r).transpose(), qp.h(r), r}); }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isfinite(qp.lb(i))) { rows.push_back({-Vector::Unit(n, i), -qp.lb(i), m + i}); }
    if (std::isfinite(qp.ub(i))) { rows.push_back({Vector::Unit(n, i), qp.ub(i), m + n + i}); }
  }
  const auto total = static_cast<int>(rows.size());

  std::optional<OracleResult> best;
  std::vector<int> active;
  const auto evaluate = [&] {
    const auto k = static_cast<Eigen::Index>(active.size());
    Matrix kkt = Matrix::Zero(n + k, n + k);
    Vector rhs(n + k);
    kkt.topLeftCorner(n, n) = qp.H;
    rhs.head(n) = -qp.f;
    for (Eigen::Index a = 0; a < k; ++a) {
      const auto & row = rows[static_cast<std::size_t>(active[static_cast<std::size_t>(a)])];
      kkt.block(n + a, 0, 1, n) = row.a.transpose();
      kkt.block(0, n + a, n, 1) = row.a;
      rhs(n + a) = row.b;
    }
    const Eigen::FullPivLU<Matrix> lu(kkt);
    if (!lu.isInvertible()) { return; }
    const Vector sol = lu.solve(rhs);
    const Vector u = sol.head(n);
    if (qp.max_violation(u) > feas_tol) { return; }
    const double obj = qp.objective(u);
    if (!best || obj < best->objective) {
      OracleResult res{u, obj, Vector::Zero(m + 2 * n)};
      for (Eigen::Index a = 0; a < k; ++a) {
        res.multipliers(rows[static_cast<std::size_t>(active[static_cast<std::size_t>(a)])].slot) =
          sol(n + a);
      }
      best = res;
    }
  };
  const auto recurse = [&](auto && self, int start) -> void {
    evaluate();
    if (static_cast<Eigen::Index>(active.size()) == n) { return; }
    for (int r = start; r < total; ++r) {
      active.push_back(r);
      self(self, r + 1);
      active.pop_back();
    }
  };
  recurse(recurse, 0);
  return best;
}

/// Random feasible strictly convex QP with n variables, m rows and a few finite bounds.
inline DenseQp random_strictly_convex_qp(std::mt19937_64 & rng, Eigen::Index n, Eigen::Index m)
{
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto randn = [&](Eigen::Index r, Eigen::Index c) {
    Matrix out(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) { out(i, j) = gauss(rng); }
    }
    return out;
  };
  const Matrix M = randn(n, n);
  Matrix H = M * M.transpose();
  H.diagonal().array() += 0.1 + unif(rng);
  const Vector f = 3.0 * randn(n, 1);
  const Vector u_feas = randn(n, 1);
  const Matrix G = randn(m, n);
  Vector h = G * u_feas;
  for (Eigen::Index r = 0; r < m; ++r) { h(r) += 0.5 * unif(rng); }
  Vector lb = Vector::Constant(n, -kInf);
  Vector ub = Vector::Constant(n, kInf);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = unif(rng);
    if (p < 0.25) { lb(i) = u_feas(i) - unif(rng); }
    else if (p < 0.5) { ub(i) = u_feas(i) + unif(rng); }
  }
  return DenseQp(H, f, G, h, lb, ub);
}

}  // namespace coopadmm::oracle

#endif  // COOPADMM_TESTS_QP_ORACLE_HPP
