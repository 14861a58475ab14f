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

#ifndef COOPADMM_QP_HPP
#define COOPADMM_QP_HPP

/**
 * @file
 * @brief Dense convex QP solver (Mehrotra predictor-corrector interior point).
 *
 * Solves
 *   min  0.5 u^T H u + f^T u
 *   s.t. G u <= h,  lb <= u <= ub
 * with H symmetric positive semidefinite. Storage is dense; constraint rows are
 * scanned once for their nonzero pattern so assembling C^T D C costs
 * sum(nnz_row^2) instead of m n^2.
 */

#include "coopadmm/types.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace coopadmm {

struct DenseQp
{
  Matrix H{};
  Vector f{};
  Matrix G{};
  Vector h{};
  Vector lb{};
  Vector ub{};

  DenseQp() = default;

  /// Validates shapes and bounds; H is replaced by its symmetric part.
  DenseQp(Matrix H_, Vector f_, Matrix G_, Vector h_, Vector lb_, Vector ub_)
      : H(std::move(H_)), f(std::move(f_)), G(std::move(G_)), h(std::move(h_)),
        lb(std::move(lb_)), ub(std::move(ub_))
  {
    const auto n = f.size();
    if (H.rows() != n || H.cols() != n) { throw DimensionError("H must be n x n"); }
    if (G.cols() != n && !(G.rows() == 0)) { throw DimensionError("G must have n columns"); }
    if (G.rows() == 0) { G.resize(0, n); }
    if (h.size() != G.rows()) { throw DimensionError("h must have one entry per row of G"); }
    if (lb.size() != n || ub.size() != n) { throw DimensionError("bounds must have length n"); }
    if (!H.allFinite() || !f.allFinite() || !G.allFinite() || !h.allFinite()) {
      throw ParameterError("QP data must be finite");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::isnan(lb(i)) || std::isnan(ub(i)) || lb(i) == kInf || ub(i) == -kInf) {
        throw ParameterError("invalid bound at index " + std::to_string(i));
      }
      if (lb(i) > ub(i)) { throw ParameterError("lb > ub at index " + std::to_string(i)); }
    }
    H = (0.5 * (H + H.transpose())).eval();
  }

  static DenseQp unconstrained(Matrix H_, Vector f_)
  {
    const auto n = f_.size();
    return DenseQp(std::move(H_), std::move(f_), Matrix(0, n), Vector(0),
      Vector::Constant(n, -kInf), Vector::Constant(n, kInf));
  }

  Eigen::Index size() const noexcept { return f.size(); }
  Eigen::Index num_inequalities() const noexcept { return G.rows(); }

  double objective(const Vector & u) const { return 0.5 * u.dot(H * u) + f.dot(u); }

  /// Largest violation of any constraint (0 when feasible).
  double max_violation(const Vector & u) const
  {
    double v = 0.0;
    if (G.rows() > 0) { v = std::max(v, (G * u - h).maxCoeff()); }
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      v = std::max({v, lb(i) - u(i), u(i) - ub(i)});
    }
    return v;
  }
};

enum class QpStatus { optimal, max_iter, infeasible };

inline const char * to_string(QpStatus s)
{
  switch (s) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::max_iter: return "max_iter";
    case QpStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

struct QpSolution
{
  Vector u_star{};
  double objective{0.0};
  QpStatus status{QpStatus::max_iter};
  double kkt_residual{kInf};
  /// [inequality rows (m), lower bounds (n), upper bounds (n)], all >= 0.
  Vector multipliers{};
  int iterations{0};
  /// Objective and primal infeasibility of every iterate, in order.
  std::vector<double> objective_history{};
  std::vector<double> infeasibility_history{};
  /// First iterate whose primal residual met the feasibility tolerance (-1: none).
  int first_feasible_iterate{-1};
};

struct QpSettings
{
  int max_iterations{100};
  double primal_tol{1e-10};
  double dual_tol{1e-10};   ///< relative to 1 + max(|H|, |f|)
  double gap_tol{1e-11};
  double accept_primal{1e-8};
  double accept_kkt{1e-6};  ///< relative to 1 + max(|H|, |f|)
  bool record_history{false};
};

/**
 * @brief Max of stationarity, primal feasibility, dual feasibility and
 * complementarity residuals (infinity norms).
 *
 * `multipliers` is laid out as in QpSolution. Infinite bounds must carry a zero
 * multiplier; a nonzero one counts as a complementarity residual.
 */
inline double kkt_residual(const DenseQp & qp, const Vector & u, const Vector & multipliers)
{
  const auto n = qp.size();
  const auto m = qp.num_inequalities();
  if (u.size() != n || multipliers.size() != m + 2 * n) {
    throw DimensionError("kkt_residual: inconsistent dimensions");
  }
  const auto y_g = multipliers.head(m);
  const auto y_l = multipliers.segment(m, n);
  const auto y_u = multipliers.tail(n);

  Vector grad = qp.H * u + qp.f - y_l + y_u;
  if (m > 0) { grad += qp.G.transpose() * y_g; }
  double res = grad.cwiseAbs().maxCoeff();
  if (n == 0) { res = 0.0; }

  res = std::max(res, qp.max_violation(u));
  if (multipliers.size() > 0) { res = std::max(res, (-multipliers).maxCoeff()); }

  for (Eigen::Index r = 0; r < m; ++r) {
    const double slack = qp.h(r) - qp.G.row(r).dot(u);
    res = std::max(res, std::abs(y_g(r) * slack));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    res = std::max(res, std::isfinite(qp.lb(i)) ? std::abs(y_l(i) * (u(i) - qp.lb(i)))
                                                : std::abs(y_l(i)));
    res = std::max(res, std::isfinite(qp.ub(i)) ? std::abs(y_u(i) * (qp.ub(i) - u(i)))
                                                : std::abs(y_u(i)));
  }
  return res;
}

namespace detail {

/// One inequality c^T u <= rhs with its nonzero pattern.
struct SparseRow
{
  std::vector<Eigen::Index> idx;
  std::vector<double> val;
  double rhs{0.0};
  Eigen::Index multiplier_slot{0};

  double dot(const Vector & u) const
  {
    double s = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) { s += val[k] * u(idx[k]); }
    return s;
  }
};

struct RowSet
{
  std::vector<SparseRow> rows;
  bool trivially_infeasible{false};
};

inline RowSet collect_rows(const DenseQp & qp)
{
  const auto n = qp.size();
  const auto m = qp.num_inequalities();
  RowSet set;
  set.rows.reserve(static_cast<std::size_t>(m + 2 * n));
  for (Eigen::Index r = 0; r < m; ++r) {
    SparseRow row;
    row.rhs = qp.h(r);
    row.multiplier_slot = r;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (qp.G(r, j) != 0.0) {
        row.idx.push_back(j);
        row.val.push_back(qp.G(r, j));
      }
    }
    if (row.idx.empty()) {
      // 0 <= rhs carries no information about u.
      if (row.rhs < 0.0) { set.trivially_infeasible = true; }
      continue;
    }
    set.rows.push_back(std::move(row));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isfinite(qp.lb(i))) { set.rows.push_back({{i}, {-1.0}, -qp.lb(i), m + i}); }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isfinite(qp.ub(i))) { set.rows.push_back({{i}, {1.0}, qp.ub(i), m + n + i}); }
  }
  return set;
}

/// H, or H + 1e-9 I when its smallest eigenvalue is estimated below 1e-10.
inline Matrix regularized_hessian(const Matrix & H)
{
  const auto n = H.rows();
  if (n == 0) { return H; }
  bool regularize = H.diagonal().minCoeff() < 1e-10;
  if (!regularize) {
    const Eigen::LDLT<Matrix> ldlt(H);
    regularize = ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < 1e-10;
  }
  if (!regularize) { return H; }
  Matrix out = H;
  out.diagonal().array() += 1e-9;
  return out;
}

inline double max_step(const Vector & x, const Vector & dx)
{
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (dx(i) < 0.0) { alpha = std::min(alpha, -x(i) / dx(i)); }
  }
  return alpha;
}

}  // namespace detail

/**
 * @brief Solve a dense convex QP.
 *
 * Deterministic for identical inputs. `warm_start` seeds the primal iterate
 * (projected into the box); slacks and duals are initialised from it with the
 * usual affine-step shift heuristic.
 */
inline QpSolution solve_qp(const DenseQp & qp, const std::optional<Vector> & warm_start = {},
  const QpSettings & settings = {})
{
  using detail::SparseRow;
  const auto n = qp.size();
  const auto m_total = qp.num_inequalities() + 2 * n;

  QpSolution sol;
  sol.multipliers = Vector::Zero(m_total);
  const auto finish = [&](const Vector & u, QpStatus status) {
    sol.u_star = u;
    sol.objective = qp.objective(u);
    sol.status = status;
    sol.kkt_residual = kkt_residual(qp, u, sol.multipliers);
    return sol;
  };

  const detail::RowSet rowset = detail::collect_rows(qp);
  const auto & rows = rowset.rows;
  const auto m = static_cast<Eigen::Index>(rows.size());

  Vector u = Vector::Zero(n);
  if (warm_start) {
    if (warm_start->size() != n) { throw DimensionError("warm start has wrong length"); }
    u = *warm_start;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isfinite(qp.lb(i)) && std::isfinite(qp.ub(i))) {
      u(i) = std::clamp(u(i), qp.lb(i), qp.ub(i));
    } else if (std::isfinite(qp.lb(i))) {
      u(i) = std::max(u(i), qp.lb(i));
    } else if (std::isfinite(qp.ub(i))) {
      u(i) = std::min(u(i), qp.ub(i));
    }
  }
  if (rowset.trivially_infeasible) { return finish(u, QpStatus::infeasible); }

  const Matrix H = detail::regularized_hessian(qp.H);
  const double scale = 1.0 + std::max(qp.H.cwiseAbs().maxCoeff() * (n > 0),
                                      n > 0 ? qp.f.cwiseAbs().maxCoeff() : 0.0);

  const auto row_product = [&](const Vector & x) {
    Vector out(m);
    for (Eigen::Index r = 0; r < m; ++r) { out(r) = rows[r].dot(x); }
    return out;
  };
  const auto add_transpose_product = [&](Vector & out, const Vector & y) {
    for (Eigen::Index r = 0; r < m; ++r) {
      const auto & row = rows[r];
      for (std::size_t k = 0; k < row.idx.size(); ++k) { out(row.idx[k]) += row.val[k] * y(r); }
    }
  };
  Vector rhs(m);
  for (Eigen::Index r = 0; r < m; ++r) { rhs(r) = rows[r].rhs; }

  // Unconstrained: a single linear solve.
  if (m == 0) {
    const Eigen::LDLT<Matrix> ldlt(H);
    const Vector u0 = ldlt.solve(-qp.f);
    if (!u0.allFinite()) { return finish(u, QpStatus::max_iter); }
    sol.iterations = 1;
    sol = finish(u0, QpStatus::optimal);
    if (sol.kkt_residual > settings.accept_kkt * scale) { sol.status = QpStatus::max_iter; }
    return sol;
  }

  Eigen::LLT<Matrix> llt;
  Matrix K(n, n);
  const auto factor = [&](const Vector & d) {
    double shift = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      K = H;
      for (Eigen::Index r = 0; r < m; ++r) {
        const auto & row = rows[r];
        for (std::size_t a = 0; a < row.idx.size(); ++a) {
          const double va = d(r) * row.val[a];
          for (std::size_t b = 0; b < row.idx.size(); ++b) {
            K(row.idx[a], row.idx[b]) += va * row.val[b];
          }
        }
      }
      if (shift > 0.0) { K.diagonal().array() += shift; }
      llt.compute(K);
      if (llt.info() == Eigen::Success) { return true; }
      shift = shift == 0.0 ? 1e-10 * (1.0 + K.diagonal().cwiseAbs().maxCoeff()) : 100.0 * shift;
    }
    return false;
  };

  // Newton step for the system linearised at (u, w, z) with complementarity target rc.
  Vector du(n), dw(m), dz(m);
  const auto newton = [&](const Vector & w, const Vector & z, const Vector & rd,
                          const Vector & rp, const Vector & rc) {
    Vector t = (rc.array() + z.array() * rp.array()) / w.array();
    Vector b = -rd;
    add_transpose_product(b, -t);
    du = llt.solve(b);
    du += llt.solve(b - K * du);
    const Vector cdu = row_product(du);
    dw = -rp - cdu;
    dz = (rc.array() - z.array() * dw.array()) / w.array();
  };

  // Initial point: shift an affine step from (u, max(slack, 1), 1) into the interior.
  Vector w = (rhs - row_product(u)).cwiseMax(1.0);
  Vector z = Vector::Ones(m);
  {
    Vector rd = H * u + qp.f;
    add_transpose_product(rd, z);
    const Vector rp = row_product(u) + w - rhs;
    if (factor(z.cwiseQuotient(w))) {
      newton(w, z, rd, rp, -(w.array() * z.array()).matrix());
      w = (w + dw).cwiseAbs().cwiseMax(1.0);
      z = (z + dz).cwiseAbs().cwiseMax(1.0);
    }
  }

  // Best iterate by a scaled KKT merit; guards against late round-off blow-ups.
  Vector best_u = u;
  Vector best_z = z;
  double best_merit = kInf;
  const double rhs_scale = 1.0 + (m > 0 ? rhs.cwiseAbs().maxCoeff() : 0.0);
  QpStatus status = QpStatus::max_iter;
  bool feasible_phase = false;
  for (int it = 0; it < settings.max_iterations; ++it) {
    Vector rd = H * u + qp.f;
    add_transpose_product(rd, z);
    const Vector cu = row_product(u);
    if (!feasible_phase) {
      const Vector gap = rhs - cu;
      // Switch to the feasible phase once u is strictly inside every row; from
      // here on the slacks are exactly rhs - C u.
      if ((cu + w - rhs).cwiseAbs().maxCoeff() <= 1e-3 * rhs_scale &&
          gap.minCoeff() > 0.0) {
        feasible_phase = true;
        sol.first_feasible_iterate = it;
      }
    }
    if (feasible_phase) { w = (rhs - cu).cwiseMax(1e-300); }
    const Vector rp = cu + w - rhs;
    const double mu = w.dot(z) / static_cast<double>(m);
    const double rp_norm = rp.cwiseAbs().maxCoeff();
    const double rd_norm = rd.cwiseAbs().maxCoeff();
    const double comp_max = (w.array() * z.array()).maxCoeff();
    if (!u.allFinite() || !w.allFinite() || !z.allFinite() || !std::isfinite(rd_norm)) { break; }

    if (settings.record_history) {
      sol.objective_history.push_back(qp.objective(u));
      sol.infeasibility_history.push_back(rp_norm);
    }
    sol.iterations = it;

    const double merit = std::max({rp_norm / rhs_scale, rd_norm / scale, comp_max});
    if (merit < best_merit) {
      best_merit = merit;
      best_u = u;
      best_z = z;
    } else if (merit > 1e6 * best_merit && best_merit < settings.accept_primal) {
      break;  // diverging after having been close: keep the best point
    }

    if (rp_norm <= settings.primal_tol * rhs_scale && rd_norm <= settings.dual_tol * scale &&
        mu <= settings.gap_tol && comp_max <= 100.0 * settings.gap_tol) {
      status = QpStatus::optimal;
      break;
    }
    if (z.cwiseAbs().maxCoeff() > 1e14 * scale && rp_norm > settings.accept_primal) {
      status = QpStatus::infeasible;
      break;
    }

    if (!factor(z.cwiseQuotient(w))) { break; }

    // Predictor.
    const Vector rc_aff = -(w.array() * z.array()).matrix();
    newton(w, z, rd, rp, rc_aff);
    const double a_aff = std::min(detail::max_step(w, dw), detail::max_step(z, dz));
    const double mu_aff = (w + a_aff * dw).dot(z + a_aff * dz) / static_cast<double>(m);
    double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);
    const double eta = std::max(0.99, 1.0 - 10.0 * mu);

    if (!feasible_phase) {
      // Corrector.
      const Vector rc = (rc_aff.array() - dw.array() * dz.array() + sigma * mu).matrix();
      newton(w, z, rd, rp, rc);
      const double alpha =
        std::min(1.0, eta * std::min(detail::max_step(w, dw), detail::max_step(z, dz)));
      u += alpha * du;
      w += alpha * dw;
      z += alpha * dz;
      sol.iterations = it + 1;
      continue;
    }

    // Feasible phase. With rp = 0 the affine direction solves K du = -grad f,
    // so it descends. The corrector is affine + second order + sigma * centring;
    // sigma is lowered until the combination keeps at least half the affine
    // slope, and the primal step is held where the objective does not increase.
    const Vector grad = H * u + qp.f;
    const Vector du_a = du, dw_a = dw, dz_a = dz;
    const Vector zero_m = Vector::Zero(m);
    const Vector zero_n = Vector::Zero(n);
    newton(w, z, zero_n, zero_m, (-(dw_a.array() * dz_a.array())).matrix());
    const Vector du_s = du, dw_s = dw, dz_s = dz;
    newton(w, z, zero_n, zero_m, Vector::Constant(m, mu));
    const Vector du_c = du, dw_c = dw, dz_c = dz;

    const double g_a = grad.dot(du_a);
    double g_base = g_a + grad.dot(du_s);
    bool second_order = true;
    if (g_base > 0.5 * g_a) {
      second_order = false;
      g_base = g_a;
    }
    const double g_c = grad.dot(du_c);
    if (g_c > 0.0) { sigma = std::clamp((0.5 * g_a - g_base) / g_c, 0.0, sigma); }
    du = du_a + sigma * du_c;
    dw = dw_a + sigma * dw_c;
    dz = dz_a + sigma * dz_c;
    if (second_order) {
      du += du_s;
      dw += dw_s;
      dz += dz_s;
    }
    const double alpha =
      std::min(1.0, eta * std::min(detail::max_step(w, dw), detail::max_step(z, dz)));
    const double slope = grad.dot(du);
    const double curvature = du.dot(qp.H * du);
    double alpha_primal = slope >= 0.0 ? 0.0 : alpha;
    if (slope < 0.0 && curvature > 0.0) { alpha_primal = std::min(alpha, -2.0 * slope / curvature); }
    const double obj_now = qp.objective(u);
    while (alpha_primal > 0.0 && qp.objective(u + alpha_primal * du) > obj_now) {
      alpha_primal *= 0.5;
      if (alpha_primal < 1e-12) { alpha_primal = 0.0; }
    }

    u += alpha_primal * du;
    w += alpha_primal * dw;
    z += alpha * dz;
    sol.iterations = it + 1;
  }

  const Vector & u_final = status == QpStatus::optimal ? u : best_u;
  const Vector & z_final = status == QpStatus::optimal ? z : best_z;
  for (Eigen::Index r = 0; r < m; ++r) { sol.multipliers(rows[r].multiplier_slot) = z_final(r); }
  const int iters = sol.iterations;
  finish(u_final, status);
  sol.iterations = iters;

  const double violation = qp.max_violation(u_final);
  if (status == QpStatus::max_iter) {
    // Stalled close to the optimum: accept if the KKT conditions already hold.
    if (violation <= settings.accept_primal && sol.kkt_residual <= settings.accept_kkt * scale) {
      sol.status = QpStatus::optimal;
    } else if (violation > 1e-6) {
      sol.status = QpStatus::infeasible;
    }
  } else if (status == QpStatus::optimal &&
             (sol.kkt_residual > settings.accept_kkt * scale || violation > settings.accept_primal)) {
    sol.status = QpStatus::max_iter;
  }
  return sol;
}

}  // namespace coopadmm

#endif  // COOPADMM_QP_HPP
