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

// Acceptance report: one PASS/FAIL line per criterion.
//
// Exit status is nonzero when a criterion fails that is not listed in
// --expect-fail, or when a listed one passes.

#include <coopadmm/coopadmm.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/instances.hpp"
#include "support/qp_oracle.hpp"
#include "support/residual_oracle.hpp"
#include "support/rk4.hpp"

#ifndef COOPADMM_SOURCE_DIR
#define COOPADMM_SOURCE_DIR "."
#endif

using namespace coopadmm;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome
{
  bool pass{false};
  std::string detail{};
};

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string g9(double x)
{
  return fmt9(x);
}

Scenario bundled(const std::string & name)
{
  return load_scenario(std::string(COOPADMM_SOURCE_DIR) + "/scenarios/" + name);
}

// ---------------------------------------------------------------- shared instances

struct Instance1
{
  oracle::RandomInstance inst;
  CentralizedResult central;
};

/// The first 20 random instances (N cycling 2, 3, 4; Np = 5) whose centralized optimum has zero slack.
const std::vector<Instance1> & criterion1_instances()
{
  static const std::vector<Instance1> cache = [] {
    std::vector<Instance1> out;
    std::mt19937_64 rng(2026);
    for (int attempt = 0; out.size() < 20; ++attempt) {
      if (attempt > 1000) { throw std::runtime_error("could not draw 20 zero-slack instances"); }
      auto inst = oracle::random_instance(rng, 2 + attempt % 3, 5);
      CentralizedResult c = solve_centralized(inst.problem);
      if (c.qp.status != QpStatus::optimal) { continue; }
      if (c.slack.size() > 0 && c.slack.maxCoeff() > 1e-9) { continue; }
      out.push_back({std::move(inst), std::move(c)});
    }
    return out;
  }();
  return cache;
}

AdmmConfig stated_config()
{
  AdmmConfig cfg;
  cfg.eps_abs = 0.01;
  cfg.eps_rel = 0.01;
  return cfg;
}

// ---------------------------------------------------------------- criteria

Outcome criterion1()
{
  const auto t0 = Clock::now();
  const auto & instances = criterion1_instances();
  int within = 0;
  int converged = 0;
  double worst = 0.0;
  for (const auto & c : instances) {
    const auto & p = c.inst.problem;
    const AdmmResult r = admm_solve(p, initial_state(p, c.inst.seed_controls(), 1.0), stated_config());
    converged += r.report.converged ? 1 : 0;
    const double rel = std::abs(admm_objective(p, r) - c.central.objective) / std::abs(c.central.objective);
    worst = std::max(worst, rel);
    within += (r.report.converged && rel <= 1e-2) ? 1 : 0;
  }
  const double t = seconds_since(t0);
  std::ostringstream os;
  os << within << "/20 within 1e-2 relative (converged " << converged << "/20), worst " << g9(worst)
     << ", " << g9(t) << " s";
  return {within == 20 && t < 10.0, os.str()};
}

Outcome criterion2()
{
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> dn(1, 6);
  std::uniform_int_distribution<int> dm(0, 8);
  double worst_x = 0.0;
  double worst_kkt = 0.0;
  int matched = 0;
  int solved = 0;
  while (solved < 50) {
    const DenseQp qp = oracle::random_strictly_convex_qp(rng, dn(rng), dm(rng));
    const auto ref = oracle::enumerate_active_sets(qp);
    if (!ref) { continue; }
    ++solved;
    const QpSolution sol = solve_qp(qp);
    if (sol.status != QpStatus::optimal) { continue; }
    const double dx = (sol.u_star - ref->u).cwiseAbs().maxCoeff();
    worst_x = std::max(worst_x, dx);
    worst_kkt = std::max(worst_kkt, sol.kkt_residual);
    matched += (dx <= 1e-6 && sol.kkt_residual <= 1e-6) ? 1 : 0;
  }
  const double t = seconds_since(t0);
  std::ostringstream os;
  os << matched << "/50 match the enumeration oracle, worst |du| " << g9(worst_x) << ", worst KKT "
     << g9(worst_kkt) << ", " << g9(t) << " s";
  return {matched == 50 && t < 5.0, os.str()};
}

Outcome criterion3()
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> steer(-0.4, 0.4);
  std::uniform_real_distribution<double> speed(40.0 / 3.6, 50.0 / 3.6);
  std::uniform_real_distribution<double> pos(-50.0, 50.0);
  double worst_jac = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const VehicleState x{pos(rng), pos(rng), ang(rng)};
    const double d = steer(rng);
    const double v = speed(rng);
    const LinearModel m = linearize_step(x, d, v, 2.4, 0.1);
    Eigen::Matrix<double, 3, 4> analytic;
    analytic << m.A, m.B;
    const auto fd = oracle::finite_difference_jacobian(x, d, v, 2.4, 0.1, 1e-6);
    worst_jac = std::max(worst_jac, (analytic - fd).norm() / fd.norm());
  }

  std::normal_distribution<double> near(0.0, 4.0);
  int satisfied = 0;
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Vector2d pi0(pos(rng), pos(rng));
    const Eigen::Vector2d pj0 = pi0 + Eigen::Vector2d(near(rng), near(rng));
    const CollisionHalfspace hs = linearize_collision(pi0, pj0, 5.0);
    const Eigen::Vector2d pi = pi0 + Eigen::Vector2d(near(rng), near(rng));
    const Eigen::Vector2d pj = pj0 + Eigen::Vector2d(near(rng), near(rng));
    if (!hs.satisfied(pi, pj)) { continue; }
    ++satisfied;
    violations += (pi - pj).norm() < 5.0 ? 1 : 0;
  }
  std::ostringstream os;
  os << "worst Jacobian relative error " << g9(worst_jac) << " over 1000 points; " << violations
     << " distance violations among " << satisfied << " halfspace-feasible draws";
  return {worst_jac <= 1e-5 && violations == 0 && satisfied > 0, os.str()};
}

double true_min_distance(const SimulationRun & run)
{
  double best = kInf;
  for (const auto & step : run.states) {
    for (std::size_t a = 0; a < step.size(); ++a) {
      for (std::size_t b = a + 1; b < step.size(); ++b) {
        best = std::min(best, std::hypot(step[a].rx - step[b].rx, step[a].ry - step[b].ry));
      }
    }
  }
  return best;
}

/// Signed position of (x, y) along and across the straight reference of vehicle v.
Eigen::Vector2d line_coordinates(const VehicleSpec & spec, double x, double y)
{
  const auto & a = spec.reference_path.front();
  const auto & b = spec.reference_path.back();
  const Eigen::Vector2d dir = Eigen::Vector2d(b.x - a.x, b.y - a.y).normalized();
  const Eigen::Vector2d d(x - a.x, y - a.y);
  return {d.dot(dir), dir.x() * d.y() - dir.y() * d.x()};
}

bool straight_references(const Scenario & sc)
{
  for (const auto & v : sc.vehicles) {
    if (v.reference_path.size() != 2) { return false; }
  }
  return true;
}

struct ScenarioRuns
{
  SimulationRun one;
  SimulationRun four;
  double seconds_one{0.0};
};

ScenarioRuns & overtaking_runs()
{
  static ScenarioRuns runs = [] {
    const Scenario sc = bundled("overtaking.scn");
    ScenarioRuns r;
    const auto t0 = Clock::now();
    r.one = run_simulation(sc, SolverMode::parallel_admm, 20.0, {1});
    r.seconds_one = seconds_since(t0);
    r.four = run_simulation(sc, SolverMode::parallel_admm, 20.0, {4});
    return r;
  }();
  return runs;
}

ScenarioRuns & intersection_runs()
{
  static ScenarioRuns runs = [] {
    const Scenario sc = bundled("intersection.scn");
    ScenarioRuns r;
    const auto t0 = Clock::now();
    r.one = run_simulation(sc, SolverMode::parallel_admm, sc.params.sim_duration, {1});
    r.seconds_one = seconds_since(t0);
    r.four = run_simulation(sc, SolverMode::parallel_admm, sc.params.sim_duration, {4});
    return r;
  }();
  return runs;
}

Outcome criterion4()
{
  const Scenario sc = bundled("overtaking.scn");
  if (!straight_references(sc)) { return {false, "overtaking references are not straight lines"}; }
  const auto & runs = overtaking_runs();
  const SimulationRun & run = runs.one;
  const double dmin = true_min_distance(run);
  const double T = run.times.back();
  double worst_final = 0.0;
  for (std::size_t k = 0; k < run.times.size(); ++k) {
    if (run.times[k] < T - 2.0 - 1e-9) { continue; }
    for (std::size_t v = 0; v < sc.vehicles.size(); ++v) {
      const auto & s = run.states[k][v];
      worst_final = std::max(worst_final, std::abs(line_coordinates(sc.vehicles[v], s.rx, s.ry).y()));
    }
  }
  std::ostringstream os;
  os << "min distance " << g9(dmin) << " m (need >= " << g9(sc.params.d_safe - 0.2)
     << "), worst lateral deviation in final 2 s " << g9(worst_final) << " m, " << T << " s simulated in "
     << g9(runs.seconds_one) << " s";
  return {dmin >= sc.params.d_safe - 0.2 && worst_final < 0.3 && std::abs(T - 20.0) < 1e-9 &&
            runs.seconds_one < 60.0,
    os.str()};
}

Outcome criterion5()
{
  const Scenario sc = bundled("intersection.scn");
  if (!straight_references(sc)) { return {false, "intersection references are not straight lines"}; }
  const auto & runs = intersection_runs();
  const SimulationRun & run = runs.one;
  const double dmin = true_min_distance(run);
  bool increasing = true;
  bool passed = true;
  for (std::size_t v = 0; v < sc.vehicles.size(); ++v) {
    double prev = -kInf;
    for (const auto & step : run.states) {
      const double s = line_coordinates(sc.vehicles[v], step[v].rx, step[v].ry).x();
      increasing = increasing && s > prev;
      prev = s;
    }
    // The roads cross at the origin; every vehicle must end at least d_safe beyond it.
    const double crossing = line_coordinates(sc.vehicles[v], 0.0, 0.0).x();
    passed = passed && prev >= crossing + sc.params.d_safe;
  }
  std::ostringstream os;
  os << "min distance " << g9(dmin) << " m (need >= " << g9(sc.params.d_safe - 0.2) << "), progress "
     << (increasing ? "strictly increasing" : "NOT strictly increasing") << ", "
     << (passed ? "all vehicles cleared the crossing" : "a vehicle did not clear the crossing") << ", "
     << g9(runs.seconds_one) << " s";
  return {dmin >= sc.params.d_safe - 0.2 && increasing && passed && runs.seconds_one < 60.0, os.str()};
}

Outcome criterion6()
{
  const auto t0 = Clock::now();
  const std::vector<int> sizes{4, 8, 16, 32, 64};
  BenchOptions opt;
  opt.cycles = 10;
  opt.workers = 1;
  const auto records = run_benchmark(sizes, opt);
  const BenchSummary s = summarize_bench(records);
  const double t = seconds_since(t0);
  if (!s.flatness_ratio || !s.growth_ratio) { return {false, "benchmark ratios undefined"}; }
  std::ostringstream os;
  os << "parallel N=64/N=4 " << g9(*s.flatness_ratio) << " (need <= 3), centralized N=64/N=4 "
     << g9(*s.growth_ratio) << " (need >= 10), " << g9(t) << " s";
  return {*s.flatness_ratio <= 3.0 && *s.growth_ratio >= 10.0 && t < 900.0, os.str()};
}

/// Independent residual test on the final iterate of `r`.
bool recomputed_converged(const oracle::RandomInstance & inst, const AdmmConfig & cfg, const AdmmResult & r)
{
  const auto & p = inst.problem;
  const int K = r.report.iterations_used;
  std::vector<Vector> z_prev;
  if (K <= 1) {
    z_prev = inst.seed_controls();
  } else {
    AdmmConfig shorter = cfg;
    shorter.max_iters = K - 1;
    z_prev = admm_solve(p, initial_state(p, inst.seed_controls(), cfg.rho0), shorter).z;
  }
  // The last test used the penalty in force before any final update.
  AdmmState s = r.state;
  const double rho_test = r.trace.back().rho;
  for (auto & l : s.lambda) { l *= s.rho / rho_test; }
  for (auto & pair : s.lambda_edge) {
    pair[0] *= s.rho / rho_test;
    pair[1] *= s.rho / rho_test;
  }
  s.rho = rho_test;
  return oracle::recompute_residuals(p, s, z_prev, cfg.eps_abs, cfg.eps_rel).converged;
}

Outcome criterion7()
{
  int agree = 0;
  int fixed_ok = 0;
  int worst_fixed = 0;
  for (const auto & c : criterion1_instances()) {
    const auto & p = c.inst.problem;
    const AdmmConfig cfg = stated_config();
    const AdmmResult r = admm_solve(p, initial_state(p, c.inst.seed_controls(), cfg.rho0), cfg);
    agree += recomputed_converged(c.inst, cfg, r) == r.report.converged ? 1 : 0;

    AdmmConfig fixed = stated_config();
    fixed.adapt_rho = false;
    fixed.rho0 = 1.0;
    fixed.max_iters = 200;
    const AdmmResult f = admm_solve(p, initial_state(p, c.inst.seed_controls(), 1.0), fixed);
    const bool ok = f.report.converged && recomputed_converged(c.inst, fixed, f);
    fixed_ok += ok ? 1 : 0;
    worst_fixed = std::max(worst_fixed, f.report.iterations_used);
  }
  std::ostringstream os;
  os << "converged flag agrees with recomputation on " << agree << "/20; fixed rho=1 meets the thresholds on "
     << fixed_ok << "/20 (max " << worst_fixed << " iterations)";
  return {agree == 20 && fixed_ok == 20, os.str()};
}

double expected_rho(double rho, double r, double s)
{
  if (r > 5.0 * s) { return 2.0 * rho; }
  if (s > 5.0 * r) { return rho / 2.0; }
  return rho;
}

Outcome criterion8()
{
  std::mt19937_64 rng(8);
  std::lognormal_distribution<double> mag(0.0, 2.0);
  std::normal_distribution<double> g;
  int rule_errors = 0;
  double worst_jump = 0.0;
  int checks = 0;
  for (int trial = 0; trial < 500; ++trial) {
    AdmmState s;
    s.rho = mag(rng);
    for (int v = 0; v < 3; ++v) {
      Vector l(5);
      for (auto & x : l) { x = g(rng); }
      s.lambda.push_back(l);
    }
    Vector a(5), b(5);
    for (auto & x : a) { x = g(rng); }
    for (auto & x : b) { x = g(rng); }
    s.lambda_edge.push_back({a, b});
    double r = mag(rng);
    double sn = mag(rng);
    if (trial % 5 == 0) { r = 5.0 * sn; }  // exactly on the boundary: no change
    const AdmmState before = s;
    const bool changed = adapt_rho(s, r, sn);
    const double want = expected_rho(before.rho, r, sn);
    rule_errors += (s.rho != want || changed != (want != before.rho)) ? 1 : 0;
    for (std::size_t v = 0; v < 3; ++v) {
      const Vector jump = s.rho * s.lambda[v] - before.rho * before.lambda[v];
      worst_jump = std::max(worst_jump, jump.cwiseAbs().maxCoeff() / (1.0 + (before.rho * before.lambda[v]).cwiseAbs().maxCoeff()));
    }
    for (int k = 0; k < 2; ++k) {
      const Vector jump = s.rho * s.lambda_edge[0][k] - before.rho * before.lambda_edge[0][k];
      worst_jump = std::max(worst_jump, jump.cwiseAbs().maxCoeff() / (1.0 + (before.rho * before.lambda_edge[0][k]).cwiseAbs().maxCoeff()));
    }
    ++checks;
  }
  // The penalty sequence inside real solves follows the same rule.
  int trace_errors = 0;
  int transitions = 0;
  for (const auto & c : criterion1_instances()) {
    const auto & p = c.inst.problem;
    const AdmmResult r = admm_solve(p, initial_state(p, c.inst.seed_controls(), 1.0), stated_config());
    for (std::size_t k = 0; k + 1 < r.trace.size(); ++k) {
      const auto & t = r.trace[k];
      trace_errors += r.trace[k + 1].rho != expected_rho(t.rho, t.r_norm, t.s_norm) ? 1 : 0;
      ++transitions;
    }
  }
  std::ostringstream os;
  os << rule_errors << " rule errors in " << checks << " updates, worst relative jump of rho*lambda "
     << g9(worst_jump) << ", " << trace_errors << " deviations in " << transitions << " in-solve updates";
  return {rule_errors == 0 && worst_jump <= 1e-15 && trace_errors == 0, os.str()};
}

double max_deviation(const SimulationRun & a, const SimulationRun & b)
{
  if (a.states.size() != b.states.size() || a.controls.size() != b.controls.size()) { return kInf; }
  double worst = 0.0;
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    for (std::size_t v = 0; v < a.states[k].size(); ++v) {
      worst = std::max(worst, (a.states[k][v].as_vector() - b.states[k][v].as_vector()).cwiseAbs().maxCoeff());
    }
  }
  for (std::size_t k = 0; k < a.controls.size(); ++k) {
    for (std::size_t v = 0; v < a.controls[k].size(); ++v) {
      worst = std::max(worst, std::abs(a.controls[k][v] - b.controls[k][v]));
    }
  }
  return worst;
}

Outcome criterion9()
{
  const double dev_ot = max_deviation(overtaking_runs().one, overtaking_runs().four);
  const double dev_in = max_deviation(intersection_runs().one, intersection_runs().four);
  double dev_admm = 0.0;
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const auto inst = oracle::random_instance(rng, 4, 8, 3.0);
    const auto init = initial_state(inst.problem, inst.seed_controls(), 1.0);
    WorkerPool one(1);
    WorkerPool four(4);
    const AdmmResult a = admm_solve(inst.problem, init, stated_config(), one);
    const AdmmResult b = admm_solve(inst.problem, init, stated_config(), four);
    if (a.report.iterations_used != b.report.iterations_used) { dev_admm = kInf; }
    for (std::size_t v = 0; v < a.z.size(); ++v) {
      dev_admm = std::max(dev_admm, (a.z[v] - b.z[v]).cwiseAbs().maxCoeff());
    }
  }
  std::ostringstream os;
  os << "max deviation 1 vs 4 workers: overtaking " << g9(dev_ot) << ", intersection " << g9(dev_in)
     << ", ADMM solves " << g9(dev_admm);
  return {dev_ot == 0.0 && dev_in == 0.0 && dev_admm == 0.0, os.str()};
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"coopadmm acceptance report"};
  std::vector<int> only;
  std::vector<int> expect_fail;
  app.add_option("--only", only, "Run only these criteria")->delimiter(',')->check(CLI::Range(1, 9));
  app.add_option("--expect-fail", expect_fail, "Criteria known to fail")->delimiter(',')->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
    criterion5, criterion6, criterion7, criterion8, criterion9};
  const std::set<int> selected(only.begin(), only.end());
  const std::set<int> expected(expect_fail.begin(), expect_fail.end());
  int passed = 0;
  int run = 0;
  int unexpected = 0;
  for (int i = 1; i <= 9; ++i) {
    if (!selected.empty() && !selected.count(i)) { continue; }
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(i - 1)]();
    } catch (const std::exception & e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    ++run;
    passed += o.pass ? 1 : 0;
    const bool surprise = o.pass == static_cast<bool>(expected.count(i));
    unexpected += surprise ? 1 : 0;
    std::printf("criterion %d: %s  %s%s\n", i, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
      expected.count(i) ? (o.pass ? "  [listed as expected failure]" : "  [expected failure]") : "");
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/%d criteria pass\n", passed, run);
  return unexpected == 0 ? 0 : 1;
}
