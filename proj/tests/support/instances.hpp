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

#ifndef COOPADMM_TESTS_INSTANCES_HPP
#define COOPADMM_TESTS_INSTANCES_HPP

#include <coopadmm/admm.hpp>

#include <random>

namespace coopadmm::oracle {

struct RandomInstance
{
  std::vector<VehicleSpec> specs;
  std::vector<HorizonTrajectory> seeds;
  std::vector<Vector> references;
  ConstraintGraph graph;
  ConvexifiedProblem problem;

  std::vector<Vector> seed_controls() const
  {
    std::vector<Vector> out;
    for (const auto & s : seeds) { out.push_back(s.control_vector()); }
    return out;
  }
};

/**
 * N vehicles side by side heading roughly east, 5.5..6.5 m apart laterally,
 * each tracking a straight line shifted up to `pull` m toward its neighbours,
 * so some collision halfspaces bind. Seeds are zero-steering rollouts.
 */
inline RandomInstance random_instance(std::mt19937_64 & rng, int N, int Np, double pull = 2.0,
  const CostWeights & weights = {})
{
  std::uniform_real_distribution<double> gap(5.5, 6.5);
  std::uniform_real_distribution<double> along(-3.0, 3.0);
  std::uniform_real_distribution<double> head(-0.05, 0.05);
  std::uniform_real_distribution<double> speed(40.0 / 3.6, 50.0 / 3.6);
  std::uniform_real_distribution<double> shift(-pull, pull);
  const double Ts = 0.1;

  RandomInstance inst;
  double y = 0.0;
  std::vector<VehicleId> ids;
  std::vector<VehicleState> states;
  for (int v = 0; v < N; ++v) {
    VehicleSpec s;
    s.id = v + 1;
    s.wheelbase = 2.4;
    s.speed = speed(rng);
    s.steer_min = -0.5;
    s.steer_max = 0.5;
    s.initial_state = {along(rng), y, head(rng)};
    s.position_bounds = {-kInf, kInf, -10.0, 6.5 * N + 10.0};
    const double y_ref = y + shift(rng);
    s.reference_path = {{s.initial_state.rx, y_ref, 0.0}, {s.initial_state.rx + 100.0, y_ref, 0.0}};
    Vector ref(3 * Np);
    for (int k = 1; k <= Np; ++k) {
      ref.segment<3>(3 * (k - 1)) << s.initial_state.rx + s.speed * k * Ts, y_ref, 0.0;
    }
    inst.references.push_back(ref);
    inst.seeds.push_back(rollout(s.initial_state, std::vector<double>(static_cast<std::size_t>(Np), 0.0),
      s.speed, s.wheelbase, Ts));
    ids.push_back(s.id);
    states.push_back(s.initial_state);
    inst.specs.push_back(s);
    y += gap(rng);
  }
  inst.graph = build_constraint_graph(ids, states, 50.0, 5.0);
  inst.problem = convexify(inst.specs, inst.seeds, inst.references, inst.graph, weights, 1e4);
  return inst;
}

}  // namespace coopadmm::oracle

#endif  // COOPADMM_TESTS_INSTANCES_HPP
