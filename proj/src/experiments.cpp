/*
 Copyright 2026 The ampc authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "ampc/experiments.hpp"

namespace ampc {

ExperimentPreset quad1d_preset() {
  ExperimentPreset e;
  e.name = "quad1d";

  e.problem.model = make_quad1d();
  e.problem.N = 1;
  e.problem.Q = Eigen::MatrixXd::Identity(1, 1);
  e.problem.R = Eigen::MatrixXd::Zero(1, 1);
  e.problem.Q_N = Eigen::MatrixXd::Identity(1, 1);
  e.problem.rho = 15000.0;
  e.problem.eta = 0.01;
  e.problem.state_constraints = PolytopeRows{Eigen::MatrixXd(0, 1)};

  // The two optima +-x are exact stationary points of the signed-state
  // initializer, so a short run labels each state exactly.
  e.solver.init = RestartInit::kSignedState;
  e.solver.restarts = 8;
  e.solver.iterations = 100;

  e.plan.parts.push_back(UniformBox{make_box({-1.0}, {1.0}), 10000});
  e.exact_value = true;
  e.value_hidden = {128, 128, 128};
  e.policy_hidden = {8};

  e.train.epochs = 2000;
  e.train.batch = 64;
  e.train.lr0 = 5e-3;
  e.train.lr_decay = 0.999;
  e.policy_train = e.train;

  e.suite.n_traj = 100;
  e.suite.T = 100;
  e.suite.x0_box = make_box({-1.0}, {1.0});

  e.pistar_grid = 100;
  e.eps_grid = 1000;
  std::vector<double> grid = linspace(-1.0, 1.0, 401);
  e.eps_states.resize(1, static_cast<int>(grid.size()));
  for (int j = 0; j < e.eps_states.cols(); ++j) e.eps_states(0, j) = grid[j];

  std::vector<double> starts = linspace(-1.0, 1.0, 9);
  e.iss_starts.resize(1, static_cast<int>(starts.size()));
  for (int j = 0; j < e.iss_starts.cols(); ++j) e.iss_starts(0, j) = starts[j];
  e.iss_components = {0};
  e.iss_offset_tol = 0.05;
  return e;
}

ExperimentPreset unicycle_preset() {
  ExperimentPreset e;
  e.name = "unicycle";

  e.problem.model = make_unicycle();
  e.problem.N = 20;
  e.problem.Q = Eigen::MatrixXd::Zero(2, 2);
  e.problem.Q(1, 1) = 1.0;
  e.problem.R = Eigen::MatrixXd::Constant(1, 1, 5.0);
  e.problem.Q_N = 100.0 * e.problem.Q;
  e.problem.rho = 15000.0;
  e.problem.eta = 0.01;
  e.problem.state_constraints = ObstacleCircle{0.5};

  e.solver.init = RestartInit::kUniform;
  e.solver.restarts = 20;
  e.solver.iterations = 400;
  e.solver.step0 = 0.1;
  e.solver.step_decay = 0.995;

  // Coarse cover of the workspace plus a refined band along the
  // corridor the closed loop actually visits.
  e.plan.parts.push_back(Grid2D{-2.0, 2.0, 41, -1.5, 1.5, 41});
  e.plan.parts.push_back(Grid2D{-1.5, 1.5, 51, -0.5, 0.5, 31});

  e.exact_value = false;
  e.value_hidden = {128, 128, 128};
  e.policy_hidden = {128, 128, 128};

  e.train.epochs = 2000;
  e.train.batch = 64;
  e.train.lr0 = 1e-3;
  e.train.lr_decay = 0.999;
  // The look-ahead loss is dominated by high-value states, so pinning
  // the argmin near the target needs a longer, slower anneal.
  e.policy_train = e.train;
  e.policy_train.epochs = 12000;
  e.policy_train.lr_decay = 0.99975;

  e.suite.n_traj = 500;
  e.suite.T = 100;
  e.suite.x0_box = make_box({-1.0, -0.7}, {0.0, 0.7});
  e.suite.reject_radius = 0.5;

  e.pistar_grid = 100;
  e.eps_grid = 1000;

  const double x1s[] = {-1.0, -0.85, -0.7, -0.55};
  const double x2s[] = {-0.7, -0.35, 0.35, 0.7};
  e.iss_starts.resize(2, 16);
  int col = 0;
  for (double a : x1s) {
    for (double b : x2s) {
      e.iss_starts(0, col) = a;
      e.iss_starts(1, col) = b;
      col += 1;
    }
  }
  e.iss_components = {1};
  e.iss_offset_tol = 0.05;
  return e;
}

ExperimentPreset preset_by_name(const std::string& name) {
  if (name == "quad1d") return quad1d_preset();
  if (name == "unicycle") return unicycle_preset();
  throw std::invalid_argument("unknown experiment: " + name);
}

}  // namespace ampc
