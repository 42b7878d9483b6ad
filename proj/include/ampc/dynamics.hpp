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

#ifndef AMPC_DYNAMICS_HPP
#define AMPC_DYNAMICS_HPP

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "ampc/common.hpp"

namespace ampc {

/// Jacobians of the discrete-time update x+ = f(x, u).
struct Jacobians {
  Eigen::MatrixXd A;  // df/dx, n_x by n_x
  Eigen::MatrixXd B;  // df/du, n_x by n_u
};

/// Discrete-time control system with exact one-step Jacobians.
struct SystemModel {
  std::string name;
  int n_x = 0;
  int n_u = 0;
  Box input_box;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> step_fn;
  std::function<Jacobians(const Eigen::VectorXd&, const Eigen::VectorXd&)> jac_fn;
};

Eigen::VectorXd step(const SystemModel& model, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u);

Jacobians jacobians(const SystemModel& model, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& u);

/// Scalar map x+ = x^2 - u^2. Its one-step optimal inputs come in
/// symmetric pairs, which makes it the canonical set-valued benchmark.
SystemModel make_quad1d();

/// Planar unit with direct heading control: x+ = x + v*(cos u, sin u),
/// v = 0.05, heading limited to [-pi/3, pi/3]. Every step moves the
/// state by exactly v.
SystemModel make_unicycle();

/// Looks up a registered model by name; unknown names are an error.
SystemModel model_by_name(const std::string& name);

}  // namespace ampc

#endif  // AMPC_DYNAMICS_HPP
