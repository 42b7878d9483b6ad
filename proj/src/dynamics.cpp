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

#include "ampc/dynamics.hpp"

#include <cmath>

namespace ampc {

namespace {

constexpr double kUnicycleSpeed = 0.05;

void check_dims(const SystemModel& model, const Eigen::VectorXd& x,
                const Eigen::VectorXd& u) {
  require(static_cast<int>(x.size()) == model.n_x,
          model.name + ": state dimension mismatch");
  require(static_cast<int>(u.size()) == model.n_u,
          model.name + ": input dimension mismatch");
}

}  // namespace

Eigen::VectorXd step(const SystemModel& model, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u) {
  check_dims(model, x, u);
  return model.step_fn(x, u);
}

Jacobians jacobians(const SystemModel& model, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& u) {
  check_dims(model, x, u);
  return model.jac_fn(x, u);
}

SystemModel make_quad1d() {
  SystemModel m;
  m.name = "quad1d";
  m.n_x = 1;
  m.n_u = 1;
  m.input_box = make_box({-1.5}, {1.5});
  m.step_fn = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd next(1);
    next[0] = x[0] * x[0] - u[0] * u[0];
    return next;
  };
  m.jac_fn = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Jacobians j;
    j.A = Eigen::MatrixXd::Constant(1, 1, 2.0 * x[0]);
    j.B = Eigen::MatrixXd::Constant(1, 1, -2.0 * u[0]);
    return j;
  };
  return m;
}

SystemModel make_unicycle() {
  SystemModel m;
  m.name = "unicycle";
  m.n_x = 2;
  m.n_u = 1;
  const double heading_max = M_PI / 3.0;
  m.input_box = make_box({-heading_max}, {heading_max});
  m.step_fn = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd next(2);
    next[0] = x[0] + kUnicycleSpeed * std::cos(u[0]);
    next[1] = x[1] + kUnicycleSpeed * std::sin(u[0]);
    return next;
  };
  m.jac_fn = [](const Eigen::VectorXd&, const Eigen::VectorXd& u) {
    Jacobians j;
    j.A = Eigen::MatrixXd::Identity(2, 2);
    j.B = Eigen::MatrixXd(2, 1);
    j.B(0, 0) = -kUnicycleSpeed * std::sin(u[0]);
    j.B(1, 0) = kUnicycleSpeed * std::cos(u[0]);
    return j;
  };
  return m;
}

SystemModel model_by_name(const std::string& name) {
  if (name == "quad1d") return make_quad1d();
  if (name == "unicycle") return make_unicycle();
  throw std::invalid_argument("unknown system model: " + name);
}

}  // namespace ampc
