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

#ifndef AMPC_POLICYFIT_HPP
#define AMPC_POLICYFIT_HPP

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ampc/dynamics.hpp"
#include "ampc/valuefit.hpp"

namespace ampc {

/// Explicit policy: a network composed with the box projection, so the
/// returned input always satisfies the input constraint.
struct PolicyModel {
  Mlp net;
  Box box;
};

Eigen::VectorXd policy_eval(const PolicyModel& pm, const Eigen::VectorXd& x);

Eigen::MatrixXd policy_eval_batch(const PolicyModel& pm,
                                  const Eigen::MatrixXd& X);

/// One-step look-ahead loss: stage cost plus the learned value at the
/// successor state.
double loss_mpc(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                const ValueModel& value, const SystemModel& model,
                const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

struct PolicyFitResult {
  PolicyModel model;
  FitCurve curve;
  double lr = 0.0;
  double lr_decay = 0.0;
};

/// Trains the policy to minimize the empirical mean of loss_mpc over
/// the state set. The value model stays frozen; gradients chain through
/// the projection mask, the dynamics input Jacobian, and the value
/// network's input gradient. Grid cells, when given, are scored by
/// final training loss.
PolicyFitResult train_policy_il(const Eigen::MatrixXd& states,
                                const ValueModel& value,
                                const SystemModel& model,
                                const Eigen::MatrixXd& Q,
                                const Eigen::MatrixXd& R,
                                const std::vector<int>& hidden,
                                const TrainConfig& base,
                                const GridSearchSpec& grid, std::uint64_t seed,
                                int workers);

/// Behavioral cloning: mean-squared regression of the projected policy
/// output onto recorded solver inputs.
PolicyFitResult train_policy_bc(const Eigen::MatrixXd& states,
                                const Eigen::MatrixXd& inputs,
                                const SystemModel& model,
                                const std::vector<int>& hidden,
                                const TrainConfig& base,
                                const GridSearchSpec& grid, std::uint64_t seed,
                                int workers);

/// Worst-case loss suboptimality of the policy against a grid argmin
/// over single-dimensional inputs: abs bound max_j gap_j clamped at 0,
/// rel bound normalized by (|loss at the grid argmin| + 1).
std::pair<double, double> estimate_eps_pi(
    const PolicyModel& pm, const Eigen::MatrixXd& states,
    const ValueModel& value, const SystemModel& model,
    const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R, int grid_n);

}  // namespace ampc

#endif  // AMPC_POLICYFIT_HPP
