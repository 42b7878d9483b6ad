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

#ifndef AMPC_VALUEFIT_HPP
#define AMPC_VALUEFIT_HPP

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ampc/nn.hpp"

namespace ampc {

/// Value-regression training set; one sample per column of X with the
/// total value and its quadratic/penalty decomposition as targets.
struct ValueDataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd V;
  Eigen::VectorXd V_p;
  Eigen::VectorXd V_xi;
};

/// Learned value surrogate. Predictions are clamped at zero per branch:
/// V(x) = max(0, p(x)) + max(0, xi(x)). The quadratic branch is either a
/// network or the closed form |x|^2 (exact_square); the penalty branch
/// is absent for unconstrained problems.
struct ValueModel {
  bool exact_square = false;
  std::optional<Mlp> net_p;
  std::optional<Mlp> net_xi;
};

struct ValueParts {
  double V = 0.0;
  double V_p = 0.0;
  double V_xi = 0.0;
};

ValueParts value_eval_parts(const ValueModel& vm, const Eigen::VectorXd& x);

double value_eval(const ValueModel& vm, const Eigen::VectorXd& x);

/// Subgradient of the clamped combination; each branch passes through
/// only where its raw output is positive.
Eigen::VectorXd value_input_grad(const ValueModel& vm,
                                 const Eigen::VectorXd& x);

/// Batched value and input-gradient evaluation (one sample per column).
/// Either output pointer may be null.
void value_eval_batch(const ValueModel& vm, const Eigen::MatrixXd& X,
                      Eigen::VectorXd* values, Eigen::MatrixXd* grads);

/// Learning-rate / decay grid. Empty lists mean a single cell taken
/// from the base TrainConfig.
struct GridSearchSpec {
  std::vector<double> lrs;
  std::vector<double> decays;
};

struct TrainedNet {
  Mlp net;
  FitCurve curve;
  double lr = 0.0;
  double lr_decay = 0.0;
};

/// Fits one network to scalar targets, searching the (lr, decay) grid
/// and keeping the cell with the lowest final training MSE. Targets are
/// internally rescaled to unit RMS for conditioning; the scale is folded
/// back into the linear output layer, so returned nets and reported
/// curves are in original units.
TrainedNet fit_scalar_net(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const std::vector<int>& hidden,
                          const TrainConfig& base, const GridSearchSpec& grid,
                          std::uint64_t seed, int workers);

struct ValueFitResult {
  ValueModel model;
  TrainedNet p;
  TrainedNet xi;
  bool has_xi = false;
};

/// Stage-one regression: trains the quadratic branch on V_p and, when
/// any penalty target is nonzero, the penalty branch on V_xi.
ValueFitResult fit_value(const ValueDataset& data,
                         const std::vector<int>& hidden,
                         const TrainConfig& base, const GridSearchSpec& grid,
                         std::uint64_t seed, int workers);

/// Worst-case dataset error of the combined prediction: absolute bound
/// max_j |V(x_j) - V_j| and its (|V_j| + 1)-normalized counterpart.
std::pair<double, double> estimate_eps_v(const ValueModel& vm,
                                         const ValueDataset& data);

}  // namespace ampc

#endif  // AMPC_VALUEFIT_HPP
