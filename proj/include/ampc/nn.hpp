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

#ifndef AMPC_NN_HPP
#define AMPC_NN_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ampc/common.hpp"

namespace ampc {

/// Fully connected net with ReLU hidden layers and identity output.
/// Parameters live in one flat vector, laid out per layer as the weight
/// matrix (column-major) followed by the bias.
struct Mlp {
  std::vector<int> layer_sizes;
  Eigen::VectorXd params;
  std::uint64_t init_seed = 0;

  int n_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }
  int n_in() const { return layer_sizes.front(); }
  int n_out() const { return layer_sizes.back(); }
};

/// Total parameter count: sum over layers of (n_in + 1) * n_out.
int mlp_param_count(const std::vector<int>& layer_sizes);

/// Glorot-uniform weights (+-sqrt(6/(n_in+n_out)) per layer) drawn from
/// init_seed; biases start at zero.
Mlp make_mlp(const std::vector<int>& layer_sizes, std::uint64_t init_seed);

/// Activations cached by a forward pass; reused across batches to avoid
/// reallocation in training loops.
struct MlpWorkspace {
  std::vector<Eigen::MatrixXd> pre;   // pre-activation per layer
  std::vector<Eigen::MatrixXd> act;   // act[0] is the input batch
};

/// Forward pass on a batch (one sample per column). Returns the output
/// reference living inside the workspace.
const Eigen::MatrixXd& mlp_forward_batch(const Mlp& net,
                                         const Eigen::MatrixXd& X,
                                         MlpWorkspace& ws);

/// Reverse pass for the batch held in `ws`. Writes the parameter
/// gradient (summed over columns) into grad_params when non-null and
/// per-column input gradients into grad_input when non-null.
void mlp_backward_batch(const Mlp& net, const MlpWorkspace& ws,
                        const Eigen::MatrixXd& upstream,
                        Eigen::VectorXd* grad_params,
                        Eigen::MatrixXd* grad_input);

Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& x);

/// Single-sample reverse pass: gradients of upstream . f(x) with respect
/// to the flat parameters and to the input.
void mlp_backward(const Mlp& net, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& upstream,
                  Eigen::VectorXd* grad_params, Eigen::VectorXd* grad_input);

/// Adam accumulator. The effective step size is lr0 * lr_decay^epoch;
/// the training loop advances `epoch` once per pass over the data.
struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr0 = 1e-3;
  double lr_decay = 1.0;
  int epoch = 0;
};

AdamState make_adam(int n_params, double lr0, double lr_decay);

/// One Adam update in place. Non-finite gradients are a training failure.
void adam_step(AdamState& state, Eigen::VectorXd& params,
               const Eigen::VectorXd& grads);

/// Componentwise clamp onto the box together with its pass-through
/// gradient mask: 1 strictly inside, 0 on the boundary or outside.
struct Projection {
  Eigen::VectorXd u;
  Eigen::VectorXd mask;
};

Projection project_input(const Eigen::VectorXd& raw, const Box& box);

struct TrainConfig {
  int epochs = 2000;
  int batch = 64;
  double lr0 = 1e-3;
  double lr_decay = 0.999;
  std::uint64_t seed = 0;
};

struct FitCurve {
  std::vector<double> epoch_loss;
  double final_loss() const {
    return epoch_loss.empty() ? 0.0 : epoch_loss.back();
  }
};

/// Minibatch Adam regression of net outputs onto targets Y (one sample
/// per column), loss = mean over batch of the squared output error.
/// Identical seeds and data order give bit-identical parameter
/// trajectories.
FitCurve fit_mse(Mlp& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                 const TrainConfig& cfg);

}  // namespace ampc

#endif  // AMPC_NN_HPP
