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

#include "ampc/nn.hpp"

#include <cmath>

namespace ampc {

namespace {

void check_arch(const std::vector<int>& layer_sizes) {
  require(layer_sizes.size() >= 2, "mlp needs at least input and output layers");
  for (int s : layer_sizes) require(s >= 1, "mlp layer sizes must be positive");
}

// Offset of layer l's weight block inside the flat parameter vector.
int layer_offset(const std::vector<int>& sizes, int l) {
  int off = 0;
  for (int k = 0; k < l; ++k) off += (sizes[k] + 1) * sizes[k + 1];
  return off;
}

using ConstW = Eigen::Map<const Eigen::MatrixXd>;
using ConstB = Eigen::Map<const Eigen::VectorXd>;

ConstW weight(const Mlp& net, int l, int off) {
  return ConstW(net.params.data() + off, net.layer_sizes[l + 1],
                net.layer_sizes[l]);
}

ConstB bias(const Mlp& net, int l, int off) {
  return ConstB(net.params.data() + off +
                    net.layer_sizes[l] * net.layer_sizes[l + 1],
                net.layer_sizes[l + 1]);
}

}  // namespace

int mlp_param_count(const std::vector<int>& layer_sizes) {
  check_arch(layer_sizes);
  return layer_offset(layer_sizes, static_cast<int>(layer_sizes.size()) - 1);
}

Mlp make_mlp(const std::vector<int>& layer_sizes, std::uint64_t init_seed) {
  check_arch(layer_sizes);
  Mlp net;
  net.layer_sizes = layer_sizes;
  net.init_seed = init_seed;
  net.params = Eigen::VectorXd::Zero(mlp_param_count(layer_sizes));
  Rng rng(init_seed);
  int off = 0;
  for (int l = 0; l + 1 < static_cast<int>(layer_sizes.size()); ++l) {
    const int n_in = layer_sizes[l];
    const int n_out = layer_sizes[l + 1];
    const double a = std::sqrt(6.0 / (n_in + n_out));
    for (int k = 0; k < n_in * n_out; ++k) {
      net.params[off + k] = rng.uniform(-a, a);
    }
    off += (n_in + 1) * n_out;  // biases stay zero
  }
  return net;
}

const Eigen::MatrixXd& mlp_forward_batch(const Mlp& net,
                                         const Eigen::MatrixXd& X,
                                         MlpWorkspace& ws) {
  require(static_cast<int>(X.rows()) == net.n_in(),
          "mlp_forward: input dimension mismatch");
  const int L = net.n_layers();
  ws.pre.resize(L);
  ws.act.resize(L + 1);
  ws.act[0] = X;
  int off = 0;
  for (int l = 0; l < L; ++l) {
    ws.pre[l].noalias() = weight(net, l, off) * ws.act[l];
    ws.pre[l].colwise() += bias(net, l, off);
    if (l + 1 < L) {
      ws.act[l + 1] = ws.pre[l].cwiseMax(0.0);
    } else {
      ws.act[l + 1] = ws.pre[l];
    }
    off += (net.layer_sizes[l] + 1) * net.layer_sizes[l + 1];
  }
  return ws.act[L];
}

void mlp_backward_batch(const Mlp& net, const MlpWorkspace& ws,
                        const Eigen::MatrixXd& upstream,
                        Eigen::VectorXd* grad_params,
                        Eigen::MatrixXd* grad_input) {
  const int L = net.n_layers();
  require(static_cast<int>(ws.act.size()) == L + 1,
          "mlp_backward: stale workspace");
  require(upstream.rows() == ws.act[L].rows() &&
              upstream.cols() == ws.act[L].cols(),
          "mlp_backward: upstream shape mismatch");
  if (grad_params != nullptr) {
    grad_params->setZero(net.params.size());
  }
  Eigen::MatrixXd delta = upstream;
  for (int l = L - 1; l >= 0; --l) {
    const int off = layer_offset(net.layer_sizes, l);
    const int n_in = net.layer_sizes[l];
    const int n_out = net.layer_sizes[l + 1];
    if (grad_params != nullptr) {
      Eigen::Map<Eigen::MatrixXd> gw(grad_params->data() + off, n_out, n_in);
      gw.noalias() += delta * ws.act[l].transpose();
      Eigen::Map<Eigen::VectorXd> gb(grad_params->data() + off + n_in * n_out,
                                     n_out);
      gb.noalias() += delta.rowwise().sum();
    }
    const bool need_down = l > 0 || grad_input != nullptr;
    if (!need_down) break;
    Eigen::MatrixXd down = weight(net, l, off).transpose() * delta;
    if (l > 0) {
      // ReLU subgradient: zero at and below the kink.
      down = (ws.pre[l - 1].array() > 0.0).select(down, 0.0);
      delta.swap(down);
    } else if (grad_input != nullptr) {
      *grad_input = down;
    }
  }
}

Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& x) {
  MlpWorkspace ws;
  return mlp_forward_batch(net, x, ws).col(0);
}

void mlp_backward(const Mlp& net, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& upstream,
                  Eigen::VectorXd* grad_params, Eigen::VectorXd* grad_input) {
  MlpWorkspace ws;
  mlp_forward_batch(net, x, ws);
  Eigen::MatrixXd gin;
  mlp_backward_batch(net, ws, upstream, grad_params,
                     grad_input != nullptr ? &gin : nullptr);
  if (grad_input != nullptr) *grad_input = gin.col(0);
}

AdamState make_adam(int n_params, double lr0, double lr_decay) {
  require(n_params > 0, "adam needs at least one parameter");
  require(lr0 > 0.0 && lr_decay > 0.0, "adam needs positive step sizes");
  AdamState s;
  s.m = Eigen::VectorXd::Zero(n_params);
  s.v = Eigen::VectorXd::Zero(n_params);
  s.lr0 = lr0;
  s.lr_decay = lr_decay;
  return s;
}

void adam_step(AdamState& state, Eigen::VectorXd& params,
               const Eigen::VectorXd& grads) {
  require(params.size() == state.m.size() && grads.size() == state.m.size(),
          "adam_step: dimension mismatch");
  if (!grads.allFinite()) fail("adam_step: non-finite gradient");
  state.t += 1;
  const double lr = state.lr0 * std::pow(state.lr_decay, state.epoch);
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
  state.v =
      state.beta2 * state.v + (1.0 - state.beta2) * grads.cwiseProduct(grads);
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  params.array() -= lr * (state.m.array() / bc1) /
                    ((state.v.array() / bc2).sqrt() + state.eps);
}

Projection project_input(const Eigen::VectorXd& raw, const Box& box) {
  require(static_cast<int>(raw.size()) == box.dim(),
          "project_input: dimension mismatch");
  Projection p;
  p.u = box.clamp(raw);
  p.mask = Eigen::VectorXd::Zero(raw.size());
  for (int i = 0; i < raw.size(); ++i) {
    if (raw[i] > box.lo[i] && raw[i] < box.hi[i]) p.mask[i] = 1.0;
  }
  return p;
}

FitCurve fit_mse(Mlp& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                 const TrainConfig& cfg) {
  const int n = static_cast<int>(X.cols());
  require(n > 0, "fit_mse: empty dataset");
  require(Y.cols() == X.cols(), "fit_mse: sample count mismatch");
  require(static_cast<int>(X.rows()) == net.n_in() &&
              static_cast<int>(Y.rows()) == net.n_out(),
          "fit_mse: dimension mismatch");
  require(cfg.epochs >= 1 && cfg.batch >= 1, "fit_mse: bad train config");

  AdamState adam = make_adam(static_cast<int>(net.params.size()), cfg.lr0,
                             cfg.lr_decay);
  Rng rng(mix_seed(cfg.seed, 0x5f17));
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  FitCurve curve;
  curve.epoch_loss.reserve(cfg.epochs);
  MlpWorkspace ws;
  Eigen::VectorXd grad(net.params.size());
  Eigen::MatrixXd xb, yb;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    adam.epoch = epoch;
    shuffle_indices(order, rng);
    double loss_sum = 0.0;
    int n_batches = 0;
    for (int start = 0; start < n; start += cfg.batch) {
      const int b = std::min(cfg.batch, n - start);
      xb.resize(X.rows(), b);
      yb.resize(Y.rows(), b);
      for (int k = 0; k < b; ++k) {
        xb.col(k) = X.col(order[start + k]);
        yb.col(k) = Y.col(order[start + k]);
      }
      const Eigen::MatrixXd& out = mlp_forward_batch(net, xb, ws);
      Eigen::MatrixXd resid = out - yb;
      loss_sum += resid.squaredNorm() / b;
      n_batches += 1;
      Eigen::MatrixXd upstream = (2.0 / b) * resid;
      grad.setZero();
      mlp_backward_batch(net, ws, upstream, &grad, nullptr);
      adam_step(adam, net.params, grad);
    }
    curve.epoch_loss.push_back(loss_sum / n_batches);
  }
  return curve;
}

}  // namespace ampc
