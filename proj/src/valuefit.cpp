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

#include "ampc/valuefit.hpp"

#include <algorithm>
#include <cmath>

namespace ampc {

namespace {

void check_input(const ValueModel& vm, const Eigen::VectorXd& x) {
  if (vm.exact_square) return;
  require(vm.net_p.has_value(), "value model has no quadratic branch");
  require(static_cast<int>(x.size()) == vm.net_p->n_in(),
          "value input dimension mismatch");
}

// Raw branch output and its clamp indicator for a single state.
double branch_eval(const Mlp& net, const Eigen::VectorXd& x) {
  return mlp_forward(net, x)[0];
}

}  // namespace

ValueParts value_eval_parts(const ValueModel& vm, const Eigen::VectorXd& x) {
  check_input(vm, x);
  ValueParts p;
  if (vm.exact_square) {
    p.V_p = x.squaredNorm();
  } else {
    p.V_p = std::max(0.0, branch_eval(*vm.net_p, x));
  }
  if (vm.net_xi.has_value()) {
    p.V_xi = std::max(0.0, branch_eval(*vm.net_xi, x));
  }
  p.V = p.V_p + p.V_xi;
  return p;
}

double value_eval(const ValueModel& vm, const Eigen::VectorXd& x) {
  return value_eval_parts(vm, x).V;
}

Eigen::VectorXd value_input_grad(const ValueModel& vm,
                                 const Eigen::VectorXd& x) {
  check_input(vm, x);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  if (vm.exact_square) {
    g = 2.0 * x;
  } else if (branch_eval(*vm.net_p, x) > 0.0) {
    Eigen::VectorXd gx;
    mlp_backward(*vm.net_p, x, Eigen::VectorXd::Ones(1), nullptr, &gx);
    g += gx;
  }
  if (vm.net_xi.has_value() && branch_eval(*vm.net_xi, x) > 0.0) {
    Eigen::VectorXd gx;
    mlp_backward(*vm.net_xi, x, Eigen::VectorXd::Ones(1), nullptr, &gx);
    g += gx;
  }
  return g;
}

void value_eval_batch(const ValueModel& vm, const Eigen::MatrixXd& X,
                      Eigen::VectorXd* values, Eigen::MatrixXd* grads) {
  const int n = static_cast<int>(X.cols());
  if (values != nullptr) values->setZero(n);
  if (grads != nullptr) grads->setZero(X.rows(), n);

  if (vm.exact_square) {
    if (values != nullptr) *values = X.colwise().squaredNorm().transpose();
    if (grads != nullptr) *grads = 2.0 * X;
  } else {
    require(vm.net_p.has_value(), "value model has no quadratic branch");
  }

  const Mlp* branches[2] = {
      vm.exact_square ? nullptr : &*vm.net_p,
      vm.net_xi.has_value() ? &*vm.net_xi : nullptr};
  MlpWorkspace ws;
  for (const Mlp* net : branches) {
    if (net == nullptr) continue;
    const Eigen::MatrixXd& out = mlp_forward_batch(*net, X, ws);
    // Clamp mask: contributes only where the raw output is positive.
    Eigen::MatrixXd mask = (out.array() > 0.0).cast<double>();
    if (values != nullptr) {
      *values += out.cwiseMax(0.0).row(0).transpose();
    }
    if (grads != nullptr) {
      Eigen::MatrixXd gx;
      mlp_backward_batch(*net, ws, mask, nullptr, &gx);
      *grads += gx;
    }
  }
}

TrainedNet fit_scalar_net(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const std::vector<int>& hidden,
                          const TrainConfig& base, const GridSearchSpec& grid,
                          std::uint64_t seed, int workers) {
  require(X.cols() == y.size() && X.cols() > 0, "empty or ragged dataset");
  require(y.allFinite(), "targets must be finite");

  std::vector<int> arch;
  arch.push_back(static_cast<int>(X.rows()));
  arch.insert(arch.end(), hidden.begin(), hidden.end());
  arch.push_back(1);

  // Unit-RMS target scaling keeps Adam step sizes meaningful when the
  // raw targets span several orders of magnitude.
  const double rms = std::sqrt(y.squaredNorm() / y.size());
  const double scale = rms > 0.0 ? rms : 1.0;
  Eigen::MatrixXd Y = (y / scale).transpose();

  std::vector<double> lrs = grid.lrs.empty()
                                ? std::vector<double>{base.lr0}
                                : grid.lrs;
  std::vector<double> decays = grid.decays.empty()
                                   ? std::vector<double>{base.lr_decay}
                                   : grid.decays;

  struct Cell {
    Mlp net;
    FitCurve curve;
    double lr = 0.0;
    double decay = 0.0;
  };
  const int nd = static_cast<int>(decays.size());
  const int n_cells = static_cast<int>(lrs.size()) * nd;
  std::vector<Cell> cells(n_cells);
  parallel_for(n_cells, workers, [&](int c) {
    Cell& cell = cells[c];
    cell.lr = lrs[c / nd];
    cell.decay = decays[c % nd];
    TrainConfig cfg = base;
    cfg.lr0 = cell.lr;
    cfg.lr_decay = cell.decay;
    cell.net = make_mlp(arch, mix_seed(seed, 0x1000 + c));
    cfg.seed = mix_seed(seed, 0x2000 + c);
    cell.curve = fit_mse(cell.net, X, Y, cfg);
  });

  int best = 0;
  for (int c = 1; c < n_cells; ++c) {
    if (cells[c].curve.final_loss() < cells[best].curve.final_loss()) best = c;
  }

  TrainedNet out;
  out.net = std::move(cells[best].net);
  out.curve = std::move(cells[best].curve);
  out.lr = cells[best].lr;
  out.lr_decay = cells[best].decay;

  // Fold the target scale into the linear output layer; exact because
  // the last layer has no activation. Curves are rescaled to match.
  const int n_last = (arch[arch.size() - 2] + 1) * arch.back();
  out.net.params.tail(n_last) *= scale;
  for (double& l : out.curve.epoch_loss) l *= scale * scale;
  return out;
}

ValueFitResult fit_value(const ValueDataset& data,
                         const std::vector<int>& hidden,
                         const TrainConfig& base, const GridSearchSpec& grid,
                         std::uint64_t seed, int workers) {
  require(data.X.cols() > 0, "empty dataset");
  require(data.X.cols() == data.V_p.size(), "V_p target count mismatch");
  require(data.X.cols() == data.V_xi.size(), "V_xi target count mismatch");

  ValueFitResult r;
  r.p = fit_scalar_net(data.X, data.V_p, hidden, base, grid,
                       mix_seed(seed, 0xa), workers);
  r.model.net_p = r.p.net;
  r.has_xi = data.V_xi.lpNorm<Eigen::Infinity>() > 0.0;
  if (r.has_xi) {
    r.xi = fit_scalar_net(data.X, data.V_xi, hidden, base, grid,
                          mix_seed(seed, 0xb), workers);
    r.model.net_xi = r.xi.net;
  }
  return r;
}

std::pair<double, double> estimate_eps_v(const ValueModel& vm,
                                         const ValueDataset& data) {
  require(data.X.cols() > 0 && data.X.cols() == data.V.size(),
          "empty or ragged dataset");
  Eigen::VectorXd pred;
  value_eval_batch(vm, data.X, &pred, nullptr);
  double abs_bound = 0.0;
  double rel_bound = 0.0;
  for (int j = 0; j < pred.size(); ++j) {
    const double err = std::abs(pred[j] - data.V[j]);
    abs_bound = std::max(abs_bound, err);
    rel_bound = std::max(rel_bound, err / (std::abs(data.V[j]) + 1.0));
  }
  return {abs_bound, rel_bound};
}

}  // namespace ampc
