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

#include "ampc/policyfit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace ampc {

namespace {

std::vector<int> full_arch(int n_in, const std::vector<int>& hidden,
                           int n_out) {
  std::vector<int> arch;
  arch.push_back(n_in);
  arch.insert(arch.end(), hidden.begin(), hidden.end());
  arch.push_back(n_out);
  return arch;
}

// Trains one network per (lr, decay) cell and keeps the cell with the
// lowest final training loss. The loop body owns all mutable state, so
// cells can run on worker threads.
PolicyFitResult grid_train(
    const std::vector<int>& arch, const Box& box, const TrainConfig& base,
    const GridSearchSpec& grid, std::uint64_t seed, int workers,
    const std::function<FitCurve(Mlp&, const TrainConfig&)>& train_one) {
  std::vector<double> lrs =
      grid.lrs.empty() ? std::vector<double>{base.lr0} : grid.lrs;
  std::vector<double> decays =
      grid.decays.empty() ? std::vector<double>{base.lr_decay} : grid.decays;

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
    cfg.seed = mix_seed(seed, 0x2000 + c);
    cell.net = make_mlp(arch, mix_seed(seed, 0x1000 + c));
    cell.curve = train_one(cell.net, cfg);
  });

  int best = 0;
  for (int c = 1; c < n_cells; ++c) {
    if (cells[c].curve.final_loss() < cells[best].curve.final_loss()) best = c;
  }
  PolicyFitResult out;
  out.model.net = std::move(cells[best].net);
  out.model.box = box;
  out.curve = std::move(cells[best].curve);
  out.lr = cells[best].lr;
  out.lr_decay = cells[best].decay;
  return out;
}

}  // namespace

Eigen::VectorXd policy_eval(const PolicyModel& pm, const Eigen::VectorXd& x) {
  return project_input(mlp_forward(pm.net, x), pm.box).u;
}

Eigen::MatrixXd policy_eval_batch(const PolicyModel& pm,
                                  const Eigen::MatrixXd& X) {
  MlpWorkspace ws;
  Eigen::MatrixXd out = mlp_forward_batch(pm.net, X, ws);
  for (int j = 0; j < out.cols(); ++j) {
    out.col(j) = project_input(out.col(j), pm.box).u;
  }
  return out;
}

double loss_mpc(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                const ValueModel& value, const SystemModel& model,
                const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  return x.dot(Q * x) + u.dot(R * u) + value_eval(value, step(model, x, u));
}

PolicyFitResult train_policy_il(const Eigen::MatrixXd& states,
                                const ValueModel& value,
                                const SystemModel& model,
                                const Eigen::MatrixXd& Q,
                                const Eigen::MatrixXd& R,
                                const std::vector<int>& hidden,
                                const TrainConfig& base,
                                const GridSearchSpec& grid, std::uint64_t seed,
                                int workers) {
  const int n = static_cast<int>(states.cols());
  require(n > 0, "empty state set");
  require(static_cast<int>(states.rows()) == model.n_x,
          "state dimension mismatch");

  auto train_one = [&](Mlp& net, const TrainConfig& cfg) -> FitCurve {
    require(cfg.epochs >= 1 && cfg.batch >= 1, "bad training config");
    Rng rng(mix_seed(cfg.seed, 0x5f17));
    AdamState adam =
        make_adam(static_cast<int>(net.params.size()), cfg.lr0, cfg.lr_decay);
    MlpWorkspace ws;
    FitCurve curve;
    curve.epoch_loss.reserve(cfg.epochs);
    Eigen::VectorXd grad_params;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      adam.epoch = epoch;
      shuffle_indices(order, rng);
      double loss_sum = 0.0;
      int batches = 0;
      for (int start = 0; start < n; start += cfg.batch) {
        const int b = std::min(cfg.batch, n - start);
        Eigen::MatrixXd Xb(model.n_x, b);
        for (int j = 0; j < b; ++j) Xb.col(j) = states.col(order[start + j]);

        const Eigen::MatrixXd& raw = mlp_forward_batch(net, Xb, ws);
        Eigen::MatrixXd proj(model.n_u, b);
        Eigen::MatrixXd mask(model.n_u, b);
        for (int j = 0; j < b; ++j) {
          Projection pr = project_input(raw.col(j), model.input_box);
          proj.col(j) = pr.u;
          mask.col(j) = pr.mask;
        }

        Eigen::MatrixXd succ(model.n_x, b);
        for (int j = 0; j < b; ++j) {
          succ.col(j) = step(model, Xb.col(j), proj.col(j));
        }
        Eigen::VectorXd v;
        Eigen::MatrixXd gv;
        value_eval_batch(value, succ, &v, &gv);

        double loss = 0.0;
        Eigen::MatrixXd dproj(model.n_u, b);
        for (int j = 0; j < b; ++j) {
          loss += Xb.col(j).dot(Q * Xb.col(j)) +
                  proj.col(j).dot(R * proj.col(j)) + v[j];
          Jacobians jac = jacobians(model, Xb.col(j), proj.col(j));
          dproj.col(j) = 2.0 * R * proj.col(j) + jac.B.transpose() * gv.col(j);
        }
        loss /= b;
        if (!std::isfinite(loss)) fail("train_policy_il: loss diverged");

        Eigen::MatrixXd upstream =
            (mask.array() * dproj.array()).matrix() / static_cast<double>(b);
        mlp_backward_batch(net, ws, upstream, &grad_params, nullptr);
        adam_step(adam, net.params, grad_params);
        loss_sum += loss;
        batches += 1;
      }
      curve.epoch_loss.push_back(loss_sum / batches);
    }
    return curve;
  };

  return grid_train(full_arch(model.n_x, hidden, model.n_u), model.input_box,
                    base, grid, seed, workers, train_one);
}

PolicyFitResult train_policy_bc(const Eigen::MatrixXd& states,
                                const Eigen::MatrixXd& inputs,
                                const SystemModel& model,
                                const std::vector<int>& hidden,
                                const TrainConfig& base,
                                const GridSearchSpec& grid, std::uint64_t seed,
                                int workers) {
  const int n = static_cast<int>(states.cols());
  require(n > 0 && inputs.cols() == n, "empty or ragged pair set");
  require(static_cast<int>(states.rows()) == model.n_x &&
              static_cast<int>(inputs.rows()) == model.n_u,
          "pair dimension mismatch");

  auto train_one = [&](Mlp& net, const TrainConfig& cfg) -> FitCurve {
    require(cfg.epochs >= 1 && cfg.batch >= 1, "bad training config");
    Rng rng(mix_seed(cfg.seed, 0x5f17));
    AdamState adam =
        make_adam(static_cast<int>(net.params.size()), cfg.lr0, cfg.lr_decay);
    MlpWorkspace ws;
    FitCurve curve;
    curve.epoch_loss.reserve(cfg.epochs);
    Eigen::VectorXd grad_params;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      adam.epoch = epoch;
      shuffle_indices(order, rng);
      double loss_sum = 0.0;
      int batches = 0;
      for (int start = 0; start < n; start += cfg.batch) {
        const int b = std::min(cfg.batch, n - start);
        Eigen::MatrixXd Xb(model.n_x, b);
        Eigen::MatrixXd Ub(model.n_u, b);
        for (int j = 0; j < b; ++j) {
          Xb.col(j) = states.col(order[start + j]);
          Ub.col(j) = inputs.col(order[start + j]);
        }
        const Eigen::MatrixXd& raw = mlp_forward_batch(net, Xb, ws);
        Eigen::MatrixXd resid(model.n_u, b);
        Eigen::MatrixXd mask(model.n_u, b);
        for (int j = 0; j < b; ++j) {
          Projection pr = project_input(raw.col(j), model.input_box);
          resid.col(j) = pr.u - Ub.col(j);
          mask.col(j) = pr.mask;
        }
        const double loss = resid.squaredNorm() / b;
        if (!std::isfinite(loss)) fail("train_policy_bc: loss diverged");
        Eigen::MatrixXd upstream =
            (mask.array() * resid.array()).matrix() * (2.0 / b);
        mlp_backward_batch(net, ws, upstream, &grad_params, nullptr);
        adam_step(adam, net.params, grad_params);
        loss_sum += loss;
        batches += 1;
      }
      curve.epoch_loss.push_back(loss_sum / batches);
    }
    return curve;
  };

  return grid_train(full_arch(model.n_x, hidden, model.n_u), model.input_box,
                    base, grid, seed, workers, train_one);
}

std::pair<double, double> estimate_eps_pi(
    const PolicyModel& pm, const Eigen::MatrixXd& states,
    const ValueModel& value, const SystemModel& model,
    const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R, int grid_n) {
  require(model.n_u == 1,
          "grid argmin supports single-input models only");
  require(grid_n >= 2, "grid needs at least two points");
  require(states.cols() > 0, "empty state set");

  const double lo = model.input_box.lo[0];
  const double hi = model.input_box.hi[0];
  double abs_bound = 0.0;
  double rel_bound = 0.0;
  Eigen::VectorXd v;
  for (int j = 0; j < states.cols(); ++j) {
    const Eigen::VectorXd x = states.col(j);
    const double stage_x = x.dot(Q * x);

    // Batched successor sweep over the input grid.
    Eigen::MatrixXd succ(model.n_x, grid_n);
    Eigen::VectorXd us(grid_n);
    for (int k = 0; k < grid_n; ++k) {
      us[k] = lo + (hi - lo) * static_cast<double>(k) / (grid_n - 1);
      Eigen::VectorXd u(1);
      u << us[k];
      succ.col(k) = step(model, x, u);
    }
    value_eval_batch(value, succ, &v, nullptr);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid_n; ++k) {
      const double l = stage_x + R(0, 0) * us[k] * us[k] + v[k];
      if (l < best) best = l;
    }

    const double l_pi = loss_mpc(x, policy_eval(pm, x), value, model, Q, R);
    const double gap = std::max(0.0, l_pi - best);
    abs_bound = std::max(abs_bound, gap);
    rel_bound = std::max(rel_bound, gap / (std::abs(best) + 1.0));
  }
  return {abs_bound, rel_bound};
}

}  // namespace ampc
