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

#include "ampc/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace ampc {

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

bool violates(const StateConstraints& region, const Eigen::VectorXd& x) {
  if (std::holds_alternative<ObstacleCircle>(region)) {
    const double r = std::get<ObstacleCircle>(region).radius;
    return x.squaredNorm() < r * r;  // strict interior
  }
  const auto& poly = std::get<PolytopeRows>(region);
  for (int j = 0; j < poly.H.rows(); ++j) {
    if (poly.H.row(j).dot(x) > 1.0) return true;
  }
  return false;
}

}  // namespace

TrajectoryRecord closed_loop(const PolicyFn& policy, const SystemModel& model,
                             const Eigen::VectorXd& x0, int T,
                             const Eigen::MatrixXd& Q,
                             const Eigen::MatrixXd& R,
                             const ValueModel* value_for_pc,
                             const StateConstraints* violation_region) {
  require(T >= 1, "horizon must be at least 1");
  require(static_cast<int>(x0.size()) == model.n_x,
          "initial state dimension mismatch");

  TrajectoryRecord rec;
  rec.x0 = x0;
  rec.states.resize(model.n_x, T + 1);
  rec.inputs.resize(model.n_u, T);
  rec.states.col(0) = x0;

  std::vector<double> step_times;
  step_times.reserve(T);
  Eigen::VectorXd x = x0;
  for (int k = 0; k < T; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Eigen::VectorXd u = policy(x);
    const auto t1 = std::chrono::steady_clock::now();
    step_times.push_back(std::chrono::duration<double>(t1 - t0).count());
    if (!u.allFinite()) fail("closed_loop: policy returned non-finite input");
    require(static_cast<int>(u.size()) == model.n_u,
            "closed_loop: policy output dimension mismatch");

    rec.inputs.col(k) = u;
    rec.p_t += x.dot(Q * x) + u.dot(R * u);
    if (value_for_pc != nullptr) {
      rec.p_c += value_eval_parts(*value_for_pc, x).V_xi;
    }
    if (violation_region != nullptr && violates(*violation_region, x)) {
      rec.violations += 1;
    }
    x = step(model, x, u);
    rec.states.col(k + 1) = x;
  }
  rec.median_step_time_s = median_of(step_times);
  return rec;
}

Eigen::VectorXd pi_star_grid(const Eigen::VectorXd& x, const ValueModel& value,
                             const SystemModel& model,
                             const Eigen::MatrixXd& Q,
                             const Eigen::MatrixXd& R, int n_grid) {
  require(model.n_u == 1, "input gridding supports single-input models only");
  require(n_grid >= 2, "grid needs at least two points");

  const double lo = model.input_box.lo[0];
  const double hi = model.input_box.hi[0];
  const double stage_x = x.dot(Q * x);

  Eigen::MatrixXd succ(model.n_x, n_grid);
  Eigen::VectorXd us(n_grid);
  Eigen::VectorXd u(1);
  for (int k = 0; k < n_grid; ++k) {
    us[k] = lo + (hi - lo) * static_cast<double>(k) / (n_grid - 1);
    u[0] = us[k];
    succ.col(k) = step(model, x, u);
  }
  Eigen::VectorXd v;
  value_eval_batch(value, succ, &v, nullptr);

  // Ascending sweep with strict improvement: ties keep the smaller input.
  int best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_grid; ++k) {
    const double l = stage_x + R(0, 0) * us[k] * us[k] + v[k];
    if (l < best_loss) {
      best_loss = l;
      best = k;
    }
  }
  u[0] = us[best];
  return u;
}

ClosedLoopReport evaluate_suite(const PolicyFn& policy,
                                const SystemModel& model,
                                const Eigen::MatrixXd& Q,
                                const Eigen::MatrixXd& R,
                                const ValueModel* value_for_pc,
                                const StateConstraints* violation_region,
                                const SuiteConfig& suite, std::uint64_t seed,
                                int workers) {
  require(suite.n_traj >= 1, "suite needs at least one trajectory");
  require(suite.x0_box.dim() == model.n_x, "start box dimension mismatch");

  ClosedLoopReport report;
  report.trajectories.resize(suite.n_traj);
  parallel_for(suite.n_traj, workers, [&](int i) {
    Rng rng(mix_seed(seed, 0x9000 + static_cast<std::uint64_t>(i)));
    Eigen::VectorXd x0 = rng.uniform_vec(suite.x0_box);
    while (suite.reject_radius > 0.0 &&
           x0.squaredNorm() < suite.reject_radius * suite.reject_radius) {
      x0 = rng.uniform_vec(suite.x0_box);
    }
    report.trajectories[i] = closed_loop(policy, model, x0, suite.T, Q, R,
                                         value_for_pc, violation_region);
  });

  std::vector<double> medians;
  medians.reserve(suite.n_traj);
  double perf = 0.0;
  double time_sum = 0.0;
  for (const auto& t : report.trajectories) {
    perf += t.p_t + t.p_c;
    report.total_violations += t.violations;
    medians.push_back(t.median_step_time_s);
    time_sum += t.median_step_time_s;
  }
  report.mean_performance = perf / suite.n_traj;
  report.mean_step_time_s = time_sum / suite.n_traj;
  report.median_step_time_s = median_of(medians);
  return report;
}

void signed_target_distance(const PolicyFn& policy, double lo, double hi,
                            int n_grid, double* mean_dist, double* sup_dist) {
  require(n_grid >= 2, "grid needs at least two points");
  double sum = 0.0;
  double sup = 0.0;
  Eigen::VectorXd x(1);
  for (double xi : linspace(lo, hi, n_grid)) {
    x[0] = xi;
    const double u = policy(x)[0];
    const double d = std::min(std::abs(u - xi), std::abs(u + xi));
    sum += d;
    sup = std::max(sup, d);
  }
  if (mean_dist != nullptr) *mean_dist = sum / n_grid;
  if (sup_dist != nullptr) *sup_dist = sup;
}

std::vector<ConsistencyRow> consistency_experiment(
    const std::vector<int>& ns_list, const std::vector<std::uint64_t>& seeds,
    const ConsistencyConfig& cfg, int workers) {
  require(!ns_list.empty() && !seeds.empty(), "empty experiment grid");
  require(cfg.problem.model.n_x == 1 && cfg.problem.model.n_u == 1,
          "consistency experiment is defined for scalar problems");

  std::vector<ConsistencyRow> rows;
  for (std::uint64_t seed : seeds) {
    for (int n_s : ns_list) {
      const std::uint64_t run_seed =
          mix_seed(seed, 0xc0 + static_cast<std::uint64_t>(n_s));

      SamplingPlan plan;
      plan.parts.push_back(UniformBox{make_box({cfg.lo}, {cfg.hi}), n_s});
      std::vector<DatasetRecord> records = generate_dataset(
          cfg.problem, plan, cfg.solver, mix_seed(run_seed, 0x1), workers);

      Eigen::MatrixXd states, inputs;
      to_policy_pairs(records, &states, &inputs);

      PolicyFitResult il = train_policy_il(
          states, cfg.value, cfg.problem.model, cfg.problem.Q, cfg.problem.R,
          cfg.hidden, cfg.train, GridSearchSpec{}, mix_seed(run_seed, 0x2),
          workers);
      PolicyFitResult bc = train_policy_bc(
          states, inputs, cfg.problem.model, cfg.hidden, cfg.train,
          GridSearchSpec{}, mix_seed(run_seed, 0x3), workers);

      for (const char* method : {"il", "bc"}) {
        const PolicyModel& pm = method[0] == 'i' ? il.model : bc.model;
        ConsistencyRow row;
        row.method = method;
        row.n_s = n_s;
        row.seed = seed;
        signed_target_distance(
            [&](const Eigen::VectorXd& x) { return policy_eval(pm, x); },
            cfg.lo, cfg.hi, cfg.test_grid, &row.mean_dist, &row.sup_dist);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

}  // namespace ampc
