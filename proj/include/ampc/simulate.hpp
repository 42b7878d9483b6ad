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

#ifndef AMPC_SIMULATE_HPP
#define AMPC_SIMULATE_HPP

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ampc/data.hpp"
#include "ampc/policyfit.hpp"
#include "ampc/scmpc.hpp"

namespace ampc {

/// Any state-feedback law: a trained net, the gridded look-ahead
/// optimizer, or the receding-horizon solver itself.
using PolicyFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct TrajectoryRecord {
  Eigen::VectorXd x0;
  Eigen::MatrixXd states;  // n_x x (T+1)
  Eigen::MatrixXd inputs;  // n_u x T
  double p_t = 0.0;        // sum of stage costs over steps 0..T-1
  double p_c = 0.0;        // sum of clamped penalty-value predictions
  int violations = 0;      // states 0..T-1 inside the forbidden region
  double median_step_time_s = 0.0;
};

struct ClosedLoopReport {
  std::vector<TrajectoryRecord> trajectories;
  double mean_performance = 0.0;  // mean of p_t + p_c
  long total_violations = 0;
  double mean_step_time_s = 0.0;
  double median_step_time_s = 0.0;
};

/// Rolls the policy out for T steps. p_c accumulates the clamped
/// penalty branch of `value_for_pc` when given; `violation_region`
/// counts strict obstacle membership or untightened polytope
/// violations when given.
TrajectoryRecord closed_loop(const PolicyFn& policy, const SystemModel& model,
                             const Eigen::VectorXd& x0, int T,
                             const Eigen::MatrixXd& Q,
                             const Eigen::MatrixXd& R,
                             const ValueModel* value_for_pc,
                             const StateConstraints* violation_region);

/// Pointwise look-ahead optimizer over an input grid (single input
/// dimension); ties resolve toward the smaller input.
Eigen::VectorXd pi_star_grid(const Eigen::VectorXd& x, const ValueModel& value,
                             const SystemModel& model,
                             const Eigen::MatrixXd& Q,
                             const Eigen::MatrixXd& R, int n_grid);

struct SuiteConfig {
  int n_traj = 500;
  int T = 100;
  Box x0_box;
  // Redraw starts that land strictly inside this disc; 0 disables.
  double reject_radius = 0.0;
};

ClosedLoopReport evaluate_suite(const PolicyFn& policy,
                                const SystemModel& model,
                                const Eigen::MatrixXd& Q,
                                const Eigen::MatrixXd& R,
                                const ValueModel* value_for_pc,
                                const StateConstraints* violation_region,
                                const SuiteConfig& suite, std::uint64_t seed,
                                int workers);

/// Scalar benchmark harness: label states with the set-valued solver,
/// train cloning and look-ahead policies, and measure distances to the
/// known two-valued optimum {x, -x}.
struct ConsistencyConfig {
  ScmpcProblem problem;     // scalar problem whose optima are {x, -x}
  SolverConfig solver;      // labeling configuration
  ValueModel value;         // value surrogate used by the look-ahead loss
  double lo = -1.0;
  double hi = 1.0;
  int test_grid = 401;
  std::vector<int> hidden;  // policy architecture
  TrainConfig train;
};

struct ConsistencyRow {
  std::string method;  // "il" or "bc"
  int n_s = 0;
  std::uint64_t seed = 0;
  double mean_dist = 0.0;
  double sup_dist = 0.0;
};

std::vector<ConsistencyRow> consistency_experiment(
    const std::vector<int>& ns_list, const std::vector<std::uint64_t>& seeds,
    const ConsistencyConfig& cfg, int workers);

/// Mean and sup of min(|u(x) - x|, |u(x) + x|) over a uniform grid of
/// [lo, hi]; the measurement behind the consistency rows.
void signed_target_distance(const PolicyFn& policy, double lo, double hi,
                            int n_grid, double* mean_dist, double* sup_dist);

}  // namespace ampc

#endif  // AMPC_SIMULATE_HPP
