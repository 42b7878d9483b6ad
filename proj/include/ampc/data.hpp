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

#ifndef AMPC_DATA_HPP
#define AMPC_DATA_HPP

#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ampc/scmpc.hpp"
#include "ampc/valuefit.hpp"

namespace ampc {

/// Independent uniform draws inside a box.
struct UniformBox {
  Box box;
  int n = 0;
};

/// Row-major planar grid: x1 sweeps the outer loop, x2 the inner one.
struct Grid2D {
  double x1_lo = 0.0, x1_hi = 0.0;
  int n1 = 0;
  double x2_lo = 0.0, x2_hi = 0.0;
  int n2 = 0;
};

/// Concatenation of parts, enumerated in order.
struct SamplingPlan {
  std::vector<std::variant<UniformBox, Grid2D>> parts;
};

int plan_count(const SamplingPlan& plan);

/// States as columns, deterministic in the seed; grids ignore the seed.
Eigen::MatrixXd sample_states(const SamplingPlan& plan, std::uint64_t seed);

/// One labeled state: the solver's input draw, the value decomposition,
/// and provenance for reproducing the solve. Failed solves keep their
/// slot with flag set, so record order always matches the plan.
struct DatasetRecord {
  Eigen::VectorXd x;
  Eigen::VectorXd u_mpc;
  double V = 0.0;
  double V_p = 0.0;
  double V_xi = 0.0;
  std::uint64_t solver_seed = 0;
  double spread = 0.0;
  bool flag = false;
};

std::vector<DatasetRecord> generate_dataset(const ScmpcProblem& problem,
                                            const SamplingPlan& plan,
                                            const SolverConfig& solver_cfg,
                                            std::uint64_t seed, int workers);

/// Regression view of the records; flagged rows are excluded.
ValueDataset to_value_dataset(const std::vector<DatasetRecord>& records);

/// Cloning view: states and the recorded input draws, flagged rows
/// excluded.
void to_policy_pairs(const std::vector<DatasetRecord>& records,
                     Eigen::MatrixXd* states, Eigen::MatrixXd* inputs);

}  // namespace ampc

#endif  // AMPC_DATA_HPP
