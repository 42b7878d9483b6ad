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

#ifndef AMPC_EXPERIMENTS_HPP
#define AMPC_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include "ampc/simulate.hpp"

namespace ampc {

/// Everything a pipeline run needs for one benchmark problem; the CLI
/// loads one of these and applies config-file / flag overrides on top.
struct ExperimentPreset {
  std::string name;
  ScmpcProblem problem;
  SolverConfig solver;
  SamplingPlan plan;
  bool exact_value = false;  // closed-form |x|^2 instead of a trained net
  std::vector<int> value_hidden;
  std::vector<int> policy_hidden;
  TrainConfig train;         // value regression schedule
  TrainConfig policy_train;  // policy fits; may need a longer anneal
  GridSearchSpec value_grid;
  GridSearchSpec policy_grid;
  SuiteConfig suite;
  int pistar_grid = 100;
  int eps_grid = 1000;
  Eigen::MatrixXd eps_states;  // estimator support (columns)
  Eigen::MatrixXd iss_starts;  // diagnostic start states (columns)
  std::vector<int> iss_components;
  double iss_offset_tol = 0.05;
};

/// Scalar benchmark: two-valued optimal policy, closed-form value.
ExperimentPreset quad1d_preset();

/// Planar constant-speed benchmark with the keep-out disc.
ExperimentPreset unicycle_preset();

ExperimentPreset preset_by_name(const std::string& name);

}  // namespace ampc

#endif  // AMPC_EXPERIMENTS_HPP
