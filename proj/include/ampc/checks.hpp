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

#ifndef AMPC_CHECKS_HPP
#define AMPC_CHECKS_HPP

#include <string>

#include "ampc/simulate.hpp"

namespace ampc {

struct AssumptionAudit {
  std::string id;
  long n_samples = 0;
  double max_violation = 0.0;
  bool pass = false;
  std::string notes;
};

/// Samples states in `state_box` and measures how far the projected
/// policy output leaves the input box (0 when inside). Passes only on
/// exactly zero excess; n_samples = 0 passes vacuously.
AssumptionAudit audit_input_constraint(const PolicyModel& pm,
                                       const Box& state_box, long n_samples,
                                       std::uint64_t seed);

/// Same audit over an arbitrary feedback law; catches laws that skip
/// the projection.
AssumptionAudit audit_input_constraint(const PolicyFn& policy,
                                       const Box& input_box,
                                       const Box& state_box, long n_samples,
                                       std::uint64_t seed);

/// Empirical one-step descent check: at every state, the look-ahead
/// loss of the policy must not exceed the stage cost of the solver's
/// move plus the solver value at its successor, padded by the estimated
/// value and policy error bounds. States where the solver fails are
/// skipped and counted in the notes.
AssumptionAudit audit_descent_inequality(const PolicyFn& policy,
                                         const ValueModel& value,
                                         const ScmpcProblem& problem,
                                         const Eigen::MatrixXd& states,
                                         double eps_v, double eps_pi,
                                         const SolverConfig& solver_cfg,
                                         std::uint64_t seed, double tol,
                                         int workers);

/// Exponential-plus-offset envelope fitted over one trajectory's error
/// signal e(k) = norm of the selected state components. The fit scans a
/// (c, lambda) grid and keeps the smallest offset with e(k) <=
/// c * lambda^k * e(0) + offset for all k. Only envelopes that decay
/// below offset_tol by the final step are admitted, so passing implies
/// the signal actually reaches the target neighborhood.
struct IssFit {
  double c = 1.0;
  double lambda = 0.0;
  double offset = 0.0;
  bool pass = false;
};

IssFit iss_diagnostic(const TrajectoryRecord& traj,
                      const std::vector<int>& error_components,
                      double offset_tol);

}  // namespace ampc

#endif  // AMPC_CHECKS_HPP
