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

#ifndef AMPC_SCMPC_HPP
#define AMPC_SCMPC_HPP

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ampc/dynamics.hpp"

namespace ampc {

/// Linear state constraints H x <= 1 (one row per face). Zero rows mean
/// the state is unconstrained.
struct PolytopeRows {
  Eigen::MatrixXd H;
};

/// Keep-out disc centered at the origin: ||x|| >= radius is required.
struct ObstacleCircle {
  double radius = 0.0;
};

using StateConstraints = std::variant<PolytopeRows, ObstacleCircle>;

/// Ellipsoidal terminal set {x : x'Px <= h_f} with P symmetric positive
/// definite.
struct TerminalSet {
  Eigen::MatrixXd P;
  double h_f = 1.0;
};

/// Finite-horizon soft-constrained optimal control problem. Stage cost
/// is x'Qx + u'Ru with terminal weight Q_N; state-constraint violations
/// are penalized through nonnegative slacks with exact-penalty weight
/// rho after tightening the constraints by eta.
struct ScmpcProblem {
  SystemModel model;
  int N = 1;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::MatrixXd Q_N;
  double rho = 1.0;
  double eta = 0.01;
  StateConstraints state_constraints = PolytopeRows{Eigen::MatrixXd(0, 0)};
  std::optional<TerminalSet> terminal;
};

/// Throws when dimensions, signs, or variant combinations are invalid.
/// The keep-out disc contains the origin, so it cannot be combined with
/// an origin-centered terminal set.
void validate_problem(const ScmpcProblem& problem);

/// Number of softened constraint rows per predicted state.
int constraint_rows(const ScmpcProblem& problem);

std::vector<Eigen::VectorXd> rollout(const SystemModel& model,
                                     const Eigen::VectorXd& x0,
                                     const Eigen::MatrixXd& u_seq);

/// Support function of {x : x'Px <= h_f} in direction a:
/// sqrt(h_f * a' P^{-1} a).
double ellipsoid_support(const Eigen::MatrixXd& P, double h_f,
                         const Eigen::VectorXd& a);

/// True iff alpha * terminal set fits inside the softened polytope
/// {x : H x <= 1(1 - eta) + xi_N}. Zero margin counts as contained.
bool terminal_containment(double alpha, const TerminalSet& terminal,
                          const Eigen::MatrixXd& H, double eta,
                          const Eigen::VectorXd& xi_N,
                          Eigen::VectorXd* margins = nullptr);

/// Slack variables attached to one predicted trajectory. Stage slacks
/// are columns of xi (steps 0..N-1); xi_N is shared across all stage
/// penalty terms and also absorbs terminal-state residuals (terminal
/// containment margins for the polytope form, the keep-out residual of
/// the final state for the obstacle form). terminal_overflow is the
/// membership excess x_N'Px_N - h_f when not even alpha = 1 contains the
/// final state; it keeps the solver total where the hard problem would
/// be infeasible.
struct SlackAssignment {
  Eigen::MatrixXd xi;
  Eigen::VectorXd xi_N;
  double alpha = 1.0;
  double terminal_overflow = 0.0;
};

/// Cost-minimal slacks for a fixed trajectory, in closed form. With no
/// terminal coupling xi_N = 0 and each stage slack is the positive part
/// of its residual. With a terminal set, alpha is the largest feasible
/// scaling in [0, 1] that adds no penalty beyond the membership lower
/// bound, and xi_N covers the containment margins at that alpha.
SlackAssignment optimal_slacks(const ScmpcProblem& problem,
                               const std::vector<Eigen::VectorXd>& x_traj);

struct CostTerms {
  double J_p = 0.0;
  double J_xi = 0.0;
  double total = 0.0;
};

/// Objective value at (x0, u_seq): rolls the dynamics out, eliminates
/// the slacks in closed form, and returns the quadratic part J_p, the
/// penalty part J_xi, and their sum.
CostTerms scmpc_cost(const ScmpcProblem& problem, const Eigen::VectorXd& x0,
                     const Eigen::MatrixXd& u_seq);

/// Objective value at (x0, u_seq) with slacks eliminated, plus its
/// subgradient with respect to the flattened input sequence when
/// grad_u is non-null. This is the function the solver descends.
CostTerms scmpc_objective(const ScmpcProblem& problem,
                          const Eigen::VectorXd& x0,
                          const Eigen::MatrixXd& u_seq,
                          Eigen::VectorXd* grad_u = nullptr);

enum class RestartInit {
  kUniform,      // inputs drawn uniformly in the input box
  kSignedState,  // all inputs set to +x0 or -x0 (scalar problems)
};

struct SolverConfig {
  int restarts = 20;
  int iterations = 400;
  double step0 = 0.1;
  double step_decay = 0.995;
  double tie_tol_rel = 1e-3;  // tie window: tie_tol_rel * (1 + |best|)
  double grad_tol = 1e-12;    // early stop on vanishing subgradient
  RestartInit init = RestartInit::kUniform;
};

struct ScmpcSolution {
  Eigen::MatrixXd u_seq;
  std::vector<Eigen::VectorXd> x_traj;
  SlackAssignment slacks;
  double alpha = 1.0;
  double V = 0.0;
  double V_p = 0.0;
  double V_xi = 0.0;
  int restarts_used = 0;
  double value_spread = 0.0;
};

/// Multi-start projected gradient descent over the input sequence with
/// Adam-style steps. Restart k draws its start from an independent
/// stream of `seed`, so the best value over the first k restarts is
/// non-increasing in k. When several restarts land within the tie
/// window of the best value, one is chosen uniformly at random; that
/// draw is how set-valued optimal solutions surface in sampled data.
ScmpcSolution solve_scmpc(const ScmpcProblem& problem,
                          const Eigen::VectorXd& x0, const SolverConfig& cfg,
                          std::uint64_t seed);

}  // namespace ampc

#endif  // AMPC_SCMPC_HPP
