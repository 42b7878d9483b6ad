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

#include "ampc/checks.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>

namespace ampc {

namespace {

AssumptionAudit input_audit_core(
    const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& eval_batch,
    const Box& input_box, const Box& state_box, long n_samples,
    std::uint64_t seed) {
  AssumptionAudit audit;
  audit.id = "input-constraint";
  audit.n_samples = n_samples;
  if (n_samples == 0) {
    audit.pass = true;
    audit.notes = "no samples drawn; vacuous pass";
    return audit;
  }

  Rng rng(mix_seed(seed, 0x2a));
  const long chunk = 4096;
  double worst = 0.0;
  long done = 0;
  while (done < n_samples) {
    const long b = std::min(chunk, n_samples - done);
    Eigen::MatrixXd X(state_box.dim(), b);
    for (long j = 0; j < b; ++j) X.col(j) = rng.uniform_vec(state_box);
    Eigen::MatrixXd U = eval_batch(X);
    for (long j = 0; j < b; ++j) {
      for (int d = 0; d < U.rows(); ++d) {
        const double excess = std::max(
            {0.0, input_box.lo[d] - U(d, j), U(d, j) - input_box.hi[d]});
        worst = std::max(worst, excess);
      }
    }
    done += b;
  }
  audit.max_violation = worst;
  audit.pass = worst == 0.0;
  return audit;
}

}  // namespace

AssumptionAudit audit_input_constraint(const PolicyModel& pm,
                                       const Box& state_box, long n_samples,
                                       std::uint64_t seed) {
  return input_audit_core(
      [&](const Eigen::MatrixXd& X) { return policy_eval_batch(pm, X); },
      pm.box, state_box, n_samples, seed);
}

AssumptionAudit audit_input_constraint(const PolicyFn& policy,
                                       const Box& input_box,
                                       const Box& state_box, long n_samples,
                                       std::uint64_t seed) {
  return input_audit_core(
      [&](const Eigen::MatrixXd& X) {
        Eigen::MatrixXd U(input_box.dim(), X.cols());
        for (int j = 0; j < X.cols(); ++j) U.col(j) = policy(X.col(j));
        return U;
      },
      input_box, state_box, n_samples, seed);
}

AssumptionAudit audit_descent_inequality(const PolicyFn& policy,
                                         const ValueModel& value,
                                         const ScmpcProblem& problem,
                                         const Eigen::MatrixXd& states,
                                         double eps_v, double eps_pi,
                                         const SolverConfig& solver_cfg,
                                         std::uint64_t seed, double tol,
                                         int workers) {
  const int n = static_cast<int>(states.cols());
  require(n > 0, "empty state set");

  std::vector<double> margins(n, std::numeric_limits<double>::infinity());
  std::atomic<int> skipped{0};
  parallel_for(n, workers, [&](int j) {
    const Eigen::VectorXd x = states.col(j);
    try {
      ScmpcSolution at_x =
          solve_scmpc(problem, x, solver_cfg, mix_seed(seed, 2 * j));
      const Eigen::VectorXd u_mpc = at_x.u_seq.col(0);
      const Eigen::VectorXd succ = step(problem.model, x, u_mpc);
      ScmpcSolution at_succ =
          solve_scmpc(problem, succ, solver_cfg, mix_seed(seed, 2 * j + 1));

      const double lhs =
          loss_mpc(x, policy(x), value, problem.model, problem.Q, problem.R);
      const double rhs = x.dot(problem.Q * x) + u_mpc.dot(problem.R * u_mpc) +
                         at_succ.V + eps_v + eps_pi;
      margins[j] = rhs - lhs;
    } catch (const std::exception&) {
      skipped.fetch_add(1);
    }
  });

  AssumptionAudit audit;
  audit.id = "descent-inequality";
  audit.n_samples = n;
  double worst = std::numeric_limits<double>::infinity();
  for (double m : margins) worst = std::min(worst, m);
  audit.max_violation = std::max(0.0, -worst);
  audit.pass = worst >= -tol;
  audit.notes = "worst margin " + std::to_string(worst) + "; skipped " +
                std::to_string(skipped.load());
  return audit;
}

IssFit iss_diagnostic(const TrajectoryRecord& traj,
                      const std::vector<int>& error_components,
                      double offset_tol) {
  require(!error_components.empty(), "no error components selected");
  const int T = static_cast<int>(traj.states.cols()) - 1;
  require(T >= 0, "empty trajectory");

  std::vector<double> e(T + 1, 0.0);
  for (int k = 0; k <= T; ++k) {
    double s = 0.0;
    for (int c : error_components) {
      require(c >= 0 && c < traj.states.rows(), "component out of range");
      s += traj.states(c, k) * traj.states(c, k);
    }
    e[k] = std::sqrt(s);
  }

  // Grid scan; smallest offset wins, first hit kept on ties. Only
  // envelopes that have decayed into the target neighborhood by the
  // final step are admissible, so a slow envelope cannot hide a signal
  // that never converges. The no-envelope fallback is always valid.
  IssFit best;
  best.c = 0.0;
  best.lambda = 0.0;
  best.offset = 0.0;
  for (int k = 0; k <= T; ++k) best.offset = std::max(best.offset, e[k]);

  const double cs[] = {1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0};
  for (double c : cs) {
    for (int li = 0; li < 100; ++li) {
      const double lambda = 0.5 + 0.495 * li / 99.0;
      if (c * std::pow(lambda, T) * e[0] > offset_tol) continue;
      double offset = 0.0;
      double env = c * e[0];
      for (int k = 0; k <= T; ++k) {
        offset = std::max(offset, e[k] - env);
        env *= lambda;
      }
      if (offset < best.offset - 1e-12) {
        best.c = c;
        best.lambda = lambda;
        best.offset = offset;
      }
    }
  }
  best.pass = best.offset <= offset_tol;
  return best;
}

}  // namespace ampc
