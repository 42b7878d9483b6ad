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

#include "ampc/scmpc.hpp"

#include <cmath>
#include <limits>

#include "ampc/nn.hpp"

namespace ampc {

namespace {

constexpr double kSymTol = 1e-9;

void require_symmetric(const Eigen::MatrixXd& M, const std::string& name) {
  require(M.rows() == M.cols(), name + " must be square");
  if (M.rows() == 0) return;
  const double skew = (M - M.transpose()).cwiseAbs().maxCoeff();
  require(skew <= kSymTol * (1.0 + M.cwiseAbs().maxCoeff()),
          name + " must be symmetric");
}

Eigen::LLT<Eigen::MatrixXd> factor_spd(const Eigen::MatrixXd& P,
                                       const std::string& name) {
  require_symmetric(P, name);
  Eigen::LLT<Eigen::MatrixXd> llt(P);
  require(llt.info() == Eigen::Success, name + " must be positive definite");
  return llt;
}

// Slack elimination byproducts shared by cost and gradient evaluation.
struct SlackAnalysis {
  SlackAssignment slacks;
  Eigen::MatrixXd stage_residuals;  // rows x N, columns are steps 0..N-1
  Eigen::VectorXd terminal_residual;
  Eigen::VectorXd support;  // terminal-set support values per polytope row
  double alpha_min = 0.0;
  // 0: alpha free of x_N, 1: alpha pinned at the membership bound,
  // 2: membership impossible even at alpha = 1 (overflow active).
  int alpha_branch = 0;
};

SlackAnalysis analyze_slacks(const ScmpcProblem& problem,
                             const std::vector<Eigen::VectorXd>& x_traj) {
  const int N = problem.N;
  require(static_cast<int>(x_traj.size()) == N + 1,
          "trajectory must hold N + 1 states");
  for (const auto& x : x_traj) {
    require(static_cast<int>(x.size()) == problem.model.n_x,
            "trajectory state dimension mismatch");
  }

  SlackAnalysis a;
  const int m = constraint_rows(problem);
  a.stage_residuals.resize(m, N);
  a.slacks.xi.resize(m, N);
  a.slacks.xi_N = Eigen::VectorXd::Zero(m);
  a.slacks.alpha = 1.0;

  if (std::holds_alternative<ObstacleCircle>(problem.state_constraints)) {
    const auto& obs = std::get<ObstacleCircle>(problem.state_constraints);
    const double level = obs.radius * obs.radius + problem.eta;
    for (int i = 0; i < N; ++i) {
      a.stage_residuals(0, i) = level - x_traj[i].squaredNorm();
    }
    a.terminal_residual = Eigen::VectorXd::Constant(
        1, level - x_traj[N].squaredNorm());
    a.slacks.xi_N[0] = std::max(0.0, a.terminal_residual[0]);
    for (int i = 0; i < N; ++i) {
      a.slacks.xi(0, i) =
          std::max(0.0, a.stage_residuals(0, i) - a.slacks.xi_N[0]);
    }
    return a;
  }

  const auto& poly = std::get<PolytopeRows>(problem.state_constraints);
  const double bound = 1.0 - problem.eta;
  for (int i = 0; i < N; ++i) {
    if (m > 0) {
      a.stage_residuals.col(i) =
          poly.H * x_traj[i] - Eigen::VectorXd::Constant(m, bound);
    }
  }

  if (problem.terminal.has_value()) {
    const auto& term = *problem.terminal;
    auto llt = factor_spd(term.P, "terminal P");
    a.support.resize(m);
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd aj = poly.H.row(j).transpose();
      a.support[j] = std::sqrt(term.h_f * aj.dot(llt.solve(aj)));
    }
    const double quad = x_traj[N].dot(term.P * x_traj[N]);
    a.alpha_min = std::sqrt(std::max(0.0, quad) / term.h_f);
    double alpha_pen = 1.0;
    for (int j = 0; j < m; ++j) {
      if (a.support[j] > 0.0) {
        alpha_pen = std::min(alpha_pen, bound / a.support[j]);
      }
    }
    alpha_pen = std::max(alpha_pen, 0.0);
    if (a.alpha_min > 1.0) {
      a.alpha_branch = 2;
      a.slacks.alpha = 1.0;
      a.slacks.terminal_overflow = quad - term.h_f;
    } else if (a.alpha_min > alpha_pen) {
      a.alpha_branch = 1;
      a.slacks.alpha = a.alpha_min;
    } else {
      a.alpha_branch = 0;
      a.slacks.alpha = alpha_pen;
    }
    for (int j = 0; j < m; ++j) {
      a.slacks.xi_N[j] =
          std::max(0.0, a.slacks.alpha * a.support[j] - bound);
    }
  }

  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < m; ++j) {
      a.slacks.xi(j, i) =
          std::max(0.0, a.stage_residuals(j, i) - a.slacks.xi_N[j]);
    }
  }
  return a;
}

CostTerms cost_terms(const ScmpcProblem& problem,
                     const std::vector<Eigen::VectorXd>& x_traj,
                     const Eigen::MatrixXd& u_seq,
                     const SlackAssignment& slacks) {
  const int N = problem.N;
  CostTerms c;
  for (int i = 0; i < N; ++i) {
    c.J_p += x_traj[i].dot(problem.Q * x_traj[i]) +
             u_seq.col(i).dot(problem.R * u_seq.col(i));
  }
  c.J_p += x_traj[N].dot(problem.Q_N * x_traj[N]);

  double penalty = slacks.xi_N.lpNorm<1>();
  for (int i = 0; i < N; ++i) {
    penalty += (slacks.xi_N + slacks.xi.col(i)).lpNorm<1>();
  }
  penalty += slacks.terminal_overflow;
  c.J_xi = problem.rho * penalty;
  c.total = c.J_p + c.J_xi;
  return c;
}

void clamp_flat(Eigen::VectorXd& u_flat, const Box& box, int n_u) {
  for (int k = 0; k < u_flat.size(); ++k) {
    const int d = k % n_u;
    u_flat[k] = std::min(std::max(u_flat[k], box.lo[d]), box.hi[d]);
  }
}

struct RestartResult {
  bool ok = false;
  double total = std::numeric_limits<double>::infinity();
  Eigen::VectorXd u;
};

RestartResult run_restart(const ScmpcProblem& problem,
                          const Eigen::VectorXd& x0, const SolverConfig& cfg,
                          Rng& rng) {
  const int n_u = problem.model.n_u;
  const int dim = n_u * problem.N;
  Eigen::VectorXd u(dim);
  if (cfg.init == RestartInit::kSignedState) {
    require(problem.model.n_x == 1 && n_u == 1,
            "signed-state restarts need scalar state and input");
    const double s = rng.uniform() < 0.5 ? 1.0 : -1.0;
    u.setConstant(s * x0[0]);
  } else {
    for (int k = 0; k < dim; ++k) {
      const int d = k % n_u;
      u[k] = rng.uniform(problem.model.input_box.lo[d],
                         problem.model.input_box.hi[d]);
    }
  }
  clamp_flat(u, problem.model.input_box, n_u);

  AdamState adam = make_adam(dim, cfg.step0, cfg.step_decay);
  RestartResult best;
  best.u = u;
  Eigen::VectorXd grad(dim);
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    Eigen::Map<const Eigen::MatrixXd> U(u.data(), n_u, problem.N);
    CostTerms c = scmpc_objective(problem, x0, U, &grad);
    if (!std::isfinite(c.total) || !grad.allFinite()) return best;
    if (c.total < best.total) {
      best.total = c.total;
      best.u = u;
      best.ok = true;
    }
    if (grad.lpNorm<Eigen::Infinity>() <= cfg.grad_tol) break;
    adam.epoch = iter;
    adam_step(adam, u, grad);
    clamp_flat(u, problem.model.input_box, n_u);
  }
  Eigen::Map<const Eigen::MatrixXd> U(u.data(), n_u, problem.N);
  CostTerms c = scmpc_objective(problem, x0, U, nullptr);
  if (std::isfinite(c.total) && c.total < best.total) {
    best.total = c.total;
    best.u = u;
    best.ok = true;
  }
  return best;
}

}  // namespace

void validate_problem(const ScmpcProblem& problem) {
  const int n_x = problem.model.n_x;
  const int n_u = problem.model.n_u;
  require(n_x >= 1 && n_u >= 1, "model dimensions must be positive");
  require(problem.model.input_box.dim() == n_u,
          "input box dimension mismatch");
  require(problem.N >= 1, "horizon must be at least 1");
  require(problem.Q.rows() == n_x, "Q dimension mismatch");
  require(problem.R.rows() == n_u, "R dimension mismatch");
  require(problem.Q_N.rows() == n_x, "Q_N dimension mismatch");
  require_symmetric(problem.Q, "Q");
  require_symmetric(problem.R, "R");
  require_symmetric(problem.Q_N, "Q_N");
  require(problem.rho > 0.0, "rho must be positive");
  require(problem.eta > 0.0 && problem.eta <= 1.0, "eta must be in (0, 1]");
  if (std::holds_alternative<PolytopeRows>(problem.state_constraints)) {
    const auto& poly = std::get<PolytopeRows>(problem.state_constraints);
    if (poly.H.rows() > 0) {
      require(poly.H.cols() == n_x, "H_x column count mismatch");
    }
  } else {
    const auto& obs = std::get<ObstacleCircle>(problem.state_constraints);
    require(obs.radius > 0.0, "obstacle radius must be positive");
    require(!problem.terminal.has_value(),
            "terminal set is incompatible with a keep-out disc around the "
            "origin");
  }
  if (problem.terminal.has_value()) {
    require(problem.terminal->P.rows() == n_x, "terminal P dimension mismatch");
    require(problem.terminal->h_f > 0.0, "terminal level must be positive");
    factor_spd(problem.terminal->P, "terminal P");
  }
}

int constraint_rows(const ScmpcProblem& problem) {
  if (std::holds_alternative<ObstacleCircle>(problem.state_constraints)) {
    return 1;
  }
  return static_cast<int>(
      std::get<PolytopeRows>(problem.state_constraints).H.rows());
}

std::vector<Eigen::VectorXd> rollout(const SystemModel& model,
                                     const Eigen::VectorXd& x0,
                                     const Eigen::MatrixXd& u_seq) {
  require(static_cast<int>(u_seq.rows()) == model.n_u,
          "rollout: input dimension mismatch");
  const int N = static_cast<int>(u_seq.cols());
  std::vector<Eigen::VectorXd> traj;
  traj.reserve(N + 1);
  traj.push_back(x0);
  for (int i = 0; i < N; ++i) {
    traj.push_back(step(model, traj.back(), u_seq.col(i)));
  }
  return traj;
}

double ellipsoid_support(const Eigen::MatrixXd& P, double h_f,
                         const Eigen::VectorXd& a) {
  require(h_f > 0.0, "ellipsoid level must be positive");
  require(a.size() == P.rows(), "support direction dimension mismatch");
  auto llt = factor_spd(P, "P");
  return std::sqrt(h_f * a.dot(llt.solve(a)));
}

bool terminal_containment(double alpha, const TerminalSet& terminal,
                          const Eigen::MatrixXd& H, double eta,
                          const Eigen::VectorXd& xi_N,
                          Eigen::VectorXd* margins) {
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must be in [0, 1]");
  const int m = static_cast<int>(H.rows());
  require(xi_N.size() == m, "xi_N row count mismatch");
  Eigen::VectorXd margin(m);
  bool ok = true;
  for (int j = 0; j < m; ++j) {
    const double s =
        ellipsoid_support(terminal.P, terminal.h_f, H.row(j).transpose());
    margin[j] = (1.0 - eta + xi_N[j]) - alpha * s;
    if (margin[j] < 0.0) ok = false;
  }
  if (margins != nullptr) *margins = margin;
  return ok;
}

SlackAssignment optimal_slacks(const ScmpcProblem& problem,
                               const std::vector<Eigen::VectorXd>& x_traj) {
  validate_problem(problem);
  return analyze_slacks(problem, x_traj).slacks;
}

CostTerms scmpc_cost(const ScmpcProblem& problem, const Eigen::VectorXd& x0,
                     const Eigen::MatrixXd& u_seq) {
  validate_problem(problem);
  require(static_cast<int>(u_seq.cols()) == problem.N &&
              static_cast<int>(u_seq.rows()) == problem.model.n_u,
          "input sequence shape mismatch");
  return scmpc_objective(problem, x0, u_seq, nullptr);
}

CostTerms scmpc_objective(const ScmpcProblem& problem,
                          const Eigen::VectorXd& x0,
                          const Eigen::MatrixXd& u_seq,
                          Eigen::VectorXd* grad_u) {
  const int N = problem.N;
  const int n_x = problem.model.n_x;
  const int n_u = problem.model.n_u;
  std::vector<Eigen::VectorXd> traj = rollout(problem.model, x0, u_seq);
  SlackAnalysis a = analyze_slacks(problem, traj);
  CostTerms c = cost_terms(problem, traj, u_seq, a.slacks);
  if (grad_u == nullptr) return c;
  if (!std::isfinite(c.total)) {
    grad_u->setConstant(n_u * N, std::numeric_limits<double>::quiet_NaN());
    return c;
  }

  // Penalty subgradient per state; max(0, .) contributes nothing at or
  // below its kink.
  std::vector<Eigen::VectorXd> sg(N + 1, Eigen::VectorXd::Zero(n_x));
  const int m = constraint_rows(problem);
  if (std::holds_alternative<ObstacleCircle>(problem.state_constraints)) {
    const double xi_N = a.slacks.xi_N[0];
    for (int i = 0; i < N; ++i) {
      if (a.stage_residuals(0, i) > xi_N) {
        sg[i] -= 2.0 * problem.rho * traj[i];
      }
    }
    if (a.terminal_residual[0] > 0.0) {
      int held = 0;  // stage terms whose max() rides on xi_N
      for (int i = 0; i < N; ++i) {
        if (xi_N >= a.stage_residuals(0, i)) held += 1;
      }
      sg[N] -= 2.0 * problem.rho * (1.0 + held) * traj[N];
    }
  } else if (m > 0) {
    const auto& poly = std::get<PolytopeRows>(problem.state_constraints);
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < m; ++j) {
        if (a.stage_residuals(j, i) > a.slacks.xi_N[j]) {
          sg[i] += problem.rho * poly.H.row(j).transpose();
        }
      }
    }
    if (problem.terminal.has_value() && a.alpha_branch == 1) {
      const double bound = 1.0 - problem.eta;
      double coef = 0.0;
      for (int j = 0; j < m; ++j) {
        if (a.slacks.alpha * a.support[j] > bound) {
          int held = 1;
          for (int i = 0; i < N; ++i) {
            if (a.slacks.xi_N[j] >= a.stage_residuals(j, i)) held += 1;
          }
          coef += held * a.support[j];
        }
      }
      if (coef > 0.0) {
        sg[N] += problem.rho * coef / (problem.terminal->h_f * a.slacks.alpha) *
                 (problem.terminal->P * traj[N]);
      }
    }
  }
  if (problem.terminal.has_value() && a.alpha_branch == 2) {
    sg[N] += 2.0 * problem.rho * (problem.terminal->P * traj[N]);
  }

  grad_u->resize(n_u * N);
  Eigen::Map<Eigen::MatrixXd> G(grad_u->data(), n_u, N);
  Eigen::VectorXd lambda = 2.0 * problem.Q_N * traj[N] + sg[N];
  for (int i = N - 1; i >= 0; --i) {
    Jacobians jac = jacobians(problem.model, traj[i], u_seq.col(i));
    G.col(i) = 2.0 * problem.R * u_seq.col(i) + jac.B.transpose() * lambda;
    if (i > 0) {
      lambda = 2.0 * problem.Q * traj[i] + sg[i] + jac.A.transpose() * lambda;
    }
  }
  return c;
}

ScmpcSolution solve_scmpc(const ScmpcProblem& problem,
                          const Eigen::VectorXd& x0, const SolverConfig& cfg,
                          std::uint64_t seed) {
  validate_problem(problem);
  require(static_cast<int>(x0.size()) == problem.model.n_x,
          "solve_scmpc: initial state dimension mismatch");
  require(cfg.restarts >= 1 && cfg.iterations >= 1,
          "solve_scmpc: bad solver config");

  std::vector<RestartResult> results;
  results.reserve(cfg.restarts);
  for (int k = 0; k < cfg.restarts; ++k) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(k)));
    results.push_back(run_restart(problem, x0, cfg, rng));
  }

  double best = std::numeric_limits<double>::infinity();
  double worst = -std::numeric_limits<double>::infinity();
  int ok_count = 0;
  for (const auto& r : results) {
    if (!r.ok) continue;
    ok_count += 1;
    best = std::min(best, r.total);
    worst = std::max(worst, r.total);
  }
  if (ok_count == 0) fail("solve_scmpc: all restarts diverged");

  const double tie_tol = cfg.tie_tol_rel * (1.0 + std::abs(best));
  std::vector<int> tied;
  for (int k = 0; k < cfg.restarts; ++k) {
    if (results[k].ok && results[k].total <= best + tie_tol) {
      tied.push_back(k);
    }
  }
  Rng tie_rng(mix_seed(seed, 0xffffffffULL));
  const int pick = tied[tie_rng.uniform_int(static_cast<int>(tied.size()))];

  ScmpcSolution sol;
  sol.u_seq = Eigen::Map<const Eigen::MatrixXd>(results[pick].u.data(),
                                                problem.model.n_u, problem.N);
  sol.x_traj = rollout(problem.model, x0, sol.u_seq);
  sol.slacks = optimal_slacks(problem, sol.x_traj);
  sol.alpha = sol.slacks.alpha;
  CostTerms c = cost_terms(problem, sol.x_traj, sol.u_seq, sol.slacks);
  sol.V_p = c.J_p;
  sol.V_xi = c.J_xi;
  sol.V = c.total;
  sol.restarts_used = ok_count;
  sol.value_spread = worst - best;
  return sol;
}

}  // namespace ampc
