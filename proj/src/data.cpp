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

#include "ampc/data.hpp"

namespace ampc {

namespace {

int part_count(const std::variant<UniformBox, Grid2D>& part) {
  if (std::holds_alternative<UniformBox>(part)) {
    const auto& u = std::get<UniformBox>(part);
    require(u.n >= 1 && u.box.dim() >= 1, "empty uniform part");
    return u.n;
  }
  const auto& g = std::get<Grid2D>(part);
  require(g.n1 >= 1 && g.n2 >= 1, "empty grid part");
  return g.n1 * g.n2;
}

int part_dim(const std::variant<UniformBox, Grid2D>& part) {
  return std::holds_alternative<UniformBox>(part)
             ? std::get<UniformBox>(part).box.dim()
             : 2;
}

}  // namespace

int plan_count(const SamplingPlan& plan) {
  require(!plan.parts.empty(), "sampling plan has no parts");
  int n = 0;
  for (const auto& part : plan.parts) n += part_count(part);
  return n;
}

Eigen::MatrixXd sample_states(const SamplingPlan& plan, std::uint64_t seed) {
  const int n = plan_count(plan);
  const int dim = part_dim(plan.parts.front());
  for (const auto& part : plan.parts) {
    require(part_dim(part) == dim, "mixed state dimensions in plan");
  }

  Eigen::MatrixXd X(dim, n);
  int col = 0;
  int part_idx = 0;
  for (const auto& part : plan.parts) {
    if (std::holds_alternative<UniformBox>(part)) {
      const auto& u = std::get<UniformBox>(part);
      Rng rng(mix_seed(seed, 0x700 + part_idx));
      for (int j = 0; j < u.n; ++j) X.col(col++) = rng.uniform_vec(u.box);
    } else {
      const auto& g = std::get<Grid2D>(part);
      std::vector<double> x1 = linspace(g.x1_lo, g.x1_hi, g.n1);
      std::vector<double> x2 = linspace(g.x2_lo, g.x2_hi, g.n2);
      for (double a : x1) {
        for (double b : x2) {
          X(0, col) = a;
          X(1, col) = b;
          col += 1;
        }
      }
    }
    part_idx += 1;
  }
  return X;
}

std::vector<DatasetRecord> generate_dataset(const ScmpcProblem& problem,
                                            const SamplingPlan& plan,
                                            const SolverConfig& solver_cfg,
                                            std::uint64_t seed, int workers) {
  validate_problem(problem);
  Eigen::MatrixXd X = sample_states(plan, mix_seed(seed, 0x51));
  require(static_cast<int>(X.rows()) == problem.model.n_x,
          "plan dimension does not match the model");

  const int n = static_cast<int>(X.cols());
  std::vector<DatasetRecord> records(n);
  parallel_for(n, workers, [&](int j) {
    DatasetRecord& r = records[j];
    r.x = X.col(j);
    r.solver_seed = mix_seed(seed, static_cast<std::uint64_t>(j));
    try {
      ScmpcSolution sol = solve_scmpc(problem, r.x, solver_cfg, r.solver_seed);
      r.u_mpc = sol.u_seq.col(0);
      r.V = sol.V;
      r.V_p = sol.V_p;
      r.V_xi = sol.V_xi;
      r.spread = sol.value_spread;
    } catch (const std::exception&) {
      r.u_mpc = Eigen::VectorXd::Zero(problem.model.n_u);
      r.flag = true;
    }
  });
  return records;
}

ValueDataset to_value_dataset(const std::vector<DatasetRecord>& records) {
  int n = 0;
  for (const auto& r : records) n += r.flag ? 0 : 1;
  require(n > 0, "no usable records");

  ValueDataset d;
  d.X.resize(records.front().x.size(), n);
  d.V.resize(n);
  d.V_p.resize(n);
  d.V_xi.resize(n);
  int col = 0;
  for (const auto& r : records) {
    if (r.flag) continue;
    d.X.col(col) = r.x;
    d.V[col] = r.V;
    d.V_p[col] = r.V_p;
    d.V_xi[col] = r.V_xi;
    col += 1;
  }
  return d;
}

void to_policy_pairs(const std::vector<DatasetRecord>& records,
                     Eigen::MatrixXd* states, Eigen::MatrixXd* inputs) {
  int n = 0;
  for (const auto& r : records) n += r.flag ? 0 : 1;
  require(n > 0, "no usable records");

  states->resize(records.front().x.size(), n);
  inputs->resize(records.front().u_mpc.size(), n);
  int col = 0;
  for (const auto& r : records) {
    if (r.flag) continue;
    states->col(col) = r.x;
    inputs->col(col) = r.u_mpc;
    col += 1;
  }
}

}  // namespace ampc
