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

#include "ampc/experiments.hpp"
#include "doctest.h"
#include "oracles.hpp"

namespace {

using namespace ampc;

ScmpcProblem scalar_problem() {
  ScmpcProblem p;
  p.model = make_quad1d();
  p.N = 1;
  p.Q = Eigen::MatrixXd::Identity(1, 1);
  p.R = Eigen::MatrixXd::Zero(1, 1);
  p.Q_N = Eigen::MatrixXd::Identity(1, 1);
  p.rho = 15000.0;
  p.eta = 0.01;
  p.state_constraints = PolytopeRows{Eigen::MatrixXd(0, 1)};
  return p;
}

SolverConfig scalar_solver() {
  SolverConfig cfg;
  cfg.init = RestartInit::kSignedState;
  cfg.restarts = 8;
  cfg.iterations = 100;
  return cfg;
}

SamplingPlan point_plan(std::initializer_list<double> x) {
  SamplingPlan plan;
  plan.parts.push_back(UniformBox{make_box(x, x), 1});
  return plan;
}

}  // namespace

TEST_CASE("plan counting matches the benchmark grids") {
  CHECK(plan_count(unicycle_preset().plan) == 3262);
  CHECK(plan_count(quad1d_preset().plan) == 10000);

  SamplingPlan plan;
  plan.parts.push_back(Grid2D{-2.0, 2.0, 41, -1.5, 1.5, 41});
  plan.parts.push_back(Grid2D{-1.5, 1.5, 51, -0.5, 0.5, 31});
  CHECK(plan_count(plan) == 1681 + 1581);
}

TEST_CASE("planar grids enumerate row-major with x2 fastest") {
  SamplingPlan plan;
  plan.parts.push_back(Grid2D{0.0, 1.0, 2, 0.0, 1.0, 2});
  Eigen::MatrixXd X = sample_states(plan, 0);
  REQUIRE(X.cols() == 4);
  CHECK((X.col(0) - Eigen::Vector2d(0.0, 0.0)).norm() == 0.0);
  CHECK((X.col(1) - Eigen::Vector2d(0.0, 1.0)).norm() == 0.0);
  CHECK((X.col(2) - Eigen::Vector2d(1.0, 0.0)).norm() == 0.0);
  CHECK((X.col(3) - Eigen::Vector2d(1.0, 1.0)).norm() == 0.0);
}

TEST_CASE("uniform parts are deterministic and stay inside the box") {
  SamplingPlan plan;
  plan.parts.push_back(UniformBox{make_box({-1.0}, {1.0}), 50});
  Eigen::MatrixXd a = sample_states(plan, 123);
  Eigen::MatrixXd b = sample_states(plan, 123);
  Eigen::MatrixXd c = sample_states(plan, 124);
  CHECK((a - b).norm() == 0.0);
  CHECK((a - c).norm() > 0.0);
  CHECK(a.minCoeff() >= -1.0);
  CHECK(a.maxCoeff() <= 1.0);
}

TEST_CASE("parts draw from independent streams") {
  SamplingPlan plan;
  plan.parts.push_back(UniformBox{make_box({-1.0}, {1.0}), 10});
  plan.parts.push_back(UniformBox{make_box({-1.0}, {1.0}), 10});
  Eigen::MatrixXd X = sample_states(plan, 5);
  CHECK((X.leftCols(10) - X.rightCols(10)).norm() > 0.0);
}

TEST_CASE("mixed state dimensions are rejected") {
  SamplingPlan plan;
  plan.parts.push_back(UniformBox{make_box({-1.0}, {1.0}), 5});
  plan.parts.push_back(Grid2D{0.0, 1.0, 2, 0.0, 1.0, 2});
  CHECK_THROWS_AS(sample_states(plan, 0), std::invalid_argument);
}

TEST_CASE("scalar labels match the closed-form value") {
  ScmpcProblem problem = scalar_problem();
  std::vector<DatasetRecord> recs =
      generate_dataset(problem, point_plan({0.4}), scalar_solver(), 9, 1);
  REQUIRE(recs.size() == 1);
  const DatasetRecord& r = recs[0];
  CHECK_FALSE(r.flag);
  CHECK(r.x[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(std::abs(r.V - 0.16) <= 1e-4);
  CHECK(oracles::dist_to_signed(r.u_mpc[0], 0.4) <= 1e-2);
  CHECK(std::abs(r.V - (r.V_p + r.V_xi)) <= 1e-9);
  CHECK(r.u_mpc[0] >= problem.model.input_box.lo[0]);
  CHECK(r.u_mpc[0] <= problem.model.input_box.hi[0]);
}

TEST_CASE("the origin labels as exactly zero") {
  std::vector<DatasetRecord> recs = generate_dataset(
      scalar_problem(), point_plan({0.0}), scalar_solver(), 11, 1);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].V == 0.0);
  CHECK(recs[0].u_mpc[0] == 0.0);
}

TEST_CASE("a state inside the keep-out disc gets a positive penalty") {
  ScmpcProblem problem = unicycle_preset().problem;
  problem.N = 5;  // the disc cannot be escaped in five steps from 0.25

  SolverConfig cfg;
  cfg.restarts = 6;
  cfg.iterations = 150;

  SamplingPlan plan;
  plan.parts.push_back(UniformBox{make_box({0.25, 0.0}, {0.25, 0.0}), 1});
  std::vector<DatasetRecord> recs = generate_dataset(problem, plan, cfg, 3, 1);
  REQUIRE(recs.size() == 1);
  CHECK_FALSE(recs[0].flag);
  CHECK(recs[0].V_xi > 0.0);
}

TEST_CASE("records are reproducible from their stored provenance") {
  ScmpcProblem problem = scalar_problem();
  SamplingPlan plan;
  plan.parts.push_back(UniformBox{make_box({-1.0}, {1.0}), 5});
  std::vector<DatasetRecord> recs =
      generate_dataset(problem, plan, scalar_solver(), 21, 1);

  for (const DatasetRecord& r : recs) {
    ScmpcSolution sol = solve_scmpc(problem, r.x, scalar_solver(),
                                    r.solver_seed);
    CHECK(sol.V == r.V);
    CHECK(sol.u_seq(0, 0) == r.u_mpc[0]);
  }

  std::vector<DatasetRecord> again =
      generate_dataset(problem, plan, scalar_solver(), 21, 1);
  REQUIRE(again.size() == recs.size());
  for (size_t j = 0; j < recs.size(); ++j) {
    CHECK(again[j].x[0] == recs[j].x[0]);
    CHECK(again[j].V == recs[j].V);
    CHECK(again[j].solver_seed == recs[j].solver_seed);
  }
}

TEST_CASE("solver failures are flagged in place, not dropped") {
  // A state so large the rollout overflows forces every restart to
  // diverge; the row must survive with its slot and flag set.
  ScmpcProblem problem = scalar_problem();
  SamplingPlan plan;
  plan.parts.push_back(UniformBox{make_box({1e200}, {1e200}), 1});
  plan.parts.push_back(UniformBox{make_box({0.4}, {0.4}), 1});

  std::vector<DatasetRecord> recs =
      generate_dataset(problem, plan, scalar_solver(), 17, 1);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].flag);
  CHECK(recs[0].u_mpc[0] == 0.0);
  CHECK_FALSE(recs[1].flag);

  ValueDataset vd = to_value_dataset(recs);
  CHECK(vd.X.cols() == 1);
  CHECK(vd.X(0, 0) == doctest::Approx(0.4));

  Eigen::MatrixXd states, inputs;
  to_policy_pairs(recs, &states, &inputs);
  CHECK(states.cols() == 1);
  CHECK(inputs.cols() == 1);
}

TEST_CASE("regression views carry the value decomposition") {
  std::vector<DatasetRecord> recs;
  for (int j = 0; j < 3; ++j) {
    DatasetRecord r;
    r.x = Eigen::VectorXd::Constant(2, 0.1 * j);
    r.u_mpc = Eigen::VectorXd::Constant(1, -0.2 * j);
    r.V_p = 1.0 + j;
    r.V_xi = 0.5 * j;
    r.V = r.V_p + r.V_xi;
    recs.push_back(r);
  }
  ValueDataset vd = to_value_dataset(recs);
  CHECK(vd.X.cols() == 3);
  CHECK(vd.V_p[2] == 3.0);
  CHECK(vd.V_xi[2] == 1.0);
  CHECK(vd.V[2] == 4.0);

  Eigen::MatrixXd states, inputs;
  to_policy_pairs(recs, &states, &inputs);
  CHECK(states(0, 1) == doctest::Approx(0.1));
  CHECK(inputs(0, 1) == doctest::Approx(-0.2));
}
