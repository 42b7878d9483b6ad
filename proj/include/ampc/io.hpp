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

#ifndef AMPC_IO_HPP
#define AMPC_IO_HPP

#include <string>
#include <vector>

#include "json.hpp"

#include "ampc/checks.hpp"
#include "ampc/data.hpp"
#include "ampc/experiments.hpp"

namespace ampc {

using Json = nlohmann::json;

/// Shortest-round-trip decimal with 17 significant digits; parsing the
/// result recovers the exact double.
std::string format_g17(double v);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& content);

/// Content hash used to chain artifact provenance through manifests.
std::string json_hash(const Json& j);

Json matrix_to_json(const Eigen::MatrixXd& M);
Eigen::MatrixXd matrix_from_json(const Json& j);
Json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const Json& j);

Json box_to_json(const Box& b);
Box box_from_json(const Json& j);

Json mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const Json& j);

Json value_model_to_json(const ValueModel& vm);
ValueModel value_model_from_json(const Json& j);

Json policy_model_to_json(const PolicyModel& pm);
PolicyModel policy_model_from_json(const Json& j);

Json problem_to_json(const ScmpcProblem& p);
ScmpcProblem problem_from_json(const Json& j);

Json solver_config_to_json(const SolverConfig& cfg);
SolverConfig solver_config_from_json(const Json& j);

Json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const Json& j);

Json grid_spec_to_json(const GridSearchSpec& g);
GridSearchSpec grid_spec_from_json(const Json& j);

Json plan_to_json(const SamplingPlan& plan);
SamplingPlan plan_from_json(const Json& j);

Json suite_config_to_json(const SuiteConfig& s);
SuiteConfig suite_config_from_json(const Json& j);

Json audit_to_json(const AssumptionAudit& a);

/// Dataset rows in the canonical column order
/// x0..,u0..,V,V_p,V_xi,solver_seed,spread,flag with %.17g numerics.
std::string dataset_to_csv(const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> dataset_from_csv(const std::string& text);

Json dataset_to_json(const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> dataset_from_json(const Json& j);

std::string curve_to_csv(const FitCurve& curve);

std::string consistency_to_csv(const std::vector<ConsistencyRow>& rows);

/// Per-trajectory summary rows plus flattened state paths.
std::string report_to_csv(const ClosedLoopReport& report);

}  // namespace ampc

#endif  // AMPC_IO_HPP
