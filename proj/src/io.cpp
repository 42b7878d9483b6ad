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

#include "ampc/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ampc {

namespace {

// std::stod raises out_of_range on subnormal results because strtod sets
// ERANGE for them; strtod itself still returns the exact value.
double parse_double(const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  require(end != begin, "not a number: " + s);
  return v;
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail("cannot open for writing: " + path);
  out << content;
  if (!out) fail("short write: " + path);
}

std::string json_hash(const Json& j) { return hex_u64(fnv1a(j.dump())); }

Json matrix_to_json(const Eigen::MatrixXd& M) {
  Json rows = Json::array();
  for (int i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  Json out;
  out["rows"] = M.rows();
  out["cols"] = M.cols();
  out["data"] = std::move(rows);
  return out;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  Eigen::MatrixXd M(rows, cols);
  const Json& data = j.at("data");
  require(static_cast<int>(data.size()) == rows, "matrix row count mismatch");
  for (int i = 0; i < rows; ++i) {
    require(static_cast<int>(data[i].size()) == cols,
            "matrix column count mismatch");
    for (int c = 0; c < cols; ++c) M(i, c) = data[i][c].get<double>();
  }
  return M;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  Eigen::VectorXd v(j.size());
  for (int i = 0; i < static_cast<int>(j.size()); ++i) {
    v[i] = j[i].get<double>();
  }
  return v;
}

Json box_to_json(const Box& b) {
  return Json{{"lo", vector_to_json(b.lo)}, {"hi", vector_to_json(b.hi)}};
}

Box box_from_json(const Json& j) {
  Box b;
  b.lo = vector_from_json(j.at("lo"));
  b.hi = vector_from_json(j.at("hi"));
  require(b.lo.size() == b.hi.size(), "ragged box");
  return b;
}

Json mlp_to_json(const Mlp& net) {
  Json out;
  out["layer_sizes"] = net.layer_sizes;
  out["params"] = vector_to_json(net.params);
  out["init_seed"] = net.init_seed;
  return out;
}

Mlp mlp_from_json(const Json& j) {
  Mlp net;
  net.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  net.params = vector_from_json(j.at("params"));
  net.init_seed = j.at("init_seed").get<std::uint64_t>();
  require(net.params.size() == mlp_param_count(net.layer_sizes),
          "parameter count does not match layer sizes");
  return net;
}

Json value_model_to_json(const ValueModel& vm) {
  Json out;
  out["exact_square"] = vm.exact_square;
  if (vm.net_p.has_value()) out["net_p"] = mlp_to_json(*vm.net_p);
  if (vm.net_xi.has_value()) out["net_xi"] = mlp_to_json(*vm.net_xi);
  return out;
}

ValueModel value_model_from_json(const Json& j) {
  ValueModel vm;
  vm.exact_square = j.at("exact_square").get<bool>();
  if (j.contains("net_p")) vm.net_p = mlp_from_json(j.at("net_p"));
  if (j.contains("net_xi")) vm.net_xi = mlp_from_json(j.at("net_xi"));
  return vm;
}

Json policy_model_to_json(const PolicyModel& pm) {
  return Json{{"net", mlp_to_json(pm.net)}, {"box", box_to_json(pm.box)}};
}

PolicyModel policy_model_from_json(const Json& j) {
  PolicyModel pm;
  pm.net = mlp_from_json(j.at("net"));
  pm.box = box_from_json(j.at("box"));
  return pm;
}

Json problem_to_json(const ScmpcProblem& p) {
  Json out;
  out["model"] = p.model.name;
  out["N"] = p.N;
  out["Q"] = matrix_to_json(p.Q);
  out["R"] = matrix_to_json(p.R);
  out["Q_N"] = matrix_to_json(p.Q_N);
  out["rho"] = p.rho;
  out["eta"] = p.eta;
  if (std::holds_alternative<ObstacleCircle>(p.state_constraints)) {
    out["constraints"] = {
        {"type", "obstacle"},
        {"radius", std::get<ObstacleCircle>(p.state_constraints).radius}};
  } else {
    out["constraints"] = {
        {"type", "polytope"},
        {"H", matrix_to_json(std::get<PolytopeRows>(p.state_constraints).H)}};
  }
  if (p.terminal.has_value()) {
    out["terminal"] = {{"P", matrix_to_json(p.terminal->P)},
                       {"h_f", p.terminal->h_f}};
  }
  return out;
}

ScmpcProblem problem_from_json(const Json& j) {
  ScmpcProblem p;
  p.model = model_by_name(j.at("model").get<std::string>());
  p.N = j.at("N").get<int>();
  p.Q = matrix_from_json(j.at("Q"));
  p.R = matrix_from_json(j.at("R"));
  p.Q_N = matrix_from_json(j.at("Q_N"));
  p.rho = j.at("rho").get<double>();
  p.eta = j.at("eta").get<double>();
  const Json& c = j.at("constraints");
  if (c.at("type") == "obstacle") {
    p.state_constraints = ObstacleCircle{c.at("radius").get<double>()};
  } else {
    Eigen::MatrixXd H = matrix_from_json(c.at("H"));
    if (H.size() == 0) H.resize(0, p.model.n_x);
    p.state_constraints = PolytopeRows{H};
  }
  if (j.contains("terminal")) {
    p.terminal = TerminalSet{matrix_from_json(j.at("terminal").at("P")),
                             j.at("terminal").at("h_f").get<double>()};
  }
  validate_problem(p);
  return p;
}

Json solver_config_to_json(const SolverConfig& cfg) {
  Json out;
  out["restarts"] = cfg.restarts;
  out["iterations"] = cfg.iterations;
  out["step0"] = cfg.step0;
  out["step_decay"] = cfg.step_decay;
  out["tie_tol_rel"] = cfg.tie_tol_rel;
  out["grad_tol"] = cfg.grad_tol;
  out["init"] =
      cfg.init == RestartInit::kSignedState ? "signed_state" : "uniform";
  return out;
}

SolverConfig solver_config_from_json(const Json& j) {
  SolverConfig cfg;
  cfg.restarts = j.value("restarts", cfg.restarts);
  cfg.iterations = j.value("iterations", cfg.iterations);
  cfg.step0 = j.value("step0", cfg.step0);
  cfg.step_decay = j.value("step_decay", cfg.step_decay);
  cfg.tie_tol_rel = j.value("tie_tol_rel", cfg.tie_tol_rel);
  cfg.grad_tol = j.value("grad_tol", cfg.grad_tol);
  const std::string init = j.value("init", std::string("uniform"));
  require(init == "uniform" || init == "signed_state",
          "unknown restart initializer: " + init);
  cfg.init = init == "signed_state" ? RestartInit::kSignedState
                                    : RestartInit::kUniform;
  return cfg;
}

Json train_config_to_json(const TrainConfig& cfg) {
  Json out;
  out["epochs"] = cfg.epochs;
  out["batch"] = cfg.batch;
  out["lr0"] = cfg.lr0;
  out["lr_decay"] = cfg.lr_decay;
  out["seed"] = cfg.seed;
  return out;
}

TrainConfig train_config_from_json(const Json& j) {
  TrainConfig cfg;
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.batch = j.value("batch", cfg.batch);
  cfg.lr0 = j.value("lr0", cfg.lr0);
  cfg.lr_decay = j.value("lr_decay", cfg.lr_decay);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

Json grid_spec_to_json(const GridSearchSpec& g) {
  return Json{{"lrs", g.lrs}, {"decays", g.decays}};
}

GridSearchSpec grid_spec_from_json(const Json& j) {
  GridSearchSpec g;
  g.lrs = j.value("lrs", g.lrs);
  g.decays = j.value("decays", g.decays);
  return g;
}

Json plan_to_json(const SamplingPlan& plan) {
  Json parts = Json::array();
  for (const auto& part : plan.parts) {
    if (std::holds_alternative<UniformBox>(part)) {
      const auto& u = std::get<UniformBox>(part);
      parts.push_back(Json{{"type", "uniform"},
                           {"box", box_to_json(u.box)},
                           {"n", u.n}});
    } else {
      const auto& g = std::get<Grid2D>(part);
      parts.push_back(Json{{"type", "grid2d"},
                           {"x1_lo", g.x1_lo},
                           {"x1_hi", g.x1_hi},
                           {"n1", g.n1},
                           {"x2_lo", g.x2_lo},
                           {"x2_hi", g.x2_hi},
                           {"n2", g.n2}});
    }
  }
  return Json{{"parts", std::move(parts)}};
}

SamplingPlan plan_from_json(const Json& j) {
  SamplingPlan plan;
  for (const Json& p : j.at("parts")) {
    if (p.at("type") == "uniform") {
      plan.parts.push_back(
          UniformBox{box_from_json(p.at("box")), p.at("n").get<int>()});
    } else if (p.at("type") == "grid2d") {
      plan.parts.push_back(Grid2D{
          p.at("x1_lo").get<double>(), p.at("x1_hi").get<double>(),
          p.at("n1").get<int>(), p.at("x2_lo").get<double>(),
          p.at("x2_hi").get<double>(), p.at("n2").get<int>()});
    } else {
      fail("unknown plan part type");
    }
  }
  return plan;
}

Json suite_config_to_json(const SuiteConfig& s) {
  Json out;
  out["n_traj"] = s.n_traj;
  out["T"] = s.T;
  out["x0_box"] = box_to_json(s.x0_box);
  out["reject_radius"] = s.reject_radius;
  return out;
}

SuiteConfig suite_config_from_json(const Json& j) {
  SuiteConfig s;
  s.n_traj = j.value("n_traj", s.n_traj);
  s.T = j.value("T", s.T);
  if (j.contains("x0_box")) s.x0_box = box_from_json(j.at("x0_box"));
  s.reject_radius = j.value("reject_radius", s.reject_radius);
  return s;
}

Json audit_to_json(const AssumptionAudit& a) {
  Json out;
  out["id"] = a.id;
  out["n_samples"] = a.n_samples;
  out["max_violation"] = a.max_violation;
  out["pass"] = a.pass;
  out["notes"] = a.notes;
  return out;
}

std::string dataset_to_csv(const std::vector<DatasetRecord>& records) {
  require(!records.empty(), "no records to serialize");
  const int n_x = static_cast<int>(records.front().x.size());
  const int n_u = static_cast<int>(records.front().u_mpc.size());

  std::ostringstream out;
  for (int d = 0; d < n_x; ++d) out << "x" << d << ",";
  for (int d = 0; d < n_u; ++d) out << "u" << d << ",";
  out << "V,V_p,V_xi,solver_seed,spread,flag\n";
  for (const auto& r : records) {
    for (int d = 0; d < n_x; ++d) out << format_g17(r.x[d]) << ",";
    for (int d = 0; d < n_u; ++d) out << format_g17(r.u_mpc[d]) << ",";
    out << format_g17(r.V) << "," << format_g17(r.V_p) << ","
        << format_g17(r.V_xi) << "," << r.solver_seed << ","
        << format_g17(r.spread) << "," << (r.flag ? 1 : 0) << "\n";
  }
  return out.str();
}

std::vector<DatasetRecord> dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty csv");

  int n_x = 0;
  int n_u = 0;
  {
    std::istringstream header(line);
    std::string tok;
    while (std::getline(header, tok, ',')) {
      if (tok.rfind("x", 0) == 0 && tok != "x") n_x += 1;
      if (tok.rfind("u", 0) == 0) n_u += 1;
    }
    require(n_x >= 1 && n_u >= 1, "unrecognized csv header");
  }

  std::vector<DatasetRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string tok;
    std::vector<std::string> toks;
    while (std::getline(row, tok, ',')) toks.push_back(tok);
    require(static_cast<int>(toks.size()) == n_x + n_u + 6,
            "csv row arity mismatch");

    DatasetRecord r;
    r.x.resize(n_x);
    r.u_mpc.resize(n_u);
    int k = 0;
    for (int d = 0; d < n_x; ++d) r.x[d] = parse_double(toks[k++]);
    for (int d = 0; d < n_u; ++d) r.u_mpc[d] = parse_double(toks[k++]);
    r.V = parse_double(toks[k++]);
    r.V_p = parse_double(toks[k++]);
    r.V_xi = parse_double(toks[k++]);
    r.solver_seed = std::stoull(toks[k++]);
    r.spread = parse_double(toks[k++]);
    r.flag = toks[k++] == "1";
    records.push_back(std::move(r));
  }
  return records;
}

Json dataset_to_json(const std::vector<DatasetRecord>& records) {
  Json rows = Json::array();
  for (const auto& r : records) {
    rows.push_back(Json{{"x", vector_to_json(r.x)},
                        {"u", vector_to_json(r.u_mpc)},
                        {"V", r.V},
                        {"V_p", r.V_p},
                        {"V_xi", r.V_xi},
                        {"solver_seed", r.solver_seed},
                        {"spread", r.spread},
                        {"flag", r.flag}});
  }
  return Json{{"records", std::move(rows)}};
}

std::vector<DatasetRecord> dataset_from_json(const Json& j) {
  std::vector<DatasetRecord> records;
  for (const Json& row : j.at("records")) {
    DatasetRecord r;
    r.x = vector_from_json(row.at("x"));
    r.u_mpc = vector_from_json(row.at("u"));
    r.V = row.at("V").get<double>();
    r.V_p = row.at("V_p").get<double>();
    r.V_xi = row.at("V_xi").get<double>();
    r.solver_seed = row.at("solver_seed").get<std::uint64_t>();
    r.spread = row.at("spread").get<double>();
    r.flag = row.at("flag").get<bool>();
    records.push_back(std::move(r));
  }
  return records;
}

std::string curve_to_csv(const FitCurve& curve) {
  std::ostringstream out;
  out << "epoch,loss\n";
  for (size_t e = 0; e < curve.epoch_loss.size(); ++e) {
    out << e << "," << format_g17(curve.epoch_loss[e]) << "\n";
  }
  return out.str();
}

std::string consistency_to_csv(const std::vector<ConsistencyRow>& rows) {
  std::ostringstream out;
  out << "method,n_s,seed,mean_dist,sup_dist\n";
  for (const auto& r : rows) {
    out << r.method << "," << r.n_s << "," << r.seed << ","
        << format_g17(r.mean_dist) << "," << format_g17(r.sup_dist) << "\n";
  }
  return out.str();
}

std::string report_to_csv(const ClosedLoopReport& report) {
  std::ostringstream out;
  out << "traj,step";
  if (!report.trajectories.empty()) {
    const int n_x = static_cast<int>(report.trajectories.front().states.rows());
    const int n_u = static_cast<int>(report.trajectories.front().inputs.rows());
    for (int d = 0; d < n_x; ++d) out << ",x" << d;
    for (int d = 0; d < n_u; ++d) out << ",u" << d;
  }
  out << "\n";
  for (size_t i = 0; i < report.trajectories.size(); ++i) {
    const auto& t = report.trajectories[i];
    for (int k = 0; k < t.states.cols(); ++k) {
      out << i << "," << k;
      for (int d = 0; d < t.states.rows(); ++d) {
        out << "," << format_g17(t.states(d, k));
      }
      for (int d = 0; d < t.inputs.rows(); ++d) {
        out << ","
            << (k < t.inputs.cols() ? format_g17(t.inputs(d, k)) : "");
      }
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace ampc
