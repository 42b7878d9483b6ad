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

// Pipeline driver. Each subcommand reads upstream run directories,
// writes its artifacts plus a manifest.json into --out, and chains
// provenance by recording the hash of every input manifest. Reruns
// with identical config and seeds are byte-identical except for the
// files listed under timing_outputs.
//
// Exit codes: 0 success, 1 fatal error, 2 dataset generated with
// flagged (failed-solve) rows.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ampc/checks.hpp"
#include "ampc/experiments.hpp"
#include "ampc/io.hpp"

namespace ampc {
namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonOpts {
  std::string out;
  std::string config_path;
  std::uint64_t seed = 0;
  int workers = 1;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts* o) {
  cmd->add_option("--out", o->out, "output run directory")->required();
  cmd->add_option("--config", o->config_path, "JSON file with overrides");
  o->seed_opt = cmd->add_option(
      "--seed", o->seed, "run seed; falls back to config, then AMPC_SEED");
  cmd->add_option("--workers", o->workers,
                  "worker threads (outputs do not depend on the count)");
}

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  return Json::parse(read_text(path));
}

std::uint64_t resolve_seed(const CommonOpts& o, const Json& config) {
  if (o.seed_opt != nullptr && o.seed_opt->count() > 0) return o.seed;
  if (config.contains("seed")) return config.at("seed").get<std::uint64_t>();
  if (const char* env = std::getenv("AMPC_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 0;
}

// Shallow-merges a config section onto the serialized base so partial
// overrides keep the remaining fields.
template <typename T, typename ToJson, typename FromJson>
T merge_section(const T& base, const Json& config, const std::string& key,
                ToJson to_json, FromJson from_json) {
  if (!config.contains(key)) return base;
  Json merged = to_json(base);
  merged.update(config.at(key));
  return from_json(merged);
}

std::vector<int> hidden_override(const std::vector<int>& base,
                                 const Json& config, const std::string& key) {
  if (!config.contains(key)) return base;
  return config.at(key).get<std::vector<int>>();
}

// Collects output files and finalizes the manifest; timing files are
// named but not hashed so the manifest itself stays reproducible.
struct RunWriter {
  explicit RunWriter(const std::string& dir_in) : dir(dir_in) {
    std::filesystem::create_directories(dir);
  }
  void emit(const std::string& name, const std::string& text,
            bool timing = false) {
    write_text(dir + "/" + name, text);
    if (timing) {
      timing_outputs.push_back(name);
    } else {
      outputs[name] = hex_u64(fnv1a(text));
    }
  }
  void finish(Json manifest) {
    manifest["version"] = kVersion;
    manifest["outputs"] = outputs;
    manifest["timing_outputs"] = timing_outputs;
    write_text(dir + "/manifest.json", manifest.dump(2) + "\n");
  }
  std::string dir;
  Json outputs = Json::object();
  std::vector<std::string> timing_outputs;
};

Json load_manifest(const std::string& dir) {
  return Json::parse(read_text(dir + "/manifest.json"));
}

Json wrap_artifact(const Json& payload, const Json& inputs) {
  return Json{{"inputs", inputs}, {"payload", payload}};
}

Json load_artifact(const std::string& path) {
  Json j = Json::parse(read_text(path));
  return j.contains("payload") ? j.at("payload") : j;
}

// Dataset lineage: the manifest hash of the gen-data run an artifact
// descends from; gen-data runs are their own lineage root.
std::string dataset_lineage(const Json& manifest) {
  const Json& inputs = manifest.at("inputs");
  if (inputs.contains("dataset")) {
    return inputs.at("dataset").get<std::string>();
  }
  require(manifest.at("command") == "gen-data",
          "artifact has no dataset lineage");
  return json_hash(manifest);
}

void require_same_lineage(const std::vector<const Json*>& manifests) {
  std::string want;
  for (const Json* m : manifests) {
    const std::string got = dataset_lineage(*m);
    if (want.empty()) {
      want = got;
    } else {
      require(got == want,
              "mixed provenance: dataset lineage " + got + " vs " + want);
    }
  }
}

Box plan_bounding_box(const SamplingPlan& plan) {
  require(!plan.parts.empty(), "empty sampling plan");
  Eigen::VectorXd lo, hi;
  bool first = true;
  for (const auto& part : plan.parts) {
    Eigen::VectorXd plo, phi;
    if (std::holds_alternative<UniformBox>(part)) {
      const auto& u = std::get<UniformBox>(part);
      plo = u.box.lo;
      phi = u.box.hi;
    } else {
      const auto& g = std::get<Grid2D>(part);
      plo = Eigen::Vector2d(g.x1_lo, g.x2_lo);
      phi = Eigen::Vector2d(g.x1_hi, g.x2_hi);
    }
    if (first) {
      lo = plo;
      hi = phi;
      first = false;
    } else {
      lo = lo.cwiseMin(plo);
      hi = hi.cwiseMax(phi);
    }
  }
  Box box;
  box.lo = lo;
  box.hi = hi;
  return box;
}

PolicyFn policy_fn_of(const PolicyModel& pm) {
  return [pm](const Eigen::VectorXd& x) { return policy_eval(pm, x); };
}

// Stability diagnostics for one policy from the preset start states;
// failures are recorded, not fatal.
void append_iss_audits(const PolicyFn& policy, const std::string& tag,
                       const ExperimentPreset& pre,
                       const ScmpcProblem& problem, const ValueModel& vm,
                       Json* audits) {
  for (int k = 0; k < pre.iss_starts.cols(); ++k) {
    TrajectoryRecord traj =
        closed_loop(policy, problem.model, pre.iss_starts.col(k), pre.suite.T,
                    problem.Q, problem.R, &vm, &problem.state_constraints);
    IssFit fit = iss_diagnostic(traj, pre.iss_components, pre.iss_offset_tol);
    AssumptionAudit a;
    a.id = "iss-" + tag + "-start" + std::to_string(k);
    a.n_samples = pre.suite.T;
    a.max_violation = std::max(0.0, fit.offset - pre.iss_offset_tol);
    a.pass = fit.pass;
    a.notes = "c=" + format_g17(fit.c) + " lambda=" + format_g17(fit.lambda) +
              " offset=" + format_g17(fit.offset);
    audits->push_back(audit_to_json(a));
  }
}

int cmd_gen_data(const CommonOpts& opts, const std::string& experiment,
                 int n_flag) {
  Json config = load_config(opts.config_path);
  const std::uint64_t seed = resolve_seed(opts, config);
  ExperimentPreset pre = preset_by_name(experiment);
  SolverConfig solver =
      merge_section(pre.solver, config, "solver", solver_config_to_json,
                    solver_config_from_json);
  SamplingPlan plan = pre.plan;
  const int n_override = n_flag > 0 ? n_flag : config.value("n", 0);
  if (n_override > 0) {
    require(plan.parts.size() == 1 &&
                std::holds_alternative<UniformBox>(plan.parts[0]),
            "--n override requires a single uniform sampling part");
    std::get<UniformBox>(plan.parts[0]).n = n_override;
  }

  std::vector<DatasetRecord> records =
      generate_dataset(pre.problem, plan, solver, seed, opts.workers);
  const long flagged = std::count_if(records.begin(), records.end(),
                                     [](const DatasetRecord& r) {
                                       return r.flag;
                                     });

  RunWriter w(opts.out);
  w.emit("dataset.csv", dataset_to_csv(records));
  w.emit("dataset.json",
         wrap_artifact(dataset_to_json(records), Json::object()).dump(2) +
             "\n");
  w.finish(Json{{"command", "gen-data"},
                {"experiment", experiment},
                {"seed", seed},
                {"problem", problem_to_json(pre.problem)},
                {"solver", solver_config_to_json(solver)},
                {"plan", plan_to_json(plan)},
                {"n_records", records.size()},
                {"flagged", flagged},
                {"inputs", Json::object()}});
  if (flagged > 0) {
    std::cerr << "ampc: " << flagged << " of " << records.size()
              << " solves failed and were flagged\n";
    return 2;
  }
  return 0;
}

int cmd_fit_value(const CommonOpts& opts, const std::string& data_dir,
                  bool exact_flag) {
  Json config = load_config(opts.config_path);
  const std::uint64_t seed = resolve_seed(opts, config);
  Json dman = load_manifest(data_dir);
  const std::string experiment = dman.at("experiment").get<std::string>();
  ExperimentPreset pre = preset_by_name(experiment);
  std::vector<DatasetRecord> records =
      dataset_from_csv(read_text(data_dir + "/dataset.csv"));
  ValueDataset vds = to_value_dataset(records);

  const bool exact =
      exact_flag ? true : config.value("exact_value", pre.exact_value);
  TrainConfig train = merge_section(pre.train, config, "train",
                                    train_config_to_json,
                                    train_config_from_json);
  train.seed = seed;
  std::vector<int> hidden =
      hidden_override(pre.value_hidden, config, "value_hidden");
  GridSearchSpec grid =
      merge_section(pre.value_grid, config, "value_grid", grid_spec_to_json,
                    grid_spec_from_json);

  Json inputs = {{"dataset", json_hash(dman)}};
  RunWriter w(opts.out);
  ValueModel vm;
  Json metrics;
  metrics["exact_value"] = exact;
  if (exact) {
    vm.exact_square = true;
  } else {
    ValueFitResult fit = fit_value(vds, hidden, train, grid, seed,
                                   opts.workers);
    vm = fit.model;
    w.emit("value_curve_p.csv", curve_to_csv(fit.p.curve));
    metrics["final_loss_p"] = fit.p.curve.final_loss();
    metrics["lr_p"] = fit.p.lr;
    if (fit.has_xi) {
      w.emit("value_curve_xi.csv", curve_to_csv(fit.xi.curve));
      metrics["final_loss_xi"] = fit.xi.curve.final_loss();
      metrics["lr_xi"] = fit.xi.lr;
    }
  }
  const auto [eps_abs, eps_rel] = estimate_eps_v(vm, vds);
  metrics["eps_v_abs"] = eps_abs;
  metrics["eps_v_rel"] = eps_rel;

  w.emit("value_model.json",
         wrap_artifact(value_model_to_json(vm), inputs).dump(2) + "\n");
  w.emit("metrics.json", metrics.dump(2) + "\n");
  w.finish(Json{{"command", "fit-value"},
                {"experiment", experiment},
                {"seed", seed},
                {"problem", dman.at("problem")},
                {"plan", dman.at("plan")},
                {"exact_value", exact},
                {"train", train_config_to_json(train)},
                {"hidden", hidden},
                {"inputs", inputs}});
  return 0;
}

int cmd_fit_policy(const CommonOpts& opts, const std::string& data_dir,
                   const std::string& value_dir, const std::string& method) {
  require(method == "il" || method == "bc",
          "--method must be 'il' or 'bc', got '" + method + "'");
  Json config = load_config(opts.config_path);
  const std::uint64_t seed = resolve_seed(opts, config);
  Json dman = load_manifest(data_dir);
  Json vman = load_manifest(value_dir);
  require(dataset_lineage(vman) == json_hash(dman),
          "mixed provenance: value model was trained on a different dataset");

  const std::string experiment = dman.at("experiment").get<std::string>();
  ExperimentPreset pre = preset_by_name(experiment);
  ScmpcProblem problem = problem_from_json(dman.at("problem"));
  ValueModel vm =
      value_model_from_json(load_artifact(value_dir + "/value_model.json"));
  std::vector<DatasetRecord> records =
      dataset_from_csv(read_text(data_dir + "/dataset.csv"));
  Eigen::MatrixXd states, labels;
  to_policy_pairs(records, &states, &labels);

  TrainConfig train = merge_section(pre.policy_train, config, "train",
                                    train_config_to_json,
                                    train_config_from_json);
  train.seed = seed;
  std::vector<int> hidden =
      hidden_override(pre.policy_hidden, config, "policy_hidden");
  GridSearchSpec grid =
      merge_section(pre.policy_grid, config, "policy_grid", grid_spec_to_json,
                    grid_spec_from_json);

  PolicyFitResult fit =
      method == "il"
          ? train_policy_il(states, vm, problem.model, problem.Q, problem.R,
                            hidden, train, grid, seed, opts.workers)
          : train_policy_bc(states, labels, problem.model, hidden, train,
                            grid, seed, opts.workers);

  Json metrics;
  metrics["method"] = method;
  metrics["final_loss"] = fit.curve.final_loss();
  metrics["lr"] = fit.lr;
  metrics["lr_decay"] = fit.lr_decay;
  const Eigen::MatrixXd& eps_support =
      pre.eps_states.cols() > 0 ? pre.eps_states : states;
  const auto [eps_abs, eps_rel] =
      estimate_eps_pi(fit.model, eps_support, vm, problem.model, problem.Q,
                      problem.R, pre.eps_grid);
  metrics["eps_pi_abs"] = eps_abs;
  metrics["eps_pi_rel"] = eps_rel;

  // Assumption audit: projected outputs must sit inside the input box
  // everywhere, sampled well beyond the training support.
  const Box state_box =
      plan_bounding_box(plan_from_json(dman.at("plan")));
  AssumptionAudit audit =
      audit_input_constraint(fit.model, state_box, 100000, seed);
  Json audits = Json::array();
  audits.push_back(audit_to_json(audit));

  Json inputs = {{"dataset", json_hash(dman)}, {"value", json_hash(vman)}};
  RunWriter w(opts.out);
  w.emit("policy_model.json",
         wrap_artifact(policy_model_to_json(fit.model), inputs).dump(2) +
             "\n");
  w.emit("policy_curve.csv", curve_to_csv(fit.curve));
  w.emit("metrics.json", metrics.dump(2) + "\n");
  w.emit("audits.json", audits.dump(2) + "\n");
  w.finish(Json{{"command", "fit-policy"},
                {"experiment", experiment},
                {"method", method},
                {"seed", seed},
                {"problem", dman.at("problem")},
                {"plan", dman.at("plan")},
                {"train", train_config_to_json(train)},
                {"hidden", hidden},
                {"inputs", inputs}});
  return 0;
}

int cmd_simulate(const CommonOpts& opts, const std::string& policy_dir,
                 const std::string& value_dir) {
  Json config = load_config(opts.config_path);
  const std::uint64_t seed = resolve_seed(opts, config);
  Json pman = load_manifest(policy_dir);
  Json vman = load_manifest(value_dir);
  require_same_lineage({&pman, &vman});

  const std::string experiment = pman.at("experiment").get<std::string>();
  ExperimentPreset pre = preset_by_name(experiment);
  ScmpcProblem problem = problem_from_json(pman.at("problem"));
  PolicyModel pm =
      policy_model_from_json(load_artifact(policy_dir + "/policy_model.json"));
  ValueModel vm =
      value_model_from_json(load_artifact(value_dir + "/value_model.json"));
  SuiteConfig suite = merge_section(pre.suite, config, "suite",
                                    suite_config_to_json,
                                    suite_config_from_json);

  ClosedLoopReport report =
      evaluate_suite(policy_fn_of(pm), problem.model, problem.Q, problem.R,
                     &vm, &problem.state_constraints, suite, seed,
                     opts.workers);
  double mean_pt = 0.0, mean_pc = 0.0;
  for (const auto& t : report.trajectories) {
    mean_pt += t.p_t;
    mean_pc += t.p_c;
  }
  mean_pt /= report.trajectories.size();
  mean_pc /= report.trajectories.size();

  Json audits = Json::array();
  append_iss_audits(policy_fn_of(pm),
                    pman.value("method", std::string("policy")), pre, problem,
                    vm, &audits);

  Json inputs = {{"dataset", dataset_lineage(pman)},
                 {"policy", json_hash(pman)},
                 {"value", json_hash(vman)}};
  RunWriter w(opts.out);
  w.emit("trajectories.csv", report_to_csv(report));
  w.emit("summary.json",
         Json{{"mean_performance", report.mean_performance},
              {"mean_p_t", mean_pt},
              {"mean_p_c", mean_pc},
              {"total_violations", report.total_violations},
              {"n_traj", suite.n_traj},
              {"T", suite.T}}
                 .dump(2) +
             "\n");
  w.emit("timing.json",
         Json{{"mean_step_time_s", report.mean_step_time_s},
              {"median_step_time_s", report.median_step_time_s}}
                 .dump(2) +
             "\n",
         /*timing=*/true);
  w.emit("audits.json", audits.dump(2) + "\n");
  w.finish(Json{{"command", "simulate"},
                {"experiment", experiment},
                {"seed", seed},
                {"problem", pman.at("problem")},
                {"plan", pman.at("plan")},
                {"suite", suite_config_to_json(suite)},
                {"inputs", inputs}});
  return 0;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& il_dir,
                 const std::string& bc_dir, const std::string& value_dir) {
  Json config = load_config(opts.config_path);
  const std::uint64_t seed = resolve_seed(opts, config);
  Json il_man = load_manifest(il_dir);
  Json bc_man = load_manifest(bc_dir);
  Json vman = load_manifest(value_dir);
  require_same_lineage({&il_man, &bc_man, &vman});
  require(il_man.value("method", std::string()) == "il",
          "--il directory does not hold a look-ahead policy");
  require(bc_man.value("method", std::string()) == "bc",
          "--bc directory does not hold a cloning policy");

  const std::string experiment = il_man.at("experiment").get<std::string>();
  require(bc_man.at("experiment") == experiment,
          "mixed provenance: policies from different experiments");
  ExperimentPreset pre = preset_by_name(experiment);
  ScmpcProblem problem = problem_from_json(il_man.at("problem"));
  PolicyModel pm_il =
      policy_model_from_json(load_artifact(il_dir + "/policy_model.json"));
  PolicyModel pm_bc =
      policy_model_from_json(load_artifact(bc_dir + "/policy_model.json"));
  ValueModel vm =
      value_model_from_json(load_artifact(value_dir + "/value_model.json"));
  SuiteConfig suite = merge_section(pre.suite, config, "suite",
                                    suite_config_to_json,
                                    suite_config_from_json);

  PolicyFn pistar = [&](const Eigen::VectorXd& x) {
    return pi_star_grid(x, vm, problem.model, problem.Q, problem.R,
                        pre.pistar_grid);
  };
  struct Entry {
    std::string name;
    PolicyFn fn;
  };
  std::vector<Entry> entries = {{"bc", policy_fn_of(pm_bc)},
                                {"il", policy_fn_of(pm_il)},
                                {"pistar", pistar}};

  std::ostringstream table;
  table << "method,perf,p_t,p_c,eval_time,violations\n";
  Json rows = Json::array();
  Json timing = Json::object();
  for (const Entry& e : entries) {
    // Same seed for every method: identical start states per trajectory.
    ClosedLoopReport r =
        evaluate_suite(e.fn, problem.model, problem.Q, problem.R, &vm,
                       &problem.state_constraints, suite, seed, opts.workers);
    double mean_pt = 0.0, mean_pc = 0.0;
    for (const auto& t : r.trajectories) {
      mean_pt += t.p_t;
      mean_pc += t.p_c;
    }
    mean_pt /= r.trajectories.size();
    mean_pc /= r.trajectories.size();
    table << e.name << "," << format_g17(r.mean_performance) << ","
          << format_g17(mean_pt) << "," << format_g17(mean_pc) << ","
          << format_g17(r.median_step_time_s) << "," << r.total_violations
          << "\n";
    rows.push_back(Json{{"method", e.name},
                        {"perf", r.mean_performance},
                        {"p_t", mean_pt},
                        {"p_c", mean_pc},
                        {"violations", r.total_violations}});
    timing[e.name] = Json{{"mean_step_time_s", r.mean_step_time_s},
                          {"median_step_time_s", r.median_step_time_s}};
  }

  Json audits = Json::array();
  append_iss_audits(policy_fn_of(pm_il), "il", pre, problem, vm, &audits);
  append_iss_audits(policy_fn_of(pm_bc), "bc", pre, problem, vm, &audits);

  Json inputs = {{"dataset", dataset_lineage(il_man)},
                 {"il", json_hash(il_man)},
                 {"bc", json_hash(bc_man)},
                 {"value", json_hash(vman)}};
  RunWriter w(opts.out);
  w.emit("table.csv", table.str(), /*timing=*/true);
  w.emit("summary.json", Json{{"rows", rows}}.dump(2) + "\n");
  w.emit("timing.json", timing.dump(2) + "\n", /*timing=*/true);
  w.emit("audits.json", audits.dump(2) + "\n");
  w.finish(Json{{"command", "evaluate"},
                {"experiment", experiment},
                {"seed", seed},
                {"problem", il_man.at("problem")},
                {"plan", il_man.at("plan")},
                {"suite", suite_config_to_json(suite)},
                {"inputs", inputs}});
  return 0;
}

int cmd_consistency(const CommonOpts& opts, const std::string& experiment,
                    std::vector<int> sizes, int n_seeds) {
  Json config = load_config(opts.config_path);
  const std::uint64_t seed = resolve_seed(opts, config);
  ExperimentPreset pre = preset_by_name(experiment);
  require(pre.problem.model.n_x == 1,
          "consistency sweep is defined for the scalar benchmark");

  ConsistencyConfig cc;
  cc.problem = pre.problem;
  cc.solver = merge_section(pre.solver, config, "solver",
                            solver_config_to_json, solver_config_from_json);
  cc.value.exact_square = true;
  cc.lo = config.value("lo", -1.0);
  cc.hi = config.value("hi", 1.0);
  cc.test_grid = config.value("test_grid", 401);
  cc.hidden = hidden_override(pre.policy_hidden, config, "policy_hidden");
  cc.train = merge_section(pre.policy_train, config, "train",
                           train_config_to_json, train_config_from_json);
  if (config.contains("sizes")) {
    sizes = config.at("sizes").get<std::vector<int>>();
  }
  n_seeds = config.value("n_seeds", n_seeds);
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < n_seeds; ++i) seeds.push_back(seed + i);

  std::vector<ConsistencyRow> rows =
      consistency_experiment(sizes, seeds, cc, opts.workers);

  RunWriter w(opts.out);
  w.emit("consistency.csv", consistency_to_csv(rows));
  w.finish(Json{{"command", "consistency"},
                {"experiment", experiment},
                {"seed", seed},
                {"sizes", sizes},
                {"n_seeds", n_seeds},
                {"lo", cc.lo},
                {"hi", cc.hi},
                {"train", train_config_to_json(cc.train)},
                {"inputs", Json::object()}});
  return 0;
}

int cmd_report(const CommonOpts& opts, const std::string& il_dir,
               const std::string& bc_dir, const std::string& value_dir) {
  Json config = load_config(opts.config_path);
  Json il_man = load_manifest(il_dir);
  Json bc_man = load_manifest(bc_dir);
  Json vman = load_manifest(value_dir);
  require_same_lineage({&il_man, &bc_man, &vman});
  const std::string experiment = il_man.at("experiment").get<std::string>();
  require(bc_man.at("experiment") == experiment,
          "mixed provenance: policies from different experiments");
  ExperimentPreset pre = preset_by_name(experiment);
  ScmpcProblem problem = problem_from_json(il_man.at("problem"));
  PolicyModel pm_il =
      policy_model_from_json(load_artifact(il_dir + "/policy_model.json"));
  PolicyModel pm_bc =
      policy_model_from_json(load_artifact(bc_dir + "/policy_model.json"));
  ValueModel vm =
      value_model_from_json(load_artifact(value_dir + "/value_model.json"));
  SamplingPlan plan = plan_from_json(il_man.at("plan"));

  Json inputs = {{"dataset", dataset_lineage(il_man)},
                 {"il", json_hash(il_man)},
                 {"bc", json_hash(bc_man)},
                 {"value", json_hash(vman)}};
  RunWriter w(opts.out);

  if (problem.model.n_x == 1) {
    // Scalar benchmark: side-by-side policy sweep over the data support.
    const Box support = plan_bounding_box(plan);
    const int n = config.value("sweep_points", 401);
    std::ostringstream sweep;
    sweep << "x,u_il,u_bc\n";
    for (double xv : linspace(support.lo[0], support.hi[0], n)) {
      Eigen::VectorXd x(1);
      x << xv;
      sweep << format_g17(xv) << "," << format_g17(policy_eval(pm_il, x)[0])
            << "," << format_g17(policy_eval(pm_bc, x)[0]) << "\n";
    }
    w.emit("policy_sweep.csv", sweep.str());
  } else {
    // Planar benchmark: closed-loop paths from the diagnostic starts
    // plus the learned penalty-value field on the coarse plan grid.
    std::ostringstream traj;
    traj << "method,traj,step";
    for (int d = 0; d < problem.model.n_x; ++d) traj << ",x" << d;
    for (int d = 0; d < problem.model.n_u; ++d) traj << ",u" << d;
    traj << "\n";
    struct Entry {
      std::string name;
      const PolicyModel* pm;
    };
    for (const Entry& e :
         {Entry{"il", &pm_il}, Entry{"bc", &pm_bc}}) {
      for (int k = 0; k < pre.iss_starts.cols(); ++k) {
        TrajectoryRecord t = closed_loop(
            policy_fn_of(*e.pm), problem.model, pre.iss_starts.col(k),
            pre.suite.T, problem.Q, problem.R, &vm,
            &problem.state_constraints);
        for (int s = 0; s < t.states.cols(); ++s) {
          traj << e.name << "," << k << "," << s;
          for (int d = 0; d < t.states.rows(); ++d) {
            traj << "," << format_g17(t.states(d, s));
          }
          for (int d = 0; d < t.inputs.rows(); ++d) {
            traj << ","
                 << (s < t.inputs.cols() ? format_g17(t.inputs(d, s)) : "");
          }
          traj << "\n";
        }
      }
    }
    w.emit("trajectories.csv", traj.str());

    const Grid2D* grid = nullptr;
    for (const auto& part : plan.parts) {
      if (std::holds_alternative<Grid2D>(part)) {
        grid = &std::get<Grid2D>(part);
        break;
      }
    }
    require(grid != nullptr, "no grid part available for value levels");
    std::ostringstream levels;
    levels << "x0,x1,V,V_p,V_xi\n";
    for (double x1 : linspace(grid->x1_lo, grid->x1_hi, grid->n1)) {
      for (double x2 : linspace(grid->x2_lo, grid->x2_hi, grid->n2)) {
        Eigen::VectorXd x(2);
        x << x1, x2;
        ValueParts parts = value_eval_parts(vm, x);
        levels << format_g17(x1) << "," << format_g17(x2) << ","
               << format_g17(parts.V) << "," << format_g17(parts.V_p) << ","
               << format_g17(parts.V_xi) << "\n";
      }
    }
    w.emit("value_levels.csv", levels.str());
  }

  w.finish(Json{{"command", "report"},
                {"experiment", experiment},
                {"problem", il_man.at("problem")},
                {"plan", il_man.at("plan")},
                {"inputs", inputs}});
  return 0;
}

}  // namespace
}  // namespace ampc

int main(int argc, char** argv) {
  CLI::App app{"Learned explicit surrogates for soft-constrained MPC"};
  app.require_subcommand(1);

  ampc::CommonOpts gen_opts, fv_opts, fp_opts, sim_opts, eval_opts, con_opts,
      rep_opts;
  std::string gen_experiment, fv_data, fp_data, fp_value, fp_method;
  std::string sim_policy, sim_value, eval_il, eval_bc, eval_value;
  std::string con_experiment, rep_il, rep_bc, rep_value;
  int gen_n = 0;
  bool fv_exact = false;
  std::vector<int> con_sizes = {50, 10000};
  int con_seeds = 5;

  CLI::App* gen = app.add_subcommand(
      "gen-data", "Label sampled states with the soft-constrained solver");
  gen->add_option("--experiment", gen_experiment, "preset name")->required();
  gen->add_option("--n", gen_n, "override the uniform sample count");
  ampc::add_common(gen, &gen_opts);

  CLI::App* fv = app.add_subcommand(
      "fit-value", "Regress the two value heads on a labeled dataset");
  fv->add_option("--data", fv_data, "gen-data run directory")->required();
  fv->add_flag("--exact-value", fv_exact,
               "register the closed-form squared norm instead of training");
  ampc::add_common(fv, &fv_opts);

  CLI::App* fp = app.add_subcommand(
      "fit-policy", "Train a policy net by cloning or look-ahead loss");
  fp->add_option("--data", fp_data, "gen-data run directory")->required();
  fp->add_option("--value", fp_value, "fit-value run directory")->required();
  fp->add_option("--method", fp_method, "'bc' or 'il'")->required();
  ampc::add_common(fp, &fp_opts);

  CLI::App* sim = app.add_subcommand(
      "simulate", "Roll one policy through the closed-loop suite");
  sim->add_option("--policy", sim_policy, "fit-policy run directory")
      ->required();
  sim->add_option("--value", sim_value, "fit-value run directory")
      ->required();
  ampc::add_common(sim, &sim_opts);

  CLI::App* eval = app.add_subcommand(
      "evaluate", "Closed-loop comparison table for bc, il, and grid pistar");
  eval->add_option("--il", eval_il, "look-ahead policy run directory")
      ->required();
  eval->add_option("--bc", eval_bc, "cloning policy run directory")
      ->required();
  eval->add_option("--value", eval_value, "fit-value run directory")
      ->required();
  ampc::add_common(eval, &eval_opts);

  CLI::App* con = app.add_subcommand(
      "consistency", "Distance-to-optimum sweep over training-set sizes");
  con->add_option("--experiment", con_experiment, "scalar preset name")
      ->required();
  con->add_option("--sizes", con_sizes, "training-set sizes")
      ->delimiter(',');
  con->add_option("--n-seeds", con_seeds, "independent repetitions");
  ampc::add_common(con, &con_opts);

  CLI::App* rep = app.add_subcommand(
      "report", "Plot-ready policy sweeps, trajectories, and value levels");
  rep->add_option("--il", rep_il, "look-ahead policy run directory")
      ->required();
  rep->add_option("--bc", rep_bc, "cloning policy run directory")
      ->required();
  rep->add_option("--value", rep_value, "fit-value run directory")
      ->required();
  ampc::add_common(rep, &rep_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return ampc::cmd_gen_data(gen_opts, gen_experiment, gen_n);
    if (fv->parsed()) return ampc::cmd_fit_value(fv_opts, fv_data, fv_exact);
    if (fp->parsed()) {
      return ampc::cmd_fit_policy(fp_opts, fp_data, fp_value, fp_method);
    }
    if (sim->parsed()) return ampc::cmd_simulate(sim_opts, sim_policy, sim_value);
    if (eval->parsed()) {
      return ampc::cmd_evaluate(eval_opts, eval_il, eval_bc, eval_value);
    }
    if (con->parsed()) {
      return ampc::cmd_consistency(con_opts, con_experiment, con_sizes,
                                   con_seeds);
    }
    if (rep->parsed()) return ampc::cmd_report(rep_opts, rep_il, rep_bc, rep_value);
  } catch (const std::exception& e) {
    std::cerr << "ampc: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
