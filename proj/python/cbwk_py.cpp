#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cbwk/acceptance.hpp"
#include "cbwk/agents.hpp"
#include "cbwk/errors.hpp"
#include "cbwk/harness.hpp"

namespace py = pybind11;
using namespace cbwk;

namespace {

py::dict terminal_dict(const RunTerminal& t) {
  py::dict d;
  d["algorithm"] = t.algorithm;
  d["seed"] = t.seed;
  d["T"] = t.T;
  d["B"] = t.B;
  d["aborted"] = t.aborted;
  d["truncated"] = t.truncated;
  d["refused"] = t.refused;
  d["refusal"] = t.refusal;
  d["rounds"] = t.rounds;
  d["total_reward"] = t.total_reward;
  d["opt"] = t.opt;
  d["regret"] = t.regret;
  d["Z"] = t.Z;
  d["B_prime"] = t.B_prime;
  d["T0"] = t.T0;
  d["out_of_regime"] = t.out_of_regime;
  d["oracle_calls"] = t.oracle_calls;
  d["avg_outcome"] = t.avg_outcome;
  d["objective"] = t.objective;
  d["avg_regret"] = t.avg_regret;
  return d;
}

py::dict summary_dict(const HorizonSummary& s) {
  py::dict d;
  d["algorithm"] = s.algorithm;
  d["T"] = s.T;
  d["B"] = s.B;
  d["opt"] = s.opt;
  d["runs"] = s.runs;
  d["refused"] = s.refused;
  d["aborted_early"] = s.aborted_early;
  d["abort_rate"] = s.abort_rate;
  d["mean_reward"] = s.mean_reward;
  d["sd_reward"] = s.sd_reward;
  d["mean_regret"] = s.mean_regret;
  d["sd_regret"] = s.sd_regret;
  d["mean_avg_regret"] = s.mean_avg_regret;
  d["sd_avg_regret"] = s.sd_avg_regret;
  d["mean_oracle_calls"] = s.mean_oracle_calls;
  d["mean_Z"] = s.mean_Z;
  d["op_solves"] = s.op_solves;
  d["op_violations"] = s.op_violations;
  d["cd_bound_violations"] = s.cd_bound_violations;
  d["safety_violations"] = s.safety_violations;
  return d;
}

py::list summaries(const std::vector<HorizonSummary>& rows) {
  py::list out;
  for (const auto& s : rows) out.append(summary_dict(s));
  return out;
}

py::dict trace_dict(const RunTrace& t) {
  py::dict d;
  std::vector<long> ts, actions, epochs;
  std::vector<double> probs, rewards, cum_reward;
  for (const auto& r : t.rows) {
    ts.push_back(r.t);
    epochs.push_back(r.epoch);
    actions.push_back(r.action);
    probs.push_back(r.prob);
    rewards.push_back(r.reward);
    cum_reward.push_back(r.cum_reward);
  }
  d["t"] = ts;
  d["epoch"] = epochs;
  d["action"] = actions;
  d["prob"] = probs;
  d["reward"] = rewards;
  d["cum_reward"] = cum_reward;
  py::list solves;
  for (const auto& s : t.solves) {
    py::dict r;
    r["t"] = s.t;
    r["epoch"] = s.epoch;
    r["mu"] = s.mu;
    r["update_steps"] = s.update_steps;
    r["update_bound"] = s.update_bound;
    r["feasible"] = s.feasible;
    r["q_mass"] = s.q_mass;
    solves.append(r);
  }
  d["solves"] = solves;
  d["terminal"] = terminal_dict(t.terminal);
  return d;
}

}  // namespace

PYBIND11_MODULE(cbwk_py, m) {
  m.doc() = "Contextual bandits with knapsacks and concave rewards";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);

  py::class_<ProblemInstance, std::shared_ptr<ProblemInstance>>(m, "Instance")
      .def_readonly("name", &ProblemInstance::name)
      .def_property_readonly("num_contexts", [](const ProblemInstance& i) { return i.env.num_contexts(); })
      .def_property_readonly("num_actions", [](const ProblemInstance& i) { return i.env.num_actions(); })
      .def_property_readonly("dims", [](const ProblemInstance& i) { return i.env.dims(); })
      .def_property_readonly("num_policies", [](const ProblemInstance& i) { return i.policies.size(); })
      .def("to_json", [](const ProblemInstance& i) { return instance_to_json(i); });

  m.def("load_instance", [](const std::string& path) {
    return std::make_shared<ProblemInstance>(load_instance(path));
  }, py::arg("path"));
  m.def("instance_from_json", [](const std::string& text) {
    return std::make_shared<ProblemInstance>(instance_from_json(text));
  }, py::arg("text"));

  m.def("compute_opt", [](const ProblemInstance& inst, double B, long T) {
    const OptResult r = compute_opt(inst.env, inst.policies, B, T);
    return py::make_tuple(r.opt, r.p_star.dense(inst.policies.size()));
  }, py::arg("instance"), py::arg("B"), py::arg("T"),
        "Exact OPT and the maximizing mixture as dense weights.");

  m.def("compute_concave_opt", [](const ProblemInstance& inst, const std::vector<double>& target) {
    const OptResult r = compute_concave_opt(inst.env, inst.policies, neg_distance_objective(target));
    return py::make_tuple(r.opt, r.p_star.dense(inst.policies.size()));
  }, py::arg("instance"), py::arg("target"), "max over mixtures of -||V(P) - target||.");

  m.def("exploration_length", [](int K, int d, long T, double B, double delta, int pi_size) {
    const ExplorationLength e = exploration_budget_T0({K, d, T, B, delta}, pi_size);
    return py::make_tuple(e.T0, e.formula, e.clamped);
  }, py::arg("K"), py::arg("d"), py::arg("T"), py::arg("B"), py::arg("delta"), py::arg("pi_size"));

  m.def("epoch_mu", &epoch_mu, py::arg("m"), py::arg("K"), py::arg("d"), py::arg("pi_size"),
        py::arg("delta"));
  m.def("reduced_budget", [](int K, int d, long T, double B, double delta, long T0, int pi_size,
                             double c) { return reduced_budget({K, d, T, B, delta}, T0, pi_size, c); },
        py::arg("K"), py::arg("d"), py::arg("T"), py::arg("B"), py::arg("delta"), py::arg("T0"),
        py::arg("pi_size"), py::arg("c") = 1.0);

  m.def("run_config", [](const std::string& config, long T, std::uint64_t seed) {
    const ExperimentConfig cfg = load_experiment_config(config);
    py::gil_scoped_release release;
    const RunResult r = run_single(cfg, compute_benchmark(cfg, T), seed);
    py::gil_scoped_acquire acquire;
    return trace_dict(r.trace);
  }, py::arg("config"), py::arg("T"), py::arg("seed"),
        "One replica of an experiment config at horizon T.");

  m.def("run_experiment", [](const std::string& config, std::optional<std::string> out_dir,
                             std::uint64_t seed_offset, int jobs, bool write_files) {
    const ExperimentConfig cfg = load_experiment_config(config);
    RunOptions opt;
    opt.seed_offset = seed_offset;
    opt.jobs = jobs;
    opt.write_files = write_files;
    if (out_dir) opt.out_dir = *out_dir;
    ExperimentOutput out;
    {
      py::gil_scoped_release release;
      out = run_experiment(cfg, opt);
    }
    return summaries(out.summary);
  }, py::arg("config"), py::arg("out_dir") = std::nullopt, py::arg("seed_offset") = 0,
        py::arg("jobs") = 1, py::arg("write_files") = true);

  m.def("summarize", [](const std::string& dir) { return summaries(summarize_dir(dir)); },
        py::arg("trace_dir"));

  m.def("check_acceptance", [](const std::string& config, int jobs) {
    AcceptanceOptions opt = load_acceptance_options(config);
    opt.jobs = jobs;
    AcceptanceReport rep;
    {
      py::gil_scoped_release release;
      rep = check_acceptance(collect_acceptance_data(opt));
    }
    py::list out;
    for (const auto& c : rep.criteria) {
      py::dict d;
      d["id"] = c.id;
      d["name"] = c.name;
      d["passed"] = c.passed;
      d["measured"] = c.measured;
      d["threshold"] = c.threshold;
      d["detail"] = c.detail;
      out.append(d);
    }
    return out;
  }, py::arg("config"), py::arg("jobs") = 1, "Runs the full acceptance suite.");
}
