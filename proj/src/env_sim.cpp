#include "cbwk/env_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cbwk/amo.hpp"
#include "cbwk/errors.hpp"
#include "cbwk/lp.hpp"
#include "json.hpp"

namespace cbwk {

namespace {

void config_check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

double realize(double mean, const EnvironmentSpec& spec, Rng& rng) {
  switch (spec.noise) {
    case NoiseModel::kDeterministic:
      return mean;
    case NoiseModel::kBernoulli:
      return rng.bernoulli(mean) ? 1.0 : 0.0;
    case NoiseModel::kUniformJitter: {
      // The half-width shrinks near the ends of [0, 1] so the mean is kept.
      const double h = std::min({spec.jitter_half_width, mean, 1.0 - mean});
      return mean + h * (2.0 * rng.uniform() - 1.0);
    }
  }
  return mean;
}

}  // namespace

void EnvironmentSpec::validate() const {
  const int X = num_contexts();
  config_check(X >= 1, "environment: need at least one context");
  double total = 0.0;
  for (double p : context_probs) {
    config_check(p >= 0.0, "environment: negative context probability");
    total += p;
  }
  config_check(std::abs(total - 1.0) <= 1e-9, "environment: context_probs must sum to 1");
  config_check(static_cast<int>(mean_reward.size()) == X, "environment: mean_reward needs one row per context");
  config_check(static_cast<int>(mean_consumption.size()) == X,
               "environment: mean_consumption needs one row per context");
  const int K = num_actions();
  const int d = dims();
  config_check(K >= 2, "environment: need at least two actions");
  config_check(d >= 1, "environment: need at least one resource");
  for (int x = 0; x < X; ++x) {
    config_check(static_cast<int>(mean_reward[x].size()) == K, "environment: ragged mean_reward");
    config_check(static_cast<int>(mean_consumption[x].size()) == K,
                 "environment: ragged mean_consumption");
    for (int a = 0; a < K; ++a) {
      config_check(mean_reward[x][a] >= 0.0 && mean_reward[x][a] <= 1.0,
                   "environment: mean reward outside [0, 1]");
      config_check(static_cast<int>(mean_consumption[x][a].size()) == d,
                   "environment: ragged mean_consumption");
      for (double c : mean_consumption[x][a])
        config_check(c >= 0.0 && c <= 1.0, "environment: mean consumption outside [0, 1]");
    }
    config_check(mean_reward[x][0] == 0.0, "environment: action 0 (no-op) must have zero reward");
    for (double c : mean_consumption[x][0])
      config_check(c == 0.0, "environment: action 0 (no-op) must have zero consumption");
  }
  config_check(jitter_half_width >= 0.0 && jitter_half_width <= 0.5,
               "environment: jitter half-width must lie in [0, 0.5]");
}

RoundOutcome sample_round(const EnvironmentSpec& spec, Rng& rng) {
  const int K = spec.num_actions();
  const int d = spec.dims();
  RoundOutcome out;
  out.x = {static_cast<int>(rng.categorical(spec.context_probs))};
  out.reward.resize(static_cast<std::size_t>(K));
  out.consumption.assign(static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(d)));
  for (int a = 0; a < K; ++a) {
    out.reward[a] = realize(spec.mean_reward[out.x.id][a], spec, rng);
    for (int j = 0; j < d; ++j)
      out.consumption[a][j] = realize(spec.mean_consumption[out.x.id][a][j], spec, rng);
  }
  return out;
}

SimulatedEnvironment::SimulatedEnvironment(const EnvironmentSpec& spec, std::uint64_t seed,
                                           long max_rounds)
    : spec_(spec), rng_(seed), remaining_(max_rounds) {}

std::optional<RoundOutcome> SimulatedEnvironment::next() {
  if (remaining_ == 0) return std::nullopt;
  if (remaining_ > 0) --remaining_;
  return sample_round(spec_, rng_);
}

double ExactMoments::R_of(const MixedPolicy& p) const {
  double r = 0.0;
  for (const auto& e : p.entries()) r += e.weight * R[e.policy];
  return r;
}

std::vector<double> ExactMoments::V_of(const MixedPolicy& p) const {
  std::vector<double> v(V.empty() ? 0 : V[0].size(), 0.0);
  for (const auto& e : p.entries())
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += e.weight * V[e.policy][j];
  return v;
}

ExactMoments exact_moments(const EnvironmentSpec& spec, const PolicyClass& pc) {
  require(pc.num_contexts() == spec.num_contexts() && pc.num_actions() == spec.num_actions(),
          "exact_moments: policy class does not match the environment");
  const int d = spec.dims();
  ExactMoments m;
  m.R.assign(static_cast<std::size_t>(pc.size()), 0.0);
  m.V.assign(static_cast<std::size_t>(pc.size()), std::vector<double>(static_cast<std::size_t>(d), 0.0));
  for (int p = 0; p < pc.size(); ++p)
    for (int x = 0; x < spec.num_contexts(); ++x) {
      const int a = pc.action(p, x);
      const double px = spec.context_probs[x];
      m.R[p] += px * spec.mean_reward[x][a];
      for (int j = 0; j < d; ++j) m.V[p][j] += px * spec.mean_consumption[x][a][j];
    }
  return m;
}

OptResult compute_opt(const ExactMoments& m, double B, long T) {
  require(B >= 0.0 && T >= 1, "compute_opt: need B >= 0 and T >= 1");
  const int n = static_cast<int>(m.R.size());
  const int d = m.V.empty() ? 0 : static_cast<int>(m.V[0].size());
  lp::Problem prob;
  prob.objective.resize(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) prob.objective[p] = static_cast<double>(T) * m.R[p];
  for (int j = 0; j < d; ++j) {
    lp::Constraint row{std::vector<double>(static_cast<std::size_t>(n)), lp::Sense::kLessEqual, B};
    for (int p = 0; p < n; ++p) row.coeffs[p] = static_cast<double>(T) * m.V[p][j];
    prob.constraints.push_back(std::move(row));
  }
  prob.constraints.push_back({std::vector<double>(static_cast<std::size_t>(n), 1.0), lp::Sense::kEqual, 1.0});
  const lp::Solution sol = lp::maximize(prob);
  if (sol.status != lp::Status::kOptimal)
    throw SolverError(std::string("compute_opt: LP ") + lp::to_string(sol.status) +
                      " (is a zero-consumption policy present?)");
  OptResult out;
  out.opt = sol.objective;
  double total = 0.0;
  for (double w : sol.x) total += std::max(0.0, w);
  for (int p = 0; p < n; ++p)
    if (sol.x[p] > 1e-12) out.p_star.add(p, sol.x[p] / total);
  return out;
}

OptResult compute_opt(const EnvironmentSpec& spec, const PolicyClass& pc, double B, long T) {
  return compute_opt(exact_moments(spec, pc), B, T);
}

std::vector<double> opt_curve(const EnvironmentSpec& spec, const PolicyClass& pc,
                              const std::vector<double>& budgets, long T) {
  const ExactMoments m = exact_moments(spec, pc);
  std::vector<double> out;
  out.reserve(budgets.size());
  for (double b : budgets) out.push_back(compute_opt(m, b, T).opt);
  return out;
}

OptResult compute_concave_opt(const EnvironmentSpec& spec, const PolicyClass& pc,
                              const ConcaveObjective& objective) {
  objective.validate();
  const ExactMoments m = exact_moments(spec, pc);
  const int d = spec.dims();
  require(objective.dims == d, "compute_concave_opt: objective dimension mismatch");
  ConvexFunction g{[&](std::span<const double> v) { return -objective(v); },
                   [&](std::span<const double> v) {
                     auto sg = objective.supergradient(v);
                     for (double& s : sg) s = -s;
                     return sg;
                   }};
  LinearOracle oracle = [&](std::span<const double> dir) {
    int best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (int p = 0; p < pc.size(); ++p) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += dir[j] * m.V[p][j];
      if (s < best_value) {
        best_value = s;
        best = p;
      }
    }
    return OracleAtom{m.V[best], best};
  };
  const ConvexMinResult res = convex_min_with_linear_oracle(g, oracle, d, 1e-10);
  OptResult out;
  double total = 0.0;
  for (double w : res.weights) total += w;
  for (std::size_t i = 0; i < res.atoms.size(); ++i)
    if (res.weights[i] > 0.0) out.p_star.add(res.atoms[i].tag, res.weights[i] / total);
  out.opt = objective(m.V_of(out.p_star));
  return out;
}

RunTrace baseline_uniform(EnvironmentStream& env, int K, int d, long T, double B, Rng& rng) {
  TraceRecorder rec(d, B);
  rec.trace().terminal.algorithm = "uniform";
  rec.trace().terminal.T = T;
  rec.trace().terminal.B = B;
  for (long t = 1; t <= T; ++t) {
    auto round = env.next();
    if (!round) {
      rec.trace().terminal.truncated = true;
      break;
    }
    const int a = static_cast<int>(rng.below(static_cast<std::size_t>(K)));
    if (!rec.record(t, 0, round->x.id, a, 1.0 / K, round->reward[a], round->consumption[a], 0)) break;
  }
  return rec.take();
}

RunTrace baseline_static_lp(EnvironmentStream& env, const PolicyClass& pc,
                            const MixedPolicy& p_star, int d, long T, double B, Rng& rng) {
  p_star.validate_convex();
  const ActionTable table = action_table(p_star, pc);
  TraceRecorder rec(d, B);
  rec.trace().terminal.algorithm = "static-lp";
  rec.trace().terminal.T = T;
  rec.trace().terminal.B = B;
  for (long t = 1; t <= T; ++t) {
    auto round = env.next();
    if (!round) {
      rec.trace().terminal.truncated = true;
      break;
    }
    const SampledAction s = sample_from_table(table, round->x, rng);
    if (!rec.record(t, 0, round->x.id, s.action, s.prob, round->reward[s.action], round->consumption[s.action],
                    0))
      break;
  }
  return rec.take();
}

NoiseModel noise_from_string(const std::string& s) {
  if (s == "deterministic") return NoiseModel::kDeterministic;
  if (s == "bernoulli") return NoiseModel::kBernoulli;
  if (s == "uniform_jitter") return NoiseModel::kUniformJitter;
  throw ConfigError("unknown noise model '" + s + "'");
}

const char* to_string(NoiseModel n) {
  switch (n) {
    case NoiseModel::kDeterministic:
      return "deterministic";
    case NoiseModel::kBernoulli:
      return "bernoulli";
    case NoiseModel::kUniformJitter:
      return "uniform_jitter";
  }
  return "?";
}

ProblemInstance instance_from_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("instance: ") + e.what());
  }
  try {
    EnvironmentSpec env;
    env.context_probs = j.at("context_probs").get<std::vector<double>>();
    env.mean_reward = j.at("mean_reward").get<std::vector<std::vector<double>>>();
    env.mean_consumption =
        j.at("mean_consumption").get<std::vector<std::vector<std::vector<double>>>>();
    if (j.contains("noise")) {
      const json& n = j.at("noise");
      env.noise = noise_from_string(n.at("model").get<std::string>());
      env.jitter_half_width = n.value("half_width", 0.0);
    }
    env.validate();
    const auto table = j.at("policies").get<std::vector<std::vector<int>>>();
    const int noop = j.value("noop_policy", 0);
    try {
      PolicyClass pc(env.num_contexts(), env.num_actions(), table, noop);
      return ProblemInstance{j.value("name", std::string("instance")), std::move(env), std::move(pc)};
    } catch (const ContractError& e) {
      throw ConfigError(std::string("instance: ") + e.what());
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("instance: ") + e.what());
  }
}

std::string instance_to_json(const ProblemInstance& inst) {
  using nlohmann::json;
  json j;
  j["name"] = inst.name;
  j["context_probs"] = inst.env.context_probs;
  j["mean_reward"] = inst.env.mean_reward;
  j["mean_consumption"] = inst.env.mean_consumption;
  j["noise"] = {{"model", to_string(inst.env.noise)}, {"half_width", inst.env.jitter_half_width}};
  std::vector<std::vector<int>> table(static_cast<std::size_t>(inst.policies.size()));
  for (int p = 0; p < inst.policies.size(); ++p)
    for (int x = 0; x < inst.policies.num_contexts(); ++x) table[p].push_back(inst.policies.action(p, x));
  j["policies"] = table;
  j["noop_policy"] = inst.policies.noop_index();
  return j.dump(2);
}

ProblemInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open instance file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return instance_from_json(ss.str());
}

}  // namespace cbwk
