#include "cbwk/agents.hpp"

#include <cmath>
#include <string>

#include "cbwk/errors.hpp"

namespace cbwk {

int EpochSchedule::epoch_of(long t) {
  require(t >= 1, "EpochSchedule: rounds start at 1");
  int m = 1;
  while (tau(m) < t) ++m;
  return m;
}

double epoch_mu(int m, int K, int d, int pi_size, double delta) {
  require(m >= 0 && m < 62, "epoch_mu: epoch index out of range");
  const double tau = static_cast<double>(EpochSchedule::tau(m));
  const double root =
      std::sqrt(std::log(16.0 * tau * tau * (d + 1) * pi_size / delta) / (K * tau));
  return std::min(1.0 / (2.0 * K), root);
}

double reduced_budget(const ProblemDims& dims, long T0, int pi_size, double c) {
  const double T = static_cast<double>(dims.T);
  const double margin = c * std::sqrt(dims.K * T * std::log(T * pi_size / dims.delta));
  const double b = dims.B - static_cast<double>(T0) - margin;
  if (b <= 0.0)
    throw ConfigError("reduced budget B' = " + std::to_string(dims.B) + " - " + std::to_string(T0) +
                      " - " + std::to_string(margin) + " = " + std::to_string(b) +
                      " is not positive; the budget is below the algorithm's threshold");
  return b;
}

namespace {

struct EpochState {
  MixedPolicy Q;  // Q_{m-1}, in C0(Pi)
  std::vector<WeightedAtom> atoms;
  MixedPolicy P_default;  // P_{tau_{m-1}}
  double mu = 0.0;        // mu_{m-1}
};

// Solves (OP) for the epoch that just ended and installs Q_m, P_{tau_m}, mu_m.
OPRecord solve_epoch(const RegretModel& model, const MixedPolicy& p_t, double mu, int m, long t,
                     const PolicyClass& pc, const AgentConfig& config, EpochState& state) {
  const int K = pc.num_actions();
  const std::vector<WeightedAtom> none;
  const OPSolution sol = solve_op(model, mu, config.warm_start ? state.atoms : none, pc, config.op);
  OPRecord rec;
  rec.t = t;
  rec.epoch = m;
  rec.mu = mu;
  rec.iterations = sol.iterations;
  rec.scale_steps = sol.scale_steps;
  rec.update_steps = sol.update_steps;
  rec.update_bound = cd_update_bound(K, mu);
  rec.oracle_calls = sol.oracle_calls;
  if (config.verify_op) {
    const OPCheck check = verify_op(model, sol, mu, pc);
    rec.first_lhs = check.first_lhs;
    rec.second_excess = check.worst_second_excess;
    rec.feasible = check.feasible(K);
  }
  rec.regret_of_p_t = model.regret(p_t, pc);
  rec.q_mass = sol.Q.total();
  state.Q = sol.Q;
  state.atoms = sol.atoms;
  state.P_default = p_t;
  state.mu = mu;
  return rec;
}

// Rounds 1..rounds of the adaptive phase. `boundary(h, m, t)` runs at the end
// of every epoch that is followed by more rounds and returns the oracle calls
// it made.
template <typename Boundary>
void play_epochs(EnvironmentStream& env, long rounds, const PolicyClass& pc, TraceRecorder& rec,
                 History& h, EpochState& state, long pending_calls, Rng& rng, Boundary boundary) {
  ActionTable table = sampling_table(state.Q, state.P_default, state.mu, pc);
  for (long t = 1; t <= rounds; ++t) {
    auto round = env.next();
    if (!round) {
      rec.trace().terminal.truncated = true;
      break;
    }
    const int m = EpochSchedule::epoch_of(t);
    const SampledAction s = sample_from_table(table, round->x, rng);
    const double r = round->reward[s.action];
    const std::vector<double>& v = round->consumption[s.action];
    const bool alive = rec.record(t, m, round->x.id, s.action, s.prob, r, v, pending_calls);
    pending_calls = 0;
    h.append({round->x, s.action, r, v, s.prob});
    if (!alive) break;
    if (EpochSchedule::is_boundary(t) && t < rounds) {
      pending_calls += boundary(h, m, t);
      table = sampling_table(state.Q, state.P_default, state.mu, pc);
    }
  }
}

}  // namespace

RunTrace run_cbwk(EnvironmentStream& env, const ProblemDims& dims, const PolicyClass& pc,
                  const AgentConfig& config, Rng& rng) {
  dims.validate();
  require(pc.num_actions() == dims.K, "run_cbwk: policy class has the wrong number of actions");
  const int K = dims.K;
  const int d = dims.d;
  const int X = pc.num_contexts();

  const ExplorationLength T0 = exploration_budget_T0(dims, pc.size(), config.exploration_scale);
  const double B_prime = reduced_budget(dims, T0.T0, pc.size(), config.c);

  TraceRecorder rec(d, dims.B);
  RunTerminal& term = rec.trace().terminal;
  term.algorithm = "cbwk";
  term.T = dims.T;
  term.B = dims.B;
  term.T0 = T0.T0;
  term.out_of_regime = T0.clamped;
  term.B_prime = B_prime;

  History h(X, K, d, config.include_exploration_in_history);
  ExplorationEstimates est(pc.size(), d);
  for (long t = -(T0.T0 - 1); t <= 0; ++t) {
    auto round = env.next();
    if (!round) {
      term.truncated = true;
      return rec.take();
    }
    const int a = static_cast<int>(rng.below(static_cast<std::size_t>(K)));
    const HistoryRecord hr{round->x, a, round->reward[a], round->consumption[a], 1.0 / K};
    est.add(hr, pc);
    if (config.include_exploration_in_history) h.append(hr);
    if (!rec.record(t, 0, round->x.id, a, hr.p, hr.r, hr.v, 0)) return rec.take();
  }

  const double Z = T0.T0 > 0 ? estimate_Z(est, dims, pc) : 1.0;
  term.Z = Z;
  const RegretParams params{Z, B_prime, dims.T, RegretParams::kPsi};
  params.validate(dims.B);

  EpochState state;
  state.P_default = MixedPolicy::uniform(pc.size());
  state.mu = epoch_mu(0, K, d, pc.size(), dims.delta);
  long total_calls = 0;

  play_epochs(env, dims.T - T0.T0, pc, rec, h, state, 0, rng,
              [&](const History& hist, int m, long t) {
                const CompletedTables tab = completed_tables(hist);
                OracleStats stats;
                const ConstrainedSolve opt =
                    solve_budgeted_argmax(tab, params, pc, config.solver_tol, &stats);
                KnapsackRegret model(tab, params, {opt.policy, opt.value});
                const double mu = epoch_mu(m, K, d, pc.size(), dims.delta);
                OPRecord r = solve_epoch(model, opt.policy, mu, m, t, pc, config, state);
                r.oracle_calls += stats.calls;
                rec.trace().solves.push_back(r);
                total_calls += r.oracle_calls;
                return r.oracle_calls;
              });
  term.oracle_calls = total_calls;
  return rec.take();
}

RunTrace run_cbwr(EnvironmentStream& env, int K, int d, long T, double delta,
                  const ConcaveObjective& objective, const PolicyClass& pc,
                  const AgentConfig& config, Rng& rng) {
  objective.validate();
  require(pc.num_actions() == K && objective.dims == d, "run_cbwr: dimension mismatch");
  require(T >= 1 && delta > 0.0 && delta < 1.0, "run_cbwr: invalid horizon or delta");

  TraceRecorder rec(d);
  RunTerminal& term = rec.trace().terminal;
  term.algorithm = "cbwr";
  term.T = T;
  term.B = 0.0;

  History h(pc.num_contexts(), K, d);
  EpochState state;
  state.P_default = MixedPolicy::uniform(pc.size());
  state.mu = epoch_mu(0, K, d, pc.size(), delta);
  long total_calls = 0;

  play_epochs(env, T, pc, rec, h, state, 0, rng, [&](const History& hist, int m, long t) {
    const CompletedTables tab = completed_tables(hist);
    OracleStats stats;
    const EmpiricalOptimum opt =
        concave_empirical_optimum(tab, objective, pc, config.solver_tol, &stats);
    ConcaveRegret model(tab, objective, opt.value);
    const double mu = epoch_mu(m, K, d, pc.size(), delta);
    OPRecord r = solve_epoch(model, opt.policy, mu, m, t, pc, config, state);
    r.oracle_calls += stats.calls;
    rec.trace().solves.push_back(r);
    total_calls += r.oracle_calls;
    return r.oracle_calls;
  });

  term.oracle_calls = total_calls;
  term.avg_outcome = rec.cum_v();
  for (double& v : term.avg_outcome) v /= static_cast<double>(std::max<long>(1, term.rounds));
  term.objective = objective(term.avg_outcome);
  return rec.take();
}

}  // namespace cbwk
