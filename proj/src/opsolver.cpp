#include "cbwk/opsolver.hpp"

#include <algorithm>
#include <cmath>

namespace cbwk {

namespace {

std::vector<double> policy_outcome(const CompletedTables& tab, int policy, const PolicyClass& pc) {
  std::vector<double> v(static_cast<std::size_t>(tab.dims()));
  for (int j = 0; j < tab.dims(); ++j) v[j] = policy_value(tab.consumption[j], policy, pc);
  return v;
}

bool same_mixture(const MixedPolicy& a, const MixedPolicy& b) {
  if (a.support_size() != b.support_size()) return false;
  for (std::size_t i = 0; i < a.support_size(); ++i)
    if (a.entries()[i].policy != b.entries()[i].policy ||
        std::abs(a.entries()[i].weight - b.entries()[i].weight) > 1e-15)
      return false;
  return true;
}

MixedPolicy mixture_from_atoms(const ConvexMinResult& res) {
  MixedPolicy p;
  double total = 0.0;
  for (double w : res.weights) total += w;
  for (std::size_t i = 0; i < res.atoms.size(); ++i)
    if (res.weights[i] > 0.0) p.add(res.atoms[i].tag, res.weights[i] / total);
  return p;
}

}  // namespace

KnapsackRegret::KnapsackRegret(CompletedTables tables, RegretParams params, EmpiricalOptimum p_t)
    : RegretModel(std::move(tables)), params_(params), p_t_(std::move(p_t)) {}

double KnapsackRegret::regret(const MixedPolicy& p, const PolicyClass& pc) const {
  return (p_t_.value - empirical_objective(tables(), p, params_, pc)) / (params_.Z + 1.0);
}

std::optional<Violation> KnapsackRegret::find_violating(const ActionTable& q_smoothed, double mu,
                                                        double tol, const PolicyClass& pc,
                                                        OracleStats* stats) const {
  return find_violating_policy(tables(), q_smoothed, mu, params_, p_t_, pc, tol, stats);
}

ConcaveRegret::ConcaveRegret(CompletedTables tables, ConcaveObjective objective, double f_t)
    : RegretModel(std::move(tables)), objective_(std::move(objective)), f_t_(f_t) {
  objective_.validate();
  require(objective_.dims == this->tables().dims(), "ConcaveRegret: objective dimension mismatch");
}

double ConcaveRegret::regret(const MixedPolicy& p, const PolicyClass& pc) const {
  const auto v = estimate_consumption(tables(), p, pc);
  return (f_t_ - objective_(v)) / (objective_.norm_of_ones * objective_.L);
}

std::optional<Violation> ConcaveRegret::find_violating(const ActionTable& q_smoothed, double mu,
                                                       double tol, const PolicyClass& pc,
                                                       OracleStats* stats) const {
  const CompletedTables& tab = tables();
  const int X = pc.num_contexts();
  const int K = pc.num_actions();
  const int d = tab.dims();
  // max_P D_P = max_P V_P + f(V_hat(P)) / kappa - f_t / kappa - 2K, a concave
  // maximization over the polytope of points y = (V_P, V_hat(P)).
  const double kappa = objective_.norm_of_ones * objective_.L * psi() * mu;

  ActionTable inv_mass(X, K);
  for (int x = 0; x < X; ++x)
    for (int a = 0; a < K; ++a) inv_mass.at(x, a) = tab.context_freq[x] / q_smoothed.at(x, a);

  const ConcaveObjective& f = objective_;
  ConvexFunction g{[&](std::span<const double> y) { return -kappa * y[0] - f(y.subspan(1)); },
                   [&](std::span<const double> y) {
                     const auto sg = f.supergradient(y.subspan(1));
                     std::vector<double> out(static_cast<std::size_t>(d) + 1);
                     out[0] = -kappa;
                     for (int j = 0; j < d; ++j) out[j + 1] = -sg[j];
                     return out;
                   }};
  LinearOracle oracle = [&](std::span<const double> dir) {
    ActionTable rewards(X, K);
    for (int x = 0; x < X; ++x)
      for (int a = 0; a < K; ++a) {
        double r = -dir[0] * inv_mass.at(x, a);
        for (int j = 0; j < d; ++j) r -= dir[j + 1] * tab.consumption[j].at(x, a);
        rewards.at(x, a) = r;
      }
    normalize_rewards(rewards);
    const int p = argmax_oracle(rewards, pc, stats);
    OracleAtom atom{std::vector<double>(static_cast<std::size_t>(d) + 1), p};
    atom.point[0] = policy_value(inv_mass, p, pc);
    for (int j = 0; j < d; ++j) atom.point[j + 1] = policy_value(tab.consumption[j], p, pc);
    return atom;
  };

  ConvexMinResult res;
  try {
    res = convex_min_with_linear_oracle(g, oracle, d + 1, tol * kappa);
  } catch (const ConvexMinFailure& e) {
    res = e.best();
  }
  const MixedPolicy best = mixture_from_atoms(res);
  const double b = regret(best, pc) / (psi() * mu);
  const VSD vsd = compute_vsd(q_smoothed, tab.context_freq, best, b, pc);
  if (vsd.D > tol) return Violation{best, vsd.D};
  const double d_upper = (-res.lower_bound - f_t_) / kappa - 2.0 * K;
  if (res.converged || d_upper <= tol) return std::nullopt;
  throw SolverError("ConcaveRegret: convex minimizer did not certify the absence of a violator");
}

EmpiricalOptimum concave_empirical_optimum(const CompletedTables& tab,
                                           const ConcaveObjective& objective,
                                           const PolicyClass& pc, double tol,
                                           OracleStats* stats) {
  objective.validate();
  require(objective.dims == tab.dims(), "concave_empirical_optimum: dimension mismatch");
  const int X = pc.num_contexts();
  const int K = pc.num_actions();
  const int d = tab.dims();
  ConvexFunction g{[&](std::span<const double> v) { return -objective(v); },
                   [&](std::span<const double> v) {
                     auto sg = objective.supergradient(v);
                     for (double& s : sg) s = -s;
                     return sg;
                   }};
  LinearOracle oracle = [&](std::span<const double> dir) {
    ActionTable rewards(X, K);
    for (int x = 0; x < X; ++x)
      for (int a = 0; a < K; ++a) {
        double r = 0.0;
        for (int j = 0; j < d; ++j) r -= dir[j] * tab.consumption[j].at(x, a);
        rewards.at(x, a) = r;
      }
    normalize_rewards(rewards);
    const int p = argmax_oracle(rewards, pc, stats);
    return OracleAtom{policy_outcome(tab, p, pc), p};
  };
  const ConvexMinResult res = convex_min_with_linear_oracle(g, oracle, d, tol);
  EmpiricalOptimum opt{mixture_from_atoms(res), 0.0};
  opt.value = objective(estimate_consumption(tab, opt.policy, pc));
  return opt;
}

VSD compute_vsd(const ActionTable& q_smoothed, std::span<const double> context_freq,
                const MixedPolicy& p, double b_P, const PolicyClass& pc) {
  VSD out;
  for (const auto& e : p.entries())
    for (int x = 0; x < pc.num_contexts(); ++x) {
      const double inv = 1.0 / q_smoothed.at(x, pc.action(e.policy, x));
      out.V += e.weight * context_freq[x] * inv;
      out.S += e.weight * context_freq[x] * inv * inv;
    }
  out.D = out.V - (2.0 * pc.num_actions() + b_P);
  return out;
}

VSD compute_vsd(const MixedPolicy& q, const MixedPolicy& p, double mu, const History& h,
                double b_P, const PolicyClass& pc) {
  require(mu > 0.0 && mu * pc.num_actions() <= 1.0, "compute_vsd: mu must lie in (0, 1/K]");
  require(!h.empty(), "compute_vsd: empty history");
  std::vector<double> freq(static_cast<std::size_t>(pc.num_contexts()));
  for (int x = 0; x < pc.num_contexts(); ++x)
    freq[x] = h.context_count(x) / static_cast<double>(h.size());
  return compute_vsd(smoothed_masses(q, mu, pc), freq, p, b_P, pc);
}

long cd_update_bound(int K, double mu) {
  require(K >= 2 && mu > 0.0 && mu * K < 1.0, "cd_update_bound: need 0 < mu < 1/K");
  return static_cast<long>(std::ceil(4.0 * std::log(1.0 / (K * mu)) / mu));
}

OPSolution solve_op(const RegretModel& model, double mu, const std::vector<WeightedAtom>& init,
                    const PolicyClass& pc, const OPOptions& options) {
  const int K = pc.num_actions();
  require(mu > 0.0 && mu <= 1.0 / (2.0 * K) + 1e-15, "solve_op: mu must lie in (0, 1/(2K)]");
  const CompletedTables& tab = model.tables();
  const double psi_mu = model.psi() * mu;
  // Regret is non-negative by definition; negative values are round-off of
  // the empirical optimum.
  auto b_of = [&](const MixedPolicy& p) { return std::max(0.0, model.regret(p, pc)) / psi_mu; };

  struct Atom {
    MixedPolicy policy;
    double alpha;
    double b;
  };
  std::vector<Atom> atoms;
  ActionTable q_table(pc.num_contexts(), K);
  for (const auto& a : init) {
    if (a.alpha <= 0.0) continue;
    a.policy.validate_convex();
    atoms.push_back({a.policy, a.alpha, b_of(a.policy)});
    accumulate_action_table(q_table, a.policy, a.alpha, pc);
  }

  OPSolution sol;
  OracleStats stats;
  const long bound = cd_update_bound(K, mu);
  for (;;) {
    ++sol.iterations;
    double weighted = 0.0;
    for (const auto& a : atoms) weighted += a.alpha * (2.0 * K + a.b);
    if (weighted > 2.0 * K + options.scale_slack) {
      const double c = 2.0 * K / weighted;
      for (auto& a : atoms) a.alpha *= c;
      q_table.scale(c);
      ++sol.scale_steps;
    }
    const ActionTable q_smoothed = smoothed_masses(q_table, mu);
    const auto viol = model.find_violating(q_smoothed, mu, options.halt_tol, pc, &stats);
    if (!viol) break;
    const double b = b_of(viol->policy);
    const VSD vsd = compute_vsd(q_smoothed, tab.context_freq, viol->policy, b, pc);
    if (vsd.D <= 0.0) break;  // only the clamped round-off separated it from feasibility
    const double alpha = (vsd.V + vsd.D) / (2.0 * (1.0 - K * mu) * vsd.S);
    auto it = std::find_if(atoms.begin(), atoms.end(),
                           [&](const Atom& a) { return same_mixture(a.policy, viol->policy); });
    if (it != atoms.end())
      it->alpha += alpha;
    else
      atoms.push_back({viol->policy, alpha, b});
    accumulate_action_table(q_table, viol->policy, alpha, pc);
    if (++sol.update_steps > bound)
      throw SolverError("solve_op: coordinate descent exceeded its update-step bound of " +
                        std::to_string(bound));
  }

  for (const auto& a : atoms) {
    if (a.alpha <= 0.0) continue;
    sol.Q.add(a.policy, a.alpha);
    sol.atoms.push_back({a.policy, a.alpha});
  }
  sol.oracle_calls = stats.calls;
  return sol;
}

OPSolution solve_op(const OPInstance& inst, const PolicyClass& pc) {
  require(inst.history != nullptr, "solve_op: missing history");
  KnapsackRegret model(completed_tables(*inst.history), inst.params, inst.P_t);
  std::vector<WeightedAtom> init;
  for (const auto& e : inst.Q_init.entries())
    init.push_back({MixedPolicy::point_mass(e.policy), e.weight});
  return solve_op(model, inst.mu, init, pc);
}

OPCheck verify_op(const RegretModel& model, const OPSolution& sol, double mu,
                  const PolicyClass& pc) {
  const double psi_mu = model.psi() * mu;
  OPCheck check;
  for (const auto& a : sol.atoms)
    check.first_lhs += a.alpha * std::max(0.0, model.regret(a.policy, pc)) / psi_mu;
  const ActionTable q_smoothed = smoothed_masses(sol.Q, mu, pc);
  check.worst_second_excess = -1e300;
  for (int p = 0; p < pc.size(); ++p) {
    const MixedPolicy pure = MixedPolicy::point_mass(p);
    const double b = std::max(0.0, model.regret(pure, pc)) / psi_mu;
    const VSD vsd = compute_vsd(q_smoothed, model.tables().context_freq, pure, b, pc);
    if (vsd.D > check.worst_second_excess) {
      check.worst_second_excess = vsd.D;
      check.worst_policy = p;
    }
  }
  return check;
}

}  // namespace cbwk
