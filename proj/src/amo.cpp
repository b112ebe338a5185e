#include "cbwk/amo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cbwk/lp.hpp"

namespace cbwk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

int argmax_oracle(const ActionTable& rewards, const PolicyClass& pc, OracleStats* stats) {
  require(rewards.num_contexts() == pc.num_contexts() && rewards.num_actions() == pc.num_actions(),
          "argmax_oracle: reward table does not match the policy class");
  if (stats) ++stats->calls;
  int best = 0;
  double best_value = -kInf;
  for (int p = 0; p < pc.size(); ++p) {
    const double v = policy_value(rewards, p, pc);
    if (v > best_value) {
      best_value = v;
      best = p;
    }
  }
  return best;
}

int argmax_oracle(std::span<const WeightedExample> examples, const PolicyClass& pc,
                  OracleStats* stats) {
  ActionTable table(pc.num_contexts(), pc.num_actions());
  for (const auto& ex : examples) {
    require(ex.x.id >= 0 && ex.x.id < pc.num_contexts(), "argmax_oracle: context out of range");
    require(static_cast<int>(ex.reward_per_action.size()) == pc.num_actions(),
            "argmax_oracle: reward vector has wrong length");
    for (int a = 0; a < pc.num_actions(); ++a) {
      require(std::isfinite(ex.reward_per_action[a]), "argmax_oracle: non-finite reward");
      table.at(ex.x.id, a) += ex.reward_per_action[a];
    }
  }
  return argmax_oracle(table, pc, stats);
}

std::vector<WeightedExample> normalize_rewards(std::span<const WeightedExample> examples) {
  std::vector<WeightedExample> out(examples.begin(), examples.end());
  double span = 0.0;
  for (auto& ex : out) {
    if (ex.reward_per_action.empty()) continue;
    const double lo = *std::min_element(ex.reward_per_action.begin(), ex.reward_per_action.end());
    for (double& r : ex.reward_per_action) {
      r -= lo;
      span = std::max(span, r);
    }
  }
  if (span > 0.0)
    for (auto& ex : out)
      for (double& r : ex.reward_per_action) r /= span;
  return out;
}

void normalize_rewards(ActionTable& rewards) {
  double span = 0.0;
  const int K = rewards.num_actions();
  for (int x = 0; x < rewards.num_contexts(); ++x) {
    double lo = kInf;
    for (int a = 0; a < K; ++a) lo = std::min(lo, rewards.at(x, a));
    for (int a = 0; a < K; ++a) {
      rewards.at(x, a) -= lo;
      span = std::max(span, rewards.at(x, a));
    }
  }
  if (span > 0.0) rewards.scale(1.0 / span);
}

double policy_value(const ActionTable& table, int policy, const PolicyClass& pc) {
  double s = 0.0;
  for (int x = 0; x < pc.num_contexts(); ++x) s += table.at(x, pc.action(policy, x));
  return s;
}

ConstrainedSolve solve_knapsack_linear(const ActionTable& gain,
                                       std::span<const ActionTable> consumption,
                                       double per_round_budget, double Z, const PolicyClass& pc,
                                       double tol, int iter_cap, OracleStats* stats) {
  require(!consumption.empty(), "solve_knapsack_linear: no resources");
  require(Z >= 0.0 && tol > 0.0, "solve_knapsack_linear: invalid Z or tolerance");
  const int d = static_cast<int>(consumption.size());
  const int X = pc.num_contexts();
  const int K = pc.num_actions();

  std::vector<int> atoms;
  std::vector<double> atom_gain;
  std::vector<std::vector<double>> atom_use;
  auto add_atom = [&](int p) {
    atoms.push_back(p);
    atom_gain.push_back(policy_value(gain, p, pc));
    std::vector<double> use(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) use[j] = policy_value(consumption[j], p, pc);
    atom_use.push_back(std::move(use));
  };

  long calls = 0;
  auto call_oracle = [&](const ActionTable& rewards) {
    ActionTable normalized = rewards;
    normalize_rewards(normalized);
    ++calls;
    return argmax_oracle(normalized, pc, stats);
  };

  add_atom(call_oracle(gain));

  auto objective_of = [&](const std::vector<double>& w) {
    double g = 0.0;
    std::vector<double> v(static_cast<std::size_t>(d), 0.0);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      g += w[i] * atom_gain[i];
      for (int j = 0; j < d; ++j) v[j] += w[i] * atom_use[i][j];
    }
    double worst = 0.0;
    for (double vj : v) worst = std::max(worst, vj - per_round_budget);
    return g - Z * worst;
  };
  auto mixture_of = [&](const std::vector<double>& w) {
    MixedPolicy p;
    double total = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (w[i] > 1e-15) total += w[i];
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (w[i] > 1e-15) p.add(atoms[i], w[i] / total);
    return p;
  };

  ConstrainedSolve best;
  best.policy = MixedPolicy::point_mass(atoms[0]);
  best.value = objective_of({1.0});
  best.upper_bound = kInf;

  for (int iter = 1; iter <= iter_cap; ++iter) {
    const std::size_t n = atoms.size();
    // Variables: w_1..w_n, lambda.
    lp::Problem master;
    master.objective.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) master.objective[i] = atom_gain[i];
    master.objective[n] = -Z;
    for (int j = 0; j < d; ++j) {
      lp::Constraint row{std::vector<double>(n + 1, 0.0), lp::Sense::kLessEqual, per_round_budget};
      for (std::size_t i = 0; i < n; ++i) row.coeffs[i] = atom_use[i][j];
      row.coeffs[n] = -1.0;
      master.constraints.push_back(std::move(row));
    }
    lp::Constraint simplex{std::vector<double>(n + 1, 1.0), lp::Sense::kEqual, 1.0};
    simplex.coeffs[n] = 0.0;
    master.constraints.push_back(std::move(simplex));

    const lp::Solution sol = lp::maximize(master);
    if (sol.status != lp::Status::kOptimal)
      throw ConstrainedSolveFailure(
          std::string("solve_knapsack_linear: master LP ") + lp::to_string(sol.status), best);

    std::vector<double> w(sol.x.begin(), sol.x.begin() + static_cast<long>(n));
    const double value = objective_of(w);
    if (value > best.value || iter == 1) {
      best.value = value;
      best.policy = mixture_of(w);
    }

    // Lagrangian pricing with multipliers y >= 0 on the knapsack rows.
    ActionTable priced = gain;
    double yb = 0.0;
    for (int j = 0; j < d; ++j) {
      const double y = std::max(0.0, sol.duals[j]);
      yb += y * per_round_budget;
      if (y == 0.0) continue;
      for (int x = 0; x < X; ++x)
        for (int a = 0; a < K; ++a) priced.at(x, a) -= y * consumption[j].at(x, a);
    }
    const int candidate = call_oracle(priced);
    const double upper = policy_value(priced, candidate, pc) + yb;
    best.upper_bound = std::min(best.upper_bound, upper);
    best.iterations = iter;
    best.oracle_calls = calls;

    if (best.upper_bound - best.value <= tol) return best;
    if (std::find(atoms.begin(), atoms.end(), candidate) != atoms.end()) {
      // The pricing step returned a column already in the master: the
      // remaining gap is LP round-off.
      if (best.upper_bound - best.value <= 1e3 * tol) return best;
      throw ConstrainedSolveFailure("solve_knapsack_linear: column generation stalled", best);
    }
    add_atom(candidate);
  }
  throw ConstrainedSolveFailure("solve_knapsack_linear: iteration cap reached", best);
}

ConstrainedSolve solve_budgeted_argmax(const CompletedTables& tab, const RegretParams& params,
                                       const PolicyClass& pc, double tol, OracleStats* stats) {
  return solve_knapsack_linear(tab.reward, tab.consumption,
                               params.B_prime / static_cast<double>(params.T), params.Z, pc, tol,
                               kOracleIterationCap, stats);
}

ConstrainedSolve solve_budgeted_argmax(const History& h, const RegretParams& params,
                                       const PolicyClass& pc, double tol, OracleStats* stats) {
  return solve_budgeted_argmax(completed_tables(h), params, pc, tol, stats);
}

ActionTable smoothed_masses(const ActionTable& q_table, double mu) {
  const int K = q_table.num_actions();
  require(mu > 0.0 && mu * K <= 1.0, "smoothed_masses: mu must lie in (0, 1/K]");
  ActionTable out(q_table.num_contexts(), K);
  for (int x = 0; x < q_table.num_contexts(); ++x)
    for (int a = 0; a < K; ++a) out.at(x, a) = (1.0 - K * mu) * q_table.at(x, a) + mu;
  return out;
}

ActionTable smoothed_masses(const MixedPolicy& q, double mu, const PolicyClass& pc) {
  q.validate_subconvex();
  return smoothed_masses(action_table(q, pc), mu);
}

std::optional<Violation> find_violating_policy(const CompletedTables& tab,
                                               const ActionTable& q_smoothed, double mu,
                                               const RegretParams& params,
                                               const EmpiricalOptimum& p_t,
                                               const PolicyClass& pc, double tol,
                                               OracleStats* stats) {
  const int X = pc.num_contexts();
  const int K = pc.num_actions();
  // D_P = V_P(Q) - 2K - (obj_t - obj(P)) / ((Z + 1) psi mu). Multiplying by
  // s = (Z + 1) psi mu turns max_P D_P into the budgeted arg max with gains
  // r_hat(x, a) + s n_x / (t Q^mu(a|x)).
  const double s = (params.Z + 1.0) * params.psi * mu;
  ActionTable gain = tab.reward;
  for (int x = 0; x < X; ++x)
    for (int a = 0; a < K; ++a) gain.at(x, a) += s * tab.context_freq[x] / q_smoothed.at(x, a);

  const ConstrainedSolve sol =
      solve_knapsack_linear(gain, tab.consumption, params.B_prime / static_cast<double>(params.T),
                            params.Z, pc, tol * s, kOracleIterationCap, stats);
  const double d_upper = (sol.upper_bound - p_t.value) / s - 2.0 * K;
  const double d_attained = (sol.value - p_t.value) / s - 2.0 * K;
  if (d_upper <= tol || d_attained <= 0.0) return std::nullopt;
  return Violation{sol.policy, d_attained};
}

std::optional<Violation> find_violating_policy(const History& h, const MixedPolicy& q, double mu,
                                               const RegretParams& params,
                                               const EmpiricalOptimum& p_t,
                                               const PolicyClass& pc, double tol,
                                               OracleStats* stats) {
  return find_violating_policy(completed_tables(h), smoothed_masses(q, mu, pc), mu, params, p_t,
                               pc, tol, stats);
}

// ---- convex minimization ----

namespace {

struct Cut {
  std::vector<double> x;
  double g;
  std::vector<double> s;
};

constexpr int kKelleyPeriod = 2;
constexpr std::size_t kMaxCuts = 60;

// Minimizer of a convex h on [0, hi] by bisection on the sign of a
// subgradient of h, which keeps its accuracy where function values no longer
// resolve the change.
double line_search(const std::function<double(double)>& slope, double hi) {
  if (slope(0.0) >= 0.0) return 0.0;
  if (slope(hi) <= 0.0) return hi;
  double a = 0.0, b = hi;
  for (int i = 0; i < 100 && b - a > 1e-16 * hi; ++i) {
    const double m = 0.5 * (a + b);
    if (slope(m) < 0.0)
      a = m;
    else
      b = m;
  }
  return 0.5 * (a + b);
}

}  // namespace

ConvexMinResult convex_min_with_linear_oracle(const ConvexFunction& g, const LinearOracle& oracle,
                                              int dim, double tol, int iter_cap) {
  require(dim >= 1 && tol > 0.0 && iter_cap >= 1, "convex_min_with_linear_oracle: bad arguments");
  std::vector<OracleAtom> atoms;
  long calls = 0;

  auto same_atom = [](const OracleAtom& a, const OracleAtom& b) {
    if (a.tag >= 0 || b.tag >= 0) return a.tag == b.tag;
    return a.point == b.point;
  };
  auto query = [&](std::span<const double> direction) {
    ++calls;
    OracleAtom s = oracle(direction);
    require(static_cast<int>(s.point.size()) == dim, "convex_min: oracle point has wrong size");
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (same_atom(atoms[i], s)) return i;
    atoms.push_back(std::move(s));
    return atoms.size() - 1;
  };
  auto point_of = [&](const std::vector<double>& w) {
    std::vector<double> x(static_cast<std::size_t>(dim), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i] != 0.0)
        for (int k = 0; k < dim; ++k) x[k] += w[i] * atoms[i].point[k];
    return x;
  };

  std::vector<double> zero(static_cast<std::size_t>(dim), 0.0);
  std::vector<double> w(1, 1.0);
  query(zero);
  std::vector<double> x = point_of(w);

  ConvexMinResult best;
  best.value = kInf;
  double lower = -kInf;
  std::vector<double> best_w;
  std::vector<Cut> cuts;

  auto finish = [&](bool converged, int iterations) {
    ConvexMinResult r;
    r.weights = best_w;
    r.weights.resize(atoms.size(), 0.0);
    r.point = point_of(r.weights);
    r.value = g.value(r.point);
    r.lower_bound = std::min(lower, r.value);
    r.gap = r.value - r.lower_bound;
    r.oracle_calls = calls;
    r.iterations = iterations;
    r.converged = converged;
    // Keep only atoms that carry weight.
    std::vector<OracleAtom> kept;
    std::vector<double> kept_w;
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (r.weights[i] > 0.0) {
        kept.push_back(atoms[i]);
        kept_w.push_back(r.weights[i]);
      }
    r.atoms = std::move(kept);
    r.weights = std::move(kept_w);
    return r;
  };

  auto consider = [&](const std::vector<double>& weights, double value) {
    if (value < best.value) {
      best.value = value;
      best_w = weights;
    }
  };

  for (int it = 1; it <= iter_cap; ++it) {
    const double gx = g.value(x);
    const std::vector<double> grad = g.subgradient(x);
    consider(w, gx);
    cuts.push_back({x, gx, grad});
    if (cuts.size() > kMaxCuts) cuts.erase(cuts.begin());

    const std::size_t fw_idx = query(grad);
    w.resize(atoms.size(), 0.0);
    const std::vector<double> s = atoms[fw_idx].point;
    lower = std::max(lower, gx + dot(grad, s) - dot(grad, x));
    if (best.value - lower <= tol) return finish(true, it);

    if (it % kKelleyPeriod == 0) {
      // min theta s.t. theta >= g_j + s_j . (sum_i w_i a_i - x_j), w in simplex.
      // Variables: w_1..w_n, theta_plus, theta_minus; maximize -theta.
      const std::size_t n = atoms.size();
      lp::Problem master;
      master.objective.assign(n + 2, 0.0);
      master.objective[n] = -1.0;
      master.objective[n + 1] = 1.0;
      for (const Cut& c : cuts) {
        lp::Constraint row{std::vector<double>(n + 2, 0.0), lp::Sense::kLessEqual,
                           dot(c.s, c.x) - c.g};
        for (std::size_t i = 0; i < n; ++i) row.coeffs[i] = dot(c.s, atoms[i].point);
        row.coeffs[n] = -1.0;
        row.coeffs[n + 1] = 1.0;
        master.constraints.push_back(std::move(row));
      }
      lp::Constraint simplex{std::vector<double>(n + 2, 1.0), lp::Sense::kEqual, 1.0};
      simplex.coeffs[n] = simplex.coeffs[n + 1] = 0.0;
      master.constraints.push_back(std::move(simplex));
      const lp::Solution sol = lp::maximize(master);
      if (sol.status == lp::Status::kOptimal) {
        // Aggregated subgradient from the cut multipliers.
        std::vector<double> theta(static_cast<std::size_t>(dim), 0.0);
        double c0 = 0.0, pi_sum = 0.0;
        for (std::size_t j = 0; j < cuts.size(); ++j) {
          const double pi = std::max(0.0, sol.duals[j]);
          pi_sum += pi;
          c0 += pi * (cuts[j].g - dot(cuts[j].s, cuts[j].x));
          for (int k = 0; k < dim; ++k) theta[k] += pi * cuts[j].s[k];
        }
        if (pi_sum > 0.5) {
          for (int k = 0; k < dim; ++k) theta[k] /= pi_sum;
          c0 /= pi_sum;
          const std::size_t idx = query(theta);
          lower = std::max(lower, c0 + dot(theta, atoms[idx].point));
        }
        std::vector<double> wk(sol.x.begin(), sol.x.begin() + static_cast<long>(n));
        for (double& v : wk) v = std::max(0.0, v);
        const double tot = std::accumulate(wk.begin(), wk.end(), 0.0);
        for (double& v : wk) v /= tot;
        wk.resize(atoms.size(), 0.0);
        const std::vector<double> xk = point_of(wk);
        const double gk = g.value(xk);
        consider(wk, gk);
        // The model minimizer lies where the current cuts are weakest; its own
        // cut is what lifts the model there.
        cuts.push_back({xk, gk, g.subgradient(xk)});
        if (cuts.size() > kMaxCuts) cuts.erase(cuts.begin());
        if (best.value - lower <= tol) return finish(true, it);
        if (gk < gx) {
          w = wk;
          x = xk;
          continue;
        }
      }
      w.resize(atoms.size(), 0.0);
    }

    // Away-step conditional gradient move.
    const double gap_fw = dot(grad, x) - dot(grad, s);
    std::size_t away = 0;
    double away_score = -kInf;
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (w[i] > 0.0) {
        const double sc = dot(grad, atoms[i].point);
        if (sc > away_score) {
          away_score = sc;
          away = i;
        }
      }
    const double gap_away = away_score - dot(grad, x);
    std::vector<double> dir(static_cast<std::size_t>(dim));
    double step_max;
    bool fw_step = gap_fw >= gap_away || w[away] >= 1.0 - 1e-15;
    if (fw_step) {
      for (int k = 0; k < dim; ++k) dir[k] = s[k] - x[k];
      step_max = 1.0;
    } else {
      for (int k = 0; k < dim; ++k) dir[k] = x[k] - atoms[away].point[k];
      step_max = w[away] / (1.0 - w[away]);
    }
    std::vector<double> trial(static_cast<std::size_t>(dim));
    auto slope = [&](double gamma) {
      for (int k = 0; k < dim; ++k) trial[k] = x[k] + gamma * dir[k];
      return dot(g.subgradient(trial), dir);
    };
    const double gamma = line_search(slope, step_max);
    if (gamma <= 0.0) continue;
    if (fw_step) {
      for (double& v : w) v *= (1.0 - gamma);
      w[fw_idx] += gamma;
    } else {
      for (double& v : w) v *= (1.0 + gamma);
      w[away] -= gamma;
      if (gamma >= step_max || w[away] < 1e-15) w[away] = 0.0;
    }
    const double tot = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= tot;
    x = point_of(w);
  }
  throw ConvexMinFailure("convex_min_with_linear_oracle: iteration cap reached",
                         finish(false, iter_cap));
}

}  // namespace cbwk
