#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cbwk/core_model.hpp"
#include "cbwk/errors.hpp"
#include "cbwk/estimators.hpp"

namespace cbwk {

// One context with a reward for every action, as fed to the arg-max oracle.
// Rewards may be any finite reals.
struct WeightedExample {
  Context x;
  std::vector<double> reward_per_action;
};

struct OracleStats {
  long calls = 0;
};

// argmax over pi in Pi of sum_tau reward_tau[pi(x_tau)], lowest index on ties.
// Exhaustive over the enumerable class.
int argmax_oracle(std::span<const WeightedExample> examples, const PolicyClass& pc,
                  OracleStats* stats = nullptr);

// Same oracle on per-context summed rewards (row x = total reward of each
// action over all examples with context x).
int argmax_oracle(const ActionTable& rewards, const PolicyClass& pc, OracleStats* stats = nullptr);

// Per-example shift plus one global scale that maps all rewards into [0, 1].
// The arg max over policies is unchanged.
std::vector<WeightedExample> normalize_rewards(std::span<const WeightedExample> examples);
void normalize_rewards(ActionTable& rewards);

// Policy value sum_x table(x, pi(x)).
double policy_value(const ActionTable& table, int policy, const PolicyClass& pc);

// A mixed policy together with the objective value it attains.
struct EmpiricalOptimum {
  MixedPolicy policy;
  double value = 0.0;
};

struct ConstrainedSolve {
  MixedPolicy policy;   // in C(Pi), supported on oracle answers
  double value = 0.0;   // attained objective
  double upper_bound = 0.0;
  long oracle_calls = 0;
  int iterations = 0;
};

// Solver failure that carries the best iterate found before giving up.
class ConstrainedSolveFailure : public SolverError {
 public:
  ConstrainedSolveFailure(const std::string& what, ConstrainedSolve best)
      : SolverError(what), best_(std::move(best)) {}
  const ConstrainedSolve& best() const { return best_; }

 private:
  ConstrainedSolve best_;
};

inline constexpr int kOracleIterationCap = 500;
inline constexpr double kSolverTol = 1e-6;

// max over P in C(Pi) of  G(P) - Z * max_j (V_j(P) - b)^+
// where G(pi) = sum_x gain(x, pi(x)) and V_j(pi) = sum_x consumption[j](x, pi(x)).
//
// Solved as the Lagrangian dual of the knapsack rows by column generation:
// the restricted master LP over the policies returned so far yields
// multipliers y, and one oracle call on the penalized gains gain - y.v either
// proves optimality (through the Lagrangian upper bound) or returns a new
// policy to add.
ConstrainedSolve solve_knapsack_linear(const ActionTable& gain,
                                       std::span<const ActionTable> consumption,
                                       double per_round_budget, double Z, const PolicyClass& pc,
                                       double tol = kSolverTol, int iter_cap = kOracleIterationCap,
                                       OracleStats* stats = nullptr);

// P_t := argmax_P R_hat(P) - Z phi(V_hat(P), B').
ConstrainedSolve solve_budgeted_argmax(const History& h, const RegretParams& params,
                                       const PolicyClass& pc, double tol = kSolverTol,
                                       OracleStats* stats = nullptr);
ConstrainedSolve solve_budgeted_argmax(const CompletedTables& tab, const RegretParams& params,
                                       const PolicyClass& pc, double tol = kSolverTol,
                                       OracleStats* stats = nullptr);

struct Violation {
  MixedPolicy policy;
  double D = 0.0;  // D_P(Q) of the returned policy
};

// Smoothed action masses Q^mu(a|x) = (1 - K mu) Q(a|x) + mu, with Q taken at
// its literal (possibly sub-unit) mass.
ActionTable smoothed_masses(const MixedPolicy& q, double mu, const PolicyClass& pc);
ActionTable smoothed_masses(const ActionTable& q_table, double mu);

// Searches for P with D_P(Q) = V_P(Q) - (2K + b_P) > tol, where
// b_P = Reg_hat(P) / (psi mu). Returns nullopt when max_P D_P(Q) <= tol.
std::optional<Violation> find_violating_policy(const History& h, const MixedPolicy& q, double mu,
                                               const RegretParams& params,
                                               const EmpiricalOptimum& p_t,
                                               const PolicyClass& pc, double tol = kSolverTol,
                                               OracleStats* stats = nullptr);
std::optional<Violation> find_violating_policy(const CompletedTables& tab,
                                               const ActionTable& q_smoothed, double mu,
                                               const RegretParams& params,
                                               const EmpiricalOptimum& p_t,
                                               const PolicyClass& pc, double tol = kSolverTol,
                                               OracleStats* stats = nullptr);

// ---- convex minimization with a linear oracle ----

struct OracleAtom {
  std::vector<double> point;
  int tag = -1;  // caller-defined identity (policy index); -1 = compare by point
};

// Returns argmin over C of direction . s.
using LinearOracle = std::function<OracleAtom(std::span<const double> direction)>;

struct ConvexFunction {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> subgradient;
};

struct ConvexMinResult {
  std::vector<double> point;
  double value = 0.0;
  double lower_bound = 0.0;
  double gap = 0.0;  // value - lower_bound, an upper bound on suboptimality
  std::vector<OracleAtom> atoms;
  std::vector<double> weights;  // convex weights over atoms, point = sum w_i atom_i
  long oracle_calls = 0;
  int iterations = 0;
  bool converged = false;
};

class ConvexMinFailure : public SolverError {
 public:
  ConvexMinFailure(const std::string& what, ConvexMinResult best)
      : SolverError(what), best_(std::move(best)) {}
  const ConvexMinResult& best() const { return best_; }

 private:
  ConvexMinResult best_;
};

// min g(x) over C = conv(oracle answers).
//
// Away-step conditional gradient with exact line search. Every subgradient
// also becomes a cutting plane; periodically the cutting-plane model is
// minimized over the hull of the atoms collected so far (a small LP), which
// gives both a candidate iterate and, through one extra oracle call on the
// aggregated subgradient, a global lower bound. The lower bound keeps the
// certificate tight when g has a kink at the optimum, where the plain
// Frank-Wolfe gap does not vanish.
ConvexMinResult convex_min_with_linear_oracle(const ConvexFunction& g, const LinearOracle& oracle,
                                              int dim, double tol = kSolverTol,
                                              int iter_cap = kOracleIterationCap);

}  // namespace cbwk
