#pragma once

#include <optional>
#include <vector>

#include "cbwk/amo.hpp"
#include "cbwk/concave.hpp"
#include "cbwk/core_model.hpp"
#include "cbwk/estimators.hpp"

namespace cbwk {

// Empirical regret of mixtures plus the search for a policy violating the
// variance constraint. One implementation per problem family; the coordinate
// descent itself is shared.
class RegretModel {
 public:
  explicit RegretModel(CompletedTables tables) : tables_(std::move(tables)) {}
  virtual ~RegretModel() = default;

  const CompletedTables& tables() const { return tables_; }
  virtual double psi() const { return RegretParams::kPsi; }

  // Reg_hat(P). Zero at the empirical optimum; can dip below zero by the
  // optimum's solver tolerance.
  virtual double regret(const MixedPolicy& p, const PolicyClass& pc) const = 0;

  // Some P with D_P(Q) > tol, or nullopt once max_P D_P(Q) <= tol.
  virtual std::optional<Violation> find_violating(const ActionTable& q_smoothed, double mu,
                                                  double tol, const PolicyClass& pc,
                                                  OracleStats* stats) const = 0;

 private:
  CompletedTables tables_;
};

class KnapsackRegret : public RegretModel {
 public:
  KnapsackRegret(CompletedTables tables, RegretParams params, EmpiricalOptimum p_t);
  double regret(const MixedPolicy& p, const PolicyClass& pc) const override;
  std::optional<Violation> find_violating(const ActionTable& q_smoothed, double mu, double tol,
                                          const PolicyClass& pc,
                                          OracleStats* stats) const override;
  double psi() const override { return params_.psi; }

 private:
  RegretParams params_;
  EmpiricalOptimum p_t_;
};

class ConcaveRegret : public RegretModel {
 public:
  // f_t is f(V_hat(P_t)) for the empirical optimum P_t.
  ConcaveRegret(CompletedTables tables, ConcaveObjective objective, double f_t);
  double regret(const MixedPolicy& p, const PolicyClass& pc) const override;
  std::optional<Violation> find_violating(const ActionTable& q_smoothed, double mu, double tol,
                                          const PolicyClass& pc,
                                          OracleStats* stats) const override;

 private:
  ConcaveObjective objective_;
  double f_t_;
};

// P_t := argmax_P f(V_hat(P)) over C(Pi), by conditional gradient on the
// outcome polytope with the arg-max oracle as the linear oracle.
EmpiricalOptimum concave_empirical_optimum(const CompletedTables& tab,
                                           const ConcaveObjective& objective,
                                           const PolicyClass& pc, double tol = kSolverTol,
                                           OracleStats* stats = nullptr);

struct VSD {
  double V = 0.0;
  double S = 0.0;
  double D = 0.0;
};

// V_P(Q) = E_{pi~P} E_{x~H}[1 / Q^mu(pi(x)|x)], S_P the same with the square,
// D_P = V_P - (2K + b_P), with Q^mu the smoothed projection of Q at its
// literal (possibly sub-unit) mass.
VSD compute_vsd(const MixedPolicy& q, const MixedPolicy& p, double mu, const History& h,
                double b_P, const PolicyClass& pc);
VSD compute_vsd(const ActionTable& q_smoothed, std::span<const double> context_freq,
                const MixedPolicy& p, double b_P, const PolicyClass& pc);

struct OPInstance {
  const History* history = nullptr;
  double mu = 0.0;
  RegretParams params;
  EmpiricalOptimum P_t;
  MixedPolicy Q_init;
};

// Q as the solver builds it: a non-negative combination of mixed policies.
struct WeightedAtom {
  MixedPolicy policy;
  double alpha = 0.0;
};

struct OPSolution {
  MixedPolicy Q;  // flattened sum of alpha_P P, in C0(Pi)
  std::vector<WeightedAtom> atoms;
  int iterations = 0;
  int scale_steps = 0;
  int update_steps = 0;
  long oracle_calls = 0;
};

struct OPOptions {
  // A violating policy must have D_P above this; kept below the 1e-6
  // verification slack.
  double halt_tol = 5e-7;
  // Scale-step threshold slack on sum alpha_P (2K + b_P) > 2K.
  double scale_slack = 0.0;
};

// ceil(4 ln(1/(K mu)) / mu)
long cd_update_bound(int K, double mu);

// Coordinate descent for the epoch mixture. Warm starts from `init` (atoms of
// a previous solution, re-weighted against the new regret estimates).
OPSolution solve_op(const RegretModel& model, double mu, const std::vector<WeightedAtom>& init,
                    const PolicyClass& pc, const OPOptions& options = {});
OPSolution solve_op(const OPInstance& inst, const PolicyClass& pc);

struct OPCheck {
  double first_lhs = 0.0;            // sum alpha_P b_P, must be <= 2K
  double worst_second_excess = 0.0;  // max over pure pi of V_pi(Q) - (2K + b_pi)
  int worst_policy = -1;
  bool feasible(int K, double tol = 1e-6) const {
    return first_lhs <= 2.0 * K + tol && worst_second_excess <= tol;
  }
};

// Direct evaluation of both constraints: the first on the solver's own atom
// decomposition, the second exhaustively over every pure policy.
OPCheck verify_op(const RegretModel& model, const OPSolution& sol, double mu,
                  const PolicyClass& pc);

}  // namespace cbwk
