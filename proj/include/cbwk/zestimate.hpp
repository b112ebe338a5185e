#pragma once

#include <vector>

#include "cbwk/core_model.hpp"
#include "cbwk/estimators.hpp"

namespace cbwk {

// Per-policy sums from uniform exploration rounds: r_hat(pi) is
// r_bar_sums[pi] / t0_rounds with r_bar_sums[pi] = sum_tau K r_tau 1{pi(x_tau) = a_tau},
// and v_hat likewise per resource.
struct ExplorationEstimates {
  std::vector<double> r_bar_sums;               // per policy
  std::vector<std::vector<double>> v_bar_sums;  // per policy, d entries
  long t0_rounds = 0;
  std::vector<double> consumed;  // budget used by the exploration rounds

  ExplorationEstimates(int num_policies, int d);
  // rec.p must be the uniform probability 1/K.
  void add(const HistoryRecord& rec, const PolicyClass& pc);
  double r_hat(int policy) const;
  std::vector<double> v_hat(int policy) const;
};

struct ExplorationLength {
  long T0 = 0;
  double formula = 0.0;  // unrounded value of the formula
  bool clamped = false;  // formula exceeded floor(T/3)
};

inline constexpr double kExplorationScale = 12.0;

// ceil(scale K T / B ln(d |Pi| / delta)), clamped to floor(T/3).
ExplorationLength exploration_budget_T0(const ProblemDims& dims, int pi_size,
                                        double scale = kExplorationScale);

struct RelaxedOpt {
  double value = 0.0;
  MixedPolicy P;  // in C0(Pi)
};

// max_{P in C0(Pi)} T r_hat(P)  s.t.  T v_hat(P) <= (B + gamma) 1, as an
// exact LP over the enumerated class.
RelaxedOpt relaxed_opt(const ExplorationEstimates& est, const ProblemDims& dims, double gamma,
                       const PolicyClass& pc);

// Z = max{8 OPT_hat^gamma / B, 1} with gamma = B / 2.
double estimate_Z(const ExplorationEstimates& est, const ProblemDims& dims, const PolicyClass& pc);

}  // namespace cbwk
