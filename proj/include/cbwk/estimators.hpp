#pragma once

#include <vector>

#include "cbwk/core_model.hpp"

namespace cbwk {

// One logged round: context, chosen action, observed reward and consumption,
// and the probability with which the action was chosen.
struct HistoryRecord {
  Context x;
  int a = 0;
  double r = 0.0;
  std::vector<double> v;
  double p = 1.0;

  void validate(int num_contexts, int K, int d) const;
};

// Append-only log of rounds. Alongside the records it keeps per (context,
// action) sums of r/p and v/p and per-context counts; every importance
// weighted estimate is a linear functional of these sums, so queries cost
// O(|X| K) per policy regardless of history length.
class History {
 public:
  History(int num_contexts, int K, int d, bool includes_exploration = false);

  void append(HistoryRecord rec);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<HistoryRecord>& records() const { return records_; }
  bool includes_exploration() const { return includes_exploration_; }

  int num_contexts() const { return num_contexts_; }
  int num_actions() const { return K_; }
  int dims() const { return d_; }

  double context_count(int x) const { return context_count_[static_cast<std::size_t>(x)]; }
  // Sum over records with (x_tau, a_tau) = (x, a) of r_tau / p_tau.
  double weighted_reward_sum(int x, int a) const { return reward_sum_[index(x, a)]; }
  // Sum over records with (x_tau, a_tau) = (x, a) of v_tau[j] / p_tau.
  double weighted_consumption_sum(int x, int a, int j) const {
    return consumption_sum_[index(x, a) * static_cast<std::size_t>(d_) + j];
  }

 private:
  std::size_t index(int x, int a) const { return static_cast<std::size_t>(x) * K_ + a; }

  int num_contexts_;
  int K_;
  int d_;
  bool includes_exploration_;
  std::vector<HistoryRecord> records_;
  std::vector<double> context_count_;
  std::vector<double> reward_sum_;
  std::vector<double> consumption_sum_;
};

struct RegretParams {
  static constexpr double kPsi = 100.0;

  double Z = 1.0;
  double B_prime = 1.0;
  long T = 1;
  double psi = kPsi;

  void validate(double B) const;
};

struct FictitiousOutcome {
  std::vector<double> r_hat;               // K
  std::vector<std::vector<double>> v_hat;  // K x d
};

// Importance-weighted completion of one record: the observed outcome divided
// by its probability at the played action, zero elsewhere.
FictitiousOutcome fictitious_outcome(const HistoryRecord& rec, int K);

// Empirical per-round means of the completed history, tabulated per (x, a):
// a policy's estimate is the sum over contexts of its action's entry.
struct CompletedTables {
  ActionTable reward;                   // sum r/p over (x, a) records, divided by t
  std::vector<ActionTable> consumption;  // one table per resource
  std::vector<double> context_freq;     // n_x / t

  int num_contexts() const { return reward.num_contexts(); }
  int num_actions() const { return reward.num_actions(); }
  int dims() const { return static_cast<int>(consumption.size()); }
};

CompletedTables completed_tables(const History& h);

double estimate_reward(const History& h, const MixedPolicy& p, const PolicyClass& pc);
std::vector<double> estimate_consumption(const History& h, const MixedPolicy& p,
                                         const PolicyClass& pc);

double estimate_reward(const CompletedTables& tab, const MixedPolicy& p, const PolicyClass& pc);
std::vector<double> estimate_consumption(const CompletedTables& tab, const MixedPolicy& p,
                                         const PolicyClass& pc);

// max_j (v_j - B'/T)^+
double budget_violation(std::span<const double> v, double B_prime, long T);

// R_hat(P) - Z phi(V_hat(P), B'): the quantity the empirical optimum maximizes.
double empirical_objective(const CompletedTables& tab, const MixedPolicy& p,
                           const RegretParams& params, const PolicyClass& pc);
double empirical_objective(const History& h, const MixedPolicy& p, const RegretParams& params,
                           const PolicyClass& pc);

// (objective(P_t) - objective(P)) / (Z + 1)
double empirical_regret(const History& h, const MixedPolicy& p, const MixedPolicy& p_t,
                        const RegretParams& params, const PolicyClass& pc);

}  // namespace cbwk
