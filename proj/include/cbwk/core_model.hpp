#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cbwk/rng.hpp"

namespace cbwk {

// Mixture weight sums are compared against 0/1 with this slack; coordinate
// descent accumulates rounding over many updates.
inline constexpr double kWeightTol = 1e-9;

struct ProblemDims {
  int K = 2;         // actions, the no-op is action 0
  int d = 1;         // resource dimensions
  long T = 1;        // horizon
  double B = 1.0;    // common budget per resource
  double delta = 0.05;

  void validate() const;
};

// Index into the environment's finite context support.
struct Context {
  int id = 0;
};

// Finite, enumerable set of deterministic policies over a finite context set.
class PolicyClass {
 public:
  // table[p][x] is the action of policy p in context x.
  PolicyClass(int num_contexts, int num_actions, const std::vector<std::vector<int>>& table,
              int noop_index);

  int size() const { return num_policies_; }
  int num_contexts() const { return num_contexts_; }
  int num_actions() const { return num_actions_; }
  int noop_index() const { return noop_index_; }

  int action(int policy, int context) const {
    return actions_[static_cast<std::size_t>(policy) * num_contexts_ + context];
  }

 private:
  int num_policies_;
  int num_contexts_;
  int num_actions_;
  int noop_index_;
  std::vector<int> actions_;
};

// Sparse non-negative weights over policy indices. Members of C0(Pi) have total
// weight at most one; members of C(Pi) have total weight exactly one.
class MixedPolicy {
 public:
  struct Entry {
    int policy;
    double weight;
  };

  MixedPolicy() = default;

  static MixedPolicy point_mass(int policy);
  static MixedPolicy uniform(int num_policies);
  // Dense weight vector, zeros dropped.
  static MixedPolicy from_dense(std::span<const double> weights);

  // Adds w to the weight of policy (merging with an existing entry).
  void add(int policy, double w);
  void add(const MixedPolicy& other, double scale);
  void scale(double c);

  double total() const;
  double weight(int policy) const;
  std::span<const Entry> entries() const { return entries_; }
  std::size_t support_size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::vector<double> dense(int num_policies) const;

  // Throws ContractError unless weights are non-negative with sum <= 1.
  void validate_subconvex() const;
  // Throws ContractError unless weights are non-negative with sum == 1.
  void validate_convex() const;

 private:
  std::vector<Entry> entries_;  // sorted by policy, unique
};

struct ActionDistribution {
  std::vector<double> probs;
};

// Per-context action masses of a (sub-)mixture, |X| x K row-major.
class ActionTable {
 public:
  ActionTable() = default;
  ActionTable(int num_contexts, int num_actions)
      : num_contexts_(num_contexts),
        num_actions_(num_actions),
        mass_(static_cast<std::size_t>(num_contexts) * num_actions, 0.0) {}

  int num_contexts() const { return num_contexts_; }
  int num_actions() const { return num_actions_; }
  double& at(int x, int a) { return mass_[static_cast<std::size_t>(x) * num_actions_ + a]; }
  double at(int x, int a) const { return mass_[static_cast<std::size_t>(x) * num_actions_ + a]; }
  std::span<const double> row(int x) const {
    return {mass_.data() + static_cast<std::size_t>(x) * num_actions_,
            static_cast<std::size_t>(num_actions_)};
  }
  void scale(double c) {
    for (double& m : mass_) m *= c;
  }

 private:
  int num_contexts_ = 0;
  int num_actions_ = 0;
  std::vector<double> mass_;
};

// Q(a|x) = sum of Q(pi) over pi with pi(x) = a, for every context. No
// normalization is assumed, so this also serves sub-unit mixtures.
ActionTable action_table(const MixedPolicy& q, const PolicyClass& pc);
// Adds scale * P(a|x) into the table.
void accumulate_action_table(ActionTable& table, const MixedPolicy& p, double scale,
                             const PolicyClass& pc);

// P(a|x) for P in C(Pi).
ActionDistribution mixture_action_distribution(const MixedPolicy& p, Context x,
                                               const PolicyClass& pc);

// (1 - K mu) q(a) + mu. Requires 0 <= mu <= 1/K.
ActionDistribution smooth_project(const ActionDistribution& q, double mu, int K);

// Q + (1 - |Q|) P_default.
MixedPolicy complete_mixture(const MixedPolicy& q, const MixedPolicy& p_default);

struct SampledAction {
  int action;
  double prob;
};

// Smoothed projection of complete_mixture(q, p_default), tabulated for every
// context. Row x is the distribution SAMPLE draws from in context x.
ActionTable sampling_table(const MixedPolicy& q, const MixedPolicy& p_default, double mu,
                           const PolicyClass& pc);

SampledAction sample_from_table(const ActionTable& table, Context x, Rng& rng);

SampledAction sample_action(Context x, const MixedPolicy& q, const MixedPolicy& p_default,
                            double mu, Rng& rng, const PolicyClass& pc);

}  // namespace cbwk
