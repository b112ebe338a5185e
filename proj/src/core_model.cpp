#include "cbwk/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cbwk/errors.hpp"

namespace cbwk {

void ProblemDims::validate() const {
  require(K >= 2, "ProblemDims: K must be >= 2 (no-op plus at least one action)");
  require(d >= 1, "ProblemDims: d must be >= 1");
  require(T >= 1, "ProblemDims: T must be >= 1");
  require(B > 0.0, "ProblemDims: B must be positive");
  require(delta > 0.0 && delta < 1.0, "ProblemDims: delta must lie in (0, 1)");
}

PolicyClass::PolicyClass(int num_contexts, int num_actions,
                         const std::vector<std::vector<int>>& table, int noop_index)
    : num_policies_(static_cast<int>(table.size())),
      num_contexts_(num_contexts),
      num_actions_(num_actions),
      noop_index_(noop_index) {
  require(num_contexts >= 1, "PolicyClass: need at least one context");
  require(num_actions >= 2, "PolicyClass: need at least two actions");
  require(!table.empty(), "PolicyClass: empty policy set");
  require(noop_index >= 0 && noop_index < num_policies_, "PolicyClass: no-op index out of range");
  actions_.reserve(table.size() * static_cast<std::size_t>(num_contexts));
  for (std::size_t p = 0; p < table.size(); ++p) {
    require(static_cast<int>(table[p].size()) == num_contexts,
            "PolicyClass: policy " + std::to_string(p) + " has wrong number of contexts");
    for (int a : table[p]) {
      require(a >= 0 && a < num_actions,
              "PolicyClass: policy " + std::to_string(p) + " maps to an invalid action");
      actions_.push_back(a);
    }
  }
  for (int x = 0; x < num_contexts; ++x)
    require(action(noop_index, x) == 0, "PolicyClass: no-op policy must always play action 0");
}

MixedPolicy MixedPolicy::point_mass(int policy) {
  MixedPolicy p;
  p.add(policy, 1.0);
  return p;
}

MixedPolicy MixedPolicy::uniform(int num_policies) {
  require(num_policies >= 1, "MixedPolicy::uniform: empty policy set");
  MixedPolicy p;
  p.entries_.reserve(static_cast<std::size_t>(num_policies));
  for (int i = 0; i < num_policies; ++i) p.entries_.push_back({i, 1.0 / num_policies});
  return p;
}

MixedPolicy MixedPolicy::from_dense(std::span<const double> weights) {
  MixedPolicy p;
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (weights[i] != 0.0) p.entries_.push_back({static_cast<int>(i), weights[i]});
  return p;
}

void MixedPolicy::add(int policy, double w) {
  require(policy >= 0, "MixedPolicy::add: negative policy index");
  auto it = std::lower_bound(entries_.begin(), entries_.end(), policy,
                             [](const Entry& e, int p) { return e.policy < p; });
  if (it != entries_.end() && it->policy == policy)
    it->weight += w;
  else
    entries_.insert(it, Entry{policy, w});
}

void MixedPolicy::add(const MixedPolicy& other, double scale) {
  for (const Entry& e : other.entries_) add(e.policy, scale * e.weight);
}

void MixedPolicy::scale(double c) {
  for (Entry& e : entries_) e.weight *= c;
}

double MixedPolicy::total() const {
  double s = 0.0;
  for (const Entry& e : entries_) s += e.weight;
  return s;
}

double MixedPolicy::weight(int policy) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), policy,
                             [](const Entry& e, int p) { return e.policy < p; });
  return (it != entries_.end() && it->policy == policy) ? it->weight : 0.0;
}

std::vector<double> MixedPolicy::dense(int num_policies) const {
  std::vector<double> w(static_cast<std::size_t>(num_policies), 0.0);
  for (const Entry& e : entries_) {
    require(e.policy < num_policies, "MixedPolicy::dense: policy index out of range");
    w[static_cast<std::size_t>(e.policy)] = e.weight;
  }
  return w;
}

void MixedPolicy::validate_subconvex() const {
  for (const Entry& e : entries_)
    require(e.weight >= 0.0, "MixedPolicy: negative weight on policy " + std::to_string(e.policy));
  require(total() <= 1.0 + kWeightTol, "MixedPolicy: total weight exceeds one");
}

void MixedPolicy::validate_convex() const {
  validate_subconvex();
  require(std::abs(total() - 1.0) <= kWeightTol, "MixedPolicy: total weight differs from one");
}

ActionTable action_table(const MixedPolicy& q, const PolicyClass& pc) {
  ActionTable table(pc.num_contexts(), pc.num_actions());
  accumulate_action_table(table, q, 1.0, pc);
  return table;
}

void accumulate_action_table(ActionTable& table, const MixedPolicy& p, double scale,
                             const PolicyClass& pc) {
  for (const auto& e : p.entries()) {
    const double w = scale * e.weight;
    for (int x = 0; x < pc.num_contexts(); ++x) table.at(x, pc.action(e.policy, x)) += w;
  }
}

ActionDistribution mixture_action_distribution(const MixedPolicy& p, Context x,
                                               const PolicyClass& pc) {
  require(x.id >= 0 && x.id < pc.num_contexts(), "mixture_action_distribution: bad context");
  p.validate_convex();
  ActionDistribution out{std::vector<double>(static_cast<std::size_t>(pc.num_actions()), 0.0)};
  for (const auto& e : p.entries()) out.probs[pc.action(e.policy, x.id)] += e.weight;
  return out;
}

ActionDistribution smooth_project(const ActionDistribution& q, double mu, int K) {
  require(K >= 1 && static_cast<int>(q.probs.size()) == K, "smooth_project: size mismatch");
  require(mu >= 0.0 && mu <= 1.0 / K + 1e-15, "smooth_project: mu must lie in [0, 1/K]");
  ActionDistribution out{q.probs};
  const double keep = std::max(0.0, 1.0 - K * mu);
  for (double& p : out.probs) p = keep * p + mu;
  return out;
}

MixedPolicy complete_mixture(const MixedPolicy& q, const MixedPolicy& p_default) {
  q.validate_subconvex();
  p_default.validate_convex();
  MixedPolicy out = q;
  const double rest = std::max(0.0, 1.0 - q.total());
  if (rest > 0.0) out.add(p_default, rest);
  return out;
}

ActionTable sampling_table(const MixedPolicy& q, const MixedPolicy& p_default, double mu,
                           const PolicyClass& pc) {
  const int K = pc.num_actions();
  require(mu >= 0.0 && mu <= 1.0 / K + 1e-15, "sampling_table: mu must lie in [0, 1/K]");
  ActionTable table = action_table(complete_mixture(q, p_default), pc);
  const double keep = std::max(0.0, 1.0 - K * mu);
  for (int x = 0; x < pc.num_contexts(); ++x)
    for (int a = 0; a < K; ++a) table.at(x, a) = keep * table.at(x, a) + mu;
  return table;
}

SampledAction sample_from_table(const ActionTable& table, Context x, Rng& rng) {
  const auto row = table.row(x.id);
  const auto a = rng.categorical(row);
  return {static_cast<int>(a), row[a]};
}

SampledAction sample_action(Context x, const MixedPolicy& q, const MixedPolicy& p_default,
                            double mu, Rng& rng, const PolicyClass& pc) {
  require(x.id >= 0 && x.id < pc.num_contexts(), "sample_action: bad context");
  const ActionDistribution dist = smooth_project(
      mixture_action_distribution(complete_mixture(q, p_default), x, pc), mu, pc.num_actions());
  const auto a = rng.categorical(dist.probs);
  return {static_cast<int>(a), dist.probs[a]};
}

}  // namespace cbwk
