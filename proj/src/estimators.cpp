#include "cbwk/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "cbwk/errors.hpp"

namespace cbwk {

void HistoryRecord::validate(int num_contexts, int K, int d) const {
  require(x.id >= 0 && x.id < num_contexts, "HistoryRecord: context out of range");
  require(a >= 0 && a < K, "HistoryRecord: action out of range");
  require(r >= 0.0 && r <= 1.0, "HistoryRecord: reward outside [0, 1]");
  require(static_cast<int>(v.size()) == d, "HistoryRecord: consumption has wrong dimension");
  for (double vj : v) require(vj >= 0.0 && vj <= 1.0, "HistoryRecord: consumption outside [0, 1]");
  require(p > 0.0 && p <= 1.0, "HistoryRecord: probability must lie in (0, 1]");
}

History::History(int num_contexts, int K, int d, bool includes_exploration)
    : num_contexts_(num_contexts),
      K_(K),
      d_(d),
      includes_exploration_(includes_exploration),
      context_count_(static_cast<std::size_t>(num_contexts), 0.0),
      reward_sum_(static_cast<std::size_t>(num_contexts) * K, 0.0),
      consumption_sum_(static_cast<std::size_t>(num_contexts) * K * d, 0.0) {
  require(num_contexts >= 1 && K >= 2 && d >= 1, "History: invalid dimensions");
}

void History::append(HistoryRecord rec) {
  rec.validate(num_contexts_, K_, d_);
  const double inv_p = 1.0 / rec.p;
  context_count_[static_cast<std::size_t>(rec.x.id)] += 1.0;
  reward_sum_[index(rec.x.id, rec.a)] += rec.r * inv_p;
  for (int j = 0; j < d_; ++j)
    consumption_sum_[index(rec.x.id, rec.a) * static_cast<std::size_t>(d_) + j] += rec.v[j] * inv_p;
  records_.push_back(std::move(rec));
}

void RegretParams::validate(double B) const {
  require(Z >= 1.0, "RegretParams: Z must be >= 1");
  require(B_prime > 0.0 && B_prime <= B, "RegretParams: B' must lie in (0, B]");
  require(T >= 1, "RegretParams: T must be positive");
  require(psi == kPsi, "RegretParams: psi is fixed at 100");
}

FictitiousOutcome fictitious_outcome(const HistoryRecord& rec, int K) {
  require(rec.p > 0.0, "fictitious_outcome: zero probability");
  require(rec.a >= 0 && rec.a < K, "fictitious_outcome: action out of range");
  const std::size_t d = rec.v.size();
  FictitiousOutcome out{std::vector<double>(static_cast<std::size_t>(K), 0.0),
                        std::vector<std::vector<double>>(static_cast<std::size_t>(K),
                                                         std::vector<double>(d, 0.0))};
  out.r_hat[rec.a] = rec.r / rec.p;
  for (std::size_t j = 0; j < d; ++j) out.v_hat[rec.a][j] = rec.v[j] / rec.p;
  return out;
}

CompletedTables completed_tables(const History& h) {
  require(!h.empty(), "completed_tables: empty history");
  const int X = h.num_contexts();
  const int K = h.num_actions();
  const int d = h.dims();
  const double inv_t = 1.0 / static_cast<double>(h.size());
  CompletedTables tab{ActionTable(X, K), std::vector<ActionTable>(d, ActionTable(X, K)),
                      std::vector<double>(static_cast<std::size_t>(X), 0.0)};
  for (int x = 0; x < X; ++x) {
    tab.context_freq[static_cast<std::size_t>(x)] = h.context_count(x) * inv_t;
    for (int a = 0; a < K; ++a) {
      tab.reward.at(x, a) = h.weighted_reward_sum(x, a) * inv_t;
      for (int j = 0; j < d; ++j)
        tab.consumption[static_cast<std::size_t>(j)].at(x, a) =
            h.weighted_consumption_sum(x, a, j) * inv_t;
    }
  }
  return tab;
}

double estimate_reward(const CompletedTables& tab, const MixedPolicy& p, const PolicyClass& pc) {
  p.validate_subconvex();
  double r = 0.0;
  for (const auto& e : p.entries()) {
    double s = 0.0;
    for (int x = 0; x < tab.num_contexts(); ++x) s += tab.reward.at(x, pc.action(e.policy, x));
    r += e.weight * s;
  }
  return r;
}

std::vector<double> estimate_consumption(const CompletedTables& tab, const MixedPolicy& p,
                                         const PolicyClass& pc) {
  p.validate_subconvex();
  std::vector<double> v(static_cast<std::size_t>(tab.dims()), 0.0);
  for (const auto& e : p.entries())
    for (int j = 0; j < tab.dims(); ++j) {
      double s = 0.0;
      for (int x = 0; x < tab.num_contexts(); ++x)
        s += tab.consumption[static_cast<std::size_t>(j)].at(x, pc.action(e.policy, x));
      v[static_cast<std::size_t>(j)] += e.weight * s;
    }
  return v;
}

double estimate_reward(const History& h, const MixedPolicy& p, const PolicyClass& pc) {
  require(!h.empty(), "estimate_reward: empty history");
  return estimate_reward(completed_tables(h), p, pc);
}

std::vector<double> estimate_consumption(const History& h, const MixedPolicy& p,
                                         const PolicyClass& pc) {
  require(!h.empty(), "estimate_consumption: empty history");
  return estimate_consumption(completed_tables(h), p, pc);
}

double budget_violation(std::span<const double> v, double B_prime, long T) {
  require(!v.empty(), "budget_violation: empty vector");
  const double per_round = B_prime / static_cast<double>(T);
  double worst = 0.0;
  for (double vj : v) worst = std::max(worst, vj - per_round);
  return worst;
}

double empirical_objective(const CompletedTables& tab, const MixedPolicy& p,
                           const RegretParams& params, const PolicyClass& pc) {
  const auto v = estimate_consumption(tab, p, pc);
  return estimate_reward(tab, p, pc) - params.Z * budget_violation(v, params.B_prime, params.T);
}

double empirical_objective(const History& h, const MixedPolicy& p, const RegretParams& params,
                           const PolicyClass& pc) {
  return empirical_objective(completed_tables(h), p, params, pc);
}

double empirical_regret(const History& h, const MixedPolicy& p, const MixedPolicy& p_t,
                        const RegretParams& params, const PolicyClass& pc) {
  const CompletedTables tab = completed_tables(h);
  return (empirical_objective(tab, p_t, params, pc) - empirical_objective(tab, p, params, pc)) /
         (params.Z + 1.0);
}

}  // namespace cbwk
