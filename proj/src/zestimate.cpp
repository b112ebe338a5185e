#include "cbwk/zestimate.hpp"

#include <algorithm>
#include <cmath>

#include "cbwk/errors.hpp"
#include "cbwk/lp.hpp"

namespace cbwk {

ExplorationEstimates::ExplorationEstimates(int num_policies, int d)
    : r_bar_sums(static_cast<std::size_t>(num_policies), 0.0),
      v_bar_sums(static_cast<std::size_t>(num_policies), std::vector<double>(static_cast<std::size_t>(d), 0.0)),
      consumed(static_cast<std::size_t>(d), 0.0) {}

void ExplorationEstimates::add(const HistoryRecord& rec, const PolicyClass& pc) {
  const int K = pc.num_actions();
  const int d = static_cast<int>(consumed.size());
  require(std::abs(rec.p * K - 1.0) <= 1e-12, "ExplorationEstimates: rounds must be uniform");
  rec.validate(pc.num_contexts(), K, d);
  ++t0_rounds;
  for (int j = 0; j < d; ++j) consumed[j] += rec.v[j];
  for (int p = 0; p < pc.size(); ++p) {
    if (pc.action(p, rec.x.id) != rec.a) continue;
    r_bar_sums[p] += K * rec.r;
    for (int j = 0; j < d; ++j) v_bar_sums[p][j] += K * rec.v[j];
  }
}

double ExplorationEstimates::r_hat(int policy) const {
  require(t0_rounds > 0, "ExplorationEstimates: no rounds");
  return r_bar_sums[policy] / static_cast<double>(t0_rounds);
}

std::vector<double> ExplorationEstimates::v_hat(int policy) const {
  require(t0_rounds > 0, "ExplorationEstimates: no rounds");
  std::vector<double> v = v_bar_sums[policy];
  for (double& x : v) x /= static_cast<double>(t0_rounds);
  return v;
}

ExplorationLength exploration_budget_T0(const ProblemDims& dims, int pi_size, double scale) {
  dims.validate();
  require(pi_size >= 1 && scale >= 0.0, "exploration_budget_T0: bad arguments");
  ExplorationLength out;
  out.formula = scale * dims.K * static_cast<double>(dims.T) / dims.B *
                std::log(dims.d * static_cast<double>(pi_size) / dims.delta);
  const double cap = std::floor(static_cast<double>(dims.T) / 3.0);
  const double rounded = std::ceil(out.formula);
  if (rounded > cap) {
    out.T0 = static_cast<long>(cap);
    out.clamped = true;
  } else {
    out.T0 = static_cast<long>(std::max(0.0, rounded));
  }
  return out;
}

RelaxedOpt relaxed_opt(const ExplorationEstimates& est, const ProblemDims& dims, double gamma,
                       const PolicyClass& pc) {
  require(est.t0_rounds >= 1, "relaxed_opt: no exploration rounds");
  require(gamma >= 0.0, "relaxed_opt: gamma must be non-negative");
  const int n = pc.size();
  const double T = static_cast<double>(dims.T);
  lp::Problem prob;
  prob.objective.resize(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) prob.objective[p] = T * est.r_hat(p);
  for (int j = 0; j < dims.d; ++j) {
    lp::Constraint row{std::vector<double>(static_cast<std::size_t>(n)), lp::Sense::kLessEqual,
                       dims.B + gamma};
    for (int p = 0; p < n; ++p) row.coeffs[p] = T * est.v_hat(p)[j];
    prob.constraints.push_back(std::move(row));
  }
  prob.constraints.push_back(
      {std::vector<double>(static_cast<std::size_t>(n), 1.0), lp::Sense::kLessEqual, 1.0});
  const lp::Solution sol = lp::maximize(prob);
  // The zero mixture is feasible, so anything else is a solver defect.
  if (sol.status != lp::Status::kOptimal)
    throw SolverError(std::string("relaxed_opt: LP ") + lp::to_string(sol.status));
  RelaxedOpt out;
  out.value = sol.objective;
  for (int p = 0; p < n; ++p)
    if (sol.x[p] > 1e-12) out.P.add(p, sol.x[p]);
  return out;
}

double estimate_Z(const ExplorationEstimates& est, const ProblemDims& dims, const PolicyClass& pc) {
  const double gamma = dims.B / 2.0;
  return std::max(8.0 * relaxed_opt(est, dims, gamma, pc).value / dims.B, 1.0);
}

}  // namespace cbwk
