#include <cmath>
#include <random>

#include "cbwk/opsolver.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cbwk;

namespace {

// Regret linear in the mixture weights, given per pure policy; the violator
// search is brute force over pure policies, which is exact for linear regret.
class TableRegret : public RegretModel {
 public:
  TableRegret(CompletedTables tab, std::vector<double> reg)
      : RegretModel(std::move(tab)), reg_(std::move(reg)) {}
  double regret(const MixedPolicy& p, const PolicyClass&) const override {
    double r = 0.0;
    for (const auto& e : p.entries()) r += e.weight * reg_[e.policy];
    return r;
  }
  std::optional<Violation> find_violating(const ActionTable& qmu, double mu, double tol,
                                          const PolicyClass& pc, OracleStats* stats) const override {
    if (stats) ++stats->calls;
    std::optional<Violation> best;
    for (int p = 0; p < pc.size(); ++p) {
      const auto P = MixedPolicy::point_mass(p);
      const VSD v = compute_vsd(qmu, tables().context_freq, P, reg_[p] / (psi() * mu), pc);
      if (v.D > tol && (!best || v.D > best->D)) best = Violation{P, v.D};
    }
    return best;
  }

 private:
  std::vector<double> reg_;
};

// V_P(Q) by a naive loop over history records.
double naive_V(const History& h, const MixedPolicy& q, const MixedPolicy& p, double mu,
               const PolicyClass& pc, double* S) {
  const int K = pc.num_actions();
  double V = 0.0, s2 = 0.0;
  for (const auto& rec : h.records())
    for (const auto& e : p.entries()) {
      const int a = pc.action(e.policy, rec.x.id);
      double qa = 0.0;
      for (const auto& f : q.entries())
        if (pc.action(f.policy, rec.x.id) == a) qa += f.weight;
      const double m = (1.0 - K * mu) * qa + mu;
      V += e.weight / m;
      s2 += e.weight / (m * m);
    }
  *S = s2 / h.size();
  return V / h.size();
}

}  // namespace

TEST_CASE("compute_vsd closed forms") {
  std::mt19937_64 gen(1);
  const PolicyClass pc = testutil::random_policy_class(gen, 3, 4, 4);
  const History h = testutil::random_history(gen, 3, 4, 2, 50);
  const double mu = 0.05;
  const VSD empty = compute_vsd(MixedPolicy{}, MixedPolicy::point_mass(2), mu, h, 0.7, pc);
  CHECK(empty.V == doctest::Approx(1.0 / mu));
  CHECK(empty.S == doctest::Approx(1.0 / (mu * mu)));
  CHECK(empty.D == doctest::Approx(1.0 / mu - 8.0 - 0.7));

  // Single context: full mass on P itself.
  History h1(1, 4, 1);
  h1.append({{0}, 1, 0.0, {0.0}, 0.25});
  const PolicyClass pc1(1, 4, {{0}, {2}}, 0);
  const auto P = MixedPolicy::point_mass(1);
  const VSD self = compute_vsd(P, P, mu, h1, 0.0, pc1);
  CHECK(self.V == doctest::Approx(1.0 / (1.0 - 3.0 * mu)));
}

TEST_CASE("compute_vsd matches a naive per-record evaluator") {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const PolicyClass pc = testutil::random_policy_class(gen, 3, 3, 4);
    const History h = testutil::random_history(gen, 3, 3, 1, 40);
    MixedPolicy q, p;
    for (int i = 0; i < 4; ++i) {
      q.add(i, U(gen) * 0.2);
      p.add(i, 0.25);
    }
    const double mu = 0.1 * U(gen) + 0.01;
    double S = 0.0;
    const double V = naive_V(h, q, p, mu, pc, &S);
    const VSD v = compute_vsd(q, p, mu, h, 0.3, pc);
    CHECK(v.V == doctest::Approx(V).epsilon(1e-12));
    CHECK(v.S == doctest::Approx(S).epsilon(1e-12));
    CHECK(v.D == doctest::Approx(V - 6.3).epsilon(1e-12));
  }
}

TEST_CASE("solve_op with mu = 1/(2K) and zero regrets needs no updates") {
  std::mt19937_64 gen(3);
  const PolicyClass pc = testutil::random_policy_class(gen, 4, 3, 6);
  const History h = testutil::random_history(gen, 4, 3, 1, 30);
  TableRegret model(completed_tables(h), std::vector<double>(6, 0.0));
  const auto sol = solve_op(model, 1.0 / 6.0, {}, pc);
  CHECK(sol.update_steps == 0);
  CHECK(sol.Q.empty());
  CHECK(verify_op(model, sol, 1.0 / 6.0, pc).feasible(3));
}

TEST_CASE("solve_op concentrates on the single low-regret policy") {
  std::mt19937_64 gen(4);
  const int X = 3, K = 3;
  const PolicyClass pc = testutil::random_policy_class(gen, X, K, 6);
  const History h = testutil::random_history(gen, X, K, 1, 60);
  const double mu = 0.02;
  std::vector<double> reg(6, 1e6);
  reg[3] = 0.0;
  TableRegret model(completed_tables(h), reg);
  const auto sol = solve_op(model, mu, {}, pc);
  const auto check = verify_op(model, sol, mu, pc);
  CHECK(check.feasible(K));
  CHECK(sol.Q.weight(3) > 0.0);
  CHECK(sol.Q.weight(3) == doctest::Approx(sol.Q.total()));
  CHECK(sol.update_steps <= cd_update_bound(K, mu));
}

TEST_CASE("solve_op on random linear-regret instances: feasibility and the update bound") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int X = 2 + trial % 4, K = 2 + trial % 3, n = 3 + trial % 8;
    const PolicyClass pc = testutil::random_policy_class(gen, X, K, n);
    const History h = testutil::random_history(gen, X, K, 1, 20 + trial);
    std::vector<double> reg(n);
    for (double& r : reg) r = U(gen) < 0.3 ? 0.0 : std::pow(U(gen), 3);
    const double mu = (0.02 + 0.48 * U(gen)) / K;
    TableRegret model(completed_tables(h), reg);
    const auto sol = solve_op(model, mu, {}, pc);
    const auto check = verify_op(model, sol, mu, pc);
    CHECK(check.feasible(K));
    CHECK(sol.update_steps <= cd_update_bound(K, mu));
    CHECK(sol.Q.total() <= 1.0 + 1e-9);
  }
}

TEST_CASE("scaling steps preserve the direction of Q") {
  std::mt19937_64 gen(6);
  const PolicyClass pc = testutil::random_policy_class(gen, 3, 3, 5);
  const History h = testutil::random_history(gen, 3, 3, 1, 40);
  std::vector<double> reg{0.0, 0.5, 0.2, 0.9, 0.1};
  TableRegret model(completed_tables(h), reg);
  // A warm start with too much mass forces a scaling step first.
  std::vector<WeightedAtom> init{{MixedPolicy::point_mass(1), 0.8},
                                 {MixedPolicy::point_mass(2), 0.6}};
  OPOptions opt;
  const double mu = 0.1;
  // Run with a halting tolerance so large that no update happens.
  opt.halt_tol = 1e9;
  const auto sol = solve_op(model, mu, init, pc, opt);
  CHECK(sol.scale_steps == 1);
  CHECK(sol.update_steps == 0);
  CHECK(sol.Q.weight(1) / sol.Q.weight(2) == doctest::Approx(0.8 / 0.6));
  const double psi_mu = 100.0 * mu;
  const double weighted = sol.Q.weight(1) * (6.0 + 0.5 / psi_mu) + sol.Q.weight(2) * (6.0 + 0.2 / psi_mu);
  CHECK(weighted == doctest::Approx(6.0));
}

TEST_CASE("solve_op on budgeted empirical regret is feasible and within the bound") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 12; ++trial) {
    const int X = 4, K = 3, d = 2;
    const PolicyClass pc = testutil::random_policy_class(gen, X, K, 8);
    const History h = testutil::random_history(gen, X, K, d, 64 << (trial % 4));
    RegretParams params{1.0 + trial, 0.15 * h.size(), static_cast<long>(h.size()), RegretParams::kPsi};
    const CompletedTables tab = completed_tables(h);
    const auto opt = solve_budgeted_argmax(tab, params, pc);
    KnapsackRegret model(tab, params, {opt.policy, opt.value});
    CHECK(std::abs(model.regret(opt.policy, pc)) < 1e-12);
    const double mu = std::min(1.0 / (2 * K), 0.3 / std::sqrt(static_cast<double>(h.size())));
    const auto sol = solve_op(model, mu, {}, pc);
    const auto check = verify_op(model, sol, mu, pc);
    CHECK(check.feasible(K));
    CHECK(sol.update_steps <= cd_update_bound(K, mu));
    // Warm start from the previous atoms re-verifies cleanly.
    const auto again = solve_op(model, mu, sol.atoms, pc);
    CHECK(verify_op(model, again, mu, pc).feasible(K));
  }
}

TEST_CASE("concave regret: linear objective collapses to the plain arg max") {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 10; ++trial) {
    const int X = 4, K = 3, d = 2;
    const PolicyClass pc = testutil::random_policy_class(gen, X, K, 10);
    const History h = testutil::random_history(gen, X, K, d, 200);
    const CompletedTables tab = completed_tables(h);
    const std::vector<double> w{0.7, -0.3};
    const auto opt = concave_empirical_optimum(tab, linear_objective(w), pc);
    ActionTable combined(X, K);
    for (int x = 0; x < X; ++x)
      for (int a = 0; a < K; ++a)
        combined.at(x, a) = w[0] * tab.consumption[0].at(x, a) + w[1] * tab.consumption[1].at(x, a);
    const int best = argmax_oracle(combined, pc);
    CHECK(opt.value == doctest::Approx(policy_value(combined, best, pc)).epsilon(1e-9));
  }
}

TEST_CASE("concave regret: solve_op is feasible for the distance objective") {
  std::mt19937_64 gen(10);
  for (int trial = 0; trial < 8; ++trial) {
    const int X = 4, K = 3, d = 2;
    const PolicyClass pc = testutil::random_policy_class(gen, X, K, 8);
    const History h = testutil::random_history(gen, X, K, d, 128 << (trial % 3));
    const CompletedTables tab = completed_tables(h);
    const auto obj = neg_distance_objective({0.2, 0.3});
    const auto opt = concave_empirical_optimum(tab, obj, pc);
    ConcaveRegret model(tab, obj, opt.value);
    CHECK(model.regret(opt.policy, pc) == doctest::Approx(0.0).epsilon(1e-12));
    const double mu = std::min(1.0 / (2 * K), 0.3 / std::sqrt(static_cast<double>(h.size())));
    const auto sol = solve_op(model, mu, {}, pc);
    CHECK(verify_op(model, sol, mu, pc).feasible(K));
    CHECK(sol.update_steps <= cd_update_bound(K, mu));
  }
}
