#include <cmath>
#include <random>

#include "cbwk/amo.hpp"
#include "cbwk/env_sim.hpp"
#include "cbwk/estimators.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cbwk;

TEST_CASE("budget violation is the largest overshoot above B'/T") {
  const std::vector<double> v{0.3, 0.55, 0.1};
  CHECK(budget_violation(v, 50.0, 100) == doctest::Approx(0.05));
  CHECK(budget_violation(v, 60.0, 100) == 0.0);
}

TEST_CASE("budget violation is convex") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> a(3), b(3), m(3);
    const double lam = U(gen);
    for (int j = 0; j < 3; ++j) {
      a[j] = U(gen);
      b[j] = U(gen);
      m[j] = lam * a[j] + (1 - lam) * b[j];
    }
    const double lhs = budget_violation(m, 40.0, 100);
    const double rhs = lam * budget_violation(a, 40.0, 100) + (1 - lam) * budget_violation(b, 40.0, 100);
    CHECK(lhs <= rhs + 1e-12);
  }
}

TEST_CASE("history sums equal a naive pass over the records") {
  std::mt19937_64 gen(3);
  const History h = testutil::random_history(gen, 4, 3, 2, 500);
  for (int x = 0; x < 4; ++x)
    for (int a = 0; a < 3; ++a) {
      double r = 0.0, v1 = 0.0;
      for (const auto& rec : h.records())
        if (rec.x.id == x && rec.a == a) {
          r += rec.r / rec.p;
          v1 += rec.v[1] / rec.p;
        }
      CHECK(h.weighted_reward_sum(x, a) == doctest::Approx(r).epsilon(1e-12));
      CHECK(h.weighted_consumption_sum(x, a, 1) == doctest::Approx(v1).epsilon(1e-12));
    }
}

TEST_CASE("fictitious outcome is nonzero only at the played action") {
  const HistoryRecord rec{{0}, 2, 0.5, {0.25, 1.0}, 0.25};
  const FictitiousOutcome f = fictitious_outcome(rec, 3);
  CHECK(f.r_hat[2] == doctest::Approx(2.0));
  CHECK(f.r_hat[0] == 0.0);
  CHECK(f.v_hat[2][0] == doctest::Approx(1.0));
  CHECK(f.v_hat[2][1] == doctest::Approx(4.0));
  CHECK(f.v_hat[1][1] == 0.0);
}

TEST_CASE("estimates are linear in the mixture") {
  std::mt19937_64 gen(8);
  const History h = testutil::random_history(gen, 5, 4, 2, 300);
  const PolicyClass pc = testutil::random_policy_class(gen, 5, 4, 6);
  for (int i = 0; i < 50; ++i) {
    const int p1 = static_cast<int>(gen() % 6), p2 = static_cast<int>(gen() % 6);
    const double a = std::uniform_real_distribution<double>(0, 1)(gen);
    MixedPolicy mix;
    mix.add(p1, a);
    mix.add(p2, 1 - a);
    const double lhs = estimate_reward(h, mix, pc);
    const double rhs = a * estimate_reward(h, MixedPolicy::point_mass(p1), pc) +
                       (1 - a) * estimate_reward(h, MixedPolicy::point_mass(p2), pc);
    CHECK(std::abs(lhs - rhs) <= 1e-12);
    const auto vl = estimate_consumption(h, mix, pc);
    const auto v1 = estimate_consumption(h, MixedPolicy::point_mass(p1), pc);
    const auto v2 = estimate_consumption(h, MixedPolicy::point_mass(p2), pc);
    for (int j = 0; j < 2; ++j) CHECK(std::abs(vl[j] - (a * v1[j] + (1 - a) * v2[j])) <= 1e-12);
  }
}

TEST_CASE("importance-weighted estimates are unbiased under non-uniform logging") {
  // Exact moments from the environment; 1e5 rounds logged with a fixed,
  // context-dependent, strictly positive scheme.
  EnvironmentSpec spec;
  spec.context_probs = {0.3, 0.7};
  spec.mean_reward = {{0.0, 0.8, 0.3}, {0.0, 0.1, 0.6}};
  spec.mean_consumption = {{{0, 0}, {0.5, 0.2}, {0.1, 0.9}}, {{0, 0}, {0.4, 0.4}, {0.7, 0.05}}};
  spec.noise = NoiseModel::kBernoulli;
  const PolicyClass pc(2, 3, {{0, 0}, {1, 2}, {2, 1}}, 0);
  const ExactMoments exact = exact_moments(spec, pc);
  const std::vector<std::vector<double>> log_probs = {{0.2, 0.5, 0.3}, {0.6, 0.1, 0.3}};

  SimulatedEnvironment env(spec, 77);
  Rng rng(78);
  History h(2, 3, 2);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const RoundOutcome r = *env.next();
    const auto& probs = log_probs[r.x.id];
    const int a = static_cast<int>(rng.categorical(probs));
    h.append({r.x, a, r.reward[a], r.consumption[a], probs[a]});
  }
  for (int p = 1; p < 3; ++p) {
    const MixedPolicy P = MixedPolicy::point_mass(p);
    // Worst-case standard error: the weight is at most 10 and outcomes lie in [0, 1].
    const double se = 10.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(estimate_reward(h, P, pc) - exact.R[p]) < 3 * se);
    const auto v = estimate_consumption(h, P, pc);
    for (int j = 0; j < 2; ++j) CHECK(std::abs(v[j] - exact.V[p][j]) < 3 * se);
  }
}

TEST_CASE("empirical regret is non-negative against the certified maximizer") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    const History h = testutil::random_history(gen, 4, 3, 2, 200);
    const PolicyClass pc = testutil::random_policy_class(gen, 4, 3, 8);
    RegretParams params;
    params.T = 1000;
    params.Z = 1.0 + static_cast<double>(gen() % 5);
    params.B_prime = 100.0 + static_cast<double>(gen() % 400);
    const ConstrainedSolve best = solve_budgeted_argmax(h, params, pc);
    for (int p = 0; p < pc.size(); ++p)
      CHECK(empirical_regret(h, MixedPolicy::point_mass(p), best.policy, params, pc) >= -1e-6);
  }
}
