#include <algorithm>
#include <cmath>
#include <random>

#include "cbwk/amo.hpp"
#include "cbwk/lp.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cbwk;

namespace {

// max over w in the simplex over ALL policies, lambda >= 0, of
// sum_p w_p G_p - Z lambda s.t. sum_p w_p V_pj - lambda <= b.
double full_lp_value(const ActionTable& gain, const std::vector<ActionTable>& cons, double b,
                     double Z, const PolicyClass& pc) {
  const int n = pc.size();
  const int d = static_cast<int>(cons.size());
  lp::Problem p;
  p.objective.assign(n + 1, 0.0);
  for (int i = 0; i < n; ++i) p.objective[i] = policy_value(gain, i, pc);
  p.objective[n] = -Z;
  for (int j = 0; j < d; ++j) {
    lp::Constraint row{std::vector<double>(n + 1, 0.0), lp::Sense::kLessEqual, b};
    for (int i = 0; i < n; ++i) row.coeffs[i] = policy_value(cons[j], i, pc);
    row.coeffs[n] = -1.0;
    p.constraints.push_back(row);
  }
  lp::Constraint s{std::vector<double>(n + 1, 1.0), lp::Sense::kEqual, 1.0};
  s.coeffs[n] = 0.0;
  p.constraints.push_back(s);
  const auto sol = lp::maximize(p);
  REQUIRE(sol.status == lp::Status::kOptimal);
  return sol.objective;
}

}  // namespace

TEST_CASE("arg-max oracle matches per-example brute force with lowest-index ties") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int X = 1 + trial % 5, K = 2 + trial % 3;
    const PolicyClass pc = testutil::random_policy_class(gen, X, K, 12);
    std::vector<WeightedExample> ex;
    for (int i = 0; i < 20; ++i) {
      WeightedExample e{{static_cast<int>(gen() % X)}, {}};
      for (int a = 0; a < K; ++a) e.reward_per_action.push_back(std::round(U(gen) * 2) / 2);
      ex.push_back(e);
    }
    int best = -1;
    double bv = -1e300;
    for (int p = 0; p < pc.size(); ++p) {
      double v = 0.0;
      for (const auto& e : ex) v += e.reward_per_action[pc.action(p, e.x.id)];
      if (v > bv + 1e-12) {
        bv = v;
        best = p;
      }
    }
    OracleStats st;
    CHECK(argmax_oracle(ex, pc, &st) == best);
    // Normalization can perturb exact ties by rounding; the value must agree.
    const int pn = argmax_oracle(normalize_rewards(ex), pc);
    double vn = 0.0;
    for (const auto& e : ex) vn += e.reward_per_action[pc.action(pn, e.x.id)];
    CHECK(vn == doctest::Approx(bv).epsilon(1e-12));
    CHECK(st.calls == 1);
  }
}

TEST_CASE("reward normalization maps into [0, 1]") {
  std::vector<WeightedExample> ex{{{0}, {-3.0, 5.0}}, {{1}, {2.0, 2.5}}};
  const auto n = normalize_rewards(ex);
  for (const auto& e : n)
    for (double r : e.reward_per_action) {
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
    }
  CHECK(n[0].reward_per_action[1] == doctest::Approx(1.0));
}

TEST_CASE("column generation reaches the full-LP optimum of the penalized problem") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int X = 2 + trial % 4, K = 2 + trial % 3, d = 1 + trial % 3;
    const PolicyClass pc = testutil::random_policy_class(gen, X, K, 6 + trial % 20);
    ActionTable gain(X, K);
    std::vector<ActionTable> cons(d, ActionTable(X, K));
    for (int x = 0; x < X; ++x)
      for (int a = 0; a < K; ++a) {
        gain.at(x, a) = U(gen) / X;
        for (int j = 0; j < d; ++j) cons[j].at(x, a) = a == 0 ? 0.0 : U(gen) / X;
      }
    const double b = 0.05 + 0.4 * U(gen);
    const double Z = 1.0 + 5.0 * U(gen);
    const auto sol = solve_knapsack_linear(gain, cons, b, Z, pc);
    const double ref = full_lp_value(gain, cons, b, Z, pc);
    CHECK(sol.value == doctest::Approx(ref).epsilon(1e-6));
    CHECK(sol.upper_bound >= ref - 1e-9);
    sol.policy.validate_convex();
    // Attained value recomputed from the returned mixture.
    double g = 0.0;
    std::vector<double> v(d, 0.0);
    for (const auto& e : sol.policy.entries()) {
      g += e.weight * policy_value(gain, e.policy, pc);
      for (int j = 0; j < d; ++j) v[j] += e.weight * policy_value(cons[j], e.policy, pc);
    }
    double worst = 0.0;
    for (double vj : v) worst = std::max(worst, vj - b);
    CHECK(g - Z * worst == doctest::Approx(sol.value).epsilon(1e-9));
  }
}

TEST_CASE("budgeted arg max agrees with a grid search over two-policy mixtures") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int X = 4, K = 3, d = 2;
    const PolicyClass pc = testutil::random_policy_class(gen, X, K, 5);
    const History h = testutil::random_history(gen, X, K, d, 400);
    RegretParams params{3.0, 40.0, 400, RegretParams::kPsi};
    const auto sol = solve_budgeted_argmax(h, params, pc);
    const CompletedTables tab = completed_tables(h);
    // With d = 2 the optimum needs at most d + 1 = 3 policies; a fine grid
    // over triples brackets it from below.
    double grid = -1e300;
    const int steps = 60;
    for (int p = 0; p < pc.size(); ++p)
      for (int q = 0; q < pc.size(); ++q)
        for (int r = 0; r < pc.size(); ++r)
          for (int i = 0; i <= steps; ++i)
            for (int k = 0; i + k <= steps; ++k) {
              MixedPolicy m;
              m.add(p, static_cast<double>(i) / steps);
              m.add(q, static_cast<double>(k) / steps);
              m.add(r, static_cast<double>(steps - i - k) / steps);
              grid = std::max(grid, empirical_objective(tab, m, params, pc));
            }
    CHECK(sol.value >= grid - 1e-9);
    CHECK(sol.value <= grid + 0.05);
    CHECK(empirical_objective(tab, sol.policy, params, pc) ==
          doctest::Approx(sol.value).epsilon(1e-9));
  }
}

TEST_CASE("violating-policy search matches the full-LP maximum of D") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int X = 3, K = 3, d = 2;
    const PolicyClass pc = testutil::random_policy_class(gen, X, K, 10);
    const History h = testutil::random_history(gen, X, K, d, 300);
    const CompletedTables tab = completed_tables(h);
    RegretParams params{2.0, 60.0, 300, RegretParams::kPsi};
    const auto opt = solve_budgeted_argmax(tab, params, pc);
    const EmpiricalOptimum p_t{opt.policy, opt.value};
    MixedPolicy q;
    const double mass = U(gen);
    q.add(static_cast<int>(gen() % 10), mass * 0.6);
    q.add(static_cast<int>(gen() % 10), mass * 0.4);
    const double mu = 0.02 + 0.1 * U(gen);
    const ActionTable qmu = smoothed_masses(q, mu, pc);

    // Reference: max D over all mixtures by the full LP on the same gains.
    const double s = (params.Z + 1.0) * params.psi * mu;
    ActionTable gain = tab.reward;
    for (int x = 0; x < X; ++x)
      for (int a = 0; a < K; ++a) gain.at(x, a) += s * tab.context_freq[x] / qmu.at(x, a);
    const double ref =
        (full_lp_value(gain, tab.consumption, params.B_prime / params.T, params.Z, pc) - opt.value) /
            s - 2.0 * K;

    const auto v = find_violating_policy(tab, qmu, mu, params, p_t, pc, 1e-6);
    if (ref > 1e-5) {
      REQUIRE(v.has_value());
      CHECK(v->D == doctest::Approx(ref).epsilon(1e-6));
      // D recomputed from its definition.
      double V = 0.0;
      for (const auto& e : v->policy.entries())
        for (int x = 0; x < X; ++x)
          V += e.weight * tab.context_freq[x] / qmu.at(x, pc.action(e.policy, x));
      const double reg = (opt.value - empirical_objective(tab, v->policy, params, pc)) /
                         (params.Z + 1.0);
      CHECK(V - (2.0 * K + reg / (params.psi * mu)) == doctest::Approx(v->D).epsilon(1e-6));
    } else if (ref < -1e-5) {
      CHECK_FALSE(v.has_value());
    }
  }
}

namespace {

// Euclidean projection of c onto the probability simplex (sort-based).
std::vector<double> project_simplex(std::vector<double> c) {
  std::vector<double> u = c;
  std::sort(u.rbegin(), u.rend());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0) theta = t;
  }
  for (double& v : c) v = std::max(0.0, v - theta);
  return c;
}

LinearOracle vertex_oracle(const std::vector<std::vector<double>>& vertices) {
  return [vertices](std::span<const double> dir) {
    int best = 0;
    double bv = 1e300;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      double v = 0.0;
      for (std::size_t k = 0; k < dir.size(); ++k) v += dir[k] * vertices[i][k];
      if (v < bv) {
        bv = v;
        best = static_cast<int>(i);
      }
    }
    return OracleAtom{vertices[best], best};
  };
}

}  // namespace

TEST_CASE("conditional gradient solves projection onto the simplex") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> N(0.0, 0.7);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 5;
    std::vector<std::vector<double>> verts(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) verts[i][i] = 1.0;
    std::vector<double> c(n);
    for (double& v : c) v = 1.0 / n + N(gen);
    ConvexFunction f{[c](std::span<const double> x) {
                       double s = 0;
                       for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - c[i]) * (x[i] - c[i]);
                       return s;
                     },
                     [c](std::span<const double> x) {
                       std::vector<double> g(x.size());
                       for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2 * (x[i] - c[i]);
                       return g;
                     }};
    const auto res = convex_min_with_linear_oracle(f, vertex_oracle(verts), n, 1e-9);
    const auto proj = project_simplex(c);
    double ref = 0;
    for (int i = 0; i < n; ++i) ref += (proj[i] - c[i]) * (proj[i] - c[i]);
    CHECK(res.converged);
    CHECK(res.value == doctest::Approx(ref).epsilon(1e-7));
    CHECK(res.lower_bound <= ref + 1e-12);
    double wsum = 0;
    for (double w : res.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0));
  }
}

TEST_CASE("cutting-plane bound certifies a kinked minimum") {
  // min ||x - x0|| over a random polytope containing x0: value 0 at the kink.
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int dim = 2 + trial % 3;
    std::vector<std::vector<double>> verts(8, std::vector<double>(dim));
    for (auto& v : verts)
      for (double& c : v) c = U(gen);
    std::vector<double> x0(dim, 0.0);
    std::vector<double> lam(8);
    double ls = 0;
    for (double& l : lam) ls += (l = U(gen));
    for (int i = 0; i < 8; ++i)
      for (int k = 0; k < dim; ++k) x0[k] += lam[i] / ls * verts[i][k];
    ConvexFunction f{[x0](std::span<const double> x) {
                       double s = 0;
                       for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - x0[i]) * (x[i] - x0[i]);
                       return std::sqrt(s);
                     },
                     [x0](std::span<const double> x) {
                       double s = 0;
                       for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - x0[i]) * (x[i] - x0[i]);
                       s = std::sqrt(s);
                       std::vector<double> g(x.size(), 0.0);
                       if (s > 0)
                         for (std::size_t i = 0; i < x.size(); ++i) g[i] = (x[i] - x0[i]) / s;
                       return g;
                     }};
    const auto res = convex_min_with_linear_oracle(f, vertex_oracle(verts), dim, 1e-6);
    CHECK(res.converged);
    CHECK(res.value <= 1e-6);
    CHECK(res.lower_bound <= 1e-12);
  }
}

TEST_CASE("convex minimizer reports failure with its best iterate at the cap") {
  std::vector<std::vector<double>> verts{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  ConvexFunction f{[](std::span<const double> x) { return (x[0] - 0.3) * (x[0] - 0.3) + (x[1] - 0.3) * (x[1] - 0.3); },
                   [](std::span<const double> x) {
                     return std::vector<double>{2 * (x[0] - 0.3), 2 * (x[1] - 0.3)};
                   }};
  try {
    convex_min_with_linear_oracle(f, vertex_oracle(verts), 2, 1e-14, 2);
    FAIL("expected failure");
  } catch (const ConvexMinFailure& e) {
    CHECK_FALSE(e.best().converged);
    CHECK(e.best().value < 0.18 + 1e-12);
  }
}
