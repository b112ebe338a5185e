#include <cmath>
#include <random>

#include "cbwk/core_model.hpp"
#include "cbwk/errors.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cbwk;

TEST_CASE("mixed policies merge weights and check (sub)convexity") {
  MixedPolicy p;
  p.add(3, 0.25);
  p.add(1, 0.25);
  p.add(3, 0.25);
  CHECK(p.entries().size() == 2);
  CHECK(p.weight(3) == doctest::Approx(0.5));
  CHECK(p.total() == doctest::Approx(0.75));
  CHECK_NOTHROW(p.validate_subconvex());
  CHECK_THROWS_AS(p.validate_convex(), ContractError);
  p.add(0, 0.5);
  CHECK_THROWS_AS(p.validate_subconvex(), ContractError);

  MixedPolicy neg;
  neg.add(0, -0.1);
  CHECK_THROWS_AS(neg.validate_subconvex(), ContractError);

  const auto dense = MixedPolicy::uniform(4).dense(4);
  for (double w : dense) CHECK(w == doctest::Approx(0.25));
}

TEST_CASE("policy class requires a no-op that always plays action 0") {
  CHECK_THROWS_AS(PolicyClass(2, 3, {{0, 1}, {1, 2}}, 0), ContractError);
  CHECK_THROWS_AS(PolicyClass(2, 3, {{0, 0}, {1, 3}}, 0), ContractError);
  CHECK_THROWS_AS(PolicyClass(2, 3, {{0, 0}, {1}}, 0), ContractError);
  const PolicyClass pc(2, 3, {{1, 2}, {0, 0}}, 1);
  CHECK(pc.noop_index() == 1);
  CHECK(pc.action(0, 1) == 2);
}

TEST_CASE("smoothed projection keeps mu on every action and sums to one") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int K = 2 + static_cast<int>(gen() % 5);
    std::vector<double> q(K);
    double s = 0.0;
    for (double& x : q) s += (x = U(gen));
    for (double& x : q) x /= s;
    const double mu = U(gen) / K;
    const auto out = smooth_project(ActionDistribution{q}, mu, K);
    double total = 0.0;
    for (int a = 0; a < K; ++a) {
      CHECK(out.probs[a] >= mu - 1e-15);
      CHECK(out.probs[a] == doctest::Approx((1.0 - K * mu) * q[a] + mu));
      total += out.probs[a];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(smooth_project(ActionDistribution{{0.5, 0.5}}, 0.6, 2), ContractError);
}

TEST_CASE("sub-convex Q is completed with the default mixture") {
  const PolicyClass pc(2, 3, {{0, 0}, {1, 1}, {2, 1}}, 0);
  MixedPolicy q;
  q.add(1, 0.4);
  const MixedPolicy full = complete_mixture(q, MixedPolicy::point_mass(2));
  CHECK(full.total() == doctest::Approx(1.0));
  CHECK(full.weight(2) == doctest::Approx(0.6));

  const double mu = 0.1;
  const ActionTable t = sampling_table(q, MixedPolicy::point_mass(2), mu, pc);
  // x = 0: 0.4 on action 1, 0.6 on action 2; x = 1: all on action 1.
  CHECK(t.at(0, 0) == doctest::Approx(mu));
  CHECK(t.at(0, 1) == doctest::Approx(0.7 * 0.4 + mu));
  CHECK(t.at(0, 2) == doctest::Approx(0.7 * 0.6 + mu));
  CHECK(t.at(1, 1) == doctest::Approx(0.7 + mu));
}

TEST_CASE("sampled actions follow the smoothed distribution and report its probability") {
  const PolicyClass pc(1, 3, {{0}, {1}, {2}}, 0);
  MixedPolicy q;
  q.add(1, 0.5);
  q.add(2, 0.2);
  const double mu = 0.05;
  Rng rng(99);
  const int n = 200000;
  std::vector<int> counts(3, 0);
  for (int i = 0; i < n; ++i) {
    const SampledAction s = sample_action({0}, q, MixedPolicy::point_mass(0), mu, rng, pc);
    ++counts[s.action];
    const double expect = s.action == 0 ? 0.85 * 0.3 + mu : s.action == 1 ? 0.85 * 0.5 + mu : 0.85 * 0.2 + mu;
    REQUIRE(s.prob == doctest::Approx(expect));
  }
  const double p[3] = {0.85 * 0.3 + mu, 0.85 * 0.5 + mu, 0.85 * 0.2 + mu};
  for (int a = 0; a < 3; ++a) {
    const double se = std::sqrt(p[a] * (1 - p[a]) / n);
    CHECK(std::abs(counts[a] / double(n) - p[a]) < 4 * se);
  }
}
