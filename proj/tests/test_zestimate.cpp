#include <cmath>

#include "cbwk/env_sim.hpp"
#include "cbwk/zestimate.hpp"
#include "doctest.h"

using namespace cbwk;

TEST_CASE("exploration length on the reference dimensions") {
  // ceil(12 * 4 * 32768 / 4096 * ln(2 * 16 / 0.05)) = ceil(384 ln 640)
  const ProblemDims dims{4, 2, 32768, 4096.0, 0.05};
  const ExplorationLength e = exploration_budget_T0(dims, 16);
  CHECK(e.formula == doctest::Approx(384.0 * std::log(640.0)));
  CHECK(e.T0 == 2482);
  CHECK_FALSE(e.clamped);
  // B = T/8 makes the formula independent of T; at T = 2048 it is clamped.
  const ExplorationLength small = exploration_budget_T0({4, 2, 2048, 256.0, 0.05}, 16);
  CHECK(small.formula == doctest::Approx(e.formula));
  CHECK(small.clamped);
  CHECK(small.T0 == 682);
}

TEST_CASE("exploration length is clamped to a third of the horizon") {
  const ExplorationLength e = exploration_budget_T0({4, 2, 900, 10.0, 0.05}, 16);
  CHECK(e.clamped);
  CHECK(e.T0 == 300);
}

TEST_CASE("relaxed OPT and Z on hand-made estimates") {
  // Two real policies plus the no-op, one resource. Per-round estimates:
  // policy 1: r = 0.8, v = 0.4; policy 2: r = 0.3, v = 0.05.
  const PolicyClass pc(1, 3, {{0}, {1}, {2}}, 0);
  ExplorationEstimates est(3, 1);
  est.t0_rounds = 10;
  est.r_bar_sums = {0.0, 8.0, 3.0};
  est.v_bar_sums = {{0.0}, {4.0}, {0.5}};
  const ProblemDims dims{3, 1, 1000, 100.0, 0.05};
  // Budget per round (B + gamma)/T = 0.15 with gamma = B/2. Mix policies 1
  // and 2: 0.4 a + 0.05 (1 - a) = 0.15 gives a = 2/7.
  const RelaxedOpt r = relaxed_opt(est, dims, 50.0, pc);
  const double a = 2.0 / 7.0;
  CHECK(r.value == doctest::Approx(1000.0 * (0.8 * a + 0.3 * (1 - a))));
  CHECK(estimate_Z(est, dims, pc) == doctest::Approx(8.0 * r.value / 100.0));

  // A budget so large that nothing binds still yields Z >= 1.
  est.r_bar_sums = {0.0, 0.001, 0.0};
  CHECK(estimate_Z(est, dims, pc) == doctest::Approx(1.0));
}

TEST_CASE("exploration estimates are unbiased for every policy") {
  const ProblemInstance inst = load_instance(CBWK_SOURCE_DIR "/configs/reference_instance.json");
  const ExactMoments m = exact_moments(inst.env, inst.policies);
  SimulatedEnvironment env(inst.env, 12);
  Rng rng(13);
  ExplorationEstimates est(inst.policies.size(), 2);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const RoundOutcome r = *env.next();
    const int a = static_cast<int>(rng.below(4));
    est.add({r.x, a, r.reward[a], r.consumption[a], 0.25}, inst.policies);
  }
  CHECK(est.t0_rounds == n);
  const double se = 4.0 / std::sqrt(static_cast<double>(n));  // weight K, outcomes in [0, 1]
  for (int p = 0; p < inst.policies.size(); ++p) {
    CHECK(std::abs(est.r_hat(p) - m.R[p]) < 3 * se);
    const auto v = est.v_hat(p);
    for (int j = 0; j < 2; ++j) CHECK(std::abs(v[j] - m.V[p][j]) < 3 * se);
  }
  CHECK(est.consumed[0] > 0.0);
}
