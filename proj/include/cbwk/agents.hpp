#pragma once

#include <cstdint>

#include "cbwk/concave.hpp"
#include "cbwk/core_model.hpp"
#include "cbwk/env_sim.hpp"
#include "cbwk/opsolver.hpp"
#include "cbwk/trace.hpp"
#include "cbwk/zestimate.hpp"

namespace cbwk {

// tau_m = 2^m. Epoch m covers rounds (tau_{m-1}, tau_m] and is played with
// the mixture computed at the end of epoch m - 1; rounds 1 and 2 form epoch 1.
struct EpochSchedule {
  static long tau(int m) { return 1L << m; }
  static int epoch_of(long t);
  static bool is_boundary(long t) { return t >= 2 && (t & (t - 1)) == 0; }
};

// min{1/(2K), sqrt(ln(16 tau_m^2 (d+1) |Pi| / delta) / (K tau_m))}
double epoch_mu(int m, int K, int d, int pi_size, double delta);

// B - T0 - c sqrt(K T ln(T |Pi| / delta)); ConfigError when not positive.
double reduced_budget(const ProblemDims& dims, long T0, int pi_size, double c);

struct AgentConfig {
  double c = 1.0;
  double exploration_scale = kExplorationScale;
  // Feed the exploration rounds into the importance-weighted history too.
  bool include_exploration_in_history = false;
  // Start each (OP) solve from the previous epoch's atoms instead of Q = 0.
  bool warm_start = false;
  double solver_tol = kSolverTol;
  OPOptions op;
  bool verify_op = true;
};

RunTrace run_cbwk(EnvironmentStream& env, const ProblemDims& dims, const PolicyClass& pc,
                  const AgentConfig& config, Rng& rng);

// Outcome vectors are the environment's consumption vectors; there is no
// budget, no exploration phase and no abort.
RunTrace run_cbwr(EnvironmentStream& env, int K, int d, long T, double delta,
                  const ConcaveObjective& objective, const PolicyClass& pc,
                  const AgentConfig& config, Rng& rng);

}  // namespace cbwk
