#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbwk/concave.hpp"
#include "cbwk/core_model.hpp"
#include "cbwk/rng.hpp"
#include "cbwk/trace.hpp"

namespace cbwk {

enum class NoiseModel { kDeterministic, kBernoulli, kUniformJitter };

struct EnvironmentSpec {
  std::vector<double> context_probs;
  std::vector<std::vector<double>> mean_reward;                   // X x K
  std::vector<std::vector<std::vector<double>>> mean_consumption;  // X x K x d
  NoiseModel noise = NoiseModel::kBernoulli;
  double jitter_half_width = 0.0;

  int num_contexts() const { return static_cast<int>(context_probs.size()); }
  int num_actions() const { return mean_reward.empty() ? 0 : static_cast<int>(mean_reward[0].size()); }
  int dims() const {
    return mean_consumption.empty() || mean_consumption[0].empty()
               ? 0
               : static_cast<int>(mean_consumption[0][0].size());
  }
  // Throws ConfigError on malformed specs. Action 0 must be the no-op.
  void validate() const;
};

// A full round as drawn by the environment. The agent sees only the played
// action's entries; the harness keeps the rest for counterfactual checks.
struct RoundOutcome {
  Context x;
  std::vector<double> reward;                    // K
  std::vector<std::vector<double>> consumption;  // K x d
};

// Draw order per round: context, then reward and consumption for every
// action in index order, so the number of draws per round is fixed.
RoundOutcome sample_round(const EnvironmentSpec& spec, Rng& rng);

class EnvironmentStream {
 public:
  virtual ~EnvironmentStream() = default;
  // nullopt once the stream is exhausted.
  virtual std::optional<RoundOutcome> next() = 0;
};

class SimulatedEnvironment : public EnvironmentStream {
 public:
  // max_rounds < 0 means unlimited.
  SimulatedEnvironment(const EnvironmentSpec& spec, std::uint64_t seed, long max_rounds = -1);
  std::optional<RoundOutcome> next() override;

 private:
  const EnvironmentSpec& spec_;
  Rng rng_;
  long remaining_;
};

// Exact expected reward and consumption of every pure policy; mixtures are
// the weighted sums.
struct ExactMoments {
  std::vector<double> R;               // per policy
  std::vector<std::vector<double>> V;  // per policy, d entries

  double R_of(const MixedPolicy& p) const;
  std::vector<double> V_of(const MixedPolicy& p) const;
};

ExactMoments exact_moments(const EnvironmentSpec& spec, const PolicyClass& pc);

struct OptResult {
  double opt = 0.0;
  MixedPolicy p_star;
};

// max_{P in C(Pi)} T R(P)  s.t.  T V(P) <= B 1.
OptResult compute_opt(const EnvironmentSpec& spec, const PolicyClass& pc, double B, long T);
OptResult compute_opt(const ExactMoments& m, double B, long T);

std::vector<double> opt_curve(const EnvironmentSpec& spec, const PolicyClass& pc,
                              const std::vector<double>& budgets, long T);

// max_{P in C(Pi)} f(V(P)) on exact moments.
OptResult compute_concave_opt(const EnvironmentSpec& spec, const PolicyClass& pc,
                              const ConcaveObjective& objective);

// Uniform action choice with the knapsack abort rule.
RunTrace baseline_uniform(EnvironmentStream& env, int K, int d, long T, double B, Rng& rng);
// Plays policies drawn from p_star every round, with the same abort rule.
RunTrace baseline_static_lp(EnvironmentStream& env, const PolicyClass& pc,
                            const MixedPolicy& p_star, int d, long T, double B, Rng& rng);

// An environment together with the policy class evaluated on it.
struct ProblemInstance {
  std::string name;
  EnvironmentSpec env;
  PolicyClass policies;
};

// JSON object with keys context_probs, mean_reward, mean_consumption, noise
// ({"model": "deterministic"|"bernoulli"|"uniform_jitter", "half_width": h}),
// policies (table of actions per context) and noop_policy.
ProblemInstance instance_from_json(const std::string& text);
std::string instance_to_json(const ProblemInstance& inst);
ProblemInstance load_instance(const std::string& path);

NoiseModel noise_from_string(const std::string& s);
const char* to_string(NoiseModel n);

}  // namespace cbwk
