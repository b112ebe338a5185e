#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace cbwk {

struct TraceRow {
  long t = 0;  // exploration rounds are numbered -(T0-1)..0
  int epoch = 0;
  int context = 0;
  int action = 0;
  double prob = 1.0;
  double reward = 0.0;
  std::vector<double> v;
  double cum_reward = 0.0;
  std::vector<double> cum_v;
  long oracle_calls = 0;  // oracle calls made since the previous row
};

// Telemetry of one (OP) solve at an epoch boundary.
struct OPRecord {
  long t = 0;
  int epoch = 0;
  double mu = 0.0;
  int iterations = 0;
  int scale_steps = 0;
  int update_steps = 0;
  long update_bound = 0;
  long oracle_calls = 0;
  double first_lhs = 0.0;
  double second_excess = 0.0;
  bool feasible = true;
  double regret_of_p_t = 0.0;  // Reg_hat(P_t), zero up to solver tolerance
  double q_mass = 0.0;          // total weight of the returned Q
};

struct RunTerminal {
  std::string algorithm;
  std::uint64_t seed = 0;
  long T = 0;
  double B = 0.0;
  bool aborted = false;
  bool truncated = false;  // environment ran out before T rounds
  long rounds = 0;         // rounds played, exploration included
  bool refused = false;    // configuration rejected before the first round
  std::string refusal;
  double total_reward = 0.0;
  double opt = 0.0;
  double regret = 0.0;
  double Z = 0.0;
  double B_prime = 0.0;
  long T0 = 0;
  bool out_of_regime = false;
  long oracle_calls = 0;
  // Concave-reward runs: average outcome, its objective value, avg-regret.
  std::vector<double> avg_outcome;
  double objective = 0.0;
  double avg_regret = 0.0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  std::vector<OPRecord> solves;
  RunTerminal terminal;

  int op_violations() const;
  int cd_bound_violations() const;
};

// Appends rows with running sums and applies the abort rule: once cumulative
// consumption reaches the budget in any coordinate the run stops, with that
// round's reward still counted.
class TraceRecorder {
 public:
  TraceRecorder(int d, double budget = std::numeric_limits<double>::infinity());

  // Returns false when this round triggered the abort.
  bool record(long t, int epoch, int context, int action, double prob, double reward,
              std::span<const double> v, long oracle_calls);

  const std::vector<double>& cum_v() const { return cum_v_; }
  double cum_reward() const { return cum_reward_; }
  bool aborted() const { return trace_.terminal.aborted; }
  RunTrace& trace() { return trace_; }
  RunTrace take();

 private:
  int d_;
  double budget_;
  double cum_reward_ = 0.0;
  std::vector<double> cum_v_;
  RunTrace trace_;
};

}  // namespace cbwk
