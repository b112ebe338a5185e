#include "cbwk/trace.hpp"

#include "cbwk/errors.hpp"

namespace cbwk {

int RunTrace::op_violations() const {
  int n = 0;
  for (const auto& s : solves)
    if (!s.feasible) ++n;
  return n;
}

int RunTrace::cd_bound_violations() const {
  int n = 0;
  for (const auto& s : solves)
    if (s.update_steps > s.update_bound) ++n;
  return n;
}

TraceRecorder::TraceRecorder(int d, double budget)
    : d_(d), budget_(budget), cum_v_(static_cast<std::size_t>(d), 0.0) {
  require(d >= 1, "TraceRecorder: d must be >= 1");
}

bool TraceRecorder::record(long t, int epoch, int context, int action, double prob, double reward,
                           std::span<const double> v, long oracle_calls) {
  require(!trace_.terminal.aborted, "TraceRecorder: run already aborted");
  require(static_cast<int>(v.size()) == d_, "TraceRecorder: consumption has wrong dimension");
  TraceRow row;
  row.t = t;
  row.epoch = epoch;
  row.context = context;
  row.action = action;
  row.prob = prob;
  row.reward = reward;
  row.v.assign(v.begin(), v.end());
  cum_reward_ += reward;
  bool exhausted = false;
  for (int j = 0; j < d_; ++j) {
    cum_v_[j] += v[j];
    if (cum_v_[j] >= budget_) exhausted = true;
  }
  row.cum_reward = cum_reward_;
  row.cum_v = cum_v_;
  row.oracle_calls = oracle_calls;
  trace_.rows.push_back(std::move(row));
  trace_.terminal.rounds = static_cast<long>(trace_.rows.size());
  trace_.terminal.total_reward = cum_reward_;
  if (exhausted) trace_.terminal.aborted = true;
  return !exhausted;
}

RunTrace TraceRecorder::take() { return std::move(trace_); }

}  // namespace cbwk
