#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cbwk/agents.hpp"
#include "cbwk/concave.hpp"
#include "cbwk/env_sim.hpp"
#include "cbwk/trace.hpp"

namespace cbwk {

inline constexpr const char* kTraceSchema = "# cbwk-trace v1";
inline constexpr const char* kSummarySchema = "# cbwk-summary v1";

struct ObjectiveSpec {
  std::string type;  // "neg_distance" or "linear"
  std::vector<double> params;

  ConcaveObjective build() const;
};

struct ExperimentConfig {
  std::string name;
  std::filesystem::path source;  // config file, empty for inline text
  std::filesystem::path instance_path;
  std::shared_ptr<const ProblemInstance> instance;
  std::string algorithm;  // cbwk | cbwr | uniform | static-lp
  std::vector<long> horizons;
  // Exactly one of these is set: an absolute budget or B = fraction * T.
  std::optional<double> budget;
  std::optional<double> budget_fraction;
  double delta = 0.05;
  std::vector<std::uint64_t> seeds;
  AgentConfig agent;
  std::optional<ObjectiveSpec> objective;
  std::filesystem::path output_dir;

  double budget_for(long T) const;
};

// Parse errors and semantic errors throw ConfigError as "<source>:<line>:<col>: msg".
ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::filesystem::path& base_dir,
                                         const std::string& source_name = "<config>");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct RunResult {
  RunTrace trace;
  double wall_seconds = 0.0;
};

// Exact benchmark for one horizon: OPT for knapsack algorithms, f* for cbwr.
struct Benchmark {
  long T = 0;
  double B = 0.0;
  double value = 0.0;
  MixedPolicy p_star;  // maximizer, played by the static-lp baseline
};

Benchmark compute_benchmark(const ExperimentConfig& config, long T);

// One replica. The environment stream and the agent draw from independent
// streams derived from the seed. Refused configurations yield a trace with
// refused set and no rows.
RunResult run_single(const ExperimentConfig& config, const Benchmark& bench, std::uint64_t seed);

// Rows where cumulative consumption reached B but the run went on, or the
// abort flag disagrees with the final row.
int budget_safety_violations(const RunTrace& trace);

struct HorizonSummary {
  std::string algorithm;
  long T = 0;
  double B = 0.0;
  double opt = 0.0;
  int runs = 0;
  int refused = 0;
  int aborted_early = 0;  // aborted with fewer than T rounds played
  int truncated = 0;
  double abort_rate = 0.0;
  double mean_reward = 0.0;
  double sd_reward = 0.0;
  double mean_regret = 0.0;
  double sd_regret = 0.0;
  double mean_regret_per_round = 0.0;
  double mean_avg_regret = 0.0;
  double sd_avg_regret = 0.0;
  double mean_oracle_calls = 0.0;
  double sd_oracle_calls = 0.0;
  double mean_Z = 0.0;
  long op_solves = 0;
  long op_violations = 0;
  long cd_bound_violations = 0;
  long safety_violations = 0;
  int out_of_regime = 0;
};

// Groups by (algorithm, T, B), ordered by algorithm then T; runs within a
// group are aggregated in seed order.
std::vector<HorizonSummary> summarize_traces(std::vector<const RunTrace*> traces);

struct RunOptions {
  std::uint64_t seed_offset = 0;
  int jobs = 1;
  bool write_files = true;
  std::optional<std::filesystem::path> out_dir;  // overrides the config
};

struct ExperimentOutput {
  std::vector<RunResult> runs;  // horizon-major, seeds in config order
  std::vector<HorizonSummary> summary;
  std::filesystem::path out_dir;
};

// Writes trace_<algorithm>_T<T>_s<seed>.csv per replica, summary.csv and
// timing.csv (wall times, kept out of summary.csv so reruns are
// byte-identical).
ExperimentOutput run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

std::string trace_file_name(const RunTerminal& term);
// Verifies the prefix-sum columns and the regret identity before writing.
void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace);
RunTrace read_trace_csv(const std::filesystem::path& path);

void write_summary_csv(const std::filesystem::path& path, const std::vector<HorizonSummary>& rows);
std::vector<HorizonSummary> read_summary_csv(const std::filesystem::path& path);

// Reads every trace_*.csv in dir; throws ConfigError when there are none.
std::vector<HorizonSummary> summarize_dir(const std::filesystem::path& dir);

}  // namespace cbwk
