#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cbwk/harness.hpp"

namespace cbwk {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string measured;
  std::string threshold;
  std::string detail;
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;

  bool all_passed() const;
  // One "PASS|FAIL <id> <name>: measured ...; need ..." line per criterion.
  std::string to_text() const;
};

// Checks that do not go through experiment summaries.
struct LiveChecks {
  int z_replications = 0;
  int z_in_bracket = 0;
  double z_min = 0.0, z_max = 0.0;
  double bracket_lo = 0.0, bracket_hi = 0.0;

  int estimator_checks = 0;
  int estimator_exceed = 0;
  double estimator_max_sigma = 0.0;  // largest |error| / SE seen

  int lemma1_checks = 0;
  int lemma1_violations = 0;
  double lemma1_worst_excess = 0.0;

  int oracle_fixtures = 0;
  int oracle_mismatches = 0;
  double oracle_worst_gap = 0.0;
};

struct AcceptanceData {
  std::vector<HorizonSummary> cbwk;     // scaling horizons
  std::vector<HorizonSummary> uniform;  // baseline
  std::vector<HorizonSummary> cbwr;     // scaling horizons
  std::vector<HorizonSummary> safety;   // cbwk at the safety horizon
  long safety_horizon = 0;
  int safety_seeds = 0;
  long baseline_horizon = 0;
  std::optional<LiveChecks> live;
};

// Evaluates the thresholds. Criteria without data fail with a note.
AcceptanceReport check_acceptance(const AcceptanceData& data);

struct AcceptanceOptions {
  std::filesystem::path cbwk_config;
  std::filesystem::path uniform_config;
  std::filesystem::path cbwr_config;
  long safety_horizon = 32768;
  int safety_seeds = 100;
  long baseline_horizon = 32768;
  int z_replications = 200;
  int estimator_pairs = 20;
  long estimator_samples = 100000;
  int lemma1_instances = 50;
  int lemma1_pairs = 10;
  int oracle_fixtures = 30;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::optional<std::filesystem::path> out_dir;  // write traces and summaries here
};

AcceptanceOptions load_acceptance_options(const std::filesystem::path& path);

LiveChecks run_live_checks(const AcceptanceOptions& options, const ExperimentConfig& reference);
AcceptanceData collect_acceptance_data(const AcceptanceOptions& options);

// Dense grid search over the simplex of n <= 4 weights, refined around the
// incumbent. Independent reference for the mixed-policy solvers.
double grid_search_max(int n, const std::function<double(std::span<const double>)>& objective);

}  // namespace cbwk
