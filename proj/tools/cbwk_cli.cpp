#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cbwk/acceptance.hpp"
#include "cbwk/errors.hpp"
#include "cbwk/harness.hpp"

namespace {

void print_summary(const std::vector<cbwk::HorizonSummary>& rows) {
  std::printf("%-10s %7s %8s %5s %4s %6s %14s %12s %12s %10s %5s\n", "algorithm", "T", "B", "runs",
              "ref", "abort", "mean_reward", "mean_regret", "avg_regret", "oracle", "op_bad");
  for (const auto& s : rows)
    std::printf("%-10s %7ld %8.1f %5d %4d %6.3f %14.3f %12.3f %12.5f %10.1f %5ld\n",
                s.algorithm.c_str(), s.T, s.B, s.runs, s.refused, s.abort_rate, s.mean_reward,
                s.mean_regret, s.mean_avg_regret, s.mean_oracle_calls, s.op_violations);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual bandits with knapsacks: experiment runner"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::uint64_t seed_offset = 0;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "Run an experiment config, write traces and a summary");
  run->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed-offset", seed_offset, "Added to every seed");
  run->add_option("--out-dir", out_dir, "Output directory (overrides the config)");
  run->add_option("--jobs", jobs, "Parallel replicas")->check(CLI::PositiveNumber);

  std::string trace_dir;
  std::string summary_out;
  auto* summarize = app.add_subcommand("summarize", "Aggregate the trace files in a directory");
  summarize->add_option("--dir", trace_dir, "Directory with trace_*.csv")->required();
  summarize->add_option("--out", summary_out, "Write summary CSV here instead of printing a table");

  auto* check = app.add_subcommand("check", "Run the acceptance suite and report every criterion");
  check->add_option("--config", config, "Acceptance config (JSON)")->required()->check(CLI::ExistingFile);
  check->add_option("--out-dir", out_dir, "Also write traces and summaries here");
  check->add_option("--jobs", jobs, "Parallel replicas")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const cbwk::ExperimentConfig cfg = cbwk::load_experiment_config(config);
      cbwk::RunOptions opts;
      opts.seed_offset = seed_offset;
      opts.jobs = jobs;
      if (!out_dir.empty()) opts.out_dir = out_dir;
      const cbwk::ExperimentOutput out = cbwk::run_experiment(cfg, opts);
      print_summary(out.summary);
      std::printf("wrote %zu traces and summary.csv to %s\n", out.runs.size(),
                  out.out_dir.string().c_str());
      return 0;
    }
    if (*summarize) {
      const auto rows = cbwk::summarize_dir(trace_dir);
      if (summary_out.empty())
        print_summary(rows);
      else
        cbwk::write_summary_csv(summary_out, rows);
      return 0;
    }
    cbwk::AcceptanceOptions opts = cbwk::load_acceptance_options(config);
    opts.jobs = jobs;
    if (!out_dir.empty()) opts.out_dir = out_dir;
    const cbwk::AcceptanceReport rep = cbwk::check_acceptance(cbwk::collect_acceptance_data(opts));
    std::cout << rep.to_text();
    return rep.all_passed() ? 0 : 1;
  } catch (const cbwk::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return 3;
  }
}
