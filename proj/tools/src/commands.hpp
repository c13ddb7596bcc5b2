#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "labornet_cli/cli.hpp"
#include "labornet/metrics.hpp"
#include "labornet/shock_lab.hpp"

namespace labornet::cli {

struct Command {
  std::string name;
  std::string summary;
  std::vector<KeySpec> keys;  // without the global keys
  int (*run)(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);
};

const std::vector<Command>& commands();

// Global keys shared by every subcommand.
std::vector<KeySpec> global_keys();

int cmd_cluster(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_solve(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_estimate(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_simulate(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_shock(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_sweep(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_analyze(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

// Shared helpers.
void write_text(const std::filesystem::path& path, const std::string& text);
roy::SolverConfig solver_from(const RunConfig& config);
shock::ExperimentConfig experiment_from(const RunConfig& config);

std::string regression_header();
std::string regression_row(const std::string& label, const metrics::BartikAnalysis& analysis);

// Classes of both panels under a partition of the experiment's nodes.
metrics::Classification classify(const shock::ShockExperiment& ex, const graph::Partition& partition);

// Regression rows for the true labels, worker type by job sector, and a
// 50%/50% misclassified partition drawn from (seed, "cli", "misclassify").
std::string experiment_regressions(const shock::ShockExperiment& ex, std::uint64_t seed);

// Writes manifest.json, pre_panel.csv, post_panel.csv and jobs.csv.
void write_experiment(const shock::ShockExperiment& ex, const std::filesystem::path& dir, bool panels);
shock::ShockExperiment read_experiment(const std::filesystem::path& dir);

}  // namespace labornet::cli
