#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "labornet/bundle.hpp"
#include "labornet/equilibrium.hpp"
#include "labornet/graph.hpp"
#include "labornet/panel.hpp"
#include "labornet/rng.hpp"

namespace labornet::shock {

// Sector-level change to the demand shifters. Sectors are 0-based.
struct ShockSpec {
  enum class Kind { multiply, set };
  Kind kind = Kind::multiply;
  std::map<std::uint32_t, double> targets;
  std::string label;

  void validate() const;
};

// Shifters with the targeted entries multiplied or replaced; no renormalization.
roy::DemandSide apply_shock(const roy::DemandSide& demand, const ShockSpec& shock);

// Parses "multiply:0=0.5,3=2" or "set:1=0.2". The label defaults to the text.
ShockSpec parse_shock(const std::string& text);
std::string format_shock(const ShockSpec& shock);

// Jobs of every market, each with a sector and a hiring weight.
struct JobUniverse {
  std::vector<std::uint32_t> market;  // 1-based market of each job
  std::vector<std::uint32_t> sector;
  std::vector<double> weight;
  std::vector<std::vector<std::uint32_t>> jobs_of_market;  // index g - 1

  std::size_t size() const { return market.size(); }
};

// jobs_per_market jobs per market with log-normal weights of the given sd and
// sectors drawn from row g of sector_given_market (Gamma x S).
JobUniverse make_job_universe(const Eigen::MatrixXd& sector_given_market, std::uint32_t jobs_per_market,
                              double weight_sd, Rng& rng);

// Row-normalized labor(g, s); rows without labor fall back to uniform.
Eigen::MatrixXd sector_shares(const Eigen::MatrixXd& labor);

struct SimulationConfig {
  std::size_t workers = 1000;
  std::uint32_t periods = 1;
  double lambda = 0.3;
  std::uint64_t seed = 1;
};

// Worker types drawn from the normalized masses.
std::vector<std::uint32_t> draw_types(const Eigen::VectorXd& masses, std::size_t workers, Rng& rng);

// Draws the t = 1 choice for every worker and re-draws on separations
// (probability lambda) afterwards. Employed earnings are psi * w * exp(e),
// e ~ N(0, sigma). With a job universe the panel carries "job" and "sector"
// label columns; a kept match keeps its job. Types default to draws from
// stream (seed, "shock-lab", "types"). Separations, choices and hires use the
// per-worker stream (seed, "shock-lab", "choices", worker); earnings noise uses
// (seed, "shock-lab", stream). Panels that differ only in wages or stream
// therefore share the worker histories wherever the choice odds agree.
WorkerPanel simulate_panel(const roy::LaborSupplyParameters& supply, const Eigen::MatrixXd& sigma,
                           const Eigen::VectorXd& w, const SimulationConfig& config,
                           const JobUniverse* jobs = nullptr,
                           const std::vector<std::uint32_t>* types = nullptr,
                           const std::string& stream = "panel");

struct ExperimentConfig {
  SimulationConfig simulation;
  roy::SolverConfig solver;
  std::uint32_t pre_periods = 1;
  std::uint32_t post_periods = 1;
  bool paired = true;  // same workers and types pre and post
  std::uint32_t jobs_per_market = 20;
  double job_weight_sd = 0.5;
  // Without a bundle matrix, sectors follow the pre-shock labor allocation
  // when set and are uniform otherwise.
  bool sectors_from_equilibrium = true;
};

struct ShockExperiment {
  ModelBundle bundle;
  ShockSpec shock;
  roy::DemandSide post_demand;
  roy::EquilibriumState pre;
  roy::EquilibriumState post;
  Eigen::MatrixXd sector_given_market;
  JobUniverse jobs;
  WorkerPanel pre_panel;
  WorkerPanel post_panel;
  std::uint64_t seed = 0;
  bool paired = true;

  // Workers of both panels (post workers follow pre workers when unpaired)
  // against the job universe, labeled by true type and market - 1. Group
  // counts come from the panels and the wage vector.
  graph::Partition true_partition() const;
};

// Throws NumericalError when either equilibrium fails to converge.
ShockExperiment run_shock_experiment(const ModelBundle& bundle, const ShockSpec& shock,
                                     const ExperimentConfig& config);

struct SweepEntry {
  ShockSpec shock;
  std::optional<ShockExperiment> experiment;
  std::string error;
};

// One experiment per shock in parallel; experiment k uses the seed
// derive_seed(config seed, "shock", "experiment", k). Failures are recorded
// per entry.
std::vector<SweepEntry> shock_sweep(const ModelBundle& bundle, const std::vector<ShockSpec>& shocks,
                                    const ExperimentConfig& config);

// Multiply-by-factor shocks for every sector and factor, sector-major.
std::vector<ShockSpec> sector_shock_grid(std::uint32_t sectors, const std::vector<double>& factors);

std::string experiment_manifest_json(const ShockExperiment& experiment);

// Synthetic economy with clustered comparative advantage used by the
// acceptance checks and benchmarks.
struct EconomySpec {
  std::uint32_t types = 30;
  std::uint32_t markets = 12;
  std::uint32_t sectors = 4;
  double nu = 2.0;
  double eta = 2.0;
  double labor_share = 0.66;
  double skill_sd = 0.5;       // log sd of type-market productivity
  double affinity = 1.0;       // extra log productivity in a type's home markets
  double sigma = 0.1;          // log earnings noise
  std::uint64_t seed = 1;
};

ModelBundle synthetic_economy(const EconomySpec& spec);

}  // namespace labornet::shock
