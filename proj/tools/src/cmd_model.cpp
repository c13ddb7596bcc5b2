#include <cmath>
#include <map>
#include <sstream>

#include "commands.hpp"
#include "labornet/bundle.hpp"
#include "labornet/csv.hpp"
#include "labornet/errors.hpp"
#include "labornet/supply_mle.hpp"

namespace labornet::cli {

using csv::format_double;

int cmd_solve(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
  const ModelBundle bundle = read_bundle(config.required("bundle"));
  roy::SolverConfig solver = solver_from(config);
  solver.record_trace = config.flag("trace");
  const auto state = roy::solve_equilibrium(bundle.supply, bundle.technology, bundle.demand, solver);
  write_text(out_dir / "equilibrium.json", equilibrium_json(state, solver.record_trace));
  log << "solve: " << (state.converged ? "converged" : "not converged") << " after " << state.iterations
      << " iterations\n";
  return state.converged ? kExitOk : kExitNumerical;
}

int cmd_estimate(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
  const WorkerPanel panel = load_panel(config.required("panel"));
  mle::FitConfig fit;
  fit.pseudo_count = config.number("pseudo_count");
  fit.grad_tol = config.number("grad_tol");
  fit.restarts = static_cast<std::uint32_t>(config.unsigned_int("restarts"));
  fit.jitter = config.number("jitter");
  fit.nu_min = config.number("nu_min");
  fit.nu_max = config.number("nu_max");
  fit.max_outer = static_cast<std::uint32_t>(config.unsigned_int("max_outer"));
  fit.seed = config.unsigned_int("seed");
  mle::EstimatedParameters est = mle::fit_supply_parameters(panel, fit);
  est.k = config.number("k");

  const auto grid = config.numbers("k_grid");
  if (!grid.empty()) {
    const ModelBundle bundle = read_bundle(config.required("bundle"));
    const auto selection = mle::choose_k(grid, mle::employment_rate(panel), est, bundle.technology, bundle.demand,
                                         solver_from(config));
    est.k = selection.k;
    std::string rows = "k,employment_rate\n";
    for (std::size_t n = 0; n < selection.grid.size(); ++n) {
      const auto& rate = selection.employment_rate[n];
      rows += format_double(selection.grid[n]) + "," + (rate ? format_double(*rate) : std::string()) + "\n";
    }
    write_text(out_dir / "k_selection.csv", rows);
  }
  write_text(out_dir / "parameters.json", mle::estimated_parameters_json(est));

  if (est.theta.phi.rows() >= 2 && est.theta.phi.cols() >= 2) {
    const auto norm = mle::normalize_psi(est.theta.phi, est.masses, est.k);
    const auto corr =
        mle::skill_correlation_matrix(norm.psi, static_cast<std::size_t>(config.unsigned_int("correlation_bins")));
    std::string matrix;
    for (Eigen::Index a = 0; a < corr.correlation.rows(); ++a) {
      for (Eigen::Index b = 0; b < corr.correlation.cols(); ++b) {
        if (b > 0) matrix += ',';
        const double r = corr.correlation(a, b);
        if (std::isfinite(r)) matrix += format_double(r);
      }
      matrix += '\n';
    }
    write_text(out_dir / "skill_correlation.csv", matrix);
    std::string hist = "bin_low,bin_high,count\n";
    for (std::size_t b = 0; b < corr.bin_counts.size(); ++b) {
      hist += format_double(corr.bin_edges[b]) + "," + format_double(corr.bin_edges[b + 1]) + "," +
              std::to_string(corr.bin_counts[b]) + "\n";
    }
    write_text(out_dir / "skill_histogram.csv", hist);
  }
  log << "estimate: log-likelihood " << format_double(est.diagnostics.log_likelihood) << ", nu "
      << format_double(est.theta.nu) << (est.diagnostics.converged ? "" : " (not converged)") << "\n";
  return est.diagnostics.converged ? kExitOk : kExitNumerical;
}

int cmd_simulate(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
  const ModelBundle bundle = read_bundle(config.required("bundle"));
  const auto state = roy::solve_equilibrium(bundle.supply, bundle.technology, bundle.demand, solver_from(config));
  write_text(out_dir / "equilibrium.json", equilibrium_json(state, false));
  if (!state.converged) {
    log << "simulate: equilibrium did not converge\n";
    return kExitNumerical;
  }
  shock::SimulationConfig sim;
  sim.workers = config.unsigned_int("workers");
  sim.periods = static_cast<std::uint32_t>(config.unsigned_int("periods"));
  sim.lambda = config.number("lambda");
  sim.seed = config.unsigned_int("seed");
  const auto jobs_per_market = static_cast<std::uint32_t>(config.unsigned_int("jobs_per_market"));
  const Eigen::MatrixXd sigma =
      bundle.sigma ? *bundle.sigma : Eigen::MatrixXd::Zero(bundle.supply.types(), bundle.supply.markets());

  std::optional<shock::JobUniverse> jobs;
  if (jobs_per_market > 0) {
    Eigen::MatrixXd sectors;
    if (bundle.sector_given_market) {
      sectors = *bundle.sector_given_market;
    } else if (config.flag("sectors_from_equilibrium")) {
      sectors = shock::sector_shares(state.labor);
    } else {
      sectors = Eigen::MatrixXd::Constant(bundle.supply.markets(), bundle.technology.sectors(),
                                          1.0 / static_cast<double>(bundle.technology.sectors()));
    }
    Rng rng = make_stream(sim.seed, "shock-lab", "jobs");
    jobs = shock::make_job_universe(sectors, jobs_per_market, config.number("job_weight_sd"), rng);
  }
  const WorkerPanel panel = shock::simulate_panel(bundle.supply, sigma, state.w, sim, jobs ? &*jobs : nullptr);
  std::ostringstream panel_csv;
  write_panel_csv(panel, panel_csv);
  write_text(out_dir / "panel.csv", panel_csv.str());

  if (jobs) {
    // One edge per match spell.
    const auto job_of = integer_label(panel, "job");
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> edges;
    const auto& obs = panel.observations();
    for (std::size_t k = 0; k < obs.size(); ++k) {
      if (obs[k].separated && obs[k].employed()) edges[{obs[k].worker, job_of[k]}] += 1;
    }
    std::string edge_csv = "worker_id,job_id,count\n";
    for (const auto& [key, count] : edges) {
      edge_csv += panel.worker_ids()[key.first] + "," + std::to_string(key.second) + "," + std::to_string(count) + "\n";
    }
    write_text(out_dir / "edges.csv", edge_csv);
    std::string truth = "node_kind,node_id,group\n";
    for (std::size_t n = 0; n < panel.num_workers(); ++n) {
      truth += "worker," + panel.worker_ids()[n] + "," + std::to_string(panel.at(static_cast<std::uint32_t>(n), 1).type) + "\n";
    }
    for (std::size_t j = 0; j < jobs->size(); ++j) {
      truth += "job," + std::to_string(j) + "," + std::to_string(jobs->market[j] - 1) + "\n";
    }
    write_text(out_dir / "truth_partition.csv", truth);
  }
  log << "simulate: " << panel.num_workers() << " workers x " << panel.num_periods() << " periods\n";
  return kExitOk;
}

}  // namespace labornet::cli
