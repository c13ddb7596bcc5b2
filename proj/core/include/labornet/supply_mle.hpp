#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "labornet/equilibrium.hpp"
#include "labornet/panel.hpp"

namespace labornet::mle {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Labor-supply parameters in earnings space: phi = psi * w. Utility of
// market g for type i is (phi(i, g) + xi(g)) / nu; non-employment is 0.
struct SupplyParameters {
  Eigen::MatrixXd phi;    // I x Gamma
  Eigen::VectorXd xi;     // Gamma
  double nu = 1.0;
  Eigen::MatrixXd sigma;  // I x Gamma sd of log earnings
  double lambda = 0.0;
};

// Counts and log-earnings moments that determine the panel likelihood.
struct PanelStatistics {
  std::uint32_t types = 0;
  std::uint32_t markets = 0;
  std::size_t workers = 0;
  std::uint32_t periods = 0;
  Eigen::MatrixXd choices;          // I x (Gamma + 1), separation periods only
  Eigen::MatrixXd earnings_count;   // I x Gamma, all employed periods
  Eigen::MatrixXd log_mean;         // mean ln omega per cell
  Eigen::MatrixXd log_centered_ss;  // sum (ln omega - mean)^2 per cell
  double log_earnings_total = 0.0;
  double later_separations = 0.0;   // sum of c over t >= 2
  Eigen::VectorXd type_workers;
};

PanelStatistics summarize_panel(const WorkerPanel& panel);

// Cells with no choices and no earnings.
BoolMatrix zero_cells(const PanelStatistics& stats);

// sum c ln P(gamma | type) + sum over employed periods of the log-normal
// log density of omega with median phi and sd sigma.
double panel_log_likelihood(const WorkerPanel& panel, const SupplyParameters& theta);
double panel_log_likelihood(const PanelStatistics& stats, const SupplyParameters& theta);

// Gradient with respect to (ln phi, xi, ln nu, ln sigma).
struct Score {
  Eigen::MatrixXd log_phi;
  Eigen::VectorXd xi;
  double log_nu = 0.0;
  Eigen::MatrixXd log_sigma;
};

Score panel_score(const PanelStatistics& stats, const SupplyParameters& theta);

// Log-likelihood plus pseudo_count * ln P(gamma | type) for every zero cell;
// keeps phi finite where a cell never matches.
double regularized_log_likelihood(const PanelStatistics& stats, const SupplyParameters& theta,
                                  double pseudo_count);
Score regularized_score(const PanelStatistics& stats, const SupplyParameters& theta,
                        double pseudo_count);

// Share of separations among periods t >= 2.
double estimate_lambda(const WorkerPanel& panel);

struct SigmaEstimate {
  Eigen::MatrixXd sigma;
  BoolMatrix pooled;  // cells with fewer than 2 earnings observations
  double pooled_sigma = 0.0;
};

// Root mean squared log residual per cell; sparse cells take the pooled value
// over every employed observation.
SigmaEstimate estimate_sigma(const WorkerPanel& panel, const Eigen::MatrixXd& phi);
SigmaEstimate estimate_sigma(const PanelStatistics& stats, const Eigen::MatrixXd& phi);

struct FitConfig {
  double pseudo_count = 1e-6;
  double grad_tol = 1e-6;
  std::uint32_t max_iter = 5000;
  std::uint32_t max_outer = 50;
  double outer_tol = 1e-10;
  std::uint32_t restarts = 3;
  double jitter = 0.1;
  std::uint64_t seed = 1;
  double nu_min = 1e-4;
  double nu_max = 1e6;
  // Floor on sigma and relative floor on phi (times the largest cell median).
  double sigma_floor = 1e-6;
  double phi_floor = 1e-10;
  bool sensitivity_check = true;
  std::optional<SupplyParameters> initial;
};

struct FitDiagnostics {
  double log_likelihood = 0.0;
  double objective = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  bool nu_at_bound = false;
  std::uint32_t best_restart = 0;
  std::uint32_t outer_iterations = 0;
  std::vector<double> outer_trace;  // objective after each outer step of the best restart
  BoolMatrix zero_cells;
  BoolMatrix pooled_sigma;
  BoolMatrix sensitive_cells;  // phi moves more than 1% when pseudo_count halves
};

struct EstimatedParameters {
  SupplyParameters theta;
  Eigen::VectorXd masses;  // workers per type / workers
  double k = 1.0;
  FitDiagnostics diagnostics;
};

// Quasi-Newton ascent over (ln phi, xi, ln nu) with ln nu boxed, alternating
// with the closed-form sigma; lambda is closed form.
EstimatedParameters fit_supply_parameters(const WorkerPanel& panel, const FitConfig& config = {});

struct Normalized {
  Eigen::MatrixXd psi;
  Eigen::VectorXd w;
};

// w(g) = sum_i m_i phi(i, g) / k and psi = phi / w, so sum_i m_i psi(i, g) = k.
Normalized normalize_psi(const Eigen::MatrixXd& phi, const Eigen::VectorXd& masses, double k);

struct KSelection {
  double k = 0.0;
  std::vector<double> grid;
  std::vector<std::optional<double>> employment_rate;  // missing where the solve failed
};

// Grid point whose re-solved model employment rate is closest to the observed
// rate; ties go to the smaller k.
KSelection choose_k(std::span<const double> grid, double observed_rate,
                    const EstimatedParameters& estimate, const roy::Technology& tech,
                    const roy::DemandSide& demand, const roy::SolverConfig& solver = {});

double employment_rate(const WorkerPanel& panel);

struct SkillCorrelation {
  Eigen::MatrixXd correlation;  // NaN where a row has zero variance
  std::vector<double> bin_edges;
  std::vector<std::size_t> bin_counts;
  double offdiag_mean = 0.0;
  double offdiag_sd = 0.0;
  std::size_t pairs = 0;
};

// Pearson correlation between rows of psi, with a histogram of the defined
// off-diagonal entries over [-1, 1].
SkillCorrelation skill_correlation_matrix(const Eigen::MatrixXd& psi, std::size_t bins = 20);

std::string estimated_parameters_json(const EstimatedParameters& estimate);

}  // namespace labornet::mle
