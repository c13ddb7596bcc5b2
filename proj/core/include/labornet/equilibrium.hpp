#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "labornet/panel.hpp"

namespace labornet::roy {

// Market choice primitives. Column 0 of choice matrices is non-employment,
// whose utility is fixed at 0; market g occupies column g + 1.
struct LaborSupplyParameters {
  Eigen::MatrixXd psi;     // I x Gamma efficiency units
  Eigen::VectorXd xi;      // Gamma amenities
  double nu = 1.0;         // preference-shock scale
  Eigen::VectorXd masses;  // I type masses

  Eigen::Index types() const { return psi.rows(); }
  Eigen::Index markets() const { return psi.cols(); }
  void validate() const;
};

// Gamma x S output elasticities; column sums are the labor shares.
struct Technology {
  Eigen::MatrixXd beta;

  Eigen::Index markets() const { return beta.rows(); }
  Eigen::Index sectors() const { return beta.cols(); }
  Eigen::VectorXd labor_shares() const { return beta.colwise().sum().transpose(); }
  void validate() const;
};

struct DemandSide {
  Eigen::VectorXd shifters;
  double eta = 2.0;

  void validate() const;
};

// I x (Gamma + 1) logit probabilities with utilities (psi w + xi) / nu.
Eigen::MatrixXd choice_probabilities(const LaborSupplyParameters& params, const Eigen::VectorXd& w);

// Efficiency units offered to each market.
Eigen::VectorXd labor_supply(const LaborSupplyParameters& params, const Eigen::VectorXd& w);
Eigen::VectorXd labor_supply(const LaborSupplyParameters& params, const Eigen::MatrixXd& choices);

// Gamma x S profit-maximizing labor input of each sector's firm.
Eigen::MatrixXd labor_demand(const Eigen::VectorXd& p, const Eigen::VectorXd& w, const Technology& tech);

// y_s = prod_g labor(g, s)^beta(g, s) with 0^0 = 1.
Eigen::VectorXd product_supply(const Eigen::MatrixXd& labor, const Technology& tech);

// CES demand a_s Y / (p_s^eta sum_s' a_s' p_s'^(1 - eta)).
Eigen::VectorXd product_demand(const Eigen::VectorXd& p, const DemandSide& demand, double income);

struct SolverConfig {
  double rho = 0.1;
  double tol = 1e-8;
  std::uint32_t max_iter = 50000;
  double rho_decay = 0.5;
  double rho_min = 1e-6;
  double gap_floor = 1e-12;
  // |log excess demand| is clipped here before the rho step.
  double max_log_gap = 10.0;
  std::optional<Eigen::VectorXd> w0;  // default 1 / (masses . psi_g)
  std::optional<Eigen::VectorXd> p0;
  bool record_trace = false;
};

struct TracePoint {
  std::uint32_t iteration = 0;
  double labor_gap = 0.0;
  double goods_gap = 0.0;
  double rho = 0.0;
};

struct EquilibriumState {
  Eigen::VectorXd w;
  Eigen::VectorXd p;
  Eigen::MatrixXd choices;      // I x (Gamma + 1)
  Eigen::VectorXd labor_supply;  // Gamma
  Eigen::MatrixXd labor;         // Gamma x S demand
  Eigen::VectorXd y_supply;
  Eigen::VectorXd y_demand;
  double income = 0.0;     // sum p y_supply
  double profits = 0.0;    // sum p y_supply - sum_g w_g labor demand
  double wage_bill = 0.0;  // sum_g w_g labor supply
  double labor_gap = 0.0;
  double goods_gap = 0.0;
  std::uint32_t iterations = 0;
  bool converged = false;
  double final_rho = 0.0;
  std::vector<TracePoint> trace;

  // |Y - W - Pi| / Y.
  double walras_residual() const;
  // sum_i m_i (1 - P_i[0]) / sum_i m_i.
  double employment_rate(const Eigen::VectorXd& masses) const;
};

// Damped multiplicative tatonnement on wages and prices. Shifters are used
// relative to their sum and prices are rescaled every iteration so the CES
// price index equals 1. Returns the lowest-residual state when max_iter is
// reached (converged = false). Throws NumericalError naming the market or
// sector that produced a non-finite value.
EquilibriumState solve_equilibrium(const LaborSupplyParameters& params, const Technology& tech,
                                   const DemandSide& demand, const SolverConfig& config = {});

// beta(g, s) = labor_share * wage bill of market g in sector s / wage bill of
// sector s. Sector labels are 0-based integers in the named column.
Technology calibrate_betas(const WorkerPanel& panel, double labor_share = 0.66,
                           const std::string& sector_column = "sector",
                           std::optional<std::uint32_t> sectors = std::nullopt);

enum class OutputTarget { quantity, value_share };

// Shifters reproducing the target outputs (or output value shares) at prices
// p, normalized to sum to 1.
Eigen::VectorXd calibrate_demand_shifters(const Eigen::VectorXd& targets, OutputTarget kind,
                                          const Eigen::VectorXd& p, double eta);

}  // namespace labornet::roy
