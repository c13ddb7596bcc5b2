#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "labornet/equilibrium.hpp"

namespace labornet {

// Everything needed to solve and simulate one economy.
struct ModelBundle {
  roy::LaborSupplyParameters supply;
  roy::Technology technology;
  roy::DemandSide demand;
  // Mean efficiency units per market, sum_i m_i psi_ig.
  double k = 1.0;
  // I x Gamma standard deviation of log earnings noise.
  std::optional<Eigen::MatrixXd> sigma;
  // Gamma x S sector probabilities for a job in each market.
  std::optional<Eigen::MatrixXd> sector_given_market;

  void validate() const;
};

// JSON keys: dimensions {I, Gamma, S}, psi, xi, nu, m, beta, a, eta, k and
// optionally sigma and sector_given_market. Matrices are arrays of rows.
ModelBundle parse_bundle(std::string_view json_text);
ModelBundle read_bundle(const std::filesystem::path& path);
std::string bundle_json(const ModelBundle& bundle);

std::string equilibrium_json(const roy::EquilibriumState& state, bool include_trace);

}  // namespace labornet
