#include <cmath>
#include <string>

#include "labornet/equilibrium.hpp"
#include "labornet/errors.hpp"

namespace labornet::roy {

Technology calibrate_betas(const WorkerPanel& panel, double labor_share,
                           const std::string& sector_column, std::optional<std::uint32_t> sectors) {
  if (!(labor_share > 0.0 && labor_share < 1.0)) throw InputError("labor share must lie in (0, 1)");
  const auto labels = integer_label(panel, sector_column);
  const auto& obs = panel.observations();
  std::uint32_t S = sectors.value_or(0);
  if (!sectors) {
    for (std::size_t k = 0; k < obs.size(); ++k) {
      if (obs[k].employed() && labels[k] != UINT32_MAX) S = std::max(S, labels[k] + 1);
    }
  }
  const auto G = panel.num_markets();
  if (S == 0 || G == 0) throw InputError("panel has no employed observations with sectors");

  Eigen::MatrixXd bill = Eigen::MatrixXd::Zero(G, S);
  for (std::size_t k = 0; k < obs.size(); ++k) {
    if (!obs[k].employed()) continue;
    if (labels[k] == UINT32_MAX) throw InputError("employed observation without a sector label");
    if (labels[k] >= S) throw InputError("sector label out of range");
    bill(obs[k].market - 1, labels[k]) += obs[k].earnings;
  }
  Technology tech{Eigen::MatrixXd::Zero(G, S)};
  for (std::uint32_t s = 0; s < S; ++s) {
    const double total = bill.col(s).sum();
    if (!(total > 0.0)) throw InputError("sector " + std::to_string(s) + " has no wage bill");
    tech.beta.col(s) = labor_share * bill.col(s) / total;
  }
  return tech;
}

Eigen::VectorXd calibrate_demand_shifters(const Eigen::VectorXd& targets, OutputTarget kind,
                                          const Eigen::VectorXd& p, double eta) {
  if (targets.size() != p.size() || targets.size() == 0) {
    throw InputError("targets and prices must have the same non-zero length");
  }
  if (!((targets.array() > 0.0).all()) || !((p.array() > 0.0).all())) {
    throw InputError("targets and prices must be positive");
  }
  // y_s is proportional to a_s p_s^-eta; the value p_s y_s to a_s p_s^(1-eta).
  const double power = kind == OutputTarget::quantity ? eta : eta - 1.0;
  Eigen::VectorXd a(targets.size());
  for (Eigen::Index s = 0; s < a.size(); ++s) a(s) = targets(s) * std::pow(p(s), power);
  return a / a.sum();
}

}  // namespace labornet::roy
