#include <cmath>
#include <limits>

#include "json_util.hpp"
#include "labornet/errors.hpp"
#include "labornet/log.hpp"
#include "labornet/supply_mle.hpp"

namespace labornet::mle {

Normalized normalize_psi(const Eigen::MatrixXd& phi, const Eigen::VectorXd& masses, double k) {
  if (masses.size() != phi.rows()) throw InputError("masses do not match phi rows");
  if (!(k > 0.0)) throw InputError("k must be positive");
  if ((phi.array() < 0.0).any()) throw InputError("phi must be non-negative");
  Normalized out;
  out.w = (masses.transpose() * phi).transpose() / k;
  out.psi.resize(phi.rows(), phi.cols());
  for (Eigen::Index g = 0; g < phi.cols(); ++g) {
    if (!(out.w(g) > 0.0)) throw InputError("market " + std::to_string(g + 1) + " has zero mean earnings");
    out.psi.col(g) = phi.col(g) / out.w(g);
  }
  return out;
}

double employment_rate(const WorkerPanel& panel) {
  const auto& obs = panel.observations();
  if (obs.empty()) throw InputError("empty panel");
  double employed = 0.0;
  for (const auto& o : obs) employed += o.employed() ? 1.0 : 0.0;
  return employed / static_cast<double>(obs.size());
}

KSelection choose_k(std::span<const double> grid, double observed_rate, const EstimatedParameters& estimate,
                    const roy::Technology& tech, const roy::DemandSide& demand,
                    const roy::SolverConfig& solver) {
  if (grid.empty()) throw InputError("empty k grid");
  KSelection out;
  out.grid.assign(grid.begin(), grid.end());
  double best_gap = std::numeric_limits<double>::infinity();
  for (const double k : grid) {
    if (!(k > 0.0)) throw InputError("k grid values must be positive");
    std::optional<double> rate;
    try {
      const Normalized norm = normalize_psi(estimate.theta.phi, estimate.masses, k);
      roy::LaborSupplyParameters params{norm.psi, estimate.theta.xi, estimate.theta.nu, estimate.masses};
      const auto state = roy::solve_equilibrium(params, tech, demand, solver);
      if (state.converged) {
        rate = state.employment_rate(estimate.masses);
      } else {
        log::warn("equilibrium did not converge at k = " + std::to_string(k));
      }
    } catch (const NumericalError& e) {
      log::warn("equilibrium failed at k = " + std::to_string(k) + ": " + e.what());
    }
    out.employment_rate.push_back(rate);
    if (rate) {
      const double gap = std::abs(*rate - observed_rate);
      if (gap < best_gap) {
        best_gap = gap;
        out.k = k;
      }
    }
  }
  if (!std::isfinite(best_gap)) throw NumericalError("equilibrium failed at every k in the grid");
  return out;
}

SkillCorrelation skill_correlation_matrix(const Eigen::MatrixXd& psi, std::size_t bins) {
  const Eigen::Index types = psi.rows();
  const Eigen::Index markets = psi.cols();
  if (types < 2 || markets < 2) throw InputError("skill correlation needs at least two types and two markets");
  if (bins == 0) throw InputError("histogram needs at least one bin");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd centered = psi.colwise() - psi.rowwise().mean();
  Eigen::VectorXd norms = centered.rowwise().norm();

  SkillCorrelation out;
  out.correlation = Eigen::MatrixXd::Constant(types, types, nan);
  out.bin_edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) out.bin_edges[b] = -1.0 + 2.0 * static_cast<double>(b) / static_cast<double>(bins);
  out.bin_counts.assign(bins, 0);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (Eigen::Index a = 0; a < types; ++a) {
    if (norms(a) == 0.0) continue;
    out.correlation(a, a) = 1.0;
    for (Eigen::Index b = a + 1; b < types; ++b) {
      if (norms(b) == 0.0) continue;
      const double r = std::clamp(centered.row(a).dot(centered.row(b)) / (norms(a) * norms(b)), -1.0, 1.0);
      out.correlation(a, b) = r;
      out.correlation(b, a) = r;
      auto bin = static_cast<std::size_t>((r + 1.0) / 2.0 * static_cast<double>(bins));
      out.bin_counts[std::min(bin, bins - 1)] += 1;
      sum += r;
      sum_sq += r * r;
      out.pairs += 1;
    }
  }
  if (out.pairs > 0) {
    const auto n = static_cast<double>(out.pairs);
    out.offdiag_mean = sum / n;
    out.offdiag_sd = std::sqrt(std::max(0.0, sum_sq / n - out.offdiag_mean * out.offdiag_mean));
  } else {
    out.offdiag_mean = nan;
    out.offdiag_sd = nan;
  }
  return out;
}

namespace {

detail::Json mask_json(const BoolMatrix& mask) {
  detail::Json out = detail::Json::array();
  for (Eigen::Index r = 0; r < mask.rows(); ++r) {
    detail::Json row = detail::Json::array();
    for (Eigen::Index c = 0; c < mask.cols(); ++c) row.push_back(mask(r, c) ? 1 : 0);
    out.push_back(row);
  }
  return out;
}

}  // namespace

std::string estimated_parameters_json(const EstimatedParameters& estimate) {
  using detail::Json;
  using detail::to_json;
  const auto& theta = estimate.theta;
  Json j;
  j["dimensions"] = {{"I", theta.phi.rows()}, {"Gamma", theta.phi.cols()}};
  j["phi"] = to_json(theta.phi);
  try {
    const Normalized norm = normalize_psi(theta.phi, estimate.masses, estimate.k);
    j["psi"] = to_json(norm.psi);
    j["w"] = to_json(norm.w);
  } catch (const InputError&) {
    j["psi"] = nullptr;
    j["w"] = nullptr;
  }
  j["xi"] = to_json(theta.xi);
  j["nu"] = theta.nu;
  j["sigma"] = to_json(theta.sigma);
  j["lambda"] = theta.lambda;
  j["m"] = to_json(estimate.masses);
  j["k"] = estimate.k;
  const auto& d = estimate.diagnostics;
  Json diag;
  diag["log_likelihood"] = d.log_likelihood;
  diag["objective"] = d.objective;
  diag["gradient_norm"] = d.gradient_norm;
  diag["converged"] = d.converged;
  diag["nu_at_bound"] = d.nu_at_bound;
  diag["best_restart"] = d.best_restart;
  diag["outer_iterations"] = d.outer_iterations;
  diag["outer_trace"] = d.outer_trace;
  diag["zero_cells"] = mask_json(d.zero_cells);
  diag["pooled_sigma"] = mask_json(d.pooled_sigma);
  diag["sensitive_cells"] = mask_json(d.sensitive_cells);
  j["diagnostics"] = diag;
  return j.dump(2) + "\n";
}

}  // namespace labornet::mle
