#include <cmath>
#include <numbers>

#include "labornet/errors.hpp"
#include "labornet/supply_mle.hpp"

namespace labornet::mle {

namespace {

const double kHalfLogTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);

void check_shapes(const PanelStatistics& stats, const SupplyParameters& theta) {
  const auto types = static_cast<Eigen::Index>(stats.types);
  const auto markets = static_cast<Eigen::Index>(stats.markets);
  if (theta.phi.rows() != types || theta.phi.cols() != markets || theta.xi.size() != markets ||
      theta.sigma.rows() != types || theta.sigma.cols() != markets) {
    throw InputError("parameter dimensions do not match the panel");
  }
  if (!(theta.nu > 0.0) || !std::isfinite(theta.nu)) throw InputError("nu must be positive and finite");
}

// I x (Gamma + 1) logit probabilities in log form plus utilities.
struct Logit {
  Eigen::MatrixXd utility;   // I x Gamma
  Eigen::MatrixXd log_prob;  // I x (Gamma + 1)
  Eigen::MatrixXd prob;
};

Logit logit(const SupplyParameters& theta) {
  const Eigen::Index types = theta.phi.rows();
  const Eigen::Index markets = theta.phi.cols();
  Logit out;
  out.utility.resize(types, markets);
  out.log_prob.resize(types, markets + 1);
  out.prob.resize(types, markets + 1);
  for (Eigen::Index i = 0; i < types; ++i) {
    double top = 0.0;
    for (Eigen::Index g = 0; g < markets; ++g) {
      const double u = (theta.phi(i, g) + theta.xi(g)) / theta.nu;
      if (!std::isfinite(u)) throw NumericalError("non-finite utility");
      out.utility(i, g) = u;
      top = std::max(top, u);
    }
    double total = std::exp(-top);
    for (Eigen::Index g = 0; g < markets; ++g) total += std::exp(out.utility(i, g) - top);
    const double log_norm = top + std::log(total);
    out.log_prob(i, 0) = -log_norm;
    for (Eigen::Index g = 0; g < markets; ++g) out.log_prob(i, g + 1) = out.utility(i, g) - log_norm;
    out.prob.row(i) = out.log_prob.row(i).array().exp();
  }
  return out;
}

Eigen::MatrixXd augmented_choices(const PanelStatistics& stats, double pseudo_count) {
  Eigen::MatrixXd counts = stats.choices;
  if (pseudo_count == 0.0) return counts;
  const BoolMatrix zero = zero_cells(stats);
  for (Eigen::Index i = 0; i < zero.rows(); ++i) {
    for (Eigen::Index g = 0; g < zero.cols(); ++g) {
      if (zero(i, g)) counts(i, g + 1) += pseudo_count;
    }
  }
  return counts;
}

double likelihood(const PanelStatistics& stats, const SupplyParameters& theta, const Eigen::MatrixXd& counts) {
  check_shapes(stats, theta);
  const Logit lg = logit(theta);
  double choice = 0.0;
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    for (Eigen::Index g = 0; g < counts.cols(); ++g) {
      if (counts(i, g) > 0.0) choice += counts(i, g) * lg.log_prob(i, g);
    }
  }
  double earnings = -stats.log_earnings_total;
  for (Eigen::Index i = 0; i < theta.phi.rows(); ++i) {
    for (Eigen::Index g = 0; g < theta.phi.cols(); ++g) {
      const double m = stats.earnings_count(i, g);
      if (m == 0.0) continue;
      const double sigma = theta.sigma(i, g);
      const double gap = stats.log_mean(i, g) - std::log(theta.phi(i, g));
      const double ss = stats.log_centered_ss(i, g) + m * gap * gap;
      const double quad = ss == 0.0 ? 0.0 : ss / (2.0 * sigma * sigma);
      earnings -= m * (std::log(sigma) + kHalfLogTwoPi) + quad;
    }
  }
  return choice + earnings;
}

Score score(const PanelStatistics& stats, const SupplyParameters& theta, const Eigen::MatrixXd& counts) {
  check_shapes(stats, theta);
  const Logit lg = logit(theta);
  const Eigen::Index types = theta.phi.rows();
  const Eigen::Index markets = theta.phi.cols();
  Score out;
  out.log_phi = Eigen::MatrixXd::Zero(types, markets);
  out.xi = Eigen::VectorXd::Zero(markets);
  out.log_sigma = Eigen::MatrixXd::Zero(types, markets);
  for (Eigen::Index i = 0; i < types; ++i) {
    const double row_total = counts.row(i).sum();
    for (Eigen::Index g = 0; g < markets; ++g) {
      const double residual = counts(i, g + 1) - row_total * lg.prob(i, g + 1);
      const double phi = theta.phi(i, g);
      double d_phi = phi * residual / theta.nu;
      out.xi(g) += residual / theta.nu;
      out.log_nu -= residual * lg.utility(i, g);
      const double m = stats.earnings_count(i, g);
      if (m > 0.0) {
        const double sigma2 = theta.sigma(i, g) * theta.sigma(i, g);
        const double gap = stats.log_mean(i, g) - std::log(phi);
        d_phi += m * gap / sigma2;
        const double ss = stats.log_centered_ss(i, g) + m * gap * gap;
        out.log_sigma(i, g) = -m + ss / sigma2;
      }
      out.log_phi(i, g) = d_phi;
    }
  }
  return out;
}

}  // namespace

PanelStatistics summarize_panel(const WorkerPanel& panel) {
  PanelStatistics s;
  s.types = panel.num_types();
  s.markets = panel.num_markets();
  s.workers = panel.num_workers();
  s.periods = panel.num_periods();
  const auto types = static_cast<Eigen::Index>(s.types);
  const auto markets = static_cast<Eigen::Index>(s.markets);
  s.choices = Eigen::MatrixXd::Zero(types, markets + 1);
  s.earnings_count = Eigen::MatrixXd::Zero(types, markets);
  s.log_mean = Eigen::MatrixXd::Zero(types, markets);
  s.log_centered_ss = Eigen::MatrixXd::Zero(types, markets);
  s.type_workers = Eigen::VectorXd::Zero(types);
  for (const auto& obs : panel.observations()) {
    const auto i = static_cast<Eigen::Index>(obs.type);
    if (obs.period == 1) s.type_workers(i) += 1.0;
    if (obs.separated) {
      s.choices(i, static_cast<Eigen::Index>(obs.market)) += 1.0;
      if (obs.period >= 2) s.later_separations += 1.0;
    }
    if (!obs.employed()) continue;
    if (!(obs.earnings > 0.0)) throw InputError("employed observation with non-positive earnings");
    const auto g = static_cast<Eigen::Index>(obs.market - 1);
    const double x = std::log(obs.earnings);
    s.log_earnings_total += x;
    // Welford update keeps the centered sum accurate for tight cells.
    const double m = s.earnings_count(i, g) += 1.0;
    const double delta = x - s.log_mean(i, g);
    s.log_mean(i, g) += delta / m;
    s.log_centered_ss(i, g) += delta * (x - s.log_mean(i, g));
  }
  return s;
}

BoolMatrix zero_cells(const PanelStatistics& stats) {
  BoolMatrix out(stats.earnings_count.rows(), stats.earnings_count.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index g = 0; g < out.cols(); ++g) {
      out(i, g) = stats.choices(i, g + 1) == 0.0 && stats.earnings_count(i, g) == 0.0;
    }
  }
  return out;
}

double panel_log_likelihood(const PanelStatistics& stats, const SupplyParameters& theta) {
  return likelihood(stats, theta, stats.choices);
}

double panel_log_likelihood(const WorkerPanel& panel, const SupplyParameters& theta) {
  return panel_log_likelihood(summarize_panel(panel), theta);
}

Score panel_score(const PanelStatistics& stats, const SupplyParameters& theta) {
  return score(stats, theta, stats.choices);
}

double regularized_log_likelihood(const PanelStatistics& stats, const SupplyParameters& theta,
                                  double pseudo_count) {
  return likelihood(stats, theta, augmented_choices(stats, pseudo_count));
}

Score regularized_score(const PanelStatistics& stats, const SupplyParameters& theta, double pseudo_count) {
  return score(stats, theta, augmented_choices(stats, pseudo_count));
}

double estimate_lambda(const WorkerPanel& panel) {
  if (panel.num_periods() < 2) throw InputError("separation rate needs at least two periods");
  double separations = 0.0;
  for (const auto& obs : panel.observations()) {
    if (obs.period >= 2 && obs.separated) separations += 1.0;
  }
  return separations / (static_cast<double>(panel.num_periods() - 1) * static_cast<double>(panel.num_workers()));
}

SigmaEstimate estimate_sigma(const PanelStatistics& stats, const Eigen::MatrixXd& phi) {
  const Eigen::Index types = stats.earnings_count.rows();
  const Eigen::Index markets = stats.earnings_count.cols();
  if (phi.rows() != types || phi.cols() != markets) throw InputError("phi dimensions do not match the panel");
  SigmaEstimate out;
  out.sigma = Eigen::MatrixXd::Zero(types, markets);
  out.pooled = BoolMatrix::Constant(types, markets, false);
  Eigen::MatrixXd ss = Eigen::MatrixXd::Zero(types, markets);
  double total_ss = 0.0;
  double total_m = 0.0;
  for (Eigen::Index i = 0; i < types; ++i) {
    for (Eigen::Index g = 0; g < markets; ++g) {
      const double m = stats.earnings_count(i, g);
      if (m == 0.0) continue;
      const double gap = stats.log_mean(i, g) - std::log(phi(i, g));
      ss(i, g) = stats.log_centered_ss(i, g) + m * gap * gap;
      total_ss += ss(i, g);
      total_m += m;
    }
  }
  out.pooled_sigma = total_m > 0.0 ? std::sqrt(total_ss / total_m) : 0.0;
  for (Eigen::Index i = 0; i < types; ++i) {
    for (Eigen::Index g = 0; g < markets; ++g) {
      const double m = stats.earnings_count(i, g);
      if (m < 2.0) {
        out.pooled(i, g) = true;
        out.sigma(i, g) = out.pooled_sigma;
      } else {
        out.sigma(i, g) = std::sqrt(ss(i, g) / m);
      }
    }
  }
  return out;
}

SigmaEstimate estimate_sigma(const WorkerPanel& panel, const Eigen::MatrixXd& phi) {
  return estimate_sigma(summarize_panel(panel), phi);
}

}  // namespace labornet::mle
