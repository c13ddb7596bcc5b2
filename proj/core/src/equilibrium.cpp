#include "labornet/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "labornet/errors.hpp"

namespace labornet::roy {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw InputError(message);
}

}  // namespace

void LaborSupplyParameters::validate() const {
  require(psi.rows() > 0 && psi.cols() > 0, "psi must be non-empty");
  require(xi.size() == psi.cols(), "xi length must equal the number of markets");
  require(masses.size() == psi.rows(), "masses length must equal the number of types");
  require(nu > 0.0 && std::isfinite(nu), "nu must be positive");
  require((masses.array() > 0.0).all() && masses.allFinite(), "masses must be positive");
  require((psi.array() >= 0.0).all() && psi.allFinite(), "psi must be finite and >= 0");
  require(xi.allFinite(), "xi must be finite");
}

void Technology::validate() const {
  require(beta.rows() > 0 && beta.cols() > 0, "beta must be non-empty");
  require((beta.array() >= 0.0).all() && beta.allFinite(), "beta must be finite and >= 0");
  const auto alpha = labor_shares();
  for (Eigen::Index s = 0; s < alpha.size(); ++s) {
    require(alpha(s) > 0.0 && alpha(s) < 1.0,
            "labor share of sector " + std::to_string(s) + " must lie in (0, 1)");
  }
}

void DemandSide::validate() const {
  require(shifters.size() > 0, "demand shifters must be non-empty");
  require((shifters.array() > 0.0).all() && shifters.allFinite(), "demand shifters must be positive");
  require(eta > 0.0 && std::isfinite(eta), "eta must be positive");
  require(eta != 1.0, "eta = 1 is not supported by the CES form");
}

Eigen::MatrixXd choice_probabilities(const LaborSupplyParameters& params, const Eigen::VectorXd& w) {
  const auto I = params.types();
  const auto G = params.markets();
  require(w.size() == G, "wage vector length must equal the number of markets");
  Eigen::MatrixXd out(I, G + 1);
  for (Eigen::Index i = 0; i < I; ++i) {
    double top = 0.0;
    for (Eigen::Index g = 0; g < G; ++g) {
      const double u = (params.psi(i, g) * w(g) + params.xi(g)) / params.nu;
      if (!std::isfinite(u)) {
        throw NumericalError("non-finite utility for type " + std::to_string(i) + " in market " +
                             std::to_string(g));
      }
      out(i, g + 1) = u;
      top = std::max(top, u);
    }
    out(i, 0) = std::exp(-top);
    double total = out(i, 0);
    for (Eigen::Index g = 1; g <= G; ++g) {
      out(i, g) = std::exp(out(i, g) - top);
      total += out(i, g);
    }
    out.row(i) /= total;
  }
  return out;
}

Eigen::VectorXd labor_supply(const LaborSupplyParameters& params, const Eigen::MatrixXd& choices) {
  const auto G = params.markets();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(G);
  for (Eigen::Index g = 0; g < G; ++g) {
    for (Eigen::Index i = 0; i < params.types(); ++i) {
      out(g) += params.masses(i) * choices(i, g + 1) * params.psi(i, g);
    }
  }
  return out;
}

Eigen::VectorXd labor_supply(const LaborSupplyParameters& params, const Eigen::VectorXd& w) {
  return labor_supply(params, choice_probabilities(params, w));
}

namespace {

// ln of the cost-minimizing labor demand; -inf where beta is zero.
Eigen::MatrixXd log_labor_demand(const Eigen::VectorXd& p, const Eigen::VectorXd& w, const Technology& tech) {
  const auto G = tech.markets();
  const auto S = tech.sectors();
  require(p.size() == S && w.size() == G, "price or wage vector has the wrong length");
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(G, S, -std::numeric_limits<double>::infinity());
  for (Eigen::Index s = 0; s < S; ++s) {
    const double alpha = tech.beta.col(s).sum();
    if (alpha >= 1.0) {
      throw InputError("labor share of sector " + std::to_string(s) + " must be below 1");
    }
    // ln of p_s prod_g (beta_gs / w_g)^beta_gs, skipping zero elasticities.
    double common = std::log(p(s));
    for (Eigen::Index g = 0; g < G; ++g) {
      const double b = tech.beta(g, s);
      if (b > 0.0) common += b * (std::log(b) - std::log(w(g)));
    }
    for (Eigen::Index g = 0; g < G; ++g) {
      const double b = tech.beta(g, s);
      if (b <= 0.0) continue;
      out(g, s) = (common + (1.0 - alpha) * (std::log(b) - std::log(w(g)))) / (1.0 - alpha);
    }
  }
  return out;
}

double log_sum_exp(const Eigen::ArrayXd& x) {
  const double top = x.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((x - top).exp().sum());
}

}  // namespace

Eigen::MatrixXd labor_demand(const Eigen::VectorXd& p, const Eigen::VectorXd& w, const Technology& tech) {
  return log_labor_demand(p, w, tech).unaryExpr([](double x) { return std::exp(x); });
}

Eigen::VectorXd product_supply(const Eigen::MatrixXd& labor, const Technology& tech) {
  require(labor.rows() == tech.markets() && labor.cols() == tech.sectors(),
          "labor matrix has the wrong shape");
  Eigen::VectorXd out(tech.sectors());
  for (Eigen::Index s = 0; s < tech.sectors(); ++s) {
    double log_y = 0.0;
    bool zero = false;
    for (Eigen::Index g = 0; g < tech.markets(); ++g) {
      const double b = tech.beta(g, s);
      if (b == 0.0) continue;
      if (labor(g, s) <= 0.0) {
        zero = true;
        break;
      }
      log_y += b * std::log(labor(g, s));
    }
    out(s) = zero ? 0.0 : std::exp(log_y);
  }
  return out;
}

Eigen::VectorXd product_demand(const Eigen::VectorXd& p, const DemandSide& demand, double income) {
  require(p.size() == demand.shifters.size(), "price vector has the wrong length");
  require(demand.eta != 1.0, "eta = 1 is not supported by the CES form");
  const double eta = demand.eta;
  double index = 0.0;
  for (Eigen::Index s = 0; s < p.size(); ++s) index += demand.shifters(s) * std::pow(p(s), 1.0 - eta);
  Eigen::VectorXd out(p.size());
  for (Eigen::Index s = 0; s < p.size(); ++s) {
    out(s) = demand.shifters(s) * income / (std::pow(p(s), eta) * index);
  }
  return out;
}

double EquilibriumState::walras_residual() const {
  return std::abs(income - wage_bill - profits) / income;
}

double EquilibriumState::employment_rate(const Eigen::VectorXd& masses) const {
  return masses.dot((1.0 - choices.col(0).array()).matrix()) / masses.sum();
}

namespace {

double relative_gap(const Eigen::VectorXd& demand, const Eigen::VectorXd& supply, double floor) {
  double gap = 0.0;
  for (Eigen::Index k = 0; k < demand.size(); ++k) {
    gap = std::max(gap, std::abs(demand(k) - supply(k)) / std::max(supply(k), floor));
  }
  return gap;
}

void normalize_price_index(Eigen::VectorXd& p, const DemandSide& demand) {
  const double eta = demand.eta;
  double index = 0.0;
  for (Eigen::Index s = 0; s < p.size(); ++s) index += demand.shifters(s) * std::pow(p(s), 1.0 - eta);
  p /= std::pow(index, 1.0 / (1.0 - eta));
}

// log sum_i m_i psi_ig P_i[g], finite when P_i[g] underflows for every type.
Eigen::VectorXd log_labor_supply(const LaborSupplyParameters& params, const Eigen::VectorXd& w) {
  const auto I = params.types();
  const auto G = params.markets();
  Eigen::MatrixXd log_p(I, G);
  for (Eigen::Index i = 0; i < I; ++i) {
    double top = 0.0;
    for (Eigen::Index g = 0; g < G; ++g) {
      log_p(i, g) = (params.psi(i, g) * w(g) + params.xi(g)) / params.nu;
      top = std::max(top, log_p(i, g));
    }
    double total = std::exp(-top);
    for (Eigen::Index g = 0; g < G; ++g) total += std::exp(log_p(i, g) - top);
    log_p.row(i).array() -= top + std::log(total);
  }
  Eigen::VectorXd out(G);
  const double lowest = -std::numeric_limits<double>::infinity();
  for (Eigen::Index g = 0; g < G; ++g) {
    double top = lowest;
    for (Eigen::Index i = 0; i < I; ++i) {
      if (params.psi(i, g) > 0.0) top = std::max(top, std::log(params.masses(i) * params.psi(i, g)) + log_p(i, g));
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < I; ++i) {
      if (params.psi(i, g) > 0.0) total += std::exp(std::log(params.masses(i) * params.psi(i, g)) + log_p(i, g) - top);
    }
    out(g) = top + std::log(total);
  }
  return out;
}

void check_finite(const Eigen::VectorXd& v, const char* what) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (!std::isfinite(v(k)) || v(k) < 0.0) {
      throw NumericalError(std::string("non-finite ") + what + " at index " + std::to_string(k));
    }
  }
}

}  // namespace

EquilibriumState solve_equilibrium(const LaborSupplyParameters& params, const Technology& tech,
                                   const DemandSide& demand_in, const SolverConfig& config) {
  params.validate();
  tech.validate();
  demand_in.validate();
  require(tech.markets() == params.markets(), "technology and supply disagree on markets");
  require(tech.sectors() == demand_in.shifters.size(), "technology and demand disagree on sectors");
  require(config.rho > 0.0 && config.tol > 0.0 && config.max_iter > 0 && config.max_log_gap > 0.0,
          "invalid solver settings");
  for (Eigen::Index g = 0; g < params.markets(); ++g) {
    require(params.psi.col(g).maxCoeff() > 0.0,
            "market " + std::to_string(g) + " has no efficiency supply");
    require(tech.beta.row(g).maxCoeff() > 0.0, "market " + std::to_string(g) + " has no demand");
  }

  DemandSide demand = demand_in;
  demand.shifters /= demand.shifters.sum();

  // Default start: unit earnings for the mass-weighted average efficiency.
  Eigen::VectorXd w = config.w0.value_or((params.masses.transpose() * params.psi).transpose().cwiseInverse());
  Eigen::VectorXd p = config.p0.value_or(Eigen::VectorXd::Ones(tech.sectors()));
  require(w.size() == params.markets() && p.size() == tech.sectors(), "start values have the wrong length");
  require((w.array() > 0.0).all() && (p.array() > 0.0).all(), "start values must be positive");
  normalize_price_index(p, demand);

  EquilibriumState best;
  double best_residual = std::numeric_limits<double>::infinity();
  double rho = config.rho;
  double previous_residual = std::numeric_limits<double>::infinity();
  Eigen::VectorXd previous_log_gap;
  std::vector<TracePoint> trace;

  for (std::uint32_t it = 0;; ++it) {
    EquilibriumState s;
    s.w = w;
    s.p = p;
    s.choices = choice_probabilities(params, w);
    s.labor_supply = labor_supply(params, s.choices);
    s.labor = labor_demand(p, w, tech);
    s.y_supply = product_supply(s.labor, tech);
    s.income = p.dot(s.y_supply);
    s.y_demand = product_demand(p, demand, s.income);
    check_finite(s.labor_supply, "labor supply");
    check_finite(s.labor.rowwise().sum(), "labor demand");
    check_finite(s.y_supply, "product supply");
    check_finite(s.y_demand, "product demand");
    const Eigen::VectorXd ld = s.labor.rowwise().sum();
    s.wage_bill = w.dot(s.labor_supply);
    s.profits = s.income - w.dot(ld);
    s.labor_gap = relative_gap(ld, s.labor_supply, config.gap_floor);
    s.goods_gap = relative_gap(s.y_demand, s.y_supply, config.gap_floor);
    s.iterations = it;
    s.final_rho = rho;
    const double residual = std::max(s.labor_gap, s.goods_gap);
    if (config.record_trace) trace.push_back({it, s.labor_gap, s.goods_gap, rho});

    if (residual < best_residual) {
      best_residual = residual;
      best = s;
    }
    if (residual < config.tol) {
      best = s;
      best.converged = true;
      break;
    }
    if (it >= config.max_iter) break;

    // Gaps in logs so that underflowed quantities keep a finite direction.
    Eigen::VectorXd log_gap(params.markets() + tech.sectors());
    const Eigen::VectorXd log_ls = log_labor_supply(params, w);
    const Eigen::MatrixXd log_ld = log_labor_demand(p, w, tech);
    for (Eigen::Index g = 0; g < params.markets(); ++g) {
      log_gap(g) = log_sum_exp(log_ld.row(g).transpose().array()) - log_ls(g);
    }
    Eigen::ArrayXd log_ys(tech.sectors());
    for (Eigen::Index k = 0; k < tech.sectors(); ++k) {
      log_ys(k) = 0.0;
      for (Eigen::Index g = 0; g < params.markets(); ++g) {
        if (tech.beta(g, k) > 0.0) log_ys(k) += tech.beta(g, k) * log_ld(g, k);
      }
    }
    const Eigen::ArrayXd log_p = p.array().log();
    const double log_income = log_sum_exp(log_p + log_ys);
    // The price index is 1 after normalization.
    for (Eigen::Index k = 0; k < tech.sectors(); ++k) {
      const double log_yd = std::log(demand.shifters(k)) + log_income - demand.eta * log_p(k);
      log_gap(params.markets() + k) = log_yd - log_ys(k);
    }
    for (Eigen::Index k = 0; k < log_gap.size(); ++k) {
      if (!std::isfinite(log_gap(k))) {
        const bool market = k < params.markets();
        throw NumericalError(std::string("non-finite excess demand in ") +
                             (market ? "market " : "sector ") +
                             std::to_string(market ? k : k - params.markets()));
      }
    }
    // Oscillation: the residual grew while the dominant gap changed sign.
    if (previous_log_gap.size() == log_gap.size() && residual > previous_residual) {
      Eigen::Index worst = 0;
      log_gap.cwiseAbs().maxCoeff(&worst);
      if (log_gap(worst) * previous_log_gap(worst) < 0.0) {
        rho = std::max(config.rho_min, rho * config.rho_decay);
      }
    }
    previous_residual = residual;
    previous_log_gap = log_gap;

    const Eigen::ArrayXd step = rho * log_gap.array().max(-config.max_log_gap).min(config.max_log_gap);
    w.array() *= step.head(params.markets()).exp();
    p.array() *= step.tail(tech.sectors()).exp();
    normalize_price_index(p, demand);
  }
  best.trace = std::move(trace);
  return best;
}

}  // namespace labornet::roy
