#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "labornet/errors.hpp"
#include "labornet/log.hpp"
#include "labornet/parallel.hpp"
#include "labornet/rng.hpp"
#include "labornet/supply_mle.hpp"
#include "optimize.hpp"

namespace labornet::mle {

namespace {

// Packed layout: ln phi row-major, then xi, then ln nu.
struct Layout {
  Eigen::Index types;
  Eigen::Index markets;

  Eigen::Index size() const { return types * markets + markets + 1; }
  Eigen::Index phi(Eigen::Index i, Eigen::Index g) const { return i * markets + g; }
  Eigen::Index xi(Eigen::Index g) const { return types * markets + g; }
  Eigen::Index nu() const { return types * markets + markets; }
};

Eigen::VectorXd pack(const Layout& L, const SupplyParameters& theta) {
  Eigen::VectorXd x(L.size());
  for (Eigen::Index i = 0; i < L.types; ++i) {
    for (Eigen::Index g = 0; g < L.markets; ++g) x(L.phi(i, g)) = std::log(theta.phi(i, g));
  }
  for (Eigen::Index g = 0; g < L.markets; ++g) x(L.xi(g)) = theta.xi(g);
  x(L.nu()) = std::log(theta.nu);
  return x;
}

void unpack(const Layout& L, const Eigen::VectorXd& x, SupplyParameters& theta) {
  theta.phi.resize(L.types, L.markets);
  theta.xi.resize(L.markets);
  for (Eigen::Index i = 0; i < L.types; ++i) {
    for (Eigen::Index g = 0; g < L.markets; ++g) theta.phi(i, g) = std::exp(x(L.phi(i, g)));
  }
  for (Eigen::Index g = 0; g < L.markets; ++g) theta.xi(g) = x(L.xi(g));
  theta.nu = std::exp(x(L.nu()));
}

Eigen::VectorXd pack_score(const Layout& L, const Score& s) {
  Eigen::VectorXd out(L.size());
  for (Eigen::Index i = 0; i < L.types; ++i) {
    for (Eigen::Index g = 0; g < L.markets; ++g) out(L.phi(i, g)) = s.log_phi(i, g);
  }
  for (Eigen::Index g = 0; g < L.markets; ++g) out(L.xi(g)) = s.xi(g);
  out(L.nu()) = s.log_nu;
  return out;
}

struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

Bounds make_bounds(const Layout& L, const PanelStatistics& stats, const FitConfig& config) {
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < L.types; ++i) {
    for (Eigen::Index g = 0; g < L.markets; ++g) {
      if (stats.earnings_count(i, g) > 0.0) top = std::max(top, stats.log_mean(i, g));
    }
  }
  if (!std::isfinite(top)) top = 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  Bounds b{Eigen::VectorXd::Constant(L.size(), -inf), Eigen::VectorXd::Constant(L.size(), inf)};
  const double phi_low = top + std::log(config.phi_floor);
  for (Eigen::Index k = 0; k < L.types * L.markets; ++k) b.lower(k) = phi_low;
  b.lower(L.nu()) = std::log(config.nu_min);
  b.upper(L.nu()) = std::log(config.nu_max);
  return b;
}

// Earnings medians from cell means; choice log-odds against non-employment
// regressed on phi within markets give nu and xi.
SupplyParameters initial_guess(const PanelStatistics& stats, const FitConfig& config, const Bounds& bounds) {
  const auto types = static_cast<Eigen::Index>(stats.types);
  const auto markets = static_cast<Eigen::Index>(stats.markets);
  SupplyParameters theta;
  theta.phi.resize(types, markets);
  double low = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < types; ++i) {
    for (Eigen::Index g = 0; g < markets; ++g) {
      if (stats.earnings_count(i, g) > 0.0) low = std::min(low, stats.log_mean(i, g));
    }
  }
  if (!std::isfinite(low)) low = 0.0;
  for (Eigen::Index i = 0; i < types; ++i) {
    for (Eigen::Index g = 0; g < markets; ++g) {
      const double lp = stats.earnings_count(i, g) > 0.0 ? stats.log_mean(i, g) : low - std::log(2.0);
      theta.phi(i, g) = std::exp(std::max(lp, bounds.lower(0)));
    }
  }

  Eigen::MatrixXd odds = Eigen::MatrixXd::Zero(types, markets);
  double sxy = 0.0;
  double sxx = 0.0;
  for (Eigen::Index g = 0; g < markets; ++g) {
    double phi_sum = 0.0;
    double odds_sum = 0.0;
    double weight = 0.0;
    for (Eigen::Index i = 0; i < types; ++i) {
      if (stats.choices.row(i).sum() == 0.0) continue;
      odds(i, g) = std::log((stats.choices(i, g + 1) + 0.5) / (stats.choices(i, 0) + 0.5));
      phi_sum += theta.phi(i, g);
      odds_sum += odds(i, g);
      weight += 1.0;
    }
    if (weight < 2.0) continue;
    for (Eigen::Index i = 0; i < types; ++i) {
      if (stats.choices.row(i).sum() == 0.0) continue;
      const double dx = theta.phi(i, g) - phi_sum / weight;
      sxy += dx * (odds(i, g) - odds_sum / weight);
      sxx += dx * dx;
    }
  }
  double nu = sxy > 0.0 && sxx > 0.0 ? sxx / sxy : 1.0;
  nu = std::clamp(nu, config.nu_min, config.nu_max);
  theta.nu = nu;
  theta.xi = Eigen::VectorXd::Zero(markets);
  for (Eigen::Index g = 0; g < markets; ++g) {
    double acc = 0.0;
    double weight = 0.0;
    for (Eigen::Index i = 0; i < types; ++i) {
      if (stats.choices.row(i).sum() == 0.0) continue;
      acc += nu * odds(i, g) - theta.phi(i, g);
      weight += 1.0;
    }
    if (weight > 0.0) theta.xi(g) = acc / weight;
  }
  return theta;
}

void profile_sigma(const PanelStatistics& stats, const FitConfig& config, SupplyParameters& theta,
                   BoolMatrix* pooled) {
  SigmaEstimate est = estimate_sigma(stats, theta.phi);
  theta.sigma = est.sigma.cwiseMax(config.sigma_floor);
  if (pooled != nullptr) *pooled = std::move(est.pooled);
}

struct RunResult {
  SupplyParameters theta;
  double objective = -std::numeric_limits<double>::infinity();
  double gradient_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::uint32_t outer = 0;
  std::vector<double> trace;
  BoolMatrix pooled;
};

RunResult run_fit(const PanelStatistics& stats, const FitConfig& config, double pseudo_count,
                  SupplyParameters theta, const Layout& L, const Bounds& bounds) {
  RunResult run;
  profile_sigma(stats, config, theta, &run.pooled);

  detail::LbfgsOptions options;
  options.grad_tol = config.grad_tol;
  options.max_iter = config.max_iter;

  SupplyParameters work = theta;
  const detail::Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    unpack(L, x, work);
    grad = -pack_score(L, regularized_score(stats, work, pseudo_count));
    return -regularized_log_likelihood(stats, work, pseudo_count);
  };

  Eigen::VectorXd x = pack(L, theta);
  double previous = regularized_log_likelihood(stats, theta, pseudo_count);
  run.trace.push_back(previous);
  for (std::uint32_t outer = 0; outer < config.max_outer; ++outer) {
    work.sigma = theta.sigma;
    const auto inner = detail::minimize_box(objective, x, bounds.lower, bounds.upper, options);
    x = inner.x;
    log::debug("supply fit outer " + std::to_string(outer) + ": " + std::to_string(inner.iterations) +
               " quasi-Newton steps, projected gradient " + std::to_string(inner.projected_grad_norm));
    unpack(L, x, theta);
    profile_sigma(stats, config, theta, &run.pooled);
    const double value = regularized_log_likelihood(stats, theta, pseudo_count);
    run.trace.push_back(value);
    run.outer = outer + 1;

    Eigen::VectorXd grad = -pack_score(L, regularized_score(stats, theta, pseudo_count));
    run.gradient_norm = detail::projected_gradient_norm(x, grad, bounds.lower, bounds.upper);
    const bool settled = std::abs(value - previous) <= config.outer_tol * std::max(1.0, std::abs(value));
    previous = value;
    if (run.gradient_norm < config.grad_tol && settled) {
      run.converged = true;
      break;
    }
  }
  run.theta = std::move(theta);
  run.objective = previous;
  return run;
}

SupplyParameters jittered(const SupplyParameters& base, const FitConfig& config, std::uint32_t restart,
                          const Bounds& bounds) {
  if (restart == 0 || config.jitter == 0.0) return base;
  Rng rng = make_stream(config.seed, "mle", "jitter", restart);
  std::normal_distribution<double> noise(0.0, config.jitter);
  SupplyParameters out = base;
  for (Eigen::Index i = 0; i < out.phi.rows(); ++i) {
    for (Eigen::Index g = 0; g < out.phi.cols(); ++g) {
      out.phi(i, g) = std::exp(std::max(std::log(out.phi(i, g)) + noise(rng), bounds.lower(0)));
    }
  }
  for (Eigen::Index g = 0; g < out.xi.size(); ++g) out.xi(g) += base.nu * noise(rng);
  out.nu = std::clamp(base.nu * std::exp(noise(rng)), config.nu_min, config.nu_max);
  return out;
}

}  // namespace

EstimatedParameters fit_supply_parameters(const WorkerPanel& panel, const FitConfig& config) {
  if (panel.num_workers() == 0) throw InputError("empty panel");
  if (config.restarts == 0) throw InputError("restarts must be at least 1");
  if (!(config.nu_min > 0.0) || !(config.nu_max > config.nu_min)) throw InputError("invalid nu bounds");
  const PanelStatistics stats = summarize_panel(panel);
  for (std::uint32_t g = 1; g <= stats.markets; ++g) {
    if (stats.choices.col(g).sum() == 0.0) {
      throw InputError("market " + std::to_string(g) + " is never chosen");
    }
  }

  const Layout L{static_cast<Eigen::Index>(stats.types), static_cast<Eigen::Index>(stats.markets)};
  const Bounds bounds = make_bounds(L, stats, config);
  SupplyParameters start = config.initial ? *config.initial : initial_guess(stats, config, bounds);
  if (start.phi.rows() != L.types || start.phi.cols() != L.markets || start.xi.size() != L.markets) {
    throw InputError("initial values have the wrong dimensions");
  }
  start.phi = start.phi.cwiseMax(std::exp(bounds.lower(0)));
  start.nu = std::clamp(start.nu, config.nu_min, config.nu_max);

  std::vector<RunResult> runs(config.restarts);
  parallel_for(config.restarts, [&](std::size_t r) {
    const auto restart = static_cast<std::uint32_t>(r);
    runs[r] = run_fit(stats, config, config.pseudo_count, jittered(start, config, restart, bounds), L, bounds);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].objective > runs[best].objective) best = r;
  }
  RunResult& winner = runs[best];

  EstimatedParameters out;
  out.theta = winner.theta;
  out.theta.lambda = stats.periods >= 2 ? estimate_lambda(panel) : 0.0;
  out.masses = stats.type_workers / static_cast<double>(stats.workers);

  FitDiagnostics& d = out.diagnostics;
  d.log_likelihood = panel_log_likelihood(stats, out.theta);
  d.objective = winner.objective;
  d.gradient_norm = winner.gradient_norm;
  d.converged = winner.converged;
  const double log_nu = std::log(out.theta.nu);
  d.nu_at_bound = log_nu <= bounds.lower(L.nu()) + 1e-8 || log_nu >= bounds.upper(L.nu()) - 1e-8;
  d.best_restart = static_cast<std::uint32_t>(best);
  d.outer_iterations = winner.outer;
  d.outer_trace = winner.trace;
  d.zero_cells = zero_cells(stats);
  d.pooled_sigma = winner.pooled;
  d.sensitive_cells = BoolMatrix::Constant(L.types, L.markets, false);
  if (config.sensitivity_check && d.zero_cells.any()) {
    const RunResult half = run_fit(stats, config, 0.5 * config.pseudo_count, out.theta, L, bounds);
    for (Eigen::Index i = 0; i < L.types; ++i) {
      for (Eigen::Index g = 0; g < L.markets; ++g) {
        if (!d.zero_cells(i, g)) continue;
        const double base = out.theta.phi(i, g);
        d.sensitive_cells(i, g) = std::abs(half.theta.phi(i, g) - base) > 0.01 * base;
      }
    }
  }
  if (!d.converged) log::warn("supply fit stopped before reaching the gradient tolerance");
  if (d.nu_at_bound) log::warn("nu estimate sits on its bound");
  return out;
}

}  // namespace labornet::mle
