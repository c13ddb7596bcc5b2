#include "labornet/shock_lab.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "json_util.hpp"
#include "labornet/csv.hpp"
#include "labornet/errors.hpp"
#include "labornet/parallel.hpp"

namespace labornet::shock {

void ShockSpec::validate() const {
  if (targets.empty()) throw InputError("shock needs at least one target sector");
  for (const auto& [sector, value] : targets) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw InputError("shock value for sector " + std::to_string(sector) + " must be positive");
    }
  }
}

roy::DemandSide apply_shock(const roy::DemandSide& demand, const ShockSpec& shock) {
  shock.validate();
  roy::DemandSide out = demand;
  for (const auto& [sector, value] : shock.targets) {
    if (sector >= demand.shifters.size()) throw InputError("unknown sector " + std::to_string(sector));
    const auto s = static_cast<Eigen::Index>(sector);
    out.shifters(s) = shock.kind == ShockSpec::Kind::multiply ? demand.shifters(s) * value : value;
  }
  return out;
}

ShockSpec parse_shock(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InputError("shock must look like kind:sector=value,...: " + text);
  ShockSpec spec;
  const std::string kind = text.substr(0, colon);
  if (kind == "multiply") {
    spec.kind = ShockSpec::Kind::multiply;
  } else if (kind == "set") {
    spec.kind = ShockSpec::Kind::set;
  } else {
    throw InputError("unknown shock kind " + kind);
  }
  std::stringstream rest(text.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("shock target must be sector=value: " + item);
    const auto sector = csv::parse_int(item.substr(0, eq), "sector", 0);
    if (sector < 0) throw InputError("sector must be non-negative");
    const auto key = static_cast<std::uint32_t>(sector);
    if (spec.targets.count(key)) throw InputError("sector listed twice in shock: " + item);
    spec.targets[key] = csv::parse_double(item.substr(eq + 1), "shock value", 0);
  }
  spec.label = text;
  spec.validate();
  return spec;
}

std::string format_shock(const ShockSpec& shock) {
  std::string out = shock.kind == ShockSpec::Kind::multiply ? "multiply:" : "set:";
  bool first = true;
  for (const auto& [sector, value] : shock.targets) {
    if (!first) out += ',';
    first = false;
    out += std::to_string(sector) + '=' + csv::format_double(value);
  }
  return out;
}

JobUniverse make_job_universe(const Eigen::MatrixXd& sector_given_market, std::uint32_t jobs_per_market,
                              double weight_sd, Rng& rng) {
  if (jobs_per_market == 0) throw InputError("jobs_per_market must be positive");
  if ((sector_given_market.array() < 0.0).any()) throw InputError("sector probabilities must be non-negative");
  JobUniverse u;
  const auto markets = static_cast<std::uint32_t>(sector_given_market.rows());
  u.jobs_of_market.resize(markets);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::uint32_t g = 0; g < markets; ++g) {
    const Eigen::VectorXd row = sector_given_market.row(g).transpose();
    if (!(row.sum() > 0.0)) throw InputError("market " + std::to_string(g + 1) + " has no sector probability");
    std::discrete_distribution<std::uint32_t> pick(row.data(), row.data() + row.size());
    for (std::uint32_t k = 0; k < jobs_per_market; ++k) {
      u.jobs_of_market[g].push_back(static_cast<std::uint32_t>(u.market.size()));
      u.market.push_back(g + 1);
      u.sector.push_back(pick(rng));
      u.weight.push_back(std::exp(weight_sd * noise(rng)));
    }
  }
  return u;
}

Eigen::MatrixXd sector_shares(const Eigen::MatrixXd& labor) {
  Eigen::MatrixXd out(labor.rows(), labor.cols());
  for (Eigen::Index g = 0; g < labor.rows(); ++g) {
    const double total = labor.row(g).sum();
    if (total > 0.0) {
      out.row(g) = labor.row(g) / total;
    } else {
      out.row(g).setConstant(1.0 / static_cast<double>(labor.cols()));
    }
  }
  return out;
}

std::vector<std::uint32_t> draw_types(const Eigen::VectorXd& masses, std::size_t workers, Rng& rng) {
  if (masses.size() == 0 || (masses.array() < 0.0).any() || !(masses.sum() > 0.0)) {
    throw InputError("masses must be non-negative with a positive sum");
  }
  std::discrete_distribution<std::uint32_t> pick(masses.data(), masses.data() + masses.size());
  std::vector<std::uint32_t> out(workers);
  for (auto& t : out) t = pick(rng);
  return out;
}

WorkerPanel simulate_panel(const roy::LaborSupplyParameters& supply, const Eigen::MatrixXd& sigma,
                           const Eigen::VectorXd& w, const SimulationConfig& config, const JobUniverse* jobs,
                           const std::vector<std::uint32_t>* types, const std::string& stream) {
  supply.validate();
  const Eigen::Index I = supply.types();
  const Eigen::Index G = supply.markets();
  if (sigma.rows() != I || sigma.cols() != G) throw InputError("sigma dimensions do not match psi");
  if ((sigma.array() < 0.0).any()) throw InputError("sigma must be non-negative");
  if (w.size() != G) throw InputError("wage vector does not match the markets");
  if (config.workers == 0 || config.periods == 0) throw InputError("panel needs workers and periods");
  if (!(config.lambda >= 0.0 && config.lambda <= 1.0)) throw InputError("lambda must lie in [0, 1]");
  if (jobs != nullptr && jobs->jobs_of_market.size() != static_cast<std::size_t>(G)) {
    throw InputError("job universe does not match the markets");
  }

  std::vector<std::uint32_t> drawn;
  if (types == nullptr) {
    Rng type_rng = make_stream(config.seed, "shock-lab", "types");
    drawn = draw_types(supply.masses, config.workers, type_rng);
    types = &drawn;
  } else if (types->size() != config.workers) {
    throw InputError("type vector does not match the worker count");
  }

  const Eigen::MatrixXd probs = roy::choice_probabilities(supply, w);
  std::vector<std::discrete_distribution<std::uint32_t>> choose;
  for (Eigen::Index i = 0; i < I; ++i) {
    const Eigen::VectorXd row = probs.row(i).transpose();
    choose.emplace_back(row.data(), row.data() + row.size());
  }
  // Cumulative hiring weights per market, inverted with one uniform per move.
  std::vector<std::vector<double>> hire_cdf;
  if (jobs != nullptr) {
    for (const auto& members : jobs->jobs_of_market) {
      if (members.empty()) throw InputError("a market has no jobs");
      std::vector<double> cdf;
      double total = 0.0;
      for (const auto j : members) cdf.push_back(total += jobs->weight[j]);
      for (double& c : cdf) c /= total;
      hire_cdf.push_back(std::move(cdf));
    }
  }

  Rng noise_rng = make_stream(config.seed, "shock-lab", stream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution separate(config.lambda);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t rows = config.workers * config.periods;
  std::vector<std::string> ids(config.workers);
  std::vector<Observation> obs;
  obs.reserve(rows);
  std::vector<std::string> job_label;
  std::vector<std::string> sector_label;
  if (jobs != nullptr) {
    job_label.reserve(rows);
    sector_label.reserve(rows);
  }
  for (std::size_t n = 0; n < config.workers; ++n) {
    ids[n] = std::to_string(n);
    const std::uint32_t type = (*types)[n];
    if (type >= static_cast<std::uint32_t>(I)) throw InputError("worker type out of range");
    // Per-worker stream, independent of the wage vector and the panel stream,
    // so panels sharing a seed share every draw except the earnings noise.
    Rng rng = make_stream(config.seed, "shock-lab", "choices", n);
    std::uint32_t market = 0;
    std::size_t job = 0;
    for (std::uint32_t t = 1; t <= config.periods; ++t) {
      Observation o;
      o.worker = static_cast<std::uint32_t>(n);
      o.period = t;
      o.type = type;
      o.separated = t == 1 || separate(rng);
      if (o.separated) {
        market = choose[type](rng);
        const double u = unit(rng);
        if (market != 0 && jobs != nullptr) {
          const auto& cdf = hire_cdf[market - 1];
          const auto slot = std::min<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(),
                                                  cdf.size() - 1);
          job = jobs->jobs_of_market[market - 1][slot];
        }
      }
      o.market = market;
      if (market != 0) {
        const auto g = static_cast<Eigen::Index>(market - 1);
        const double median = supply.psi(type, g) * w(g);
        const double s = sigma(type, g);
        o.earnings = s > 0.0 ? median * std::exp(s * noise(noise_rng)) : median;
      }
      obs.push_back(o);
      if (jobs != nullptr) {
        job_label.push_back(market != 0 ? std::to_string(job) : std::string());
        sector_label.push_back(market != 0 ? std::to_string(jobs->sector[job]) : std::string());
      }
    }
  }
  std::map<std::string, std::vector<std::string>> labels;
  if (jobs != nullptr) {
    labels["job"] = std::move(job_label);
    labels["sector"] = std::move(sector_label);
  }
  WorkerPanel panel(std::move(ids), std::move(obs), std::move(labels));
  panel.set_dimensions(static_cast<std::uint32_t>(I), static_cast<std::uint32_t>(G));
  return panel;
}

graph::Partition ShockExperiment::true_partition() const {
  std::vector<std::uint32_t> workers;
  const auto collect = [&workers](const WorkerPanel& panel) {
    for (std::size_t n = 0; n < panel.num_workers(); ++n) {
      workers.push_back(panel.at(static_cast<std::uint32_t>(n), 1).type);
    }
  };
  collect(pre_panel);
  if (!paired) collect(post_panel);
  std::vector<std::uint32_t> job_groups;
  for (const auto g : jobs.market) job_groups.push_back(g - 1);
  graph::Partition p = graph::Partition::from_labels(std::move(workers), std::move(job_groups));
  p.num_worker_groups = std::max({p.num_worker_groups, pre_panel.num_types(), post_panel.num_types()});
  p.num_job_groups = std::max(p.num_job_groups, static_cast<std::uint32_t>(pre.w.size()));
  return p;
}

namespace {

void require_converged(const roy::EquilibriumState& state, const char* which) {
  if (!state.converged) throw NumericalError(std::string(which) + " equilibrium did not converge");
}

}  // namespace

ShockExperiment run_shock_experiment(const ModelBundle& bundle, const ShockSpec& shock,
                                     const ExperimentConfig& config) {
  bundle.validate();
  ShockExperiment ex;
  ex.bundle = bundle;
  ex.shock = shock;
  ex.seed = config.simulation.seed;
  ex.paired = config.paired;
  ex.post_demand = apply_shock(bundle.demand, shock);
  ex.pre = roy::solve_equilibrium(bundle.supply, bundle.technology, bundle.demand, config.solver);
  require_converged(ex.pre, "pre-shock");
  ex.post = roy::solve_equilibrium(bundle.supply, bundle.technology, ex.post_demand, config.solver);
  require_converged(ex.post, "post-shock");

  const Eigen::Index G = bundle.supply.markets();
  const Eigen::Index S = bundle.technology.sectors();
  if (bundle.sector_given_market) {
    ex.sector_given_market = *bundle.sector_given_market;
  } else if (config.sectors_from_equilibrium) {
    ex.sector_given_market = sector_shares(ex.pre.labor);
  } else {
    ex.sector_given_market = Eigen::MatrixXd::Constant(G, S, 1.0 / static_cast<double>(S));
  }
  Rng job_rng = make_stream(ex.seed, "shock-lab", "jobs");
  ex.jobs = make_job_universe(ex.sector_given_market, config.jobs_per_market, config.job_weight_sd, job_rng);

  const Eigen::MatrixXd sigma =
      bundle.sigma ? *bundle.sigma : Eigen::MatrixXd::Zero(bundle.supply.types(), G);
  SimulationConfig sim = config.simulation;
  Rng type_rng = make_stream(ex.seed, "shock-lab", "types");
  const auto pre_types = draw_types(bundle.supply.masses, sim.workers, type_rng);
  sim.periods = config.pre_periods;
  ex.pre_panel = simulate_panel(bundle.supply, sigma, ex.pre.w, sim, &ex.jobs, &pre_types, "pre");
  sim.periods = config.post_periods;
  if (config.paired) {
    ex.post_panel = simulate_panel(bundle.supply, sigma, ex.post.w, sim, &ex.jobs, &pre_types, "post");
  } else {
    Rng post_rng = make_stream(ex.seed, "shock-lab", "types-post");
    const auto post_types = draw_types(bundle.supply.masses, sim.workers, post_rng);
    ex.post_panel = simulate_panel(bundle.supply, sigma, ex.post.w, sim, &ex.jobs, &post_types, "post");
  }
  return ex;
}

std::vector<SweepEntry> shock_sweep(const ModelBundle& bundle, const std::vector<ShockSpec>& shocks,
                                    const ExperimentConfig& config) {
  std::vector<SweepEntry> out(shocks.size());
  parallel_for(shocks.size(), [&](std::size_t k) {
    out[k].shock = shocks[k];
    ExperimentConfig local = config;
    local.simulation.seed = derive_seed(config.simulation.seed, "shock", "experiment", k);
    try {
      out[k].experiment = run_shock_experiment(bundle, shocks[k], local);
    } catch (const std::exception& e) {
      out[k].error = e.what();
    }
  });
  return out;
}

std::vector<ShockSpec> sector_shock_grid(std::uint32_t sectors, const std::vector<double>& factors) {
  std::vector<ShockSpec> out;
  for (std::uint32_t s = 0; s < sectors; ++s) {
    for (const double f : factors) {
      ShockSpec spec;
      spec.targets[s] = f;
      spec.label = "sector" + std::to_string(s) + "_x" + csv::format_double(f);
      out.push_back(std::move(spec));
    }
  }
  return out;
}

namespace {

detail::Json solve_json(const roy::EquilibriumState& s) {
  detail::Json j;
  j["converged"] = s.converged;
  j["iterations"] = s.iterations;
  j["labor_gap"] = s.labor_gap;
  j["goods_gap"] = s.goods_gap;
  j["walras_residual"] = s.walras_residual();
  j["w"] = detail::to_json(s.w);
  j["p"] = detail::to_json(s.p);
  return j;
}

}  // namespace

std::string experiment_manifest_json(const ShockExperiment& ex) {
  detail::Json j;
  detail::Json shock;
  shock["label"] = ex.shock.label;
  shock["spec"] = format_shock(ex.shock);
  j["shock"] = shock;
  j["seed"] = ex.seed;
  j["paired"] = ex.paired;
  j["workers"] = ex.pre_panel.num_workers();
  j["pre_periods"] = ex.pre_panel.num_periods();
  j["post_periods"] = ex.post_panel.num_periods();
  j["jobs"] = ex.jobs.size();
  j["shifters_pre"] = detail::to_json(ex.bundle.demand.shifters);
  j["shifters_post"] = detail::to_json(ex.post_demand.shifters);
  j["pre"] = solve_json(ex.pre);
  j["post"] = solve_json(ex.post);
  return j.dump(2) + "\n";
}

ModelBundle synthetic_economy(const EconomySpec& spec) {
  if (spec.types == 0 || spec.markets == 0 || spec.sectors == 0) throw InputError("economy needs positive sizes");
  const auto I = static_cast<Eigen::Index>(spec.types);
  const auto G = static_cast<Eigen::Index>(spec.markets);
  const auto S = static_cast<Eigen::Index>(spec.sectors);
  Rng rng = make_stream(spec.seed, "shock-lab", "economy");
  std::normal_distribution<double> noise(0.0, 1.0);

  ModelBundle b;
  b.supply.masses.resize(I);
  for (Eigen::Index i = 0; i < I; ++i) b.supply.masses(i) = std::exp(0.2 * noise(rng));
  b.supply.masses /= b.supply.masses.sum();

  // Each type has a home market where its productivity is boosted.
  Eigen::MatrixXd raw(I, G);
  for (Eigen::Index i = 0; i < I; ++i) {
    for (Eigen::Index g = 0; g < G; ++g) {
      raw(i, g) = std::exp(spec.skill_sd * noise(rng) + (g == i % G ? spec.affinity : 0.0));
    }
  }
  for (Eigen::Index g = 0; g < G; ++g) raw.col(g) /= b.supply.masses.dot(raw.col(g));

  b.technology.beta.resize(G, S);
  for (Eigen::Index g = 0; g < G; ++g) {
    for (Eigen::Index s = 0; s < S; ++s) {
      b.technology.beta(g, s) = std::exp(0.5 * noise(rng)) * (s == g % S ? 4.0 : 1.0);
    }
  }
  for (Eigen::Index s = 0; s < S; ++s) {
    b.technology.beta.col(s) *= spec.labor_share / b.technology.beta.col(s).sum();
  }
  b.demand.eta = spec.eta;
  b.demand.shifters.resize(S);
  for (Eigen::Index s = 0; s < S; ++s) b.demand.shifters(s) = std::exp(0.3 * noise(rng));
  b.demand.shifters /= b.demand.shifters.sum();

  b.supply.nu = spec.nu;
  b.supply.xi.resize(G);
  for (Eigen::Index g = 0; g < G; ++g) b.supply.xi(g) = 0.5 * noise(rng);
  b.sigma = Eigen::MatrixXd::Constant(I, G, spec.sigma);

  // Scale productivity toward mean employed earnings of 10 and shift
  // amenities toward an 85% employment rate.
  const double target_earnings = 10.0;
  const double target_rate = 0.85;
  double k = 1.0;
  double shift = -target_earnings;
  const Eigen::VectorXd xi_base = b.supply.xi;
  Eigen::VectorXd start_w, start_p;
  double start_k = 1.0;
  for (int iter = 0; iter < 12; ++iter) {
    b.k = k;
    b.supply.psi = raw * k;
    b.supply.xi = xi_base.array() + shift;
    // Warm start: efficiency wages scale like 1 / k.
    roy::SolverConfig solver;
    if (iter > 0) {
      solver.w0 = start_w * (start_k / k);
      solver.p0 = start_p;
    }
    const auto state = roy::solve_equilibrium(b.supply, b.technology, b.demand, solver);
    if (!state.converged) throw NumericalError("synthetic economy did not converge during scaling");
    start_w = state.w;
    start_p = state.p;
    start_k = k;
    const double rate = state.employment_rate(b.supply.masses);
    double earnings = 0.0;
    double employed = 0.0;
    for (Eigen::Index i = 0; i < I; ++i) {
      for (Eigen::Index g = 0; g < G; ++g) {
        const double share = b.supply.masses(i) * state.choices(i, g + 1);
        earnings += share * b.supply.psi(i, g) * state.w(g);
        employed += share;
      }
    }
    earnings /= employed;
    k *= std::pow(target_earnings / earnings, 1.0 / spec.labor_share);
    const auto logit = [](double r) { return std::log(r / (1.0 - r)); };
    shift += spec.nu * (logit(target_rate) - logit(rate));
  }
  b.k = k;
  b.supply.psi = raw * k;
  b.supply.xi = xi_base.array() + shift;
  b.validate();
  return b;
}

}  // namespace labornet::shock
