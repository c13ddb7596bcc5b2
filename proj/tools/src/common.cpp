#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "labornet/csv.hpp"
#include "labornet/errors.hpp"

namespace labornet::cli {

using csv::format_double;

std::vector<KeySpec> global_keys() {
  return {{"seed", "1"}, {"threads", "0"}, {"out", "out"}, {"log_level", ""}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

roy::SolverConfig solver_from(const RunConfig& config) {
  roy::SolverConfig s;
  s.rho = config.number("rho");
  s.tol = config.number("tol");
  s.max_iter = static_cast<std::uint32_t>(config.unsigned_int("max_iter"));
  return s;
}

shock::ExperimentConfig experiment_from(const RunConfig& config) {
  shock::ExperimentConfig c;
  c.solver = solver_from(config);
  c.simulation.workers = config.unsigned_int("workers");
  c.simulation.lambda = config.number("lambda");
  c.simulation.seed = config.unsigned_int("seed");
  c.pre_periods = static_cast<std::uint32_t>(config.unsigned_int("pre_periods"));
  c.post_periods = static_cast<std::uint32_t>(config.unsigned_int("post_periods"));
  c.paired = config.flag("paired");
  c.jobs_per_market = static_cast<std::uint32_t>(config.unsigned_int("jobs_per_market"));
  c.job_weight_sd = config.number("job_weight_sd");
  c.sectors_from_equilibrium = config.flag("sectors_from_equilibrium");
  return c;
}

std::string regression_header() {
  return "classification,intercept,slope,se_intercept,se_slope,robust_se_intercept,robust_se_slope,n,r2\n";
}

std::string regression_row(const std::string& label, const metrics::BartikAnalysis& a) {
  std::string row = csv::quote_if_needed(label);
  if (!a.regression) return row + ",,,,,,,," + std::to_string(a.used_groups.size()) + "\n";
  const auto& r = *a.regression;
  for (const double v : {r.intercept, r.slope, r.se_intercept, r.se_slope, r.robust_se_intercept, r.robust_se_slope}) {
    row += "," + format_double(v);
  }
  return row + "," + std::to_string(r.n) + "," + format_double(r.r2) + "\n";
}

metrics::Classification classify(const shock::ShockExperiment& ex, const graph::Partition& p) {
  metrics::Classification cls;
  cls.worker_groups = p.num_worker_groups;
  cls.job_groups = p.num_job_groups;
  cls.pre_workers = metrics::worker_classes(ex.pre_panel, p.worker_group, 0);
  cls.post_workers = metrics::worker_classes(ex.post_panel, p.worker_group, ex.paired ? 0 : ex.pre_panel.num_workers());
  cls.pre_jobs = metrics::job_classes(ex.pre_panel, p.job_group);
  cls.post_jobs = metrics::job_classes(ex.post_panel, p.job_group);
  return cls;
}

std::string experiment_regressions(const shock::ShockExperiment& ex, std::uint64_t seed) {
  std::string out = regression_header();
  const graph::Partition truth = ex.true_partition();
  out += regression_row("type_market", metrics::bartik_analysis(ex.pre_panel, ex.post_panel, classify(ex, truth),
                                                                 &ex.pre.w, &ex.post.w));
  graph::Partition by_sector = truth;
  by_sector.job_group = ex.jobs.sector;
  by_sector.num_job_groups = static_cast<std::uint32_t>(ex.sector_given_market.cols());
  out += regression_row("type_sector", metrics::bartik_analysis(ex.pre_panel, ex.post_panel,
                                                                 classify(ex, by_sector), &ex.pre.w, &ex.post.w));
  Rng rng = make_stream(seed, "cli", "misclassify");
  const graph::Partition noisy = metrics::misclassify(truth, 0.5, 0.5, rng);
  out += regression_row("misclassified_50_50", metrics::bartik_analysis(ex.pre_panel, ex.post_panel,
                                                                         classify(ex, noisy), &ex.pre.w, &ex.post.w));
  return out;
}

void write_experiment(const shock::ShockExperiment& ex, const std::filesystem::path& dir, bool panels) {
  std::filesystem::create_directories(dir);
  write_text(dir / "manifest.json", shock::experiment_manifest_json(ex));
  std::string jobs = "job_id,market,sector,weight\n";
  for (std::size_t j = 0; j < ex.jobs.size(); ++j) {
    jobs += std::to_string(j) + "," + std::to_string(ex.jobs.market[j]) + "," + std::to_string(ex.jobs.sector[j]) +
            "," + format_double(ex.jobs.weight[j]) + "\n";
  }
  write_text(dir / "jobs.csv", jobs);
  if (!panels) return;
  std::ostringstream pre;
  write_panel_csv(ex.pre_panel, pre);
  write_text(dir / "pre_panel.csv", pre.str());
  std::ostringstream post;
  write_panel_csv(ex.post_panel, post);
  write_text(dir / "post_panel.csv", post.str());
}

namespace {

Eigen::VectorXd json_vector(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw InputError(std::string("manifest lacks ") + key);
  const auto& a = j.at(key);
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t k = 0; k < a.size(); ++k) v(static_cast<Eigen::Index>(k)) = a[k].get<double>();
  return v;
}

}  // namespace

shock::ShockExperiment read_experiment(const std::filesystem::path& dir) {
  std::ifstream manifest_in(dir / "manifest.json");
  if (!manifest_in) throw InputError("cannot open " + (dir / "manifest.json").string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(manifest_in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad manifest: ") + e.what());
  }
  shock::ShockExperiment ex;
  try {
    ex.seed = manifest.at("seed").get<std::uint64_t>();
    ex.paired = manifest.at("paired").get<bool>();
    ex.shock = shock::parse_shock(manifest.at("shock").at("spec").get<std::string>());
    ex.shock.label = manifest.at("shock").at("label").get<std::string>();
    ex.pre.w = json_vector(manifest.at("pre"), "w");
    ex.pre.p = json_vector(manifest.at("pre"), "p");
    ex.post.w = json_vector(manifest.at("post"), "w");
    ex.post.p = json_vector(manifest.at("post"), "p");
    ex.pre.converged = manifest.at("pre").at("converged").get<bool>();
    ex.post.converged = manifest.at("post").at("converged").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad manifest: ") + e.what());
  }
  ex.pre_panel = load_panel(dir / "pre_panel.csv");
  ex.post_panel = load_panel(dir / "post_panel.csv");
  const auto markets = static_cast<std::uint32_t>(ex.pre.w.size());
  const auto types = std::max(ex.pre_panel.num_types(), ex.post_panel.num_types());
  ex.pre_panel.set_dimensions(types, markets);
  ex.post_panel.set_dimensions(types, markets);

  std::ifstream jobs_in(dir / "jobs.csv");
  if (!jobs_in) throw InputError("cannot open " + (dir / "jobs.csv").string());
  csv::Reader reader(jobs_in);
  const auto header = reader.next();
  if (!header || *header != std::vector<std::string>{"job_id", "market", "sector", "weight"}) {
    throw InputError("jobs.csv needs header job_id,market,sector,weight");
  }
  std::uint32_t sectors = 0;
  while (auto row = reader.next()) {
    const auto line = reader.line_number();
    if (row->size() != 4) throw InputError("jobs.csv line " + std::to_string(line) + ": expected 4 fields");
    const auto id = csv::parse_int((*row)[0], "job_id", line);
    if (id != static_cast<long long>(ex.jobs.size())) throw InputError("jobs.csv ids must be 0, 1, 2, ...");
    const auto market = csv::parse_int((*row)[1], "market", line);
    const auto sector = csv::parse_int((*row)[2], "sector", line);
    if (market < 1 || market > static_cast<long long>(markets) || sector < 0) {
      throw InputError("jobs.csv line " + std::to_string(line) + ": market or sector out of range");
    }
    ex.jobs.market.push_back(static_cast<std::uint32_t>(market));
    ex.jobs.sector.push_back(static_cast<std::uint32_t>(sector));
    ex.jobs.weight.push_back(csv::parse_double((*row)[3], "weight", line));
    sectors = std::max(sectors, static_cast<std::uint32_t>(sector) + 1);
  }
  ex.jobs.jobs_of_market.resize(markets);
  for (std::size_t j = 0; j < ex.jobs.size(); ++j) {
    ex.jobs.jobs_of_market[ex.jobs.market[j] - 1].push_back(static_cast<std::uint32_t>(j));
  }
  ex.sector_given_market = Eigen::MatrixXd::Zero(markets, std::max<std::uint32_t>(sectors, 1));
  return ex;
}

}  // namespace labornet::cli
