#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "labornet/bundle.hpp"
#include "labornet/csv.hpp"
#include "labornet/errors.hpp"
#include "labornet/log.hpp"

namespace labornet::cli {

using csv::format_double;

int cmd_shock(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
  const ModelBundle bundle = read_bundle(config.required("bundle"));
  const auto spec = shock::parse_shock(config.required("shock"));
  const auto ex = shock::run_shock_experiment(bundle, spec, experiment_from(config));
  write_experiment(ex, out_dir, true);
  write_text(out_dir / "regression.csv", experiment_regressions(ex, config.unsigned_int("seed")));
  log << "shock: " << spec.label << " done\n";
  return kExitOk;
}

int cmd_sweep(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
  const ModelBundle bundle = read_bundle(config.required("bundle"));
  std::vector<shock::ShockSpec> shocks;
  for (const auto& text : config.items("shocks", ';')) shocks.push_back(shock::parse_shock(text));
  if (shocks.empty()) {
    shocks = shock::sector_shock_grid(static_cast<std::uint32_t>(bundle.technology.sectors()), config.numbers("factors"));
  }
  if (shocks.empty()) throw InputError("sweep needs shocks or factors");
  const bool panels = config.flag("write_panels");
  const auto entries = shock::shock_sweep(bundle, shocks, experiment_from(config));

  std::string summary = "index,shock,classification,intercept,slope,se_intercept,se_slope,robust_se_intercept,"
                        "robust_se_slope,n,r2,error\n";
  bool failed = false;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    std::ostringstream name;
    name << std::setw(3) << std::setfill('0') << k;
    const std::string prefix = name.str() + "," + csv::quote_if_needed(e.shock.label) + ",";
    if (!e.experiment) {
      failed = true;
      summary += prefix + ",,,,,,,,,," + csv::quote_if_needed(e.error) + "\n";
      continue;
    }
    const auto dir = out_dir / ("shock_" + name.str());
    write_experiment(*e.experiment, dir, panels);
    const std::string table = experiment_regressions(*e.experiment, derive_seed(config.unsigned_int("seed"), "cli", "sweep", k));
    write_text(dir / "regression.csv", table);
    std::istringstream rows(table);
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) summary += prefix + line + ",\n";
  }
  write_text(out_dir / "summary.csv", summary);
  log << "sweep: " << entries.size() << " experiments" << (failed ? " with failures" : "") << "\n";
  return failed ? kExitNumerical : kExitOk;
}

namespace {

std::vector<std::uint32_t> random_labels(std::size_t n, std::uint32_t groups, Rng& rng) {
  std::uniform_int_distribution<std::uint32_t> pick(0, groups - 1);
  std::vector<std::uint32_t> out(n);
  for (auto& v : out) v = pick(rng);
  return out;
}

// Job index to market, read off employed observations.
std::vector<std::uint32_t> job_markets(const WorkerPanel& panel) {
  const auto jobs = integer_label(panel, "job");
  std::uint32_t count = 0;
  for (const auto j : jobs) {
    if (j != metrics::kMissing) count = std::max(count, j + 1);
  }
  std::vector<std::uint32_t> out(count, metrics::kMissing);
  const auto& obs = panel.observations();
  for (std::size_t k = 0; k < obs.size(); ++k) {
    if (jobs[k] == metrics::kMissing) continue;
    auto& slot = out[jobs[k]];
    if (slot != metrics::kMissing && slot != obs[k].market - 1) {
      throw InputError("job " + std::to_string(jobs[k]) + " appears in two markets");
    }
    slot = obs[k].market - 1;
  }
  for (auto& v : out) {
    if (v == metrics::kMissing) v = 0;
  }
  return out;
}

std::string hhi_csv(const metrics::HhiProfile& p) {
  std::vector<std::uint32_t> order;
  for (Eigen::Index g = 0; g < p.hhi.size(); ++g) {
    if (std::isfinite(p.hhi(g))) order.push_back(static_cast<std::uint32_t>(g));
  }
  std::stable_sort(order.begin(), order.end(), [&p](std::uint32_t a, std::uint32_t b) { return p.hhi(a) < p.hhi(b); });
  std::string out = "group,hhi,size\n";
  for (const auto g : order) out += std::to_string(g) + "," + format_double(p.hhi(g)) + "," + format_double(p.sizes(g)) + "\n";
  return out;
}

}  // namespace

int cmd_analyze(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
  const std::uint64_t seed = config.unsigned_int("seed");
  std::optional<shock::ShockExperiment> ex;
  if (!config.text("experiment").empty()) ex = read_experiment(config.text("experiment"));
  std::optional<WorkerPanel> panel;
  if (!config.text("panel").empty()) {
    panel = load_panel(config.text("panel"));
  } else if (ex) {
    panel = ex->pre_panel;
  }
  if (!panel) throw InputError("analyze needs experiment or panel");

  std::set<std::string> wanted;
  for (const auto& a : config.items("analyses")) wanted.insert(a);
  if (wanted.count("auto")) {
    wanted = {"hhi", "crosstab"};
    if (ex) wanted.insert({"regression", "sweep"});
    if (!config.text("panel").empty() && panel->num_periods() >= 2) wanted.insert("flows");
  }
  for (const auto& a : wanted) {
    if (a != "hhi" && a != "crosstab" && a != "regression" && a != "sweep" && a != "flows") {
      throw InputError("unknown analysis " + a);
    }
  }
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  const auto types = panel->num_types();
  const auto markets = panel->num_markets();
  const auto random_seeds = config.unsigned_int("random_seeds");

  if (wanted.count("hhi")) {
    const auto rows = metrics::type_classes(*panel);
    const auto cols = metrics::market_classes(*panel);
    const auto by_type = metrics::hhi_profile(rows, cols, types, markets);
    write_text(out_dir / "hhi_worker_types.csv", hhi_csv(by_type));
    write_text(out_dir / "hhi_markets.csv", hhi_csv(metrics::hhi_profile(cols, rows, markets, types)));
    std::string table = "definition,seed,mean,weighted_mean\n";
    table += "market,," + format_double(by_type.mean) + "," + format_double(by_type.weighted_mean) + "\n";
    if (panel->has_label("job")) {
      const auto jm = job_markets(*panel);
      for (std::uint64_t s = 0; s < random_seeds; ++s) {
        Rng rng = make_stream(seed, "cli", "random-jobs", s);
        const auto labels = random_labels(jm.size(), markets, rng);
        const auto random = metrics::hhi_profile(rows, metrics::job_classes(*panel, labels), types, markets);
        table += "random," + std::to_string(s) + "," + format_double(random.mean) + "," +
                 format_double(random.weighted_mean) + "\n";
      }
    }
    write_text(out_dir / "hhi_summary.csv", table);
    summary["hhi_mean"] = by_type.mean;
  }

  if (wanted.count("crosstab")) {
    const auto& column = config.required("crosstab_label");
    const auto table = metrics::classification_crosstab(metrics::type_classes(*panel), types, panel->label(column),
                                                        config.unsigned_int("top_n"));
    std::string out = "group,rank,label,count,share\n";
    for (std::size_t g = 0; g < table.size(); ++g) {
      for (std::size_t r = 0; r < table[g].size(); ++r) {
        out += std::to_string(g) + "," + std::to_string(r + 1) + "," + csv::quote_if_needed(table[g][r].label) + "," +
               format_double(table[g][r].count) + "," + format_double(table[g][r].share) + "\n";
      }
    }
    write_text(out_dir / "crosstab.csv", out);
  }

  if (wanted.count("flows")) {
    const auto all = metrics::job_transitions(*panel);
    const std::uint32_t split = 1 + (panel->num_periods() - 1) / 2;
    std::vector<metrics::Transition> in_sample;
    std::vector<metrics::Transition> out_sample;
    for (const auto& t : all) (t.period <= split ? in_sample : out_sample).push_back(t);
    const auto jm = job_markets(*panel);
    Eigen::VectorXd employment = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(jm.size()));
    const auto jobs = integer_label(*panel, "job");
    for (const auto j : jobs) {
      if (j != metrics::kMissing) employment(j) += 1.0;
    }
    std::string out = "definition,seed,norm,mean,weighted_mean,origins\n";
    const auto score = [&](const std::string& name, const std::string& s, const std::vector<std::uint32_t>& cls) {
      for (const auto norm : {metrics::Norm::l1, metrics::Norm::l2}) {
        const auto e = metrics::flow_prediction_error(cls, in_sample, out_sample, employment, norm);
        out += name + "," + s + "," + (norm == metrics::Norm::l1 ? "l1" : "l2") + "," + format_double(e.mean) + "," +
               format_double(e.weighted_mean) + "," + std::to_string(e.origins) + "\n";
      }
    };
    score("market", "", jm);
    for (std::uint64_t s = 0; s < random_seeds; ++s) {
      Rng rng = make_stream(seed, "cli", "random-flows", s);
      score("random", std::to_string(s), random_labels(jm.size(), markets, rng));
    }
    write_text(out_dir / "flows.csv", out);
  }

  if (wanted.count("regression")) {
    if (!ex) throw InputError("regression analysis needs an experiment");
    write_text(out_dir / "regression.csv", experiment_regressions(*ex, seed));
  }

  if (wanted.count("sweep")) {
    if (!ex) throw InputError("sweep analysis needs an experiment");
    metrics::SweepConfig sc;
    sc.step = config.number("step");
    sc.seeds = static_cast<std::uint32_t>(config.unsigned_int("sweep_seeds"));
    sc.root_seed = seed;
    const auto cells = metrics::misclassification_sweep(*ex, sc);
    std::string out = "frac_workers,frac_jobs,seed,slope,r2\n";
    for (const auto& c : cells) {
      out += format_double(c.frac_workers) + "," + format_double(c.frac_jobs) + "," + std::to_string(c.seed) + "," +
             (std::isfinite(c.slope) ? format_double(c.slope) : std::string()) + "," + format_double(c.r2) + "\n";
    }
    write_text(out_dir / "sweep.csv", out);
    std::string marg = "axis,fraction,mean_r2\n";
    for (const bool worker_axis : {true, false}) {
      std::vector<double> f;
      std::vector<double> r;
      for (const auto& [frac, r2] : metrics::marginal_r2(cells, worker_axis)) {
        marg += std::string(worker_axis ? "workers" : "jobs") + "," + format_double(frac) + "," + format_double(r2) + "\n";
        f.push_back(frac);
        r.push_back(r2);
      }
      summary[worker_axis ? "spearman_workers" : "spearman_jobs"] = f.size() >= 2 ? metrics::spearman(f, r) : 0.0;
    }
    write_text(out_dir / "sweep_marginals.csv", marg);
  }
  write_text(out_dir / "analysis.json", summary.dump(2) + "\n");
  log << "analyze: wrote " << wanted.size() << " analyses\n";
  return kExitOk;
}

}  // namespace labornet::cli
