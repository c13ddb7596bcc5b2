#include "labornet_cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "labornet/errors.hpp"
#include "labornet/log.hpp"
#include "labornet/parallel.hpp"

namespace labornet::cli {

namespace {

std::vector<KeySpec> solver_keys() { return {{"rho", "0.1"}, {"tol", "1e-8"}, {"max_iter", "50000"}}; }

std::vector<KeySpec> experiment_keys() {
  std::vector<KeySpec> keys = {{"bundle", ""},        {"workers", "5000"},        {"lambda", "0.3"},
                               {"pre_periods", "1"},  {"post_periods", "1"},      {"paired", "true"},
                               {"jobs_per_market", "20"}, {"job_weight_sd", "0.5"}, {"sectors_from_equilibrium", "true"}};
  for (auto& k : solver_keys()) keys.push_back(k);
  return keys;
}

std::vector<KeySpec> join(std::vector<KeySpec> a, const std::vector<KeySpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

const std::vector<Command>& commands() {
  static const std::vector<Command> table = {
      {"cluster", "infer worker types and markets from an edge list",
       {{"edges", ""},
        {"min_job_workers", "5"},
        {"restarts", "8"},
        {"sweeps", "200"},
        {"epsilon", "0.1"},
        {"schedule", "geometric"},
        {"anneal_start", "1"},
        {"anneal_end", "0.02"},
        {"anneal_fraction", "0.5"},
        {"worker_groups_min", "1"},
        {"worker_groups_max", "0"},
        {"job_groups_min", "1"},
        {"job_groups_max", "0"},
        {"truth", ""}},
       cmd_cluster},
      {"solve", "solve the equilibrium of a parameter bundle", join({{"bundle", ""}, {"trace", "false"}}, solver_keys()),
       cmd_solve},
      {"estimate", "estimate labor supply parameters from a panel",
       join({{"panel", ""},
             {"pseudo_count", "1e-6"},
             {"grad_tol", "1e-6"},
             {"restarts", "3"},
             {"jitter", "0.1"},
             {"nu_min", "1e-4"},
             {"nu_max", "1e6"},
             {"max_outer", "50"},
             {"k", "1"},
             {"k_grid", ""},
             {"bundle", ""},
             {"correlation_bins", "20"}},
            solver_keys()),
       cmd_estimate},
      {"simulate", "simulate a worker panel at the equilibrium of a bundle",
       join({{"bundle", ""},
             {"workers", "1000"},
             {"periods", "5"},
             {"lambda", "0.3"},
             {"jobs_per_market", "0"},
             {"job_weight_sd", "0.5"},
             {"sectors_from_equilibrium", "true"}},
            solver_keys()),
       cmd_simulate},
      {"shock", "run one pre/post demand shock experiment", join({{"shock", ""}}, experiment_keys()), cmd_shock},
      {"sweep", "run a set of shock experiments",
       join({{"shocks", ""}, {"factors", "2,0.5"}, {"write_panels", "false"}}, experiment_keys()), cmd_sweep},
      {"analyze", "concentration, flow, cross-tab, Bartik and misclassification tables",
       {{"experiment", ""},
        {"panel", ""},
        {"analyses", "auto"},
        {"step", "0.05"},
        {"sweep_seeds", "5"},
        {"random_seeds", "5"},
        {"top_n", "10"},
        {"crosstab_label", "sector"}},
       cmd_analyze},
  };
  return table;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  log::init_from_env();
  CLI::App app{"labornet: worker-job network clustering and labor market shock analysis"};
  app.require_subcommand(1);

  struct Flags {
    std::string config;
    std::string seed;
    std::string threads;
    std::string out;
    std::vector<std::string> sets;
  };
  std::vector<Flags> flags(commands().size());
  std::vector<CLI::App*> subs;
  for (std::size_t c = 0; c < commands().size(); ++c) {
    const auto& cmd = commands()[c];
    auto* sub = app.add_subcommand(cmd.name, cmd.summary);
    sub->add_option("--config", flags[c].config, "key=value config file");
    sub->add_option("--seed", flags[c].seed, "root seed");
    sub->add_option("--threads", flags[c].threads, "thread cap (0 = all cores)");
    sub->add_option("--out", flags[c].out, "output directory");
    sub->add_option("--set", flags[c].sets, "override one key, KEY=VALUE");
    std::string keys;
    for (const auto& k : cmd.keys) keys += (keys.empty() ? "" : ", ") + k.key;
    sub->footer("Config keys: " + keys);
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  std::size_t chosen = 0;
  while (!subs[chosen]->parsed()) ++chosen;
  const Command& cmd = commands()[chosen];
  const Flags& f = flags[chosen];
  try {
    RunConfig config(join(global_keys(), cmd.keys));
    if (!f.config.empty()) config.load_file(f.config);
    for (const auto& s : f.sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw InputError("--set expects KEY=VALUE, got " + s);
      config.set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (!f.seed.empty()) config.set("seed", f.seed);
    if (!f.threads.empty()) config.set("threads", f.threads);
    if (!f.out.empty()) config.set("out", f.out);
    if (!config.text("log_level").empty()) log::set_level(config.text("log_level"));
    set_thread_limit(static_cast<unsigned>(config.unsigned_int("threads")));
    config.unsigned_int("seed");

    const std::filesystem::path out_dir = config.required("out");
    std::filesystem::create_directories(out_dir);
    write_text(out_dir / "config.resolved", config.resolved());
    return cmd.run(config, out_dir, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace labornet::cli
