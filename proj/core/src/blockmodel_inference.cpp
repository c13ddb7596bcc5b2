#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "labornet/blockmodel.hpp"
#include "labornet/errors.hpp"
#include "labornet/parallel.hpp"

namespace labornet::sbm {
namespace {

std::uint32_t default_capacity(std::uint64_t active, std::uint32_t max_groups) {
  if (active == 0) return 1;
  if (max_groups > 0) return static_cast<std::uint32_t>(std::min<std::uint64_t>(active, max_groups));
  const auto automatic =
      std::max<std::uint64_t>(8, static_cast<std::uint64_t>(std::ceil(2.0 * std::sqrt(double(active)))));
  return static_cast<std::uint32_t>(std::min(active, automatic));
}

std::vector<std::uint32_t> ladder(std::uint64_t active, std::uint32_t lo, std::uint32_t hi) {
  std::vector<std::uint32_t> sizes;
  const double top = std::sqrt(static_cast<double>(active));
  for (std::uint32_t b = 1; b == 1 || b <= top; b *= 2) {
    const auto clipped = std::clamp(b, std::max(lo, 1u), std::max(hi, 1u));
    if (sizes.empty() || sizes.back() != clipped) sizes.push_back(clipped);
  }
  return sizes;
}

double temperature_at(const TemperatureSchedule& s, std::uint32_t sweep, std::uint32_t anneal) {
  if (s.kind == TemperatureSchedule::Kind::constant) return s.start;
  if (sweep >= anneal) return 0.0;
  if (anneal == 1) return s.start;
  const double x = static_cast<double>(sweep) / static_cast<double>(anneal - 1);
  return s.start * std::pow(s.end / s.start, x);
}

struct ChainResult {
  Partition partition;
  double bits = 0.0;
  RestartTrace trace;
  std::vector<double> best_by_sweep;
};

ChainResult run_chain(const BipartiteGraph& graph, const InferenceConfig& config,
                      std::uint32_t restart, std::uint32_t worker_cap, std::uint32_t job_cap,
                      std::uint32_t worker_groups, std::uint32_t job_groups) {
  Rng rng = make_stream(config.seed, "blockmodel", "restart", restart);
  std::uniform_int_distribution<std::uint32_t> pick_w(0, worker_groups - 1);
  std::uniform_int_distribution<std::uint32_t> pick_j(0, job_groups - 1);
  std::vector<std::uint32_t> w(graph.num_workers());
  std::vector<std::uint32_t> j(graph.num_jobs());
  for (auto& g : w) g = pick_w(rng);
  for (auto& g : j) g = pick_j(rng);
  BlockState state(graph, Partition::from_labels(std::move(w), std::move(j)), worker_cap, job_cap);

  const auto& b = config.bounds;
  SweepOptions options;
  options.epsilon = config.epsilon;
  options.min_worker_groups = b.worker_min;
  options.min_job_groups = b.job_min;

  const auto total = config.sweeps_per_restart;
  const auto anneal = config.schedule.kind == TemperatureSchedule::Kind::constant
                          ? total
                          : static_cast<std::uint32_t>(std::lround(config.schedule.anneal_fraction * total));

  ChainResult out;
  out.bits = state.recompute();
  out.partition = state.partition();
  out.trace = {restart, worker_groups, job_groups, 0, out.bits};
  for (std::uint32_t sweep = 0; sweep < total; ++sweep) {
    options.temperature = temperature_at(config.schedule, sweep, anneal);
    const auto stats = mcmc_sweep(state, options, rng);
    std::size_t merges = 0;
    if (options.temperature == 0.0 || sweep + 1 == anneal) {
      merges += greedy_merge(state, Side::worker, b.worker_min);
      merges += greedy_merge(state, Side::job, b.job_min);
    }
    const double bits = state.recompute();
    if (bits < out.bits) {
      out.bits = bits;
      out.partition = state.partition();
    }
    out.best_by_sweep.push_back(out.bits);
    out.trace.sweeps = sweep + 1;
    if (options.temperature == 0.0 && stats.accepted == 0 && merges == 0) break;
  }
  out.trace.best_bits = out.bits;
  return out;
}

}  // namespace

InferenceResult infer_partition(const BipartiteGraph& graph, const InferenceConfig& config) {
  if (config.restarts < 1) throw InputError("restarts must be >= 1");
  if (config.sweeps_per_restart < 1) throw InputError("sweeps_per_restart must be >= 1");
  if (graph.total_edges() == 0) throw InputError("empty graph");
  const auto& b = config.bounds;
  if (b.worker_min < 1 || b.job_min < 1 || (b.worker_max && b.worker_max < b.worker_min) ||
      (b.job_max && b.job_max < b.job_min)) {
    throw InputError("inconsistent group bounds");
  }
  if (config.epsilon <= 0.0 || config.epsilon > 1.0) throw InputError("epsilon must be in (0, 1]");

  std::uint64_t active_w = 0;
  std::uint64_t active_j = 0;
  for (auto d : graph.worker_degrees()) active_w += d > 0;
  for (auto d : graph.job_degrees()) active_j += d > 0;
  const auto cap_w = default_capacity(active_w, b.worker_max);
  const auto cap_j = default_capacity(active_j, b.job_max);
  if (b.worker_min > cap_w || b.job_min > cap_j) throw InputError("group minimum exceeds node count");
  const auto ladder_w = ladder(active_w, b.worker_min, cap_w);
  const auto ladder_j = ladder(active_j, b.job_min, cap_j);

  std::vector<ChainResult> chains(config.restarts);
  parallel_for(config.restarts, [&](std::size_t k) {
    const auto r = static_cast<std::uint32_t>(k);
    chains[k] = run_chain(graph, config, r, cap_w, cap_j, ladder_w[k % ladder_w.size()],
                          ladder_j[k % ladder_j.size()]);
  });

  InferenceResult result;
  result.config = config;
  std::size_t best = 0;
  for (std::size_t k = 0; k < chains.size(); ++k) {
    result.trace.push_back(chains[k].trace);
    if (chains[k].bits < chains[best].bits) best = k;
  }
  result.best_restart = static_cast<std::uint32_t>(best);
  result.partition = chains[best].partition;
  result.best_bits_by_sweep = chains[best].best_by_sweep;
  result.description_length = description_length(graph, result.partition);
  result.block_probabilities = estimate_block_probabilities(graph, result.partition);
  result.log_likelihood = log_likelihood(graph, result.partition, result.block_probabilities);
  return result;
}

void write_inference_json(const InferenceResult& result, std::ostream& out) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["description_length_bits"] = result.description_length.total();
  j["data_bits"] = result.description_length.data_bits;
  j["model_bits"] = result.description_length.model_bits;
  j["log_likelihood"] = result.log_likelihood;
  j["I"] = result.partition.num_worker_groups;
  j["Gamma"] = result.partition.num_job_groups;
  ordered_json P = ordered_json::array();
  for (Eigen::Index r = 0; r < result.block_probabilities.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index t = 0; t < result.block_probabilities.cols(); ++t) {
      row.push_back(result.block_probabilities(r, t));
    }
    P.push_back(row);
  }
  j["block_probabilities"] = P;
  j["best_restart"] = result.best_restart;
  ordered_json trace = ordered_json::array();
  for (const auto& t : result.trace) {
    trace.push_back({{"restart", t.restart},
                     {"initial_worker_groups", t.initial_worker_groups},
                     {"initial_job_groups", t.initial_job_groups},
                     {"sweeps", t.sweeps},
                     {"best_bits", t.best_bits}});
  }
  j["restart_trace"] = trace;
  j["seed"] = result.config.seed;
  const auto& c = result.config;
  j["config"] = {
      {"restarts", c.restarts},
      {"sweeps_per_restart", c.sweeps_per_restart},
      {"epsilon", c.epsilon},
      {"worker_groups_min", c.bounds.worker_min},
      {"worker_groups_max", c.bounds.worker_max},
      {"job_groups_min", c.bounds.job_min},
      {"job_groups_max", c.bounds.job_max},
      {"schedule", c.schedule.kind == TemperatureSchedule::Kind::constant ? "constant" : "geometric"},
      {"temperature_start", c.schedule.start},
      {"temperature_end", c.schedule.end},
      {"anneal_fraction", c.schedule.anneal_fraction}};
  out << j.dump(2) << '\n';
}

}  // namespace labornet::sbm
