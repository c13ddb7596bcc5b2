#include <benchmark/benchmark.h>

#include "labornet/blockmodel.hpp"
#include "labornet/equilibrium.hpp"
#include "labornet/rng.hpp"
#include "labornet/shock_lab.hpp"
#include "labornet/supply_mle.hpp"

using namespace labornet;

namespace {

// Planted bipartite network with `types` x `markets` blocks and mean
// worker degree near 6.
graph::BipartiteGraph planted_network(std::size_t workers, std::size_t jobs, std::uint32_t types,
                                      std::uint32_t markets) {
  std::vector<std::uint32_t> wg(workers), jg(jobs);
  for (std::size_t i = 0; i < workers; ++i) wg[i] = static_cast<std::uint32_t>(i % types);
  for (std::size_t j = 0; j < jobs; ++j) jg[j] = static_cast<std::uint32_t>(j % markets);
  sbm::BlockProbabilities P = sbm::BlockProbabilities::Ones(types, markets);
  for (std::uint32_t r = 0; r < types; ++r) P(r, r % markets) = 10.0;
  P *= 6.0 * static_cast<double>(markets) / (static_cast<double>(jobs) * (9.0 / types + markets));
  const std::vector<double> ww(workers, 1.0), jw(jobs, 1.0);
  Rng rng = make_stream(1, "bench", "network");
  return sbm::sample_network(graph::Partition::from_labels(wg, jg), P, ww, jw, rng);
}

void BM_DescriptionLength(benchmark::State& state) {
  const auto g = planted_network(static_cast<std::size_t>(state.range(0)), state.range(0) / 2, 6, 4);
  std::vector<std::uint32_t> wg(g.num_workers()), jg(g.num_jobs());
  for (std::size_t i = 0; i < wg.size(); ++i) wg[i] = static_cast<std::uint32_t>(i % 6);
  for (std::size_t j = 0; j < jg.size(); ++j) jg[j] = static_cast<std::uint32_t>(j % 4);
  const auto part = graph::Partition::from_labels(wg, jg);
  for (auto _ : state) benchmark::DoNotOptimize(sbm::description_length(g, part).total());
}
BENCHMARK(BM_DescriptionLength)->Arg(1000)->Arg(10000);

void BM_LogLikelihood(benchmark::State& state) {
  const auto g = planted_network(static_cast<std::size_t>(state.range(0)), state.range(0) / 2, 6, 4);
  std::vector<std::uint32_t> wg(g.num_workers()), jg(g.num_jobs());
  for (std::size_t i = 0; i < wg.size(); ++i) wg[i] = static_cast<std::uint32_t>(i % 6);
  for (std::size_t j = 0; j < jg.size(); ++j) jg[j] = static_cast<std::uint32_t>(j % 4);
  const auto part = graph::Partition::from_labels(wg, jg);
  const auto P = sbm::estimate_block_probabilities(g, part);
  for (auto _ : state) benchmark::DoNotOptimize(sbm::log_likelihood(g, part, P));
}
BENCHMARK(BM_LogLikelihood)->Arg(1000)->Arg(10000);

void BM_McmcSweep(benchmark::State& state) {
  const auto g = planted_network(static_cast<std::size_t>(state.range(0)), state.range(0) / 2, 6, 4);
  std::vector<std::uint32_t> wg(g.num_workers(), 0), jg(g.num_jobs(), 0);
  Rng init = make_stream(2, "bench", "init");
  for (auto& l : wg) l = static_cast<std::uint32_t>(init() % 8);
  for (auto& l : jg) l = static_cast<std::uint32_t>(init() % 8);
  sbm::BlockState block(g, graph::Partition::from_labels(wg, jg), 8, 8);
  Rng rng = make_stream(3, "bench", "sweep");
  sbm::SweepOptions options;
  for (auto _ : state) benchmark::DoNotOptimize(sbm::mcmc_sweep(block, options, rng).accepted);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.num_workers() + g.num_jobs()));
}
BENCHMARK(BM_McmcSweep)->Arg(1000)->Arg(10000);

void BM_SolveEquilibrium(benchmark::State& state) {
  shock::EconomySpec spec;
  spec.types = static_cast<std::uint32_t>(state.range(0));
  spec.markets = static_cast<std::uint32_t>(state.range(1));
  spec.sectors = 4;
  const auto b = shock::synthetic_economy(spec);
  for (auto _ : state) benchmark::DoNotOptimize(roy::solve_equilibrium(b.supply, b.technology, b.demand).w);
}
BENCHMARK(BM_SolveEquilibrium)->Args({30, 12})->Args({100, 40})->Unit(benchmark::kMillisecond);

void BM_FitSupply(benchmark::State& state) {
  shock::EconomySpec spec;
  spec.types = 10;
  spec.markets = 6;
  spec.sectors = 3;
  const auto b = shock::synthetic_economy(spec);
  const auto eq = roy::solve_equilibrium(b.supply, b.technology, b.demand);
  shock::SimulationConfig sim{static_cast<std::size_t>(state.range(0)), 4, 0.3, 5};
  const auto panel = shock::simulate_panel(b.supply, Eigen::MatrixXd::Constant(10, 6, 0.1), eq.w, sim);
  mle::FitConfig fit;
  fit.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(mle::fit_supply_parameters(panel, fit).theta.nu);
}
BENCHMARK(BM_FitSupply)->Arg(5000)->Arg(50000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
