#include <random>

#include "labornet/blockmodel.hpp"
#include "labornet/errors.hpp"

namespace labornet::sbm {

BipartiteGraph sample_network(const Partition& partition, const BlockProbabilities& P,
                              std::span<const double> worker_weights,
                              std::span<const double> job_weights, Rng& rng) {
  const std::size_t nw = partition.worker_group.size();
  const std::size_t nj = partition.job_group.size();
  if (worker_weights.size() != nw || job_weights.size() != nj) {
    throw InputError("degree vectors do not match the partition");
  }
  if (P.rows() != partition.num_worker_groups || P.cols() != partition.num_job_groups) {
    throw InputError("block probability matrix has the wrong shape");
  }
  if ((P.array() < 0.0).any() || !P.allFinite()) throw InputError("propensities must be finite and >= 0");

  struct Members {
    std::vector<Index> nodes;
    std::vector<double> weights;
    double total = 0.0;
  };
  auto collect = [](std::span<const std::uint32_t> labels, std::span<const double> weights,
                    std::uint32_t groups) {
    std::vector<Members> out(groups);
    for (std::size_t v = 0; v < labels.size(); ++v) {
      if (weights[v] < 0.0) throw InputError("degrees must be >= 0");
      if (weights[v] == 0.0) continue;
      out[labels[v]].nodes.push_back(static_cast<Index>(v));
      out[labels[v]].weights.push_back(weights[v]);
      out[labels[v]].total += weights[v];
    }
    return out;
  };
  const auto wm = collect(partition.worker_group, worker_weights, partition.num_worker_groups);
  const auto jm = collect(partition.job_group, job_weights, partition.num_job_groups);

  std::vector<graph::Edge> edges;
  for (std::uint32_t r = 0; r < partition.num_worker_groups; ++r) {
    if (wm[r].total == 0.0) continue;
    std::discrete_distribution<std::size_t> pick_worker(wm[r].weights.begin(), wm[r].weights.end());
    for (std::uint32_t t = 0; t < partition.num_job_groups; ++t) {
      const double mean = P(r, t) * wm[r].total * jm[t].total;
      if (!(mean > 0.0)) continue;
      const auto count = std::poisson_distribution<long long>(mean)(rng);
      if (count == 0) continue;
      std::discrete_distribution<std::size_t> pick_job(jm[t].weights.begin(), jm[t].weights.end());
      for (long long k = 0; k < count; ++k) {
        const auto i = wm[r].nodes[pick_worker(rng)];
        const auto j = jm[t].nodes[pick_job(rng)];
        edges.push_back({i, j, 1});
      }
    }
  }
  return BipartiteGraph::from_edges(nw, nj, std::move(edges));
}

}  // namespace labornet::sbm
