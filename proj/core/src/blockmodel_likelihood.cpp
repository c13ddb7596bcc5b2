#include <cmath>
#include <numbers>

#include "labornet/blockmodel.hpp"
#include "labornet/errors.hpp"
#include "math_util.hpp"

namespace labornet::sbm {

using detail::log_gamma;
using detail::xlogx;

namespace {

struct GroupDegrees {
  Eigen::VectorXd worker;
  Eigen::VectorXd job;
};

GroupDegrees group_degrees(const BipartiteGraph& graph, const Partition& partition) {
  GroupDegrees g{Eigen::VectorXd::Zero(partition.num_worker_groups),
                 Eigen::VectorXd::Zero(partition.num_job_groups)};
  for (std::size_t i = 0; i < graph.num_workers(); ++i) {
    g.worker(partition.worker_group[i]) += static_cast<double>(graph.worker_degree(static_cast<Index>(i)));
  }
  for (std::size_t j = 0; j < graph.num_jobs(); ++j) {
    g.job(partition.job_group[j]) += static_cast<double>(graph.job_degree(static_cast<Index>(j)));
  }
  return g;
}

struct SideCounts {
  double active = 0.0;
  double groups = 0.0;
  double label_terms = 0.0;   // -sum ln n_r!
  double degree_terms = 0.0;  // sum ln C(n_r + e_r - 1, e_r)
};

SideCounts side_counts(std::span<const std::uint64_t> degree, std::span<const std::uint32_t> label,
                       std::uint32_t groups) {
  std::vector<double> size(groups, 0.0);
  std::vector<double> total(groups, 0.0);
  SideCounts s;
  for (std::size_t v = 0; v < degree.size(); ++v) {
    if (degree[v] == 0) continue;
    size[label[v]] += 1.0;
    total[label[v]] += static_cast<double>(degree[v]);
    s.active += 1.0;
  }
  for (std::uint32_t r = 0; r < groups; ++r) {
    if (size[r] == 0.0) continue;
    s.groups += 1.0;
    s.label_terms -= log_gamma(size[r] + 1.0);
    s.degree_terms += log_gamma(size[r] + total[r]) - log_gamma(total[r] + 1.0) - log_gamma(size[r]);
  }
  return s;
}

double labels_nats(const SideCounts& s) {
  if (s.active == 0.0) return 0.0;
  return std::log(s.active) + detail::log_choose(s.active - 1.0, s.groups - 1.0) +
         log_gamma(s.active + 1.0) + s.label_terms;
}

}  // namespace

double log_likelihood(const BipartiteGraph& graph, const Partition& partition,
                      const BlockProbabilities& P) {
  graph::check_dimensions(graph, partition);
  if (P.rows() != partition.num_worker_groups || P.cols() != partition.num_job_groups) {
    throw InputError("block probability matrix has the wrong shape");
  }
  double ll = 0.0;
  for (const auto& e : graph.edges()) {
    const double p = P(partition.worker_group[e.worker], partition.job_group[e.job]);
    if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
    const double mean = static_cast<double>(graph.worker_degree(e.worker)) *
                        static_cast<double>(graph.job_degree(e.job)) * p;
    ll += e.count * std::log(mean) - log_gamma(e.count + 1.0);
  }
  const auto g = group_degrees(graph, partition);
  ll -= g.worker.dot(P * g.job);
  return ll;
}

BlockProbabilities estimate_block_probabilities(const BipartiteGraph& graph,
                                                const Partition& partition) {
  const auto counts = graph::block_edge_counts(graph, partition);
  const auto g = group_degrees(graph, partition);
  BlockProbabilities P = BlockProbabilities::Zero(counts.rows(), counts.cols());
  for (Eigen::Index r = 0; r < counts.rows(); ++r) {
    for (Eigen::Index t = 0; t < counts.cols(); ++t) {
      const double denom = g.worker(r) * g.job(t);
      if (denom > 0.0) P(r, t) = static_cast<double>(counts(r, t)) / denom;
    }
  }
  return P;
}

DescriptionLength description_length(const BipartiteGraph& graph, const Partition& partition) {
  const auto counts = graph::block_edge_counts(graph, partition);
  const auto g = group_degrees(graph, partition);

  // ln L at the profile estimate: edge constant + sum e ln(e / (D_r D_t)) - E.
  double ll = 0.0;
  for (const auto& e : graph.edges()) {
    ll += e.count * std::log(static_cast<double>(graph.worker_degree(e.worker)) *
                             static_cast<double>(graph.job_degree(e.job))) -
          log_gamma(e.count + 1.0);
  }
  for (Eigen::Index r = 0; r < counts.rows(); ++r) {
    for (Eigen::Index t = 0; t < counts.cols(); ++t) ll += xlogx(static_cast<double>(counts(r, t)));
  }
  for (Eigen::Index r = 0; r < g.worker.size(); ++r) ll -= xlogx(g.worker(r));
  for (Eigen::Index t = 0; t < g.job.size(); ++t) ll -= xlogx(g.job(t));
  const double edges = static_cast<double>(graph.total_edges());
  ll -= edges;

  const auto w = side_counts(graph.worker_degrees(), partition.worker_group, partition.num_worker_groups);
  const auto j = side_counts(graph.job_degrees(), partition.job_group, partition.num_job_groups);
  double model = labels_nats(w) + labels_nats(j) + w.degree_terms + j.degree_terms;
  const double cells = w.groups * j.groups;
  if (cells > 0.0) model += detail::log_choose(cells + edges - 1.0, edges);

  return {-ll / std::numbers::ln2, model / std::numbers::ln2};
}

}  // namespace labornet::sbm
