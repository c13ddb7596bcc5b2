#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <set>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "labornet/graph.hpp"
#include "labornet/rng.hpp"

namespace labornet::sbm {

using graph::BipartiteGraph;
using graph::Index;
using graph::Partition;

// I x Gamma match propensities per unit d_i * d_j.
using BlockProbabilities = Eigen::MatrixXd;

// Poisson log-likelihood in nats over stored edges plus the closed-form
// zero-edge mass. An edge inside a block with zero propensity gives -inf.
double log_likelihood(const BipartiteGraph& graph, const Partition& partition,
                      const BlockProbabilities& P);

inline bool is_impossible(double log_likelihood) {
  return log_likelihood == -std::numeric_limits<double>::infinity();
}

// e_rt / (D_r D_t); cells with a zero denominator are 0.
BlockProbabilities estimate_block_probabilities(const BipartiteGraph& graph,
                                                const Partition& partition);

// Description length in bits. Data part: minus the Poisson log-likelihood at
// the profile estimate. Model part, counted over nodes with positive degree
// only (N nodes and B nonempty groups per side):
//   side labels   ln N + ln C(N-1, B-1) + ln N! - sum_r ln n_r!
//   side degrees  sum_r ln C(n_r + e_r - 1, e_r)
//   count matrix  ln C(B_w B_j + E - 1, E)
struct DescriptionLength {
  double data_bits = 0.0;
  double model_bits = 0.0;
  double total() const { return data_bits + model_bits; }
};

DescriptionLength description_length(const BipartiteGraph& graph, const Partition& partition);

enum class Side { worker, job };

// Neighbor-group aggregate of one node, reused for delta and proposal terms.
struct NodeContext {
  Side side = Side::worker;
  Index node = 0;
  std::uint32_t from = 0;
  std::uint64_t degree = 0;
  std::vector<std::pair<std::uint32_t, std::uint64_t>> groups;
};

// Block counts and group sizes for O(degree) single-node updates. Groups live
// in fixed slots; a slot is empty when it holds no node. Zero-degree nodes sit
// outside every slot and never move.
class BlockState {
 public:
  BlockState(const BipartiteGraph& graph, const Partition& partition,
             std::uint32_t worker_capacity, std::uint32_t job_capacity);

  const BipartiteGraph& graph() const { return *graph_; }

  double bits() const { return bits_; }
  // Recomputes every term from the counts; removes accumulated rounding.
  double recompute();

  std::uint32_t group_of(Side side, Index node) const;
  bool movable(Side side, Index node) const;
  std::uint32_t num_groups(Side side) const;
  std::uint32_t capacity(Side side) const;
  std::uint64_t active_nodes(Side side) const;
  const std::vector<Index>& movable_nodes(Side side) const;
  const std::vector<std::uint32_t>& nonempty_groups(Side side) const;
  // Lowest empty slot, or capacity when every slot is occupied.
  std::uint32_t empty_group(Side side) const;
  std::uint64_t group_size(Side side, std::uint32_t group) const;
  std::uint64_t group_total(Side side, std::uint32_t group) const;
  std::int64_t block_count(std::uint32_t worker_group, std::uint32_t job_group) const;

  void load_context(Side side, Index node, NodeContext& ctx) const;
  // Change in description length (bits) if ctx.node moves to `to`.
  double move_delta(const NodeContext& ctx, std::uint32_t to) const;
  void apply_move(const NodeContext& ctx, std::uint32_t to);

  double merge_delta(Side side, std::uint32_t keep, std::uint32_t absorb) const;
  void apply_merge(Side side, std::uint32_t keep, std::uint32_t absorb);

  // Compacted by first appearance; zero-degree nodes form a trailing group.
  Partition partition() const;

  // Counts agree with the labels and bits() with a fresh evaluation.
  bool consistent(double tolerance = 1e-7) const;

 private:
  struct SideData {
    std::vector<std::uint32_t> slot;
    std::vector<std::uint64_t> size;
    std::vector<std::uint64_t> total;
    std::vector<std::uint32_t> nonempty;
    std::vector<std::uint32_t> position;
    std::set<std::uint32_t> empty;
    std::vector<Index> movable;
    std::uint64_t active = 0;
  };

  SideData& data(Side side) { return side == Side::worker ? workers_ : jobs_; }
  const SideData& data(Side side) const { return side == Side::worker ? workers_ : jobs_; }
  std::int64_t cell(Side side, std::uint32_t own, std::uint32_t other) const;
  std::int64_t& cell(Side side, std::uint32_t own, std::uint32_t other);
  void set_size(SideData& d, std::uint32_t slot, std::uint64_t size);
  double log_gamma(std::uint64_t n) const;
  double labels_nats(std::uint64_t n, std::uint64_t groups) const;
  double group_nats(std::uint64_t size, std::uint64_t total) const;
  double matrix_nats(std::uint64_t cells) const;

  const BipartiteGraph* graph_;
  SideData workers_;
  SideData jobs_;
  std::uint32_t job_capacity_;
  std::vector<std::int64_t> counts_;
  std::vector<double> log_gamma_;
  double edge_constant_ = 0.0;
  double bits_ = 0.0;
};

struct SweepOptions {
  // Zero selects greedy descent: accept iff delta <= 0.
  double temperature = 1.0;
  // Weight of the uniform component in the proposal mixture.
  double epsilon = 0.1;
  // Multiply by the reverse/forward proposal ratio.
  bool hastings = true;
  std::uint32_t min_worker_groups = 1;
  std::uint32_t min_job_groups = 1;
};

struct SweepStats {
  std::size_t proposed = 0;
  std::size_t accepted = 0;
};

// One proposal for every movable node, in random order.
SweepStats mcmc_sweep(BlockState& state, const SweepOptions& options, Rng& rng);

// Applies the best pairwise merge on one side while it lowers the
// description length. Returns the number of merges.
std::size_t greedy_merge(BlockState& state, Side side, std::uint32_t min_groups);

struct GroupBounds {
  std::uint32_t worker_min = 1;
  std::uint32_t worker_max = 0;  // 0: automatic
  std::uint32_t job_min = 1;
  std::uint32_t job_max = 0;
};

struct TemperatureSchedule {
  enum class Kind { constant, geometric };
  Kind kind = Kind::geometric;
  double start = 1.0;
  double end = 0.02;
  // Share of sweeps spent annealing; greedy sweeps and merges follow.
  double anneal_fraction = 0.5;
};

struct InferenceConfig {
  std::uint32_t restarts = 8;
  std::uint32_t sweeps_per_restart = 200;
  std::uint64_t seed = 1;
  GroupBounds bounds;
  TemperatureSchedule schedule;
  double epsilon = 0.1;
};

struct RestartTrace {
  std::uint32_t restart = 0;
  std::uint32_t initial_worker_groups = 0;
  std::uint32_t initial_job_groups = 0;
  std::uint32_t sweeps = 0;
  double best_bits = 0.0;
};

struct InferenceResult {
  Partition partition;
  DescriptionLength description_length;
  double log_likelihood = 0.0;
  BlockProbabilities block_probabilities;
  std::vector<RestartTrace> trace;
  // Running best per sweep of the winning restart.
  std::vector<double> best_bits_by_sweep;
  std::uint32_t best_restart = 0;
  InferenceConfig config;
};

// Independent chains from random partitions sized by a geometric ladder
// (1, 2, 4, ... up to sqrt N per side); the lowest description length wins,
// ties going to the lower restart index.
InferenceResult infer_partition(const BipartiteGraph& graph, const InferenceConfig& config);

void write_inference_json(const InferenceResult& result, std::ostream& out);

// Poisson edge counts A_ij ~ Poisson(d_i d_j P); each block draws its total
// then spreads it by degree products. Ids are decimal indices.
BipartiteGraph sample_network(const Partition& partition, const BlockProbabilities& P,
                              std::span<const double> worker_weights,
                              std::span<const double> job_weights, Rng& rng);

struct Agreement {
  double ari = 0.0;
  double nmi = 0.0;
};

struct PartitionAgreement {
  Agreement workers;
  Agreement jobs;
};

Agreement compare_labels(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);
PartitionAgreement compare_partitions(const Partition& a, const Partition& b);

}  // namespace labornet::sbm
