#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace labornet::graph {

using Index = std::uint32_t;

// Opaque string ids mapped to dense 0-based indices.
class IdIndex {
 public:
  IdIndex() = default;
  explicit IdIndex(std::vector<std::string> ids);

  Index intern(std::string_view id);
  std::optional<Index> find(std::string_view id) const;
  const std::string& id(Index index) const { return ids_[index]; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, Index> lookup_;
};

struct Edge {
  Index worker;
  Index job;
  std::uint32_t count;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
  Index node;
  std::uint32_t count;
};

// Immutable worker-job multigraph. Edges are unique per (worker, job), sorted
// by (worker, job), and carry a multiplicity >= 1.
class BipartiteGraph {
 public:
  // Duplicate (worker, job) pairs are merged by summing counts.
  BipartiteGraph(IdIndex workers, IdIndex jobs, std::vector<Edge> edges);

  // Ids are the decimal indices.
  static BipartiteGraph from_edges(std::size_t num_workers, std::size_t num_jobs,
                                   std::vector<Edge> edges);

  std::size_t num_workers() const { return workers_.size(); }
  std::size_t num_jobs() const { return jobs_.size(); }
  std::span<const Edge> edges() const { return edges_; }
  std::uint64_t total_edges() const { return total_; }

  std::uint64_t worker_degree(Index i) const { return worker_degree_[i]; }
  std::uint64_t job_degree(Index j) const { return job_degree_[j]; }
  std::span<const std::uint64_t> worker_degrees() const { return worker_degree_; }
  std::span<const std::uint64_t> job_degrees() const { return job_degree_; }

  std::span<const Neighbor> worker_neighbors(Index i) const;
  std::span<const Neighbor> job_neighbors(Index j) const;

  const IdIndex& worker_ids() const { return workers_; }
  const IdIndex& job_ids() const { return jobs_; }

 private:
  IdIndex workers_;
  IdIndex jobs_;
  std::vector<Edge> edges_;
  std::vector<std::uint64_t> worker_degree_;
  std::vector<std::uint64_t> job_degree_;
  std::vector<std::size_t> worker_offset_;
  std::vector<Neighbor> worker_adj_;
  std::vector<std::size_t> job_offset_;
  std::vector<Neighbor> job_adj_;
  std::uint64_t total_ = 0;
};

struct LoadOptions {
  std::uint32_t min_job_workers = 5;
};

// CSV with header worker_id,job_id[,count]. Jobs with fewer than
// min_job_workers distinct workers are dropped, then workers left without
// edges. Indices follow natural id order (numeric ids compare numerically).
BipartiteGraph load_edge_list(const std::filesystem::path& path, const LoadOptions& options);
BipartiteGraph parse_edge_list(std::istream& in, const LoadOptions& options);

// Rows sorted by (worker index, job index); reloads to an identical graph.
void write_snapshot(const BipartiteGraph& graph, std::ostream& out);

struct DegreeSequences {
  std::vector<std::uint64_t> workers;
  std::vector<std::uint64_t> jobs;
};
DegreeSequences degrees(const BipartiteGraph& graph);

// Every worker and job carries one group index.
struct Partition {
  std::vector<std::uint32_t> worker_group;
  std::vector<std::uint32_t> job_group;
  std::uint32_t num_worker_groups = 0;
  std::uint32_t num_job_groups = 0;

  // Group counts are max label + 1.
  static Partition from_labels(std::vector<std::uint32_t> workers,
                               std::vector<std::uint32_t> jobs);
  bool is_contiguous() const;
  // Relabels each side by order of first appearance; drops empty groups.
  Partition compacted() const;
  friend bool operator==(const Partition&, const Partition&) = default;
};

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

CountMatrix block_edge_counts(const BipartiteGraph& graph, const Partition& partition);

void check_dimensions(const BipartiteGraph& graph, const Partition& partition);

// Partition CSV: node_kind,node_id,group with node_kind in {worker, job}.
void write_partition_csv(const BipartiteGraph& graph, const Partition& partition,
                         std::ostream& out);
Partition read_partition_csv(const BipartiteGraph& graph, std::istream& in);

// Natural order: all-digit ids compare numerically, everything else
// lexicographically, digits before other ids.
bool natural_less(std::string_view a, std::string_view b);

}  // namespace labornet::graph
