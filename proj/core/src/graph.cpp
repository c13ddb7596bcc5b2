#include "labornet/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <limits>
#include <set>
#include <tuple>

#include "labornet/csv.hpp"
#include "labornet/errors.hpp"

namespace labornet::graph {

IdIndex::IdIndex(std::vector<std::string> ids) {
  for (auto& id : ids) intern(id);
}

Index IdIndex::intern(std::string_view id) {
  auto key = std::string(id);
  auto it = lookup_.find(key);
  if (it != lookup_.end()) return it->second;
  const auto index = static_cast<Index>(ids_.size());
  ids_.push_back(key);
  lookup_.emplace(std::move(key), index);
  return index;
}

std::optional<Index> IdIndex::find(std::string_view id) const {
  auto it = lookup_.find(std::string(id));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

BipartiteGraph::BipartiteGraph(IdIndex workers, IdIndex jobs, std::vector<Edge> edges)
    : workers_(std::move(workers)), jobs_(std::move(jobs)) {
  const std::size_t nw = workers_.size();
  const std::size_t nj = jobs_.size();
  for (const auto& e : edges) {
    if (e.worker >= nw || e.job >= nj) throw InputError("edge references an unknown node");
    if (e.count == 0) throw InputError("edge multiplicity must be positive");
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.worker != b.worker ? a.worker < b.worker : a.job < b.job;
  });
  for (const auto& e : edges) {
    if (!edges_.empty() && edges_.back().worker == e.worker && edges_.back().job == e.job) {
      edges_.back().count += e.count;
    } else {
      edges_.push_back(e);
    }
  }

  worker_degree_.assign(nw, 0);
  job_degree_.assign(nj, 0);
  std::vector<std::size_t> job_fill(nj, 0);
  for (const auto& e : edges_) {
    worker_degree_[e.worker] += e.count;
    job_degree_[e.job] += e.count;
    ++job_fill[e.job];
    total_ += e.count;
  }

  worker_offset_.assign(nw + 1, 0);
  for (const auto& e : edges_) ++worker_offset_[e.worker + 1];
  std::partial_sum(worker_offset_.begin(), worker_offset_.end(), worker_offset_.begin());
  worker_adj_.reserve(edges_.size());
  for (const auto& e : edges_) worker_adj_.push_back({e.job, e.count});

  job_offset_.assign(nj + 1, 0);
  for (std::size_t j = 0; j < nj; ++j) job_offset_[j + 1] = job_offset_[j] + job_fill[j];
  job_adj_.resize(edges_.size());
  std::vector<std::size_t> cursor(job_offset_.begin(), job_offset_.end() - 1);
  for (const auto& e : edges_) job_adj_[cursor[e.job]++] = {e.worker, e.count};
}

BipartiteGraph BipartiteGraph::from_edges(std::size_t num_workers, std::size_t num_jobs,
                                          std::vector<Edge> edges) {
  IdIndex w;
  IdIndex j;
  for (std::size_t i = 0; i < num_workers; ++i) w.intern(std::to_string(i));
  for (std::size_t i = 0; i < num_jobs; ++i) j.intern(std::to_string(i));
  return BipartiteGraph(std::move(w), std::move(j), std::move(edges));
}

std::span<const Neighbor> BipartiteGraph::worker_neighbors(Index i) const {
  return {worker_adj_.data() + worker_offset_[i], worker_offset_[i + 1] - worker_offset_[i]};
}

std::span<const Neighbor> BipartiteGraph::job_neighbors(Index j) const {
  return {job_adj_.data() + job_offset_[j], job_offset_[j + 1] - job_offset_[j]};
}

bool natural_less(std::string_view a, std::string_view b) {
  auto digits = [](std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  const bool da = digits(a);
  const bool db = digits(b);
  if (da != db) return da;
  if (da) {
    auto strip = [](std::string_view s) {
      const auto p = s.find_first_not_of('0');
      return p == std::string_view::npos ? std::string_view("0") : s.substr(p);
    };
    const auto sa = strip(a);
    const auto sb = strip(b);
    if (sa.size() != sb.size()) return sa.size() < sb.size();
    if (sa != sb) return sa < sb;
  }
  return a < b;
}

BipartiteGraph parse_edge_list(std::istream& in, const LoadOptions& options) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw InputError("empty graph");
  if (header->size() < 2 || header->size() > 3 || (*header)[0] != "worker_id" ||
      (*header)[1] != "job_id" || (header->size() == 3 && (*header)[2] != "count")) {
    throw InputError("line " + std::to_string(reader.line_number()) +
                     ": expected header worker_id,job_id[,count]");
  }
  const bool has_count = header->size() == 3;

  std::map<std::pair<std::string, std::string>, std::uint64_t> merged;
  while (auto row = reader.next()) {
    const auto line = reader.line_number();
    if (row->size() != header->size()) {
      throw InputError("line " + std::to_string(line) + ": expected " +
                       std::to_string(header->size()) + " fields, found " +
                       std::to_string(row->size()));
    }
    if ((*row)[0].empty() || (*row)[1].empty()) {
      throw InputError("line " + std::to_string(line) + ": empty id");
    }
    long long count = 1;
    if (has_count) {
      count = csv::parse_int((*row)[2], "count", line);
      if (count < 1) throw InputError("line " + std::to_string(line) + ": count must be >= 1");
    }
    merged[{(*row)[0], (*row)[1]}] += static_cast<std::uint64_t>(count);
  }

  std::map<std::string, std::set<std::string>> job_workers;
  for (const auto& [key, count] : merged) job_workers[key.second].insert(key.first);

  std::vector<std::string> worker_names;
  std::vector<std::string> job_names;
  std::set<std::string> kept_jobs;
  for (const auto& [job, ws] : job_workers) {
    if (ws.size() >= options.min_job_workers) kept_jobs.insert(job);
  }
  std::set<std::string> kept_workers;
  for (const auto& [key, count] : merged) {
    if (kept_jobs.count(key.second)) kept_workers.insert(key.first);
  }
  if (kept_workers.empty()) throw InputError("empty graph");

  worker_names.assign(kept_workers.begin(), kept_workers.end());
  job_names.assign(kept_jobs.begin(), kept_jobs.end());
  std::sort(worker_names.begin(), worker_names.end(), natural_less);
  std::sort(job_names.begin(), job_names.end(), natural_less);
  IdIndex workers(worker_names);
  IdIndex jobs(job_names);

  std::vector<Edge> edges;
  for (const auto& [key, count] : merged) {
    auto j = jobs.find(key.second);
    if (!j) continue;
    if (count > UINT32_MAX) throw InputError("edge multiplicity overflow");
    edges.push_back({*workers.find(key.first), *j, static_cast<std::uint32_t>(count)});
  }
  return BipartiteGraph(std::move(workers), std::move(jobs), std::move(edges));
}

BipartiteGraph load_edge_list(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open edge list " + path.string());
  return parse_edge_list(in, options);
}

void write_snapshot(const BipartiteGraph& graph, std::ostream& out) {
  out << "worker_id,job_id,count\n";
  for (const auto& e : graph.edges()) {
    out << csv::quote_if_needed(graph.worker_ids().id(e.worker)) << ','
        << csv::quote_if_needed(graph.job_ids().id(e.job)) << ',' << e.count << '\n';
  }
}

DegreeSequences degrees(const BipartiteGraph& graph) {
  return {{graph.worker_degrees().begin(), graph.worker_degrees().end()},
          {graph.job_degrees().begin(), graph.job_degrees().end()}};
}

Partition Partition::from_labels(std::vector<std::uint32_t> workers,
                                 std::vector<std::uint32_t> jobs) {
  Partition p;
  p.worker_group = std::move(workers);
  p.job_group = std::move(jobs);
  for (auto g : p.worker_group) p.num_worker_groups = std::max(p.num_worker_groups, g + 1);
  for (auto g : p.job_group) p.num_job_groups = std::max(p.num_job_groups, g + 1);
  return p;
}

namespace {

bool side_contiguous(const std::vector<std::uint32_t>& labels, std::uint32_t groups) {
  std::vector<char> seen(groups, 0);
  for (auto g : labels) {
    if (g >= groups) return false;
    seen[g] = 1;
  }
  return std::all_of(seen.begin(), seen.end(), [](char s) { return s != 0; });
}

std::pair<std::vector<std::uint32_t>, std::uint32_t> compact_side(
    const std::vector<std::uint32_t>& labels) {
  std::unordered_map<std::uint32_t, std::uint32_t> remap;
  std::vector<std::uint32_t> out;
  out.reserve(labels.size());
  for (auto g : labels) {
    auto [it, inserted] = remap.emplace(g, static_cast<std::uint32_t>(remap.size()));
    out.push_back(it->second);
  }
  return {std::move(out), static_cast<std::uint32_t>(remap.size())};
}

}  // namespace

bool Partition::is_contiguous() const {
  return side_contiguous(worker_group, num_worker_groups) &&
         side_contiguous(job_group, num_job_groups);
}

Partition Partition::compacted() const {
  Partition p;
  std::tie(p.worker_group, p.num_worker_groups) = compact_side(worker_group);
  std::tie(p.job_group, p.num_job_groups) = compact_side(job_group);
  return p;
}

void check_dimensions(const BipartiteGraph& graph, const Partition& partition) {
  if (partition.worker_group.size() != graph.num_workers() ||
      partition.job_group.size() != graph.num_jobs()) {
    throw InputError("partition size does not match graph");
  }
  for (auto g : partition.worker_group) {
    if (g >= partition.num_worker_groups) throw InputError("worker group out of range");
  }
  for (auto g : partition.job_group) {
    if (g >= partition.num_job_groups) throw InputError("job group out of range");
  }
}

CountMatrix block_edge_counts(const BipartiteGraph& graph, const Partition& partition) {
  check_dimensions(graph, partition);
  CountMatrix counts = CountMatrix::Zero(partition.num_worker_groups, partition.num_job_groups);
  for (const auto& e : graph.edges()) {
    counts(partition.worker_group[e.worker], partition.job_group[e.job]) += e.count;
  }
  return counts;
}

void write_partition_csv(const BipartiteGraph& graph, const Partition& partition,
                         std::ostream& out) {
  check_dimensions(graph, partition);
  out << "node_kind,node_id,group\n";
  for (std::size_t i = 0; i < graph.num_workers(); ++i) {
    out << "worker," << csv::quote_if_needed(graph.worker_ids().id(static_cast<Index>(i))) << ','
        << partition.worker_group[i] << '\n';
  }
  for (std::size_t j = 0; j < graph.num_jobs(); ++j) {
    out << "job," << csv::quote_if_needed(graph.job_ids().id(static_cast<Index>(j))) << ','
        << partition.job_group[j] << '\n';
  }
}

Partition read_partition_csv(const BipartiteGraph& graph, std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || *header != std::vector<std::string>{"node_kind", "node_id", "group"}) {
    throw InputError("expected header node_kind,node_id,group");
  }
  constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> w(graph.num_workers(), unset);
  std::vector<std::uint32_t> j(graph.num_jobs(), unset);
  while (auto row = reader.next()) {
    const auto line = reader.line_number();
    if (row->size() != 3) throw InputError("line " + std::to_string(line) + ": expected 3 fields");
    const auto group = csv::parse_int((*row)[2], "group", line);
    if (group < 0) throw InputError("line " + std::to_string(line) + ": negative group");
    const auto& kind = (*row)[0];
    if (kind == "worker") {
      auto idx = graph.worker_ids().find((*row)[1]);
      if (!idx) throw InputError("line " + std::to_string(line) + ": unknown worker " + (*row)[1]);
      w[*idx] = static_cast<std::uint32_t>(group);
    } else if (kind == "job") {
      auto idx = graph.job_ids().find((*row)[1]);
      if (!idx) throw InputError("line " + std::to_string(line) + ": unknown job " + (*row)[1]);
      j[*idx] = static_cast<std::uint32_t>(group);
    } else {
      throw InputError("line " + std::to_string(line) + ": node_kind must be worker or job");
    }
  }
  if (std::find(w.begin(), w.end(), unset) != w.end() ||
      std::find(j.begin(), j.end(), unset) != j.end()) {
    throw InputError("partition does not cover every node");
  }
  return Partition::from_labels(std::move(w), std::move(j));
}

}  // namespace labornet::graph
