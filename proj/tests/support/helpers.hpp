#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "labornet/graph.hpp"
#include "labornet/panel.hpp"
#include "oracles.hpp"

namespace testing_support {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(LABORNET_FIXTURE_DIR) / name;
}

inline oracle::DenseCounts dense(const labornet::graph::BipartiteGraph& g) {
  oracle::DenseCounts A(g.num_workers(), std::vector<long long>(g.num_jobs(), 0));
  for (const auto& e : g.edges()) A[e.worker][e.job] += e.count;
  return A;
}

inline labornet::graph::BipartiteGraph from_dense(const oracle::DenseCounts& A) {
  std::vector<labornet::graph::Edge> edges;
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = 0; j < A[i].size(); ++j)
      if (A[i][j] > 0)
        edges.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                         static_cast<std::uint32_t>(A[i][j])});
  return labornet::graph::BipartiteGraph::from_edges(A.size(), A.empty() ? 0 : A[0].size(),
                                                     std::move(edges));
}

// Dense Poisson counts with every row and column hit at least once.
inline oracle::DenseCounts random_counts(std::size_t workers, std::size_t jobs, double mean, std::mt19937_64& rng) {
  std::poisson_distribution<long long> draw(mean);
  oracle::DenseCounts A(workers, std::vector<long long>(jobs, 0));
  for (auto& row : A)
    for (auto& v : row) v = draw(rng);
  for (std::size_t i = 0; i < workers; ++i) A[i][i % jobs] += 1;
  for (std::size_t j = 0; j < jobs; ++j) A[j % workers][j] += 1;
  return A;
}

inline std::vector<std::uint32_t> random_labels(std::size_t n, std::uint32_t groups, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> pick(0, groups - 1);
  std::vector<std::uint32_t> out(n);
  for (auto& v : out) v = pick(rng);
  return out;
}

// Panel row: (type, market, earnings or NaN, separated) per period.
struct Spell {
  std::uint32_t type;
  std::uint32_t market;
  double earnings;
  bool separated;
};

inline labornet::WorkerPanel make_panel(const std::vector<std::vector<Spell>>& workers,
                                        std::map<std::string, std::vector<std::string>> labels = {}) {
  std::vector<std::string> ids;
  std::vector<labornet::Observation> obs;
  for (std::size_t w = 0; w < workers.size(); ++w) {
    ids.push_back("w" + std::to_string(w));
    for (std::size_t t = 0; t < workers[w].size(); ++t) {
      const auto& s = workers[w][t];
      labornet::Observation o;
      o.worker = static_cast<std::uint32_t>(w);
      o.period = static_cast<std::uint32_t>(t + 1);
      o.type = s.type;
      o.market = s.market;
      o.earnings = s.earnings;
      o.separated = s.separated;
      obs.push_back(o);
    }
  }
  return labornet::WorkerPanel(std::move(ids), std::move(obs), std::move(labels));
}

}  // namespace testing_support
