#include <algorithm>
#include <cmath>
#include <map>

#include "labornet/errors.hpp"
#include "labornet/metrics.hpp"

namespace labornet::metrics {

HhiProfile hhi_profile(const Classes& rows, const Classes& columns, std::uint32_t row_groups,
                       std::uint32_t column_groups) {
  if (rows.size() != columns.size()) throw InputError("classifications differ in length");
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(row_groups, column_groups);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] == kMissing || columns[k] == kMissing) continue;
    if (rows[k] >= row_groups || columns[k] >= column_groups) throw InputError("class out of range");
    counts(rows[k], columns[k]) += 1.0;
  }
  HhiProfile p;
  p.sizes = counts.rowwise().sum();
  p.hhi = Eigen::VectorXd::Constant(row_groups, std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  double weighted = 0.0;
  double groups = 0.0;
  for (std::uint32_t g = 0; g < row_groups; ++g) {
    if (p.sizes(g) == 0.0) continue;
    p.hhi(g) = (counts.row(g) / p.sizes(g)).squaredNorm();
    sum += p.hhi(g);
    weighted += p.hhi(g) * p.sizes(g);
    groups += 1.0;
  }
  if (groups == 0.0) throw InputError("no group has employment");
  p.mean = sum / groups;
  p.weighted_mean = weighted / p.sizes.sum();
  return p;
}

std::vector<std::vector<CrosstabRow>> classification_crosstab(const Classes& groups, std::uint32_t num_groups,
                                                              const std::vector<std::string>& labels,
                                                              std::size_t top_n) {
  if (groups.size() != labels.size()) throw InputError("groups and labels differ in length");
  std::vector<std::map<std::string, double>> tally(num_groups);
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (groups[k] == kMissing || labels[k].empty()) continue;
    if (groups[k] >= num_groups) throw InputError("group out of range");
    tally[groups[k]][labels[k]] += 1.0;
  }
  std::vector<std::vector<CrosstabRow>> out(num_groups);
  for (std::uint32_t g = 0; g < num_groups; ++g) {
    double total = 0.0;
    for (const auto& [label, count] : tally[g]) total += count;
    for (const auto& [label, count] : tally[g]) out[g].push_back({label, count, count / total});
    std::stable_sort(out[g].begin(), out[g].end(),
                     [](const CrosstabRow& a, const CrosstabRow& b) { return a.count > b.count; });
    if (out[g].size() > top_n) out[g].resize(top_n);
  }
  return out;
}

}  // namespace labornet::metrics
