#include <cmath>
#include <map>

#include "labornet/blockmodel.hpp"
#include "labornet/errors.hpp"

namespace labornet::sbm {

Agreement compare_labels(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  if (a.size() != b.size()) throw InputError("partitions cover different node sets");
  const double n = static_cast<double>(a.size());
  if (a.size() < 2) return {1.0, 1.0};

  std::map<std::pair<std::uint32_t, std::uint32_t>, double> joint;
  std::map<std::uint32_t, double> rows;
  std::map<std::uint32_t, double> cols;
  for (std::size_t k = 0; k < a.size(); ++k) {
    joint[{a[k], b[k]}] += 1.0;
    rows[a[k]] += 1.0;
    cols[b[k]] += 1.0;
  }
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0;
  double sum_a = 0.0;
  double sum_b = 0.0;
  for (const auto& [key, c] : joint) index += pairs(c);
  for (const auto& [key, c] : rows) sum_a += pairs(c);
  for (const auto& [key, c] : cols) sum_b += pairs(c);
  const double expected = sum_a * sum_b / pairs(n);
  const double max_index = 0.5 * (sum_a + sum_b);
  Agreement out;
  if (max_index == expected) {
    out.ari = rows.size() == cols.size() && joint.size() == rows.size() ? 1.0 : 0.0;
  } else {
    out.ari = (index - expected) / (max_index - expected);
  }

  double h_a = 0.0;
  double h_b = 0.0;
  double mi = 0.0;
  for (const auto& [key, c] : rows) h_a -= c / n * std::log(c / n);
  for (const auto& [key, c] : cols) h_b -= c / n * std::log(c / n);
  for (const auto& [key, c] : joint) {
    mi += c / n * std::log(c * n / (rows[key.first] * cols[key.second]));
  }
  out.nmi = h_a + h_b > 0.0 ? 2.0 * mi / (h_a + h_b) : 1.0;
  return out;
}

PartitionAgreement compare_partitions(const Partition& a, const Partition& b) {
  return {compare_labels(a.worker_group, b.worker_group), compare_labels(a.job_group, b.job_group)};
}

}  // namespace labornet::sbm
