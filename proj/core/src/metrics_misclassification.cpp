#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "labornet/errors.hpp"
#include "labornet/log.hpp"
#include "labornet/metrics.hpp"
#include "labornet/parallel.hpp"
#include "labornet/shock_lab.hpp"

namespace labornet::metrics {

namespace {

void corrupt(std::vector<std::uint32_t>& labels, std::uint32_t groups, double frac, Rng& rng, const char* side) {
  if (!(frac >= 0.0 && frac <= 1.0)) throw InputError("misclassification fraction must lie in [0, 1]");
  if (frac == 0.0 || labels.empty()) return;
  if (groups < 2) {
    log::warn(std::string("cannot misclassify ") + side + " with a single group");
    return;
  }
  const double expected = frac * static_cast<double>(labels.size());
  auto count = static_cast<std::size_t>(std::floor(expected));
  std::bernoulli_distribution round_up(expected - std::floor(expected));
  if (count < labels.size() && round_up(rng)) ++count;
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::uniform_int_distribution<std::uint32_t> other(0, groups - 2);
  for (std::size_t k = 0; k < count; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, order.size() - 1);
    std::swap(order[k], order[pick(rng)]);
    auto& label = labels[order[k]];
    const std::uint32_t draw = other(rng);
    label = draw >= label ? draw + 1 : draw;
  }
}

}  // namespace

graph::Partition misclassify(const graph::Partition& partition, double frac_workers, double frac_jobs, Rng& rng) {
  graph::Partition out = partition;
  corrupt(out.worker_group, partition.num_worker_groups, frac_workers, rng, "workers");
  corrupt(out.job_group, partition.num_job_groups, frac_jobs, rng, "jobs");
  return out;
}

std::vector<SweepCell> misclassification_sweep(const shock::ShockExperiment& ex, const SweepConfig& config) {
  if (!(config.step > 0.0 && config.step <= 1.0)) throw InputError("sweep step must lie in (0, 1]");
  if (config.seeds == 0) throw InputError("sweep needs at least one seed");
  const auto points = static_cast<std::size_t>(std::llround(1.0 / config.step)) + 1;
  const graph::Partition truth = ex.true_partition();
  const std::size_t offset = ex.paired ? 0 : ex.pre_panel.num_workers();
  const Eigen::VectorXd* w_pre = config.efficiency_units ? &ex.pre.w : nullptr;
  const Eigen::VectorXd* w_post = config.efficiency_units ? &ex.post.w : nullptr;

  std::vector<SweepCell> cells(points * points * config.seeds);
  parallel_for(cells.size(), [&](std::size_t idx) {
    const std::size_t k = idx % config.seeds;
    const std::size_t b = (idx / config.seeds) % points;
    const std::size_t a = idx / (config.seeds * points);
    SweepCell& cell = cells[idx];
    cell.frac_workers = std::min(1.0, static_cast<double>(a) * config.step);
    cell.frac_jobs = std::min(1.0, static_cast<double>(b) * config.step);
    cell.seed = static_cast<std::uint32_t>(k);
    Rng rng = make_stream(config.root_seed, "metrics", "misclassify", idx);
    const graph::Partition p = misclassify(truth, cell.frac_workers, cell.frac_jobs, rng);
    Classification cls;
    cls.worker_groups = p.num_worker_groups;
    cls.job_groups = p.num_job_groups;
    cls.pre_workers = worker_classes(ex.pre_panel, p.worker_group, 0);
    cls.post_workers = worker_classes(ex.post_panel, p.worker_group, offset);
    cls.pre_jobs = job_classes(ex.pre_panel, p.job_group);
    cls.post_jobs = job_classes(ex.post_panel, p.job_group);
    const BartikAnalysis an = bartik_analysis(ex.pre_panel, ex.post_panel, cls, w_pre, w_post);
    if (an.regression) {
      cell.slope = an.regression->slope;
      cell.r2 = an.regression->r2;
    }
  });
  return cells;
}

std::vector<std::pair<double, double>> marginal_r2(const std::vector<SweepCell>& cells, bool worker_axis) {
  std::map<double, std::pair<double, double>> acc;
  for (const auto& c : cells) {
    auto& slot = acc[worker_axis ? c.frac_workers : c.frac_jobs];
    slot.first += c.r2;
    slot.second += 1.0;
  }
  std::vector<std::pair<double, double>> out;
  for (const auto& [frac, s] : acc) out.emplace_back(frac, s.first / s.second);
  return out;
}

}  // namespace labornet::metrics
