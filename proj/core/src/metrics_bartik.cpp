#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "labornet/errors.hpp"
#include "labornet/metrics.hpp"

namespace labornet::metrics {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_length(const WorkerPanel& panel, const Classes& cls, const char* what) {
  if (cls.size() != panel.observations().size()) {
    throw InputError(std::string(what) + " classes do not cover the panel");
  }
}

}  // namespace

Classes worker_classes(const WorkerPanel& panel, const std::vector<std::uint32_t>& worker_group,
                       std::size_t offset) {
  Classes out;
  out.reserve(panel.observations().size());
  for (const auto& o : panel.observations()) {
    const std::size_t index = offset + o.worker;
    if (index >= worker_group.size()) throw InputError("worker labeling does not cover the panel");
    out.push_back(worker_group[index]);
  }
  return out;
}

Classes job_classes(const WorkerPanel& panel, const std::vector<std::uint32_t>& job_group,
                    const std::string& job_column) {
  const auto jobs = integer_label(panel, job_column);
  Classes out(jobs.size(), kMissing);
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (jobs[k] == kMissing) continue;
    if (jobs[k] >= job_group.size()) throw InputError("job labeling does not cover job " + std::to_string(jobs[k]));
    out[k] = job_group[jobs[k]];
  }
  return out;
}

Classes type_classes(const WorkerPanel& panel) {
  Classes out;
  out.reserve(panel.observations().size());
  for (const auto& o : panel.observations()) out.push_back(o.type);
  return out;
}

Classes market_classes(const WorkerPanel& panel) {
  Classes out;
  out.reserve(panel.observations().size());
  for (const auto& o : panel.observations()) out.push_back(o.employed() ? o.market - 1 : kMissing);
  return out;
}

ExposureTable exposure_table(const Classes& worker, const Classes& job, std::uint32_t groups,
                             std::uint32_t classes) {
  if (worker.size() != job.size()) throw InputError("worker and job classes differ in length");
  ExposureTable t;
  t.shares = Eigen::MatrixXd::Zero(groups, classes);
  t.sizes = Eigen::VectorXd::Zero(groups);
  for (std::size_t k = 0; k < worker.size(); ++k) {
    const auto g = worker[k];
    if (g == kMissing) continue;
    if (g >= groups) throw InputError("worker class out of range");
    t.sizes(g) += 1.0;
    const auto s = job[k];
    if (s == kMissing) continue;
    if (s >= classes) throw InputError("job class out of range");
    t.shares(g, s) += 1.0;
  }
  t.kept.assign(groups, false);
  for (std::uint32_t g = 0; g < groups; ++g) {
    const double total = t.shares.row(g).sum();
    if (total > 0.0) {
      t.shares.row(g) /= total;
      t.kept[g] = true;
    } else {
      t.dropped.push_back(g);
    }
  }
  return t;
}

Eigen::VectorXd bartik_instrument(const ExposureTable& exposure, const Eigen::VectorXd& shock) {
  if (shock.size() != exposure.shares.cols()) throw InputError("shock length does not match the job classes");
  Eigen::VectorXd out = exposure.shares * shock;
  for (std::size_t g = 0; g < exposure.kept.size(); ++g) {
    if (!exposure.kept[g]) out(static_cast<Eigen::Index>(g)) = kNaN;
  }
  return out;
}

Eigen::VectorXd zscore(const Eigen::VectorXd& x) {
  if (x.size() < 2) throw InputError("zscore needs at least two values");
  const double mean = x.mean();
  const double sd = std::sqrt((x.array() - mean).square().mean());
  if (!(sd > 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff()))) throw NumericalError("zscore of a constant vector");
  return (x.array() - mean) / sd;
}

RegressionResult weighted_ols(const Eigen::VectorXd& y, const Eigen::VectorXd& x, const Eigen::VectorXd& weights,
                              std::string weights_label) {
  const Eigen::Index n = y.size();
  if (x.size() != n || weights.size() != n) throw InputError("regression inputs differ in length");
  if (n < 3) throw InputError("regression needs at least three observations");
  if ((weights.array() < 0.0).any() || !(weights.sum() > 0.0)) throw InputError("weights must be non-negative");
  const double sw = weights.sum();
  const double xbar = weights.dot(x) / sw;
  const double ybar = weights.dot(y) / sw;
  const Eigen::ArrayXd dx = x.array() - xbar;
  const Eigen::ArrayXd dy = y.array() - ybar;
  const double sxx = (weights.array() * dx.square()).sum();
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  if (!(sxx > 1e-24 * sw * scale * scale)) throw NumericalError("regressor is constant under the weights");

  RegressionResult r;
  r.n = static_cast<std::size_t>(n);
  r.weights = std::move(weights_label);
  r.slope = (weights.array() * dx * dy).sum() / sxx;
  r.intercept = ybar - r.slope * xbar;
  const Eigen::ArrayXd resid = y.array() - r.intercept - r.slope * x.array();
  const double sse = (weights.array() * resid.square()).sum();
  const double sst = (weights.array() * dy.square()).sum();
  r.r2 = sst > 0.0 ? std::clamp(1.0 - sse / sst, 0.0, 1.0) : 0.0;

  const double dof = static_cast<double>(n - 2);
  const double s2 = sse / dof;
  r.se_slope = std::sqrt(s2 / sxx);
  r.se_intercept = std::sqrt(s2 * (1.0 / sw + xbar * xbar / sxx));

  Eigen::MatrixXd X(n, 2);
  X.col(0).setOnes();
  X.col(1) = x;
  const Eigen::Matrix2d bread = (X.transpose() * weights.asDiagonal() * X).inverse();
  const Eigen::VectorXd we = weights.array() * resid;
  const Eigen::Matrix2d meat = X.transpose() * we.array().square().matrix().asDiagonal() * X;
  const Eigen::Matrix2d v = bread * meat * bread * (static_cast<double>(n) / dof);
  r.robust_se_intercept = std::sqrt(std::max(0.0, v(0, 0)));
  r.robust_se_slope = std::sqrt(std::max(0.0, v(1, 1)));
  return r;
}

DeltaOutcome delta_outcome(const WorkerPanel& pre, const WorkerPanel& post, const Classes& pre_groups,
                           const Classes& post_groups, std::uint32_t groups) {
  check_length(pre, pre_groups, "pre-period worker");
  check_length(post, post_groups, "post-period worker");
  DeltaOutcome d;
  Eigen::VectorXd pre_sum = Eigen::VectorXd::Zero(groups);
  Eigen::VectorXd post_sum = Eigen::VectorXd::Zero(groups);
  d.pre_count = Eigen::VectorXd::Zero(groups);
  d.post_count = Eigen::VectorXd::Zero(groups);
  const auto tally = [groups](const WorkerPanel& panel, const Classes& cls, Eigen::VectorXd& sum,
                              Eigen::VectorXd& count) {
    const auto& obs = panel.observations();
    for (std::size_t k = 0; k < obs.size(); ++k) {
      const auto g = cls[k];
      if (g == kMissing) continue;
      if (g >= groups) throw InputError("worker class out of range");
      sum(g) += obs[k].employed() ? std::log(obs[k].earnings) : 0.0;
      count(g) += 1.0;
    }
  };
  tally(pre, pre_groups, pre_sum, d.pre_count);
  tally(post, post_groups, post_sum, d.post_count);
  d.delta = Eigen::VectorXd::Constant(groups, kNaN);
  for (std::uint32_t g = 0; g < groups; ++g) {
    if (d.pre_count(g) == 0.0 || d.post_count(g) == 0.0) {
      d.dropped.push_back(g);
    } else {
      d.delta(g) = post_sum(g) / d.post_count(g) - pre_sum(g) / d.pre_count(g);
    }
  }
  return d;
}

ClassShock class_labor_shock(const WorkerPanel& pre, const WorkerPanel& post, const Classes& pre_jobs,
                             const Classes& post_jobs, std::uint32_t classes, const Eigen::VectorXd* w_pre,
                             const Eigen::VectorXd* w_post) {
  check_length(pre, pre_jobs, "pre-period job");
  check_length(post, post_jobs, "post-period job");
  if ((w_pre == nullptr) != (w_post == nullptr)) throw InputError("pass both wage vectors or neither");
  const auto input = [classes](const WorkerPanel& panel, const Classes& cls, const Eigen::VectorXd* w) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(classes);
    const auto& obs = panel.observations();
    for (std::size_t k = 0; k < obs.size(); ++k) {
      const auto s = cls[k];
      if (s == kMissing || !obs[k].employed()) continue;
      if (s >= classes) throw InputError("job class out of range");
      if (w != nullptr) {
        const auto g = static_cast<Eigen::Index>(obs[k].market - 1);
        if (g >= w->size()) throw InputError("wage vector does not cover the panel markets");
        total(s) += obs[k].earnings / (*w)(g);
      } else {
        total(s) += 1.0;
      }
    }
    return total;
  };
  const Eigen::VectorXd before = input(pre, pre_jobs, w_pre);
  const Eigen::VectorXd after = input(post, post_jobs, w_post);
  ClassShock out;
  out.shock = Eigen::VectorXd::Zero(classes);
  for (std::uint32_t s = 0; s < classes; ++s) {
    if (before(s) > 0.0 && after(s) > 0.0) {
      out.shock(s) = std::log(after(s) / before(s));
    } else {
      out.empty.push_back(s);
    }
  }
  return out;
}

BartikAnalysis bartik_analysis(const WorkerPanel& pre, const WorkerPanel& post, const Classification& cls,
                               const Eigen::VectorXd* w_pre, const Eigen::VectorXd* w_post) {
  check_length(pre, cls.pre_workers, "pre-period worker");
  check_length(pre, cls.pre_jobs, "pre-period job");
  BartikAnalysis a;
  a.exposure = exposure_table(cls.pre_workers, cls.pre_jobs, cls.worker_groups, cls.job_groups);
  a.shock = class_labor_shock(pre, post, cls.pre_jobs, cls.post_jobs, cls.job_groups, w_pre, w_post).shock;
  a.bartik = bartik_instrument(a.exposure, a.shock);
  a.outcome = delta_outcome(pre, post, cls.pre_workers, cls.post_workers, cls.worker_groups);
  for (std::uint32_t g = 0; g < cls.worker_groups; ++g) {
    if (a.exposure.kept[g] && std::isfinite(a.outcome.delta(g))) a.used_groups.push_back(g);
  }
  const auto n = static_cast<Eigen::Index>(a.used_groups.size());
  if (n < 3) return a;
  Eigen::VectorXd x(n);
  Eigen::VectorXd y(n);
  Eigen::VectorXd w(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto g = a.used_groups[static_cast<std::size_t>(k)];
    x(k) = a.bartik(g);
    y(k) = a.outcome.delta(g);
    w(k) = a.exposure.sizes(g);
  }
  try {
    a.regression = weighted_ols(y, zscore(x), w, "group size");
  } catch (const NumericalError&) {
    a.regression.reset();
  }
  return a;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InputError("spearman inputs differ in length");
  if (a.size() < 2) throw InputError("spearman needs at least two points");
  const auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&v](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
    for (std::size_t start = 0; start < order.size();) {
      std::size_t end = start;
      while (end + 1 < order.size() && v[order[end + 1]] == v[order[start]]) ++end;
      const double avg = 0.5 * static_cast<double>(start + end) + 1.0;
      for (std::size_t k = start; k <= end; ++k) r(static_cast<Eigen::Index>(order[k])) = avg;
      start = end + 1;
    }
    return r;
  };
  const Eigen::VectorXd ra = ranks(a);
  const Eigen::VectorXd rb = ranks(b);
  const Eigen::ArrayXd da = ra.array() - ra.mean();
  const Eigen::ArrayXd db = rb.array() - rb.mean();
  const double denom = std::sqrt((da * da).sum() * (db * db).sum());
  return denom > 0.0 ? (da * db).sum() / denom : kNaN;
}

}  // namespace labornet::metrics
