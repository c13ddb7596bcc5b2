#include <cmath>
#include <map>

#include "labornet/errors.hpp"
#include "labornet/metrics.hpp"

namespace labornet::metrics {

std::vector<Transition> job_transitions(const WorkerPanel& panel, const std::string& job_column) {
  const auto jobs = integer_label(panel, job_column);
  const auto& obs = panel.observations();
  std::vector<Transition> out;
  for (std::size_t k = 1; k < obs.size(); ++k) {
    const auto& now = obs[k];
    if (now.period == 1 || !now.separated) continue;
    const auto from = jobs[k - 1];
    const auto to = jobs[k];
    if (from == kMissing || to == kMissing || from == to) continue;
    out.push_back({from, to, now.period});
  }
  return out;
}

FlowError flow_prediction_error(const std::vector<std::uint32_t>& job_class, const std::vector<Transition>& in_sample,
                                const std::vector<Transition>& out_of_sample, const Eigen::VectorXd& employment,
                                Norm norm) {
  const std::size_t jobs = job_class.size();
  if (static_cast<std::size_t>(employment.size()) != jobs) throw InputError("employment does not cover the jobs");
  if (in_sample.empty()) throw InputError("no in-sample transitions");
  std::uint32_t classes = 0;
  for (const auto c : job_class) {
    if (c == kMissing) throw InputError("every job needs a class");
    classes = std::max(classes, c + 1);
  }
  const auto check = [jobs](const Transition& t) {
    if (t.from >= jobs || t.to >= jobs) throw InputError("transition references an unknown job");
  };

  Eigen::MatrixXd moves = Eigen::MatrixXd::Zero(classes, classes);
  for (const auto& t : in_sample) {
    check(t);
    moves(job_class[t.from], job_class[t.to]) += 1.0;
  }
  const Eigen::VectorXd pooled = moves.colwise().sum().transpose() / moves.sum();
  Eigen::MatrixXd prob(classes, classes);
  for (std::uint32_t c = 0; c < classes; ++c) {
    const double total = moves.row(c).sum();
    if (total > 0.0) {
      prob.row(c) = moves.row(c) / total;
    } else {
      prob.row(c) = pooled.transpose();
    }
  }

  // Within-class destination shares and their sums of squares.
  Eigen::VectorXd class_emp = Eigen::VectorXd::Zero(classes);
  Eigen::VectorXd class_size = Eigen::VectorXd::Zero(classes);
  for (std::size_t j = 0; j < jobs; ++j) {
    class_emp(job_class[j]) += employment(static_cast<Eigen::Index>(j));
    class_size(job_class[j]) += 1.0;
  }
  Eigen::VectorXd within(static_cast<Eigen::Index>(jobs));
  Eigen::VectorXd within_sq = Eigen::VectorXd::Zero(classes);
  for (std::size_t j = 0; j < jobs; ++j) {
    const auto c = job_class[j];
    const auto jj = static_cast<Eigen::Index>(j);
    within(jj) = class_emp(c) > 0.0 ? employment(jj) / class_emp(c) : 1.0 / class_size(c);
    within_sq(c) += within(jj) * within(jj);
  }

  std::map<std::uint32_t, std::map<std::uint32_t, double>> observed;
  for (const auto& t : out_of_sample) {
    check(t);
    observed[t.from][t.to] += 1.0;
  }

  FlowError out;
  double sum = 0.0;
  double weighted = 0.0;
  double weight_total = 0.0;
  for (const auto& [origin, row] : observed) {
    double total = 0.0;
    for (const auto& [dest, count] : row) total += count;
    const auto c = job_class[origin];
    double support_pred = 0.0;
    double support_pred_sq = 0.0;
    double abs_gap = 0.0;
    double sq_gap = 0.0;
    for (const auto& [dest, count] : row) {
      const double pred = prob(c, job_class[dest]) * within(dest);
      const double emp = count / total;
      support_pred += pred;
      support_pred_sq += pred * pred;
      abs_gap += std::abs(pred - emp);
      sq_gap += (pred - emp) * (pred - emp);
    }
    double err = 0.0;
    if (norm == Norm::l1) {
      err = abs_gap + std::max(0.0, prob.row(c).sum() - support_pred);
    } else {
      const double all_sq = prob.row(c).array().square().matrix().dot(within_sq);
      err = std::sqrt(std::max(0.0, sq_gap + all_sq - support_pred_sq));
    }
    const double w = employment(origin);
    sum += err;
    weighted += w * err;
    weight_total += w;
    out.origins += 1;
  }
  if (out.origins == 0) {
    out.mean = out.weighted_mean = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.mean = sum / static_cast<double>(out.origins);
  out.weighted_mean = weight_total > 0.0 ? weighted / weight_total : out.mean;
  return out;
}

}  // namespace labornet::metrics
