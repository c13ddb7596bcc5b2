#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "labornet/graph.hpp"
#include "labornet/panel.hpp"
#include "labornet/rng.hpp"

namespace labornet::shock {
struct ShockExperiment;
}

namespace labornet::metrics {

// One class index per panel observation; kMissing marks observations
// without a class (for job classes: non-employment).
using Classes = std::vector<std::uint32_t>;
inline constexpr std::uint32_t kMissing = std::numeric_limits<std::uint32_t>::max();

// Per-observation classes from a per-worker labeling (indexed by panel worker
// index plus offset) or a per-job labeling through the "job" label column.
Classes worker_classes(const WorkerPanel& panel, const std::vector<std::uint32_t>& worker_group,
                       std::size_t offset = 0);
Classes job_classes(const WorkerPanel& panel, const std::vector<std::uint32_t>& job_group,
                    const std::string& job_column = "job");
Classes type_classes(const WorkerPanel& panel);
// Market - 1 for employed observations.
Classes market_classes(const WorkerPanel& panel);

struct ExposureTable {
  Eigen::MatrixXd shares;        // G x S, rows of kept groups sum to 1
  Eigen::VectorXd sizes;         // observations per group
  std::vector<bool> kept;        // groups with employment
  std::vector<std::uint32_t> dropped;
};

ExposureTable exposure_table(const Classes& worker, const Classes& job, std::uint32_t groups,
                             std::uint32_t classes);

// shares * shock; dropped groups are NaN.
Eigen::VectorXd bartik_instrument(const ExposureTable& exposure, const Eigen::VectorXd& shock);

// Population standard deviation. Throws on zero variance.
Eigen::VectorXd zscore(const Eigen::VectorXd& x);

struct RegressionResult {
  double intercept = 0.0;
  double slope = 0.0;
  double se_intercept = 0.0;
  double se_slope = 0.0;
  double robust_se_intercept = 0.0;  // HC1
  double robust_se_slope = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
  std::string weights;
};

// Weighted least squares of y on an intercept and x. Throws NumericalError
// when x is constant under the weights.
RegressionResult weighted_ols(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& weights, std::string weights_label = "weights");

struct DeltaOutcome {
  Eigen::VectorXd delta;  // NaN for dropped groups
  Eigen::VectorXd pre_count;
  Eigen::VectorXd post_count;
  std::vector<std::uint32_t> dropped;
};

// Group mean of log earnings (non-employment counts as 0) post minus pre.
DeltaOutcome delta_outcome(const WorkerPanel& pre, const WorkerPanel& post, const Classes& pre_groups,
                           const Classes& post_groups, std::uint32_t groups);

// Log change of a job class's labor input between panels. With wage vectors
// the input is efficiency units (earnings / market wage), otherwise headcount.
// Classes without input in either panel get 0 and are listed in empty.
struct ClassShock {
  Eigen::VectorXd shock;
  std::vector<std::uint32_t> empty;
};

ClassShock class_labor_shock(const WorkerPanel& pre, const WorkerPanel& post, const Classes& pre_jobs,
                             const Classes& post_jobs, std::uint32_t classes,
                             const Eigen::VectorXd* w_pre = nullptr, const Eigen::VectorXd* w_post = nullptr);

struct BartikAnalysis {
  ExposureTable exposure;
  Eigen::VectorXd shock;
  Eigen::VectorXd bartik;
  DeltaOutcome outcome;
  std::vector<std::uint32_t> used_groups;
  // Unset when the instrument does not vary across groups.
  std::optional<RegressionResult> regression;
};

struct Classification {
  Classes pre_workers;
  Classes post_workers;
  Classes pre_jobs;
  Classes post_jobs;
  std::uint32_t worker_groups = 0;
  std::uint32_t job_groups = 0;
};

// Exposure from the pre panel, class shocks from labor input, and a
// regression of the outcome change on the standardized instrument weighted
// by pre-shock group size.
BartikAnalysis bartik_analysis(const WorkerPanel& pre, const WorkerPanel& post, const Classification& cls,
                               const Eigen::VectorXd* w_pre = nullptr, const Eigen::VectorXd* w_post = nullptr);

struct HhiProfile {
  Eigen::VectorXd hhi;    // NaN for groups without employment
  Eigen::VectorXd sizes;  // employed observations per group
  double mean = 0.0;      // unweighted over groups with employment
  double weighted_mean = 0.0;
};

// Concentration of each row group's employment across column classes. Swap
// the arguments for the hiring side.
HhiProfile hhi_profile(const Classes& rows, const Classes& columns, std::uint32_t row_groups,
                       std::uint32_t column_groups);

// Job-to-job moves: consecutive periods, separation in the later one, both
// employed, different jobs. Endpoints are indices into the "job" column.
struct Transition {
  std::uint32_t from;
  std::uint32_t to;
  std::uint32_t period;  // period of arrival
};

std::vector<Transition> job_transitions(const WorkerPanel& panel, const std::string& job_column = "job");

enum class Norm { l1, l2 };

struct FlowError {
  double mean = 0.0;           // unweighted over origins
  double weighted_mean = 0.0;  // by origin employment
  std::size_t origins = 0;
};

// Predicts job-to-job moves from class-to-class moves in sample, spread over
// destination jobs by employment, and scores each origin job observed out of
// sample. Origin classes unseen in sample use the pooled destination mix.
FlowError flow_prediction_error(const std::vector<std::uint32_t>& job_class, const std::vector<Transition>& in_sample,
                                const std::vector<Transition>& out_of_sample, const Eigen::VectorXd& employment,
                                Norm norm);

struct CrosstabRow {
  std::string label;
  double count = 0.0;
  double share = 0.0;
};

// Within-group label shares in descending order (ties by label), truncated
// to top_n. Observations with an empty label or missing group are skipped.
std::vector<std::vector<CrosstabRow>> classification_crosstab(const Classes& groups, std::uint32_t num_groups,
                                                              const std::vector<std::string>& labels,
                                                              std::size_t top_n);

// Reassigns round-to-expectation fraction of each side's nodes, chosen
// without replacement, to a uniformly drawn different group.
graph::Partition misclassify(const graph::Partition& partition, double frac_workers, double frac_jobs, Rng& rng);

struct SweepCell {
  double frac_workers = 0.0;
  double frac_jobs = 0.0;
  std::uint32_t seed = 0;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double r2 = 0.0;
};

struct SweepConfig {
  double step = 0.05;
  std::uint32_t seeds = 5;
  std::uint64_t root_seed = 1;
  bool efficiency_units = true;
};

// Grid over both fractions from 0 to 1. Cell (a, b, k) draws its corruption
// from derive_seed(root, "metrics", "misclassify", (a * n + b) * seeds + k).
// Cells whose instrument is constant report r2 = 0 and a NaN slope.
std::vector<SweepCell> misclassification_sweep(const shock::ShockExperiment& experiment, const SweepConfig& config);

// Mean r2 per value of one fraction, averaging over seeds and the other axis.
std::vector<std::pair<double, double>> marginal_r2(const std::vector<SweepCell>& cells, bool worker_axis);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace labornet::metrics
