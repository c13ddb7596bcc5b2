#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "labornet/errors.hpp"
#include "labornet/metrics.hpp"
#include "labornet/shock_lab.hpp"

using namespace labornet;
using namespace labornet::metrics;
using testing_support::Spell;

namespace {

constexpr double kNa = std::numeric_limits<double>::quiet_NaN();
constexpr auto M = kMissing;

// Three workers over two periods with job labels. Worker 2 is out of work
// after period 1.
WorkerPanel pre_panel() {
  return testing_support::make_panel({{{0, 1, 2.0, true}, {0, 1, 2.0, false}},
                                      {{1, 2, 3.0, true}, {1, 1, 1.0, true}},
                                      {{1, 1, 4.0, true}, {1, 0, kNa, true}}},
                                     {{"job", {"0", "0", "2", "1", "1", ""}}});
}

WorkerPanel post_panel() {
  return testing_support::make_panel({{{0, 1, 1.0, true}, {0, 2, 6.0, true}},
                                      {{1, 2, 3.0, true}, {1, 2, 3.0, false}},
                                      {{1, 0, kNa, true}, {1, 1, 8.0, true}}},
                                     {{"job", {"1", "2", "2", "2", "", "0"}}});
}

double hc1_slope_se(const Eigen::VectorXd& y, const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                    const oracle::LineFit& fit) {
  const double sw = w.sum(), xbar = w.dot(x) / sw;
  double sxx = 0.0, meat = 0.0;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    const double dx = x(k) - xbar;
    const double e = y(k) - fit.intercept - fit.slope * x(k);
    sxx += w(k) * dx * dx;
    meat += std::pow(w(k) * dx * e, 2);
  }
  const double n = static_cast<double>(y.size());
  return std::sqrt(n / (n - 2.0) * meat) / sxx;
}

shock::ShockExperiment small_experiment(std::uint64_t seed = 5) {
  shock::EconomySpec spec;
  spec.types = 8;
  spec.markets = 5;
  spec.sectors = 3;
  spec.seed = seed;
  const auto bundle = shock::synthetic_economy(spec);
  shock::ExperimentConfig cfg;
  cfg.simulation.workers = 4000;
  cfg.simulation.seed = seed;
  cfg.jobs_per_market = 10;
  return shock::run_shock_experiment(bundle, shock::parse_shock("multiply:0=0.5"), cfg);
}

}  // namespace

TEST(Classes, FromPanelColumns) {
  const auto panel = pre_panel();
  EXPECT_EQ(type_classes(panel), (Classes{0, 0, 1, 1, 1, 1}));
  EXPECT_EQ(market_classes(panel), (Classes{0, 0, 1, 0, 0, M}));
  EXPECT_EQ(job_classes(panel, {5, 6, 7}), (Classes{5, 5, 7, 6, 6, M}));
  EXPECT_EQ(worker_classes(panel, {9, 4, 3, 8, 7, 6}, 3), (Classes{8, 8, 7, 7, 6, 6}));
  EXPECT_THROW(job_classes(panel, {0, 1}), InputError);
  EXPECT_THROW(worker_classes(panel, {0, 1}), InputError);
}

TEST(Bartik, ExposureInstrumentAndDroppedGroups) {
  const Classes worker = {0, 0, 0, 1, 2, 2};
  const Classes job = {0, 1, 1, M, 0, 0};
  const auto t = exposure_table(worker, job, 4, 2);
  EXPECT_DOUBLE_EQ(t.shares(0, 0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(t.shares(0, 1), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(t.shares(2, 0), 1.0);
  EXPECT_EQ(t.sizes, Eigen::Vector4d(3, 1, 2, 0));
  EXPECT_EQ(t.dropped, (std::vector<std::uint32_t>{1, 3}));
  const auto z = bartik_instrument(t, Eigen::Vector2d(0.3, -0.6));
  EXPECT_NEAR(z(0), 0.1 - 0.4, 1e-15);
  EXPECT_DOUBLE_EQ(z(2), 0.3);
  EXPECT_TRUE(std::isnan(z(1)) && std::isnan(z(3)));
  EXPECT_THROW(bartik_instrument(t, Eigen::Vector3d::Zero()), InputError);
}

TEST(Bartik, ZscoreStandardizesWithPopulationSd) {
  const auto z = zscore(Eigen::Vector4d(1, 2, 3, 6));
  EXPECT_NEAR(z.mean(), 0.0, 1e-15);
  EXPECT_NEAR(std::sqrt(z.squaredNorm() / 4.0), 1.0, 1e-15);
  EXPECT_THROW(zscore(Eigen::Vector3d::Constant(2.0)), NumericalError);
}

TEST(Regression, MatchesHighPrecisionNormalEquations) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 5 + rep * 3;
    Eigen::VectorXd x(n), y(n), w(n);
    for (int k = 0; k < n; ++k) {
      x(k) = n01(rng);
      y(k) = 0.7 - 1.3 * x(k) + 0.5 * n01(rng) * (1 + std::abs(x(k)));
      w(k) = u(rng);
    }
    const auto r = weighted_ols(y, x, w);
    const auto o = oracle::normal_equations(y, x, w);
    EXPECT_NEAR(r.slope, o.slope, 1e-12);
    EXPECT_NEAR(r.intercept, o.intercept, 1e-12);
    EXPECT_NEAR(r.r2, o.r2, 1e-12);
    EXPECT_NEAR(r.robust_se_slope, hc1_slope_se(y, x, w, o), 1e-10);
    EXPECT_EQ(r.n, static_cast<std::size_t>(n));
  }
}

TEST(Regression, ExactLineAndDegenerateInputs) {
  const Eigen::Vector4d x(0, 1, 2, 4), w(1, 2, 1, 3);
  const Eigen::Vector4d y = (2.0 + 0.5 * x.array()).matrix();
  const auto r = weighted_ols(y, x, w, "size");
  EXPECT_NEAR(r.slope, 0.5, 1e-14);
  EXPECT_NEAR(r.intercept, 2.0, 1e-14);
  EXPECT_DOUBLE_EQ(r.r2, 1.0);
  EXPECT_NEAR(r.se_slope, 0.0, 1e-12);
  EXPECT_EQ(r.weights, "size");
  EXPECT_THROW(weighted_ols(y, Eigen::Vector4d::Constant(3.0), w), NumericalError);
  EXPECT_THROW(weighted_ols(y.head(2), x.head(2), w.head(2)), InputError);
  EXPECT_THROW(weighted_ols(y, x, Eigen::Vector4d(1, -1, 1, 1)), InputError);
}

TEST(Regression, UnitWeightClassicalSeFormula) {
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(6, 0.0, 5.0);
  const Eigen::VectorXd y{{1.0, 2.5, 2.0, 4.5, 4.0, 6.5}};
  const auto r = weighted_ols(y, x, Eigen::VectorXd::Ones(6));
  const double sxx = (x.array() - x.mean()).square().sum();
  const double sse = (y.array() - r.intercept - r.slope * x.array()).square().sum();
  EXPECT_NEAR(r.se_slope, std::sqrt(sse / 4.0 / sxx), 1e-14);
  EXPECT_NEAR(r.se_intercept, std::sqrt(sse / 4.0 * (1.0 / 6.0 + x.mean() * x.mean() / sxx)), 1e-14);
}

TEST(Bartik, DeltaOutcomeCountsNonEmploymentAsZero) {
  const auto d = delta_outcome(pre_panel(), post_panel(), type_classes(pre_panel()), type_classes(post_panel()), 3);
  EXPECT_NEAR(d.delta(0), std::log(6.0) / 2.0 - std::log(2.0), 1e-14);
  const double pre1 = (std::log(3.0) + std::log(1.0) + std::log(4.0)) / 4.0;
  const double post1 = (2.0 * std::log(3.0) + std::log(8.0)) / 4.0;
  EXPECT_NEAR(d.delta(1), post1 - pre1, 1e-14);
  EXPECT_TRUE(std::isnan(d.delta(2)));
  EXPECT_EQ(d.dropped, (std::vector<std::uint32_t>{2}));
  EXPECT_EQ(d.pre_count(1), 4.0);
}

TEST(Bartik, ClassShockInHeadcountAndEfficiencyUnits) {
  const auto pre = pre_panel(), post = post_panel();
  const std::vector<std::uint32_t> jobs_to_class = {0, 0, 1};
  const auto a = job_classes(pre, jobs_to_class), b = job_classes(post, jobs_to_class);
  const auto head = class_labor_shock(pre, post, a, b, 3);
  EXPECT_NEAR(head.shock(0), std::log(2.0 / 4.0), 1e-15);
  EXPECT_NEAR(head.shock(1), std::log(3.0 / 1.0), 1e-15);
  EXPECT_EQ(head.empty, (std::vector<std::uint32_t>{2}));
  const Eigen::VectorXd w_pre = Eigen::Vector2d(2.0, 0.5), w_post = Eigen::Vector2d(1.0, 3.0);
  const auto eff = class_labor_shock(pre, post, a, b, 3, &w_pre, &w_post);
  const double before0 = (2.0 + 2.0 + 1.0 + 4.0) / 2.0;
  const double after0 = 1.0 / 1.0 + 8.0 / 1.0;
  EXPECT_NEAR(eff.shock(0), std::log(after0 / before0), 1e-14);
  EXPECT_NEAR(eff.shock(1), std::log((6.0 + 3.0 + 3.0) / 3.0 / (3.0 / 0.5)), 1e-14);
  EXPECT_THROW(class_labor_shock(pre, post, a, b, 3, &w_pre, nullptr), InputError);
}

TEST(Bartik, AnalysisAgreesWithItsComponentsOnSimulatedData) {
  const auto ex = small_experiment();
  const auto truth = ex.true_partition();
  Classification cls;
  cls.worker_groups = truth.num_worker_groups;
  cls.job_groups = truth.num_job_groups;
  cls.pre_workers = worker_classes(ex.pre_panel, truth.worker_group);
  cls.post_workers = worker_classes(ex.post_panel, truth.worker_group);
  cls.pre_jobs = job_classes(ex.pre_panel, truth.job_group);
  cls.post_jobs = job_classes(ex.post_panel, truth.job_group);
  const auto an = bartik_analysis(ex.pre_panel, ex.post_panel, cls, &ex.pre.w, &ex.post.w);
  ASSERT_TRUE(an.regression.has_value());
  const auto n = static_cast<Eigen::Index>(an.used_groups.size());
  Eigen::VectorXd x(n), y(n), w(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto g = an.used_groups[k];
    x(k) = an.bartik(g);
    y(k) = an.outcome.delta(g);
    w(k) = an.exposure.sizes(g);
  }
  const auto o = oracle::normal_equations(y, zscore(x), w);
  EXPECT_NEAR(an.regression->slope, o.slope, 1e-12);
  EXPECT_NEAR(an.regression->r2, o.r2, 1e-12);
  // Efficiency units by market match the equilibrium change in labor supply.
  const auto shocks = class_labor_shock(ex.pre_panel, ex.post_panel, cls.pre_jobs, cls.post_jobs, cls.job_groups,
                                        &ex.pre.w, &ex.post.w);
  const Eigen::VectorXd model = (ex.post.labor.rowwise().sum().array() / ex.pre.labor.rowwise().sum().array()).log();
  EXPECT_LT((shocks.shock - model).cwiseAbs().maxCoeff(), 0.1);
}

TEST(Concentration, HhiValuesAndBounds) {
  const Classes rows = {0, 0, 0, 1, 1, 1, 1, 2, M};
  const Classes cols = {3, 3, 3, 0, 1, 2, 3, M, 1};
  const auto h = hhi_profile(rows, cols, 3, 4);
  EXPECT_DOUBLE_EQ(h.hhi(0), 1.0);
  EXPECT_DOUBLE_EQ(h.hhi(1), 0.25);
  EXPECT_TRUE(std::isnan(h.hhi(2)));
  EXPECT_DOUBLE_EQ(h.mean, 0.625);
  EXPECT_DOUBLE_EQ(h.weighted_mean, (3.0 + 1.0) / 7.0);

  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::uint32_t> r(0, 4), c(0, 6);
  Classes a(500), b(500);
  for (std::size_t k = 0; k < 500; ++k) {
    a[k] = r(rng);
    b[k] = c(rng);
  }
  const auto random = hhi_profile(a, b, 5, 7);
  for (int g = 0; g < 5; ++g) {
    EXPECT_GE(random.hhi(g), 1.0 / 7.0 - 1e-15);
    EXPECT_LE(random.hhi(g), 1.0);
  }
  EXPECT_THROW(hhi_profile({M}, {0}, 1, 1), InputError);
}

TEST(Concentration, TruePartitionIsMoreConcentratedThanRandomLabels) {
  const auto ex = small_experiment();
  const auto truth = ex.true_partition();
  Rng rng(3);
  auto random = truth;
  std::uniform_int_distribution<std::uint32_t> wpick(0, truth.num_worker_groups - 1), jpick(0, truth.num_job_groups - 1);
  for (auto& g : random.worker_group) g = wpick(rng);
  for (auto& g : random.job_group) g = jpick(rng);
  const auto hhi = [&](const graph::Partition& p) {
    return hhi_profile(worker_classes(ex.pre_panel, p.worker_group), job_classes(ex.pre_panel, p.job_group),
                       p.num_worker_groups, p.num_job_groups)
        .weighted_mean;
  };
  EXPECT_GT(hhi(truth), hhi(random) + 0.05);
}

TEST(Flows, TransitionsFollowSeparationsBetweenJobs) {
  const auto t = job_transitions(pre_panel());
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].from, 2u);
  EXPECT_EQ(t[0].to, 1u);
  EXPECT_EQ(t[0].period, 2u);
  EXPECT_TRUE(job_transitions(post_panel()).empty() == false);
}

TEST(Flows, PredictionErrorMatchesDenseEvaluation) {
  std::mt19937_64 rng(4);
  const std::size_t jobs = 12;
  std::vector<std::uint32_t> cls(jobs);
  for (std::size_t j = 0; j < jobs; ++j) cls[j] = j % 3;
  cls[11] = 3;  // class never seen as an origin in sample
  Eigen::VectorXd emp(jobs);
  std::uniform_real_distribution<double> u(0.5, 4.0);
  for (auto& e : emp) e = u(rng);
  std::uniform_int_distribution<std::uint32_t> pick(0, jobs - 2);
  std::vector<Transition> in, out;
  for (int k = 0; k < 200; ++k) in.push_back({pick(rng), pick(rng), 2});
  for (int k = 0; k < 60; ++k) out.push_back({static_cast<std::uint32_t>(k % 2 ? 11 : pick(rng)), pick(rng), 3});

  Eigen::MatrixXd moves = Eigen::MatrixXd::Zero(4, 4);
  for (const auto& t : in) moves(cls[t.from], cls[t.to]) += 1;
  Eigen::VectorXd class_emp = Eigen::VectorXd::Zero(4);
  for (std::size_t j = 0; j < jobs; ++j) class_emp(cls[j]) += emp(j);
  std::map<std::uint32_t, std::map<std::uint32_t, double>> observed;
  for (const auto& t : out) observed[t.from][t.to] += 1;
  double l1 = 0.0, l2 = 0.0, wl1 = 0.0, wsum = 0.0;
  for (const auto& [origin, row] : observed) {
    double total = 0.0;
    for (const auto& [d, c] : row) total += c;
    Eigen::VectorXd mix = moves.row(cls[origin]).transpose();
    if (mix.sum() == 0.0) mix = moves.colwise().sum().transpose();
    mix /= mix.sum();
    double a = 0.0, b = 0.0;
    for (std::size_t d = 0; d < jobs; ++d) {
      const double pred = mix(cls[d]) * emp(d) / class_emp(cls[d]);
      const double seen = row.count(d) ? row.at(d) / total : 0.0;
      a += std::abs(pred - seen);
      b += (pred - seen) * (pred - seen);
    }
    l1 += a;
    l2 += std::sqrt(b);
    wl1 += emp(origin) * a;
    wsum += emp(origin);
  }
  const double origins = static_cast<double>(observed.size());
  const auto e1 = flow_prediction_error(cls, in, out, emp, Norm::l1);
  const auto e2 = flow_prediction_error(cls, in, out, emp, Norm::l2);
  EXPECT_EQ(e1.origins, observed.size());
  EXPECT_NEAR(e1.mean, l1 / origins, 1e-12);
  EXPECT_NEAR(e1.weighted_mean, wl1 / wsum, 1e-12);
  EXPECT_NEAR(e2.mean, l2 / origins, 1e-12);
  EXPECT_THROW(flow_prediction_error(cls, {}, out, emp, Norm::l1), InputError);
}

TEST(Flows, PerfectPredictionHasZeroError) {
  // One job per class, so sample moves fully determine the prediction.
  const std::vector<std::uint32_t> cls = {0, 1, 2};
  const std::vector<Transition> moves = {{0, 1, 2}, {0, 2, 2}, {1, 0, 2}, {2, 0, 2}};
  const auto e = flow_prediction_error(cls, moves, moves, Eigen::Vector3d::Ones(), Norm::l1);
  EXPECT_NEAR(e.mean, 0.0, 1e-15);
}

TEST(Crosstab, SortedSharesWithLabelTieBreakAndTruncation) {
  const Classes groups = {0, 0, 0, 0, 1, 1, M, 0};
  const std::vector<std::string> labels = {"b", "a", "c", "c", "x", "", "z", "a"};
  const auto t = classification_crosstab(groups, 2, labels, 2);
  ASSERT_EQ(t[0].size(), 2u);
  EXPECT_EQ(t[0][0].label, "a");
  EXPECT_EQ(t[0][1].label, "c");
  EXPECT_DOUBLE_EQ(t[0][0].share, 0.4);
  ASSERT_EQ(t[1].size(), 1u);
  EXPECT_DOUBLE_EQ(t[1][0].share, 1.0);
}

TEST(Misclassify, ChangesExactlyTheExpectedShareToOtherGroups) {
  graph::Partition p;
  p.worker_group.resize(200);
  p.job_group.resize(40);
  for (std::size_t k = 0; k < 200; ++k) p.worker_group[k] = k % 4;
  for (std::size_t k = 0; k < 40; ++k) p.job_group[k] = k % 3;
  p.num_worker_groups = 4;
  p.num_job_groups = 3;
  Rng rng(5);
  const auto q = misclassify(p, 0.25, 0.5, rng);
  std::size_t wchanged = 0, jchanged = 0;
  for (std::size_t k = 0; k < 200; ++k) {
    wchanged += q.worker_group[k] != p.worker_group[k];
    EXPECT_LT(q.worker_group[k], 4u);
  }
  for (std::size_t k = 0; k < 40; ++k) jchanged += q.job_group[k] != p.job_group[k];
  EXPECT_EQ(wchanged, 50u);
  EXPECT_EQ(jchanged, 20u);
  const auto all = misclassify(p, 1.0, 0.0, rng);
  for (std::size_t k = 0; k < 200; ++k) EXPECT_NE(all.worker_group[k], p.worker_group[k]);
  EXPECT_EQ(all.job_group, p.job_group);
  Rng a(6), b(6);
  EXPECT_EQ(misclassify(p, 0.3, 0.3, a), misclassify(p, 0.3, 0.3, b));
  EXPECT_THROW(misclassify(p, 1.5, 0.0, rng), InputError);
}

TEST(Misclassify, NewLabelsAreUniformOverOtherGroups) {
  graph::Partition p;
  p.worker_group.assign(30000, 0);
  p.job_group = {0};
  p.num_worker_groups = 4;
  p.num_job_groups = 1;
  Rng rng(7);
  const auto q = misclassify(p, 1.0, 1.0, rng);
  EXPECT_EQ(q.job_group, p.job_group);  // a single group cannot move
  std::vector<double> counts(4, 0.0);
  for (auto g : q.worker_group) counts[g] += 1;
  EXPECT_EQ(counts[0], 0.0);
  for (int g = 1; g < 4; ++g) EXPECT_NEAR(counts[g] / 30000.0, 1.0 / 3.0, 4.0 * std::sqrt(2.0 / 9.0 / 30000.0));
}

TEST(Spearman, RanksWithTies) {
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {10, 20, 25, 100}), 1.0);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
  EXPECT_NEAR(spearman({1, 2, 2, 3}, {3, 1, 2, 4}), oracle::pearson({1, 2.5, 2.5, 4}, {3, 1, 2, 4}), 1e-15);
  EXPECT_TRUE(std::isnan(spearman({1, 1, 1}, {1, 2, 3})));
  EXPECT_THROW(spearman({1}, {1}), InputError);
}

TEST(Sweep, LayoutMarginalsAndDeterminism) {
  const auto ex = small_experiment(6);
  SweepConfig cfg;
  cfg.step = 0.5;
  cfg.seeds = 2;
  const auto cells = misclassification_sweep(ex, cfg);
  ASSERT_EQ(cells.size(), 18u);
  EXPECT_EQ(cells[9].frac_workers, 0.5);
  EXPECT_EQ(cells[9].frac_jobs, 0.5);
  EXPECT_EQ(cells[9].seed, 1u);
  const auto again = misclassification_sweep(ex, cfg);
  for (std::size_t k = 0; k < cells.size(); ++k) EXPECT_EQ(cells[k].r2, again[k].r2);
  // Both seeds of the uncorrupted cell see the true partition.
  EXPECT_EQ(cells[0].r2, cells[1].r2);
  const auto marg = marginal_r2(cells, true);
  ASSERT_EQ(marg.size(), 3u);
  double mean0 = 0.0;
  for (std::size_t k = 0; k < 6; ++k) mean0 += cells[k].r2 / 6.0;
  EXPECT_NEAR(marg[0].second, mean0, 1e-15);
  EXPECT_GT(marg[0].second, marg[2].second);
}
