#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "labornet/blockmodel.hpp"
#include "labornet/errors.hpp"
#include "labornet/parallel.hpp"

using namespace labornet;
using namespace labornet::sbm;
using testing_support::dense;
using testing_support::from_dense;

namespace {

const oracle::DenseCounts kPlanted = {{3, 3, 0, 0}, {3, 3, 0, 0}, {0, 0, 3, 3}, {0, 0, 3, 3}};

std::vector<double> as_double(std::span<const std::uint64_t> d) { return {d.begin(), d.end()}; }

double dense_ll(const BipartiteGraph& g, const Partition& p, const BlockProbabilities& P, double scale = 1.0) {
  auto dw = as_double(g.worker_degrees());
  auto dj = as_double(g.job_degrees());
  for (auto& v : dw) v *= scale;
  return oracle::dense_poisson_ll(dense(g), p.worker_group, p.job_group, P / scale, dw, dj);
}

// Planted blocks of equal size with propensity ratio `contrast` between
// diagonal and off-diagonal cells, scaled to the requested mean worker degree.
struct Planted {
  BipartiteGraph graph;
  Partition truth;
};

Planted planted_graph(std::size_t workers, std::size_t jobs, std::uint32_t types, std::uint32_t markets,
                      double contrast, double mean_degree, std::uint64_t seed) {
  std::vector<std::uint32_t> wg(workers), jg(jobs);
  for (std::size_t i = 0; i < workers; ++i) wg[i] = static_cast<std::uint32_t>(i % types);
  for (std::size_t j = 0; j < jobs; ++j) jg[j] = static_cast<std::uint32_t>(j % markets);
  auto truth = Partition::from_labels(wg, jg);
  BlockProbabilities P = BlockProbabilities::Ones(types, markets);
  for (std::uint32_t r = 0; r < types; ++r) P(r, r % markets) = contrast;
  if (types > markets) P(types - 1, (types - 1 + 1) % markets) = contrast;
  double total = 0.0;
  for (std::size_t i = 0; i < workers; ++i)
    for (std::size_t j = 0; j < jobs; ++j) total += P(wg[i], jg[j]);
  P *= mean_degree * static_cast<double>(workers) / total;
  std::vector<double> ww(workers, 1.0), jw(jobs, 1.0);
  Rng rng(seed);
  auto g = sample_network(truth, P, ww, jw, rng);
  return {std::move(g), std::move(truth)};
}

}  // namespace

TEST(LogLikelihood, EmptyGraphIsZero) {
  const auto g = BipartiteGraph::from_edges(2, 3, {});
  const auto p = Partition::from_labels({0, 1}, {0, 0, 1});
  EXPECT_EQ(log_likelihood(g, p, BlockProbabilities::Constant(2, 2, 0.7)), 0.0);
}

TEST(LogLikelihood, OneBlockMatchesDenseOracle) {
  const auto g = from_dense({{2, 1}, {0, 3}});
  const auto p = Partition::from_labels({0, 0}, {0, 0});
  const auto P = estimate_block_probabilities(g, p);
  EXPECT_NEAR(log_likelihood(g, p, P), dense_ll(g, p, P), 1e-10);
}

TEST(LogLikelihood, SparseEvaluationMatchesDenseOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t nw = 2 + trial % 11, nj = 2 + (trial * 7) % 11;
    const auto g = from_dense(testing_support::random_counts(nw, nj, 0.4, rng));
    const Partition p{testing_support::random_labels(nw, 3, rng), testing_support::random_labels(nj, 2, rng), 3, 2};
    BlockProbabilities P = BlockProbabilities::Random(3, 2).array().abs() + 0.01;
    const double ll = log_likelihood(g, p, P);
    EXPECT_NEAR(ll, dense_ll(g, p, P), 1e-9 * std::max(1.0, std::abs(ll))) << trial;
  }
}

TEST(LogLikelihood, DegreeRescalingLeavesMeansUnchanged) {
  std::mt19937_64 rng(22);
  const auto g = from_dense(testing_support::random_counts(6, 5, 0.8, rng));
  const Partition p{testing_support::random_labels(6, 2, rng), testing_support::random_labels(5, 2, rng), 2, 2};
  const auto P = estimate_block_probabilities(g, p);
  const double base = log_likelihood(g, p, P);
  for (double c : {0.25, 3.0, 40.0}) EXPECT_NEAR(dense_ll(g, p, P, c), base, 1e-9 * std::abs(base));
}

TEST(LogLikelihood, EdgeInZeroBlockIsImpossible) {
  const auto g = from_dense({{1, 0}, {0, 1}});
  const auto p = Partition::from_labels({0, 1}, {0, 1});
  BlockProbabilities P{{0.5, 0.5}, {0.5, 0.0}};
  EXPECT_TRUE(is_impossible(log_likelihood(g, p, P)));
  P(1, 1) = 0.5;
  EXPECT_FALSE(is_impossible(log_likelihood(g, p, P)));
}

TEST(BlockProbabilities, OneBlockIsInverseEdgeCount) {
  const auto g = from_dense({{2, 1, 0}, {0, 3, 1}});
  const auto P = estimate_block_probabilities(g, Partition::from_labels({0, 0}, {0, 0, 0}));
  EXPECT_DOUBLE_EQ(P(0, 0), 1.0 / 7.0);
}

TEST(BlockProbabilities, EmptyBlockIsZero) {
  const auto g = from_dense({{2, 0}, {0, 3}});
  const auto P = estimate_block_probabilities(g, Partition::from_labels({0, 1}, {0, 1}));
  EXPECT_EQ(P(0, 1), 0.0);
  EXPECT_EQ(P(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(P(0, 0), 0.5);
}

TEST(BlockProbabilities, ProfileEstimateMaximizesLikelihood) {
  std::mt19937_64 rng(23);
  const auto g = from_dense(testing_support::random_counts(9, 7, 0.6, rng));
  const Partition p{testing_support::random_labels(9, 3, rng), testing_support::random_labels(7, 2, rng), 3, 2};
  const auto P = estimate_block_probabilities(g, p);
  const double best = log_likelihood(g, p, P);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (int k = 0; k < 50; ++k) {
    BlockProbabilities Q = P;
    for (Eigen::Index c = 0; c < Q.size(); ++c) Q(c) *= std::exp(noise(rng));
    EXPECT_LE(log_likelihood(g, p, Q), best + 1e-9);
  }
}

TEST(BlockProbabilities, SamplerRecoversPlantedMatrix) {
  // Doubly balanced design: node weights equal expected degrees, so the
  // profile estimate is consistent for the sampling matrix.
  const std::size_t n = 20;
  std::vector<std::uint32_t> wg(n), jg(n);
  for (std::size_t k = 0; k < n; ++k) wg[k] = jg[k] = static_cast<std::uint32_t>(k % 2);
  const auto truth = Partition::from_labels(wg, jg);
  std::vector<double> weights(n);
  for (std::size_t k = 0; k < n; ++k) weights[k] = 5.0 + static_cast<double>(k / 2);
  const double W = std::accumulate(weights.begin(), weights.end(), 0.0) / 2.0;
  const BlockProbabilities P = BlockProbabilities{{0.8, 0.2}, {0.2, 0.8}} / W;

  const int draws = 10000;
  Eigen::MatrixXd mean_counts = Eigen::MatrixXd::Zero(2, 2), mean_p = Eigen::MatrixXd::Zero(2, 2);
  Rng rng(24);
  for (int k = 0; k < draws; ++k) {
    const auto g = sample_network(truth, P, weights, weights, rng);
    mean_counts += graph::block_edge_counts(g, truth).cast<double>() / draws;
    mean_p += estimate_block_probabilities(g, truth) / draws;
  }
  for (int r = 0; r < 2; ++r) {
    for (int t = 0; t < 2; ++t) {
      const double expected = P(r, t) * W * W;
      EXPECT_NEAR(mean_counts(r, t), expected, 3.0 * std::sqrt(expected / draws));
      EXPECT_NEAR(mean_p(r, t) / P(r, t), 1.0, 0.01);
    }
  }
}

TEST(DescriptionLength, MatchesDefinitionOracle) {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t nw = 2 + trial % 9, nj = 2 + (trial * 5) % 8;
    const auto A = testing_support::random_counts(nw, nj, 0.5, rng);
    const auto g = from_dense(A);
    const auto w = testing_support::random_labels(nw, 1 + trial % 4, rng);
    const auto j = testing_support::random_labels(nj, 1 + trial % 3, rng);
    const double bits = description_length(g, Partition::from_labels(w, j)).total();
    EXPECT_NEAR(bits, oracle::dense_description_length(A, w, j), 1e-8 * bits) << trial;
  }
}

TEST(DescriptionLength, DataPartIsNegativeProfileLikelihoodInBits) {
  std::mt19937_64 rng(26);
  const auto g = from_dense(testing_support::random_counts(7, 6, 0.6, rng));
  const auto p = Partition::from_labels(testing_support::random_labels(7, 2, rng), testing_support::random_labels(6, 3, rng));
  const auto dl = description_length(g, p);
  EXPECT_NEAR(dl.data_bits, -log_likelihood(g, p, estimate_block_probabilities(g, p)) / std::log(2.0), 1e-9 * dl.data_bits);
  EXPECT_GT(dl.model_bits, 0.0);
}

TEST(DescriptionLength, PlantedPartitionIsExhaustiveMinimum) {
  const auto g = from_dense(kPlanted);
  const auto best = oracle::exhaustive_minimum(kPlanted, 3, 3, [&](const auto& w, const auto& j) {
    return description_length(g, Partition::from_labels(w, j)).total();
  });
  EXPECT_EQ(best.workers, (std::vector<std::uint32_t>{0, 0, 1, 1}));
  EXPECT_EQ(best.jobs, (std::vector<std::uint32_t>{0, 0, 1, 1}));
}

TEST(DescriptionLength, InvariantUnderLabelPermutation) {
  std::mt19937_64 rng(27);
  const auto g = from_dense(testing_support::random_counts(8, 6, 0.5, rng));
  auto w = testing_support::random_labels(8, 3, rng);
  auto j = testing_support::random_labels(6, 3, rng);
  const double base = description_length(g, Partition::from_labels(w, j)).total();
  for (auto& v : w) v = (v + 1) % 3;
  for (auto& v : j) v = 2 - v;
  EXPECT_NEAR(description_length(g, Partition::from_labels(w, j)).total(), base, 1e-9 * base);
}

TEST(DescriptionLength, MergingProportionalGroupsChangesOnlyModelBits) {
  // Worker groups 0 and 1 have identical job profiles; merging them leaves
  // the profile likelihood unchanged.
  const oracle::DenseCounts A = {{2, 1, 0}, {2, 1, 0}, {2, 1, 0}, {2, 1, 0}, {0, 1, 3}, {0, 1, 3}};
  const auto g = from_dense(A);
  const auto split = description_length(g, Partition::from_labels({0, 0, 1, 1, 2, 2}, {0, 1, 2}));
  const auto merged = description_length(g, Partition::from_labels({0, 0, 0, 0, 1, 1}, {0, 1, 2}));
  EXPECT_NEAR(merged.data_bits, split.data_bits, 1e-9 * split.data_bits);
  EXPECT_NEAR(merged.total() - split.total(), merged.model_bits - split.model_bits, 1e-9);
  EXPECT_LT(merged.total(), split.total());
}

TEST(BlockState, TracksDescriptionLengthThroughMoves) {
  std::mt19937_64 rng(28);
  const auto g = from_dense(testing_support::random_counts(10, 8, 0.4, rng));
  BlockState state(g, Partition::from_labels(testing_support::random_labels(10, 3, rng), testing_support::random_labels(8, 2, rng)), 5, 4);
  Rng chain(29);
  SweepOptions options;
  for (int sweep = 0; sweep < 50; ++sweep) {
    mcmc_sweep(state, options, chain);
    ASSERT_TRUE(state.consistent(1e-8)) << sweep;
  }
  const double merge = state.merge_delta(Side::job, state.nonempty_groups(Side::job)[0],
                                         state.nonempty_groups(Side::job).back());
  if (state.num_groups(Side::job) > 1) {
    const double before = state.bits();
    state.apply_merge(Side::job, state.nonempty_groups(Side::job)[0], state.nonempty_groups(Side::job).back());
    EXPECT_NEAR(state.bits() - before, merge, 1e-8);
    EXPECT_TRUE(state.consistent(1e-8));
  }
}

TEST(Mcmc, ZeroTemperatureAtOptimumNeverWorsens) {
  const auto g = from_dense(kPlanted);
  for (double temperature : {0.0, 1e-12}) {
    BlockState state(g, Partition::from_labels({0, 0, 1, 1}, {0, 0, 1, 1}), 3, 3);
    const double optimum = state.bits();
    Rng rng(30);
    SweepOptions options;
    options.temperature = temperature;
    for (int sweep = 0; sweep < 200; ++sweep) {
      mcmc_sweep(state, options, rng);
      EXPECT_LE(state.bits(), optimum + 1e-9);
    }
  }
}

TEST(Mcmc, SameSeedSameTrajectory) {
  std::mt19937_64 rng(31);
  const auto g = from_dense(testing_support::random_counts(9, 9, 0.4, rng));
  const auto start = Partition::from_labels(testing_support::random_labels(9, 3, rng), testing_support::random_labels(9, 3, rng));
  auto run = [&] {
    BlockState state(g, start, 5, 5);
    Rng chain(32);
    std::vector<std::size_t> accepted;
    for (int k = 0; k < 20; ++k) accepted.push_back(mcmc_sweep(state, {}, chain).accepted);
    return std::pair{state.partition(), accepted};
  };
  EXPECT_EQ(run(), run());
}

TEST(Mcmc, StationaryDistributionMatchesDescriptionLength) {
  // Every partition of a 3 x 2 graph is reachable; visit frequencies of the
  // unit-temperature chain must follow 2^-bits.
  const oracle::DenseCounts A = {{1, 1}, {1, 0}, {0, 2}};
  const auto g = from_dense(A);
  std::map<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>, double> target;
  double norm = 0.0;
  oracle::exhaustive_minimum(A, 3, 2, [&](const auto& w, const auto& j) {
    const double bits = description_length(g, Partition::from_labels(w, j)).total();
    target[{w, j}] = std::exp2(-bits);
    norm += std::exp2(-bits);
    return bits;
  });
  ASSERT_EQ(target.size(), 10u);

  BlockState state(g, Partition::from_labels({0, 0, 0}, {0, 0}), 3, 2);
  Rng rng(33);
  SweepOptions options;
  options.temperature = 1.0;
  options.epsilon = 0.5;
  std::map<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>, double> visits;
  const int samples = 200000;
  for (int k = 0; k < 1000; ++k) mcmc_sweep(state, options, rng);
  for (int k = 0; k < samples; ++k) {
    mcmc_sweep(state, options, rng);
    const auto p = state.partition();
    visits[{p.worker_group, p.job_group}] += 1.0;
  }
  // Pool cells with small expectation, then a chi-square with a wide margin
  // for autocorrelation.
  double chi2 = 0.0, pooled_obs = 0.0, pooled_exp = 0.0;
  int cells = 0;
  for (const auto& [state_key, weight] : target) {
    const double expected = samples * weight / norm;
    const double observed = visits[state_key];
    if (expected < 50.0) {
      pooled_obs += observed;
      pooled_exp += expected;
      continue;
    }
    chi2 += (observed - expected) * (observed - expected) / expected;
    ++cells;
  }
  if (pooled_exp > 0.0) chi2 += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / std::max(pooled_exp, 1.0);
  EXPECT_GE(cells, 4);
  EXPECT_LT(chi2 / samples, 1e-3) << "chi2 " << chi2;
  for (const auto& [state_key, weight] : target) {
    const double expected = weight / norm;
    if (expected > 0.02) {
      EXPECT_NEAR(visits[state_key] / samples, expected, 0.1 * expected);
    }
  }
}

TEST(Mcmc, HastingsCorrectionMatters) {
  // Without the proposal ratio the same chain drifts off the target.
  const oracle::DenseCounts A = {{1, 1}, {1, 0}, {0, 2}};
  const auto g = from_dense(A);
  auto frequency_error = [&](bool hastings) {
    std::map<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>, double> target, visits;
    double norm = 0.0;
    oracle::exhaustive_minimum(A, 3, 2, [&](const auto& w, const auto& j) {
      const double bits = description_length(g, Partition::from_labels(w, j)).total();
      target[{w, j}] = std::exp2(-bits);
      norm += std::exp2(-bits);
      return bits;
    });
    BlockState state(g, Partition::from_labels({0, 0, 0}, {0, 0}), 3, 2);
    Rng rng(34);
    SweepOptions options;
    options.epsilon = 0.2;
    options.hastings = hastings;
    const int samples = 100000;
    for (int k = 0; k < samples; ++k) {
      mcmc_sweep(state, options, rng);
      const auto p = state.partition();
      visits[{p.worker_group, p.job_group}] += 1.0;
    }
    double tv = 0.0;
    for (const auto& [key, weight] : target) tv += 0.5 * std::abs(visits[key] / samples - weight / norm);
    return tv;
  };
  const double with = frequency_error(true);
  EXPECT_LT(with, 0.01);
  EXPECT_GT(frequency_error(false), with);
}

TEST(Inference, ReportedLengthMatchesRecomputation) {
  const auto planted = planted_graph(60, 30, 3, 3, 8.0, 12.0, 35);
  InferenceConfig config;
  config.restarts = 4;
  config.sweeps_per_restart = 60;
  const auto result = infer_partition(planted.graph, config);
  const double fresh = description_length(planted.graph, result.partition).total();
  EXPECT_NEAR(result.description_length.total(), fresh, 1e-9 * fresh);
  EXPECT_TRUE(result.partition.is_contiguous());
  ASSERT_EQ(result.trace.size(), 4u);
  EXPECT_NEAR(result.trace[result.best_restart].best_bits, fresh, 1e-7 * fresh);
  for (const auto& t : result.trace) EXPECT_GE(t.best_bits, fresh - 1e-7 * fresh);
}

TEST(Inference, RunningBestNeverIncreases) {
  const auto planted = planted_graph(80, 40, 4, 3, 10.0, 10.0, 36);
  const auto result = infer_partition(planted.graph, {});
  ASSERT_FALSE(result.best_bits_by_sweep.empty());
  for (std::size_t k = 1; k < result.best_bits_by_sweep.size(); ++k) {
    EXPECT_LE(result.best_bits_by_sweep[k], result.best_bits_by_sweep[k - 1]);
  }
}

TEST(Inference, RecoversStrongPlantedStructure) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto planted = planted_graph(200, 100, 4, 3, 10.0, 40.0, seed);
    InferenceConfig config;
    config.seed = seed;
    const auto result = infer_partition(planted.graph, config);
    const auto agreement = compare_partitions(result.partition, planted.truth);
    EXPECT_GE(agreement.workers.ari, 0.95) << seed;
    EXPECT_GE(agreement.jobs.ari, 0.95) << seed;
    EXPECT_LE(result.description_length.total(), description_length(planted.graph, planted.truth).total() + 1e-6);
  }
}

TEST(Inference, UnstructuredGraphSelectsOneBlock) {
  const auto planted = planted_graph(120, 60, 1, 1, 1.0, 8.0, 37);
  const auto result = infer_partition(planted.graph, {});
  EXPECT_EQ(result.partition.num_worker_groups, 1u);
  EXPECT_EQ(result.partition.num_job_groups, 1u);
}

TEST(Inference, DeterministicAcrossThreadCounts) {
  const auto planted = planted_graph(100, 50, 3, 3, 6.0, 8.0, 38);
  InferenceConfig config;
  config.seed = 99;
  config.restarts = 6;
  config.sweeps_per_restart = 80;
  set_thread_limit(1);
  const auto serial = infer_partition(planted.graph, config);
  set_thread_limit(4);
  const auto parallel = infer_partition(planted.graph, config);
  set_thread_limit(0);
  EXPECT_EQ(serial.partition, parallel.partition);
  EXPECT_EQ(serial.description_length.total(), parallel.description_length.total());
  std::ostringstream a, b;
  write_inference_json(serial, a);
  write_inference_json(parallel, b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Inference, GroupBoundsRespected) {
  const auto planted = planted_graph(60, 30, 1, 1, 1.0, 6.0, 39);
  InferenceConfig config;
  config.restarts = 3;
  config.sweeps_per_restart = 40;
  config.bounds.worker_min = 2;
  config.bounds.worker_max = 3;
  config.bounds.job_min = 2;
  config.bounds.job_max = 2;
  const auto result = infer_partition(planted.graph, config);
  EXPECT_GE(result.partition.num_worker_groups, 2u);
  EXPECT_LE(result.partition.num_worker_groups, 3u);
  EXPECT_EQ(result.partition.num_job_groups, 2u);
}

TEST(Inference, InvalidConfigurationRejected) {
  const auto g = from_dense(kPlanted);
  InferenceConfig config;
  config.restarts = 0;
  EXPECT_THROW(infer_partition(g, config), InputError);
  config = {};
  config.bounds.worker_min = 3;
  config.bounds.worker_max = 2;
  EXPECT_THROW(infer_partition(g, config), InputError);
  EXPECT_THROW(infer_partition(BipartiteGraph::from_edges(2, 2, {}), {}), InputError);
}

TEST(Sampler, ZeroPropensityGivesEmptyGraph) {
  const auto p = Partition::from_labels({0, 1, 1}, {0, 0});
  Rng rng(40);
  std::vector<double> w(3, 2.0), j(2, 3.0);
  const auto g = sample_network(p, BlockProbabilities::Zero(2, 1), w, j, rng);
  EXPECT_EQ(g.total_edges(), 0u);
  EXPECT_EQ(g.num_workers(), 3u);
}

TEST(Sampler, SinglePairMeanAndVariance) {
  const auto p = Partition::from_labels({0}, {0});
  std::vector<double> w{1.5}, j{2.0};
  const BlockProbabilities P = BlockProbabilities::Constant(1, 1, 1.0);
  Rng rng(41);
  const int draws = 100000;
  double s = 0.0, ss = 0.0;
  for (int k = 0; k < draws; ++k) {
    const double a = static_cast<double>(sample_network(p, P, w, j, rng).total_edges());
    s += a;
    ss += a * a;
  }
  const double lambda = 3.0;
  const double mean = s / draws;
  const double var = ss / draws - mean * mean;
  EXPECT_NEAR(mean, lambda, 3.0 * std::sqrt(lambda / draws));
  EXPECT_NEAR(var, lambda, 3.0 * std::sqrt((lambda + 2.0 * lambda * lambda) / draws));
}

TEST(Sampler, BadInputsRejected) {
  const auto p = Partition::from_labels({0}, {0});
  Rng rng(42);
  std::vector<double> w{1.0}, j{1.0}, none;
  EXPECT_THROW(sample_network(p, BlockProbabilities::Constant(1, 1, -1.0), w, j, rng), InputError);
  EXPECT_THROW(sample_network(p, BlockProbabilities::Constant(2, 1, 1.0), w, j, rng), InputError);
  EXPECT_THROW(sample_network(p, BlockProbabilities::Constant(1, 1, 1.0), none, j, rng), InputError);
}

TEST(Agreement, IdenticalPartitionsScoreOne) {
  const std::vector<std::uint32_t> a{0, 0, 1, 2, 2, 1};
  const std::vector<std::uint32_t> relabeled{2, 2, 0, 1, 1, 0};
  const auto s = compare_labels(a, relabeled);
  EXPECT_DOUBLE_EQ(s.ari, 1.0);
  EXPECT_NEAR(s.nmi, 1.0, 1e-12);
}

TEST(Agreement, SmallContingencyTable) {
  // Table {{2, 0}, {1, 1}}: pair index 1 equals its expectation 2 * 3 / 6.
  const std::vector<std::uint32_t> a{0, 0, 1, 1}, b{0, 0, 0, 1};
  EXPECT_NEAR(compare_labels(a, b).ari, 0.0, 1e-12);
  EXPECT_NEAR(compare_labels(a, b).ari, oracle::adjusted_rand(a, b), 1e-12);
}

TEST(Agreement, MatchesPairCountingOracleAndIsNearZeroForRandomLabels) {
  std::mt19937_64 rng(43);
  double mean = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = testing_support::random_labels(300, 4, rng);
    const auto b = testing_support::random_labels(300, 5, rng);
    const double ari = compare_labels(a, b).ari;
    EXPECT_NEAR(ari, oracle::adjusted_rand(a, b), 1e-12);
    mean += ari / 40.0;
  }
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_THROW(compare_labels(std::vector<std::uint32_t>{0}, std::vector<std::uint32_t>{0, 1}), InputError);
}
