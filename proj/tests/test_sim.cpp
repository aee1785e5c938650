#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <vector>

#include "modsig/parallel.hpp"
#include "modsig/sim.hpp"
#include "oracles.hpp"

using namespace modsig;

namespace {

PiVector flat_pi(std::size_t n, double value) { return PiVector(std::vector<double>(n, value)); }

double total_weight(const Graph& g) {
  double s = 0.0;
  for (const auto& e : g.edges()) s += e.weight;
  return s;
}

}  // namespace

TEST(Seeds, MixIsDeterministicAndSpreads) {
  EXPECT_EQ(mix_seed(7, 3), mix_seed(7, 3));
  EXPECT_NE(mix_seed(7, 3), mix_seed(7, 4));
  EXPECT_NE(mix_seed(7, 3), mix_seed(8, 3));
}

TEST(Sampling, SameSeedSameGraph) {
  const PiVector pi = flat_pi(50, 0.6);
  for (const EdgeModel& m : {EdgeModel::bernoulli(), EdgeModel::poisson(), EdgeModel::negbin(0.8),
                             EdgeModel::zi_negbin(0.3, 0.8)}) {
    const Graph a = sample_graph(pi, m, 99);
    const Graph b = sample_graph(pi, m, 99);
    ASSERT_EQ(a.num_edges(), b.num_edges());
    for (std::size_t e = 0; e < a.num_edges(); ++e) EXPECT_EQ(a.edges()[e], b.edges()[e]);
  }
}

TEST(Sampling, ZeroOmegaReproducesBaseDraws) {
  const PiVector pi = flat_pi(40, 0.9);
  const Graph a = sample_graph(pi, EdgeModel::poisson(), 5);
  const Graph b = sample_graph(pi, EdgeModel::zi_poisson(0.0), 5);
  ASSERT_EQ(a.num_edges(), b.num_edges());
  for (std::size_t e = 0; e < a.num_edges(); ++e) EXPECT_EQ(a.edges()[e], b.edges()[e]);
}

TEST(Sampling, MeanAndVarianceOfPairCounts) {
  // 300 nodes with π = 1: 44850 iid pairs of mean 1.
  const PiVector pi = flat_pi(300, 1.0);
  const double pairs = 300.0 * 299.0 / 2.0;
  for (const EdgeModel& m : {EdgeModel::poisson(), EdgeModel::negbin(0.5), EdgeModel::zi_poisson(0.4)}) {
    const Graph g = sample_graph(pi, m, 1234);
    double sum = 0.0;
    double sq = 0.0;
    for (const auto& e : g.edges()) {
      sum += e.weight;
      sq += e.weight * e.weight;
    }
    const double mean = sum / pairs;
    const double var = sq / pairs - mean * mean;
    const double tol_mean = 5.0 * std::sqrt(m.variance(1.0) / pairs);
    EXPECT_NEAR(mean, m.mean(1.0), tol_mean) << to_string(m.family);
    EXPECT_NEAR(var, m.variance(1.0), 0.05 * m.variance(1.0)) << to_string(m.family);
  }
}

TEST(Sampling, BernoulliRate) {
  const PiVector pi = flat_pi(300, 0.5);
  const Graph g = sample_graph(pi, EdgeModel::bernoulli(), 77);
  const double pairs = 300.0 * 299.0 / 2.0;
  EXPECT_NEAR(total_weight(g) / pairs, 0.25, 5.0 * std::sqrt(0.1875 / pairs));
}

TEST(Replicates, IndependentOfWorkerCount) {
  const PiVector pi = flat_pi(60, 0.8);
  std::vector<std::size_t> codes(60);
  for (std::size_t i = 0; i < 60; ++i) codes[i] = i % 3;
  const auto a = CommunityAssignment::from_codes(codes);
  const auto one = simulate_replicates(pi, EdgeModel::poisson(), a, 40, 11, 1);
  const auto many = simulate_replicates(pi, EdgeModel::poisson(), a, 40, 11, 4);
  ASSERT_EQ(one.size(), many.size());
  for (std::size_t b = 0; b < one.size(); ++b) {
    EXPECT_EQ(one[b].degenerate, many[b].degenerate);
    EXPECT_EQ(one[b].stats.z, many[b].stats.z);
    EXPECT_EQ(one[b].stats.q_hat, many[b].stats.q_hat);
  }
}

TEST(Replicates, IsolatedNodesAreDropped) {
  // Tiny propensities leave some nodes without edges.
  std::vector<double> pi(40, 0.25);
  pi[0] = 3.0;
  std::vector<std::size_t> codes(40);
  for (std::size_t i = 0; i < 40; ++i) codes[i] = i % 2;
  const auto out = simulate_replicates(PiVector(pi), EdgeModel::poisson(),
                                       CommunityAssignment::from_codes(codes), 20, 3, 1);
  std::size_t dropped = 0;
  for (const auto& r : out) dropped += r.dropped_nodes;
  EXPECT_GT(dropped, 0u);
}

TEST(Uniformity, SummaryAndKs) {
  std::vector<double> grid(1000);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = (static_cast<double>(i) + 0.5) / 1000.0;
  const auto s = uniformity_summary(grid);
  EXPECT_NEAR(s.mean, 0.5, 1e-12);
  EXPECT_NEAR(s.std, std::sqrt(1.0 / 12.0), 1e-3);
  EXPECT_NEAR(ks_distance_uniform(grid), 0.0005, 1e-12);
  const std::vector<double> half(100, 0.5);
  EXPECT_NEAR(ks_distance_uniform(half), 0.5, 1e-12);
}

TEST(Bootstrap, DeterministicAndCalibrated) {
  const PiVector pi = flat_pi(80, 0.9);
  const Graph g = sample_graph(pi, EdgeModel::poisson(), 8);
  std::vector<std::size_t> codes(80);
  for (std::size_t i = 0; i < 80; ++i) codes[i] = i % 4;
  const auto a = CommunityAssignment::from_codes(codes);
  BootstrapOptions opts;
  opts.replicates = 200;
  opts.seed = 7;
  const auto r1 = bootstrap(g, a, Family::poisson, opts);
  opts.workers = 3;
  const auto r2 = bootstrap(g, a, Family::poisson, opts);
  EXPECT_EQ(r1.z_values, r2.z_values);
  EXPECT_EQ(r1.bootstrap_p, r2.bootstrap_p);
  EXPECT_TRUE(r1.valid);
  EXPECT_GT(r1.bootstrap_p, 0.0);
  EXPECT_LE(r1.bootstrap_p, 1.0);
  EXPECT_NEAR(r1.p_mean, 0.5, 0.1);
  opts.replicates = 0;
  EXPECT_THROW(bootstrap(g, a, Family::poisson, opts), std::invalid_argument);
}

TEST(Parallel, CoversEveryIndexOnceAndRethrows) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  EXPECT_EQ(std::accumulate(hits.begin(), hits.end(), 0), 1000);
  EXPECT_THROW(parallel_for(10, 2, [](std::size_t i) {
                 if (i == 5) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(Sampling, ThreeNodePairMeans) {
  const PiVector pi({0.5, 1.0, 0.5});
  const int reps = 5000;
  double ab = 0.0;
  double ac = 0.0;
  for (int b = 0; b < reps; ++b) {
    const Graph g = sample_graph(pi, EdgeModel::poisson(), mix_seed(1, b));
    for (const auto& e : g.edges()) {
      if (e.u == 0 && e.v == 1) ab += e.weight;
      if (e.u == 0 && e.v == 2) ac += e.weight;
    }
  }
  EXPECT_NEAR(ab / reps, 0.5, 3 * std::sqrt(0.5 / reps));
  EXPECT_NEAR(ac / reps, 0.25, 3 * std::sqrt(0.25 / reps));
}

TEST(Uniformity, DegenerateInputs) {
  const std::vector<double> half(10, 0.5);
  const auto s = uniformity_summary(half);
  EXPECT_EQ(s.mean, 0.5);
  EXPECT_EQ(s.std, 0.0);
  EXPECT_THROW(uniformity_summary(std::vector<double>{}), std::invalid_argument);
}

TEST(Bootstrap, ReplicatesRecomputePlugIn) {
  const PiVector pi = flat_pi(60, 0.9);
  const Graph g = sample_graph(pi, EdgeModel::negbin(2.0), 4);
  std::vector<std::size_t> codes(60);
  for (std::size_t i = 0; i < 60; ++i) codes[i] = i % 3;
  BootstrapOptions opts;
  opts.replicates = 100;
  const auto r = bootstrap(g, CommunityAssignment::from_codes(codes), Family::negbin, opts);
  EXPECT_EQ(r.z_values.size() + r.degenerate_replicates, 100u);
  EXPECT_EQ(r.p_values.size(), r.z_values.size());
  // Q̂* varies across replicates because π̂* is re-estimated from each draw.
  const auto [lo, hi] = std::minmax_element(r.q_values.begin(), r.q_values.end());
  EXPECT_LT(*lo, *hi);
  EXPECT_GT(r.bootstrap_p, 0.0);
  EXPECT_LT(r.bootstrap_p, 1.0);
  EXPECT_EQ(r.model.family, Family::negbin);
}

TEST(PlugInConsistency, StandardErrorErrorShrinksWithN) {
  // Fixed propensity profile, so expected degrees grow with n.
  auto mean_rel_error = [](std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = 0.2 + 0.8 * static_cast<double>(i) / static_cast<double>(n - 1);
    const PiVector truth(w);
    const auto se_true = clt_standard_errors(truth, EdgeModel::poisson());
    const std::size_t reps = 200;
    std::vector<double> err(reps, 0.0);
    parallel_for(reps, worker_count(), [&](std::size_t b) {
      const Graph g = sample_graph(truth, EdgeModel::poisson(), mix_seed(n, b));
      const PiEstimate est = estimate_pi(g, IsolatedPolicy::drop);
      const auto se_hat = clt_standard_errors(est.pi, EdgeModel::poisson());
      double sum = 0.0;
      for (std::size_t k = 0; k < est.kept.size(); ++k) {
        sum += std::abs(se_hat.pi()[k] / se_true.pi()[est.kept[k]] - 1.0);
      }
      err[b] = sum / static_cast<double>(est.kept.size());
    });
    return std::accumulate(err.begin(), err.end(), 0.0) / static_cast<double>(reps);
  };
  const double small = mean_rel_error(200);
  const double large = mean_rel_error(800);
  EXPECT_LT(large, small);
}
