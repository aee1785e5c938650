#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "modsig/error.hpp"
#include "modsig/null_model.hpp"
#include "oracles.hpp"

using namespace modsig;

TEST(PlugIn, PathGraph) {
  const PiVector pi = estimate_pi(fixtures::path3());
  EXPECT_DOUBLE_EQ(pi[0], 0.5);
  EXPECT_DOUBLE_EQ(pi[1], 1.0);
  EXPECT_DOUBLE_EQ(pi[2], 0.5);
  EXPECT_DOUBLE_EQ(expected_edge(pi, 0, 1), 0.5);
  EXPECT_THROW(expected_edge(pi, 1, 1), std::invalid_argument);
}

TEST(PlugIn, ExpectedTotalMatchesObservedPlusDiagonal) {
  std::mt19937_64 rng(11);
  const auto inst = fixtures::random_instance(rng, 30, 3, 0.3, false);
  const PiVector pi = estimate_pi(inst.graph);
  // Σ_{i≠j} π̂_iπ̂_j = ‖d‖₁ − Σ π̂_i²
  const auto dm = degree_moments(pi, EdgeModel::poisson());
  EXPECT_NEAR(dm.expected_total, inst.graph.total_degree() - pi.l2_squared(), 1e-9);
  const auto e = oracle::expected_degree({pi.values().begin(), pi.values().end()});
  for (std::size_t i = 0; i < e.size(); ++i) EXPECT_NEAR(dm.expected[i], e[i], 1e-12);
}

TEST(PlugIn, IsolatedNodePolicies) {
  const Graph g = Graph::from_edges(3, {{0, 1, 1.0}});
  EXPECT_THROW(estimate_pi(g), DataError);
  const PiEstimate est = estimate_pi(g, IsolatedPolicy::drop);
  EXPECT_EQ(est.kept, (std::vector<NodeIndex>{0, 1}));
  EXPECT_EQ(est.pi.size(), 2u);
  EXPECT_FALSE(est.warnings.empty());
}

TEST(PlugIn, EdgelessGraphFails) {
  EXPECT_THROW(estimate_pi(Graph::from_edges(3, {})), DataError);
}

TEST(EdgeModel, VarianceFormulas) {
  const double mu = 0.3;
  EXPECT_DOUBLE_EQ(EdgeModel::bernoulli().variance(mu), mu * (1 - mu));
  EXPECT_DOUBLE_EQ(EdgeModel::poisson().variance(mu), mu);
  EXPECT_DOUBLE_EQ(EdgeModel::negbin(2.0).variance(mu), mu * (1 + mu / 2.0));
  const double w = 0.25;
  EXPECT_NEAR(EdgeModel::zi_poisson(w).mean(mu), (1 - w) * mu, 1e-15);
  EXPECT_NEAR(EdgeModel::zi_poisson(w).variance(mu), (1 - w) * mu * (1 + w * mu), 1e-15);
  EXPECT_NEAR(EdgeModel::zi_negbin(w, 2.0).variance(mu), (1 - w) * mu * (1 + mu * (0.5 + w)), 1e-15);
  for (const EdgeModel& m : {EdgeModel::bernoulli(), EdgeModel::poisson(), EdgeModel::negbin(0.7),
                             EdgeModel::zi_poisson(0.2), EdgeModel::zi_negbin(0.2, 0.7)}) {
    const auto c = variance_coefficients(m);
    EXPECT_NEAR(m.variance(mu), c.c1 * mu + c.c2 * mu * mu, 1e-15) << to_string(m.family);
  }
}

TEST(EdgeModel, ThirdMomentAgainstSeries) {
  // Poisson κ₃ = μ; NB κ₃ = μ(1 + μ/r)(1 + 2μ/r); Bernoulli μ(1−μ)(1−2μ).
  const double mu = 0.4;
  EXPECT_NEAR(EdgeModel::poisson().third_central_moment(mu), mu, 1e-15);
  EXPECT_NEAR(EdgeModel::negbin(3.0).third_central_moment(mu), mu * (1 + mu / 3) * (1 + 2 * mu / 3), 1e-14);
  EXPECT_NEAR(EdgeModel::bernoulli().third_central_moment(mu), mu * (1 - mu) * (1 - 2 * mu), 1e-15);
}

TEST(EdgeModel, ValidationAndNames) {
  EXPECT_THROW(EdgeModel::negbin(0.0).validate(), ModelError);
  EXPECT_THROW(EdgeModel::zi_poisson(1.0).validate(), ModelError);
  EXPECT_THROW(EdgeModel::zi_poisson(-0.1).validate(), ModelError);
  for (Family f : {Family::bernoulli, Family::poisson, Family::negbin, Family::zi_poisson, Family::zi_negbin}) {
    EXPECT_EQ(parse_family(to_string(f)), f);
  }
  EXPECT_FALSE(parse_family("gaussian").has_value());
}

TEST(EdgeModel, BernoulliClamp) {
  EXPECT_THROW(bernoulli_mean(1.2, false), ModelError);
  EXPECT_DOUBLE_EQ(bernoulli_mean(1.2, true), 1.0 - 1e-12);
  EXPECT_DOUBLE_EQ(bernoulli_mean(0.3, false), 0.3);
}

TEST(DegreeMoments, PathFixture) {
  const PiVector pi = estimate_pi(fixtures::path3());
  const auto dm = degree_moments(pi, EdgeModel::poisson());
  EXPECT_DOUBLE_EQ(dm.expected[0], 0.75);
  EXPECT_DOUBLE_EQ(dm.expected[1], 1.0);
  EXPECT_DOUBLE_EQ(dm.expected[2], 0.75);
  EXPECT_DOUBLE_EQ(dm.expected_total, 2.5);
}

TEST(DegreeMoments, ZeroInflationLeavesExpectedDegreesUnchanged) {
  const PiVector pi = estimate_pi(fixtures::path3());
  const auto a = degree_moments(pi, EdgeModel::poisson());
  const auto b = degree_moments(pi, EdgeModel::zi_poisson(0.3));
  EXPECT_EQ(a.expected, b.expected);
  EXPECT_EQ(a.expected_total, b.expected_total);
}

TEST(CltStandardErrors, PathFixture) {
  const PiVector pi = estimate_pi(fixtures::path3());
  const auto se = clt_standard_errors(pi, EdgeModel::poisson());
  EXPECT_NEAR(se.pi()[0], std::sqrt(0.75 / 2.5), 1e-12);
  EXPECT_NEAR(se.pi()[1], std::sqrt(1.0 / 2.5), 1e-12);
  EXPECT_NEAR(se.pi()[2], std::sqrt(0.75 / 2.5), 1e-12);
  // (π_b² Var d_a + π_a² Var d_b) / E‖d‖₁
  EXPECT_NEAR(se.edge(0, 1), std::sqrt((1.0 * 0.75 + 0.25 * 1.0) / 2.5), 1e-12);
}

TEST(CltStandardErrors, BernoulliVarianceMatchesPairSum) {
  std::mt19937_64 rng(5);
  const auto inst = fixtures::random_instance(rng, 40, 2, 0.15, true);
  const PiVector pi = estimate_pi(inst.graph);
  const auto dm = degree_moments(pi, EdgeModel::bernoulli());
  for (std::size_t i = 0; i < pi.size(); ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) {
      if (j != i) v += pi[i] * pi[j] * (1 - pi[i] * pi[j]);
    }
    EXPECT_NEAR(dm.variance[i], v, 1e-12 * std::max(1.0, v));
  }
}

TEST(Diagnostics, StarGraphWarns) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < 60; ++i) edges.push_back({0, i, 1.0});
  const Graph star = Graph::from_edges(60, edges);
  const auto rep = check_assumptions(star, EdgeModel::poisson());
  bool star_warning = false;
  for (const auto& w : rep.warnings) star_warning |= w.rfind("star", 0) == 0;
  EXPECT_TRUE(star_warning);
}

TEST(Diagnostics, TooManyGroupsWarns) {
  const Graph g = fixtures::path3();
  const std::vector<std::size_t> codes = {0, 1, 2};
  const auto a = CommunityAssignment::from_codes(codes);
  const auto rep = check_assumptions(g, EdgeModel::poisson(), &a);
  ASSERT_TRUE(rep.k_over_n.has_value());
  EXPECT_DOUBLE_EQ(*rep.k_over_n, 1.0);
  bool groups_warning = false;
  for (const auto& w : rep.warnings) groups_warning |= w.rfind("groups:", 0) == 0;
  EXPECT_TRUE(groups_warning);
}

TEST(Diagnostics, PoissonDispersionIsOne) {
  std::mt19937_64 rng(8);
  const auto inst = fixtures::random_instance(rng, 30, 2, 0.2, false);
  const auto rep = check_assumptions(inst.graph, EdgeModel::poisson());
  EXPECT_DOUBLE_EQ(rep.dispersion_range[0], 1.0);
  EXPECT_DOUBLE_EQ(rep.dispersion_range[1], 1.0);
  EXPECT_NO_THROW(check_assumptions(Graph::from_edges(2, {}), EdgeModel::poisson()));
}

TEST(PlugIn, SumIdentityAndPowerSums) {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const auto inst = fixtures::random_instance(rng, 45, 3, 0.2, false);
    const PiVector pi = estimate_pi(inst.graph);
    EXPECT_NEAR(pi.l1(), std::sqrt(inst.graph.total_degree()), 1e-12 * pi.l1());
    for (int p = 1; p <= 4; ++p) {
      double brute = 0.0;
      for (double x : pi.values()) brute += std::pow(x, p);
      EXPECT_NEAR(pi.power_sum(p), brute, 1e-12 * brute);
    }
  }
}

TEST(DegreeMoments, VarianceMatchesPairSumForEveryFamily) {
  std::mt19937_64 rng(41);
  const EdgeModel models[] = {EdgeModel::bernoulli(), EdgeModel::poisson(), EdgeModel::negbin(0.6),
                              EdgeModel::zi_poisson(0.25), EdgeModel::zi_negbin(0.25, 0.6)};
  int instances = 0;
  while (instances < 100) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(4, 60)(rng);
    const auto inst = fixtures::random_instance(rng, n, 2, 0.2, true);
    const PiVector pi = estimate_pi(inst.graph);
    const double mx = *std::max_element(pi.values().begin(), pi.values().end());
    if (mx * mx >= 1.0) continue;
    ++instances;
    for (const EdgeModel& m : models) {
      const auto dm = degree_moments(pi, m);
      for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i) v += edge_variance(pi, m, i, j);
        }
        EXPECT_NEAR(dm.variance[i], v, 1e-10 * v) << to_string(m.family);
      }
    }
  }
}

TEST(DegreeMoments, TwoNodeBernoulli) {
  const double x = 0.6;
  const auto dm = degree_moments(PiVector({x, x}), EdgeModel::bernoulli());
  EXPECT_NEAR(dm.variance[0], x * x * (1 - x * x), 1e-15);
}

TEST(EdgeModel, DispersionIdentitiesAtRandomPoints) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int k = 0; k < 200; ++k) {
    const double mu = u(rng);
    const double r = 0.05 + 10 * u(rng);
    EXPECT_NEAR(EdgeModel::poisson().variance(mu) / EdgeModel::poisson().mean(mu), 1.0, 1e-14);
    EXPECT_NEAR(EdgeModel::bernoulli().variance(mu) / EdgeModel::bernoulli().mean(mu), 1.0 - mu, 1e-14);
    EXPECT_NEAR(EdgeModel::negbin(r).variance(mu) / EdgeModel::negbin(r).mean(mu), 1.0 + mu / r, 1e-13);
    EXPECT_EQ(EdgeModel::zi_poisson(0.0).variance(mu), EdgeModel::poisson().variance(mu));
    EXPECT_EQ(EdgeModel::zi_negbin(0.0, r).variance(mu), EdgeModel::negbin(r).variance(mu));
  }
}

TEST(EdgeModel, SpecExamples) {
  const PiVector pi({std::sqrt(0.5), std::sqrt(0.5), 1.0});
  EXPECT_NEAR(edge_variance(pi, EdgeModel::poisson(), 0, 1), 0.5, 1e-15);
  EXPECT_NEAR(edge_variance(pi, EdgeModel::bernoulli(), 0, 1), 0.25, 1e-15);
  EXPECT_NEAR(edge_variance(pi, EdgeModel::negbin(0.5), 0, 1), 1.0, 1e-15);
  EXPECT_THROW(edge_variance(PiVector({1.2, 1.0}), EdgeModel::bernoulli(), 0, 1), ModelError);
}

TEST(Diagnostics, QuartileRatios) {
  std::mt19937_64 rng(61);
  const auto inst = fixtures::random_instance(rng, 80, 3, 0.1, false);
  const auto rep = check_assumptions(inst.graph, EdgeModel::negbin(0.5));
  const Quartiles q = degree_quartiles(inst.graph);
  EXPECT_DOUBLE_EQ(rep.quartile_star, q.q3 / q.q2);
  EXPECT_DOUBLE_EQ(rep.quartile_sparse, q.q1 / std::sqrt(q.q2));
  EXPECT_DOUBLE_EQ(rep.quartile_dense, q.q3 / (80 * std::sqrt(q.q2)));
  EXPECT_GE(rep.ratio_star, 0.0);
  // NB dispersion 1 + μ/r spans the smallest and largest pair means.
  EXPECT_GT(rep.dispersion_range[1], rep.dispersion_range[0]);
  EXPECT_GT(rep.dispersion_range[0], 1.0);
}
