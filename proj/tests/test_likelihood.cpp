#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "modsig/error.hpp"
#include "modsig/likelihood.hpp"
#include "modsig/sim.hpp"
#include "oracles.hpp"

using namespace modsig;

namespace {

double nb_direct(double y, double mu, double r) {
  return std::lgamma(y + r) - std::lgamma(r) - std::lgamma(y + 1) + r * std::log(r / (r + mu)) +
         y * std::log(mu / (r + mu));
}

PiVector heterogeneous_pi(std::size_t n, double lo, double hi) {
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return PiVector(pi);
}

}  // namespace

TEST(LogDensity, NegbinMatchesGammaForm) {
  for (double r : {0.3, 1.0, 4.5, 80.0}) {
    for (double mu : {0.05, 0.7, 6.0}) {
      for (double y : {0.0, 1.0, 3.0, 17.0}) {
        EXPECT_NEAR(log_density(EdgeModel::negbin(r), y, mu), nb_direct(y, mu, r), 1e-11)
            << r << " " << mu << " " << y;
      }
    }
  }
}

TEST(LogDensity, NegbinTendsToPoisson) {
  for (double mu : {0.01, 0.5, 3.0}) {
    for (double y : {0.0, 1.0, 2.0, 9.0}) {
      const double p = log_density(EdgeModel::poisson(), y, mu);
      EXPECT_NEAR(log_density(EdgeModel::negbin(1e9), y, mu), p, 1e-7);
    }
  }
}

TEST(LogDensity, ZeroInflationAtZeroOmegaIsIdentity) {
  for (double y : {0.0, 1.0, 4.0}) {
    EXPECT_EQ(log_density(EdgeModel::zi_poisson(0.0), y, 0.4), log_density(EdgeModel::poisson(), y, 0.4));
    EXPECT_EQ(log_density(EdgeModel::zi_negbin(0.0, 2.0), y, 0.4),
              log_density(EdgeModel::negbin(2.0), y, 0.4));
  }
  EXPECT_NEAR(std::exp(log_density(EdgeModel::zi_poisson(0.3), 0.0, 0.4)), 0.3 + 0.7 * std::exp(-0.4), 1e-15);
}

TEST(LogLikelihood, CountsEveryPair) {
  const Graph g = fixtures::path3();
  // Poisson with means 1/2, 1/4, 1/2 for pairs ab, ac, bc and y = 1, 0, 1.
  const double expected = 2 * (std::log(0.5) - 0.5) - 0.25;
  EXPECT_NEAR(log_likelihood(g, EdgeModel::poisson()), expected, 1e-14);
  EXPECT_NEAR(log_likelihood(g, EdgeModel::bernoulli()), 2 * std::log(0.5) + std::log(0.75), 1e-14);
}

TEST(LogLikelihood, ShapeDerivativeMatchesFiniteDifference) {
  std::mt19937_64 rng(4);
  const auto inst = fixtures::random_instance(rng, 30, 2, 0.25, false);
  for (double r : {0.4, 2.0, 15.0}) {
    for (const EdgeModel& m : {EdgeModel::negbin(r), EdgeModel::zi_negbin(0.2, r)}) {
      const double h = 1e-5 * r;
      EdgeModel up = m;
      EdgeModel down = m;
      up.r += h;
      down.r -= h;
      const double fd = (log_likelihood(inst.graph, up) - log_likelihood(inst.graph, down)) / (2 * h);
      EXPECT_NEAR(log_likelihood_dr(inst.graph, m), fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Fit, PoissonDataHitsShapeCap) {
  const PiVector pi = heterogeneous_pi(120, 0.5, 2.0);
  const Graph g = sample_graph(pi, EdgeModel::poisson(), 17);
  const FitResult fit = fit_edge_model(g, Family::negbin);
  EXPECT_TRUE(fit.r_at_upper_cap);
  EXPECT_NEAR(fit.model.r, 1e6, 1.0);
}

TEST(Fit, RecoversOverdispersion) {
  const PiVector pi = heterogeneous_pi(150, 0.8, 2.5);
  const Graph g = sample_graph(pi, EdgeModel::negbin(2.0), 23);
  const FitResult fit = fit_edge_model(g, Family::negbin);
  EXPECT_FALSE(fit.r_at_upper_cap);
  EXPECT_GT(fit.model.r, 1.4);
  EXPECT_LT(fit.model.r, 2.8);
  EXPECT_NEAR(log_likelihood_dr(g, fit.model), 0.0, 1e-3 * std::abs(fit.log_likelihood) / fit.model.r);
}

TEST(Fit, ZeroInflationDetected) {
  // With π̂ held at the degree plug-in the thinning is partly absorbed into
  // π̂, so ω̂ understates the true ω; it is still clearly positive.
  const PiVector pi = heterogeneous_pi(150, 0.8, 2.5);
  const Graph g = sample_graph(pi, EdgeModel::zi_poisson(0.3), 29);
  const FitResult fit = fit_edge_model(g, Family::zi_poisson);
  EXPECT_GT(fit.model.omega, 0.1);
  EXPECT_LT(fit.model.omega, 0.3);
  EXPECT_GT(fit.log_likelihood, fit_edge_model(g, Family::poisson).log_likelihood + 10.0);
  const Graph plain = sample_graph(pi, EdgeModel::poisson(), 29);
  EXPECT_LT(fit_edge_model(plain, Family::zi_poisson).model.omega, 0.02);
}

TEST(Fit, ZeroInflatedNegbinConverges) {
  const PiVector pi = heterogeneous_pi(100, 0.8, 2.5);
  const Graph g = sample_graph(pi, EdgeModel::zi_negbin(0.2, 3.0), 31);
  const FitResult fit = fit_edge_model(g, Family::zi_negbin);
  EXPECT_GE(fit.sweeps, 1);
  EXPECT_GE(fit.log_likelihood, fit_edge_model(g, Family::negbin).log_likelihood - 1e-6);
  EXPECT_GE(fit.log_likelihood, fit_edge_model(g, Family::zi_poisson).log_likelihood - 1e-6);
}

TEST(CompareModels, DegreesOfFreedomAndDeviance) {
  const PiVector pi = heterogeneous_pi(60, 0.5, 2.0);
  const Graph g = sample_graph(pi, EdgeModel::negbin(1.5), 3);
  const std::size_t n = g.num_nodes();
  const ModelComparison cmp = compare_models(g);
  ASSERT_EQ(cmp.rows.size(), 4u);
  EXPECT_EQ(cmp.rows[0].family, Family::poisson);
  EXPECT_EQ(cmp.rows[1].family, Family::zi_poisson);
  EXPECT_EQ(cmp.rows[2].family, Family::negbin);
  EXPECT_EQ(cmp.rows[3].family, Family::zi_negbin);
  EXPECT_EQ(cmp.rows[0].parameter_count, n);
  EXPECT_EQ(cmp.rows[1].parameter_count, n + 1);
  EXPECT_EQ(cmp.rows[2].parameter_count, n + 1);
  EXPECT_EQ(cmp.rows[3].parameter_count, n + 2);
  for (const auto& row : cmp.rows) {
    EXPECT_GE(row.residual_deviance, 0.0);
    EXPECT_LE(row.log_likelihood, cmp.saturated_log_likelihood);
    EXPECT_NEAR(row.residual_deviance, 2 * (cmp.saturated_log_likelihood - row.log_likelihood), 1e-9);
  }
  // Nested families cannot fit worse than Poisson.
  EXPECT_GE(cmp.rows[1].log_likelihood, cmp.rows[0].log_likelihood - 1e-9);
  EXPECT_GE(cmp.rows[2].log_likelihood, cmp.rows[0].log_likelihood - 1e-6);
  EXPECT_GE(cmp.rows[3].log_likelihood, cmp.rows[2].log_likelihood - 1e-6);
}

TEST(CompareModels, RejectsNonIntegerWeights) {
  const Graph g = Graph::from_edges(3, {{0, 1, 1.5}, {1, 2, 1.0}});
  EXPECT_THROW(compare_models(g), DataError);
}

TEST(Fit, BernoulliRejectsCounts) {
  const Graph g = Graph::from_edges(4, {{0, 1, 2.0}, {1, 2, 1.0}, {2, 3, 1.0}});
  EXPECT_THROW(fit_edge_model(g, Family::bernoulli), DataError);
}
