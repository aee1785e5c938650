#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "modsig/graph.hpp"
#include "modsig/null_model.hpp"

namespace modsig {

/// Log-density (or log-mass) of a single observation y under `m` with base
/// mean `mu`. Non-integer y are handled through the gamma-function extension.
double log_density(const EdgeModel& m, double y, double mu);

/// Σ over all n(n−1)/2 unordered pairs of log p(A_ij | π̂_iπ̂_j), zeros
/// included. π̂ is the degree plug-in of `g`; isolated nodes contribute
/// pairs with mean 0.
///
/// Pairs are visited row by row in dense-index order, so the result is
/// deterministic. Throws DataError for Bernoulli with a weight outside {0,1},
/// ModelError for an infeasible Bernoulli mean.
double log_likelihood(const Graph& g, const EdgeModel& m);

/// ∂/∂r of the negative-binomial log-likelihood (family negbin or zi_negbin).
double log_likelihood_dr(const Graph& g, const EdgeModel& m);

/// Log-likelihood of the saturated model: Poisson with mean A_ij per pair.
double saturated_log_likelihood(const Graph& g);

struct FitOptions {
  double r_lower = 1e-6;
  double r_upper = 1e6;
  double tolerance = 1e-8;   ///< in log r, and in ω
  int max_sweeps = 200;      ///< alternating (ω, log r) sweeps for zi_negbin
  bool clamp_bernoulli = false;
};

struct FitResult {
  EdgeModel model;
  double log_likelihood = 0.0;
  /// r̂ sits at the upper search bound: overdispersion is absent and the
  /// fit is effectively Poisson.
  bool r_at_upper_cap = false;
  int sweeps = 0;
};

/// Fits the nuisance parameters (r and/or ω) of `family` by maximum
/// likelihood over all pairs, with π̂ held at the degree plug-in.
///
/// r uses golden-section search over log r on [r_lower, r_upper]; ω uses
/// golden-section search on [0, 1 − 1e-9]; zi_negbin alternates the two.
/// Bernoulli and Poisson have nothing to fit. Throws ModelError when the
/// alternating search does not converge within `max_sweeps`, or when a
/// shape family sees no positive edge.
FitResult fit_edge_model(const Graph& g, Family family, const FitOptions& options = {});

struct ModelComparisonRow {
  Family family = Family::poisson;
  EdgeModel model;
  std::size_t parameter_count = 0;
  double log_likelihood = 0.0;
  double residual_deviance = 0.0;
};

struct ModelComparison {
  std::vector<ModelComparisonRow> rows;
  double saturated_log_likelihood = 0.0;
};

/// Poisson, zero-inflated Poisson, negative binomial and zero-inflated
/// negative binomial, each fitted with π̂ fixed. Residual deviance is
/// 2(ℓ_saturated − ℓ_model). Throws DataError on non-integer weights.
ModelComparison compare_models(const Graph& g, const FitOptions& options = {});

}  // namespace modsig
