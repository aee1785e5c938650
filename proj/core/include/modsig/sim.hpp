#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modsig/graph.hpp"
#include "modsig/modularity.hpp"
#include "modsig/null_model.hpp"

namespace modsig {

/// 64-bit avalanche mix of (seed, index): the SplitMix64 finalizer applied
/// to seed + (index + 1) · 0x9E3779B97F4A7C15, using multipliers
/// 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB with shifts 30, 27, 31.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

/// Draws A_ij independently for every pair i < j with base mean π_iπ_j.
///
/// The base family is drawn from a mt19937_64 stream seeded with `seed`;
/// negative-binomial edges are Gamma(r, μ/r)–Poisson mixtures. Zero-inflation
/// masks come from a second stream seeded with mix_seed(seed, 2^64 − 1), so a
/// zero-inflated model with ω = 0 reproduces the base family draw for draw.
/// Throws ModelError for infeasible Bernoulli means unless the model clamps.
Graph sample_graph(const PiVector& pi, const EdgeModel& m, std::uint64_t seed,
                   std::span<const std::string> labels = {});

/// One simulated replicate's test statistics.
struct ReplicateOutcome {
  bool degenerate = false;
  std::size_t dropped_nodes = 0;
  ModularityStatistics stats;
};

/// Simulates B graphs from (π, m), re-estimates π̂ on each, and evaluates the
/// plug-in statistics for assignment `a` under `m`. Replicate b uses seed
/// mix_seed(seed, b). Isolated nodes in a replicate are dropped together
/// with their assignment entries. Output is in replicate order and does not
/// depend on `workers`.
std::vector<ReplicateOutcome> simulate_replicates(const PiVector& pi, const EdgeModel& m,
                                                  const CommunityAssignment& a,
                                                  std::size_t replicates, std::uint64_t seed,
                                                  std::size_t workers);

struct UniformitySummary {
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation (n − 1 denominator)
};

/// Throws std::invalid_argument on empty input or values outside [0, 1].
UniformitySummary uniformity_summary(std::span<const double> p_values);

/// Kolmogorov–Smirnov distance sup |F_n(x) − x| to Uniform[0, 1].
double ks_distance_uniform(std::span<const double> values);

struct BootstrapOptions {
  std::size_t replicates = 10000;
  std::uint64_t seed = 0;
  std::size_t workers = 0;  ///< 0: worker_count()
  TestOptions test;
};

struct BootstrapResult {
  std::size_t replicates = 0;
  std::vector<double> z_values;  ///< valid replicates only, replicate order
  std::vector<double> p_values;
  std::vector<double> q_values;
  double p_mean = 0.0;
  double p_std = 0.0;
  double observed_q = 0.0;
  /// (1 + #{Q̂* ≥ Q̂}) / (1 + valid replicates)
  double bootstrap_p = 0.0;
  std::size_t degenerate_replicates = 0;
  /// False when more than 1% of replicates were degenerate.
  bool valid = true;
  std::uint64_t seed = 0;
  EdgeModel model;
};

/// Parametric bootstrap: fits the null on `g` once, then simulates and
/// re-tests. Throws std::invalid_argument when replicates = 0.
BootstrapResult bootstrap(const Graph& g, const CommunityAssignment& a, Family family,
                          const BootstrapOptions& options);

/// Bootstrap against an already-fitted model.
BootstrapResult bootstrap(const Graph& g, const CommunityAssignment& a, const EdgeModel& model,
                          const BootstrapOptions& options);

}  // namespace modsig
