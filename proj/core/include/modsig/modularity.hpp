#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modsig/graph.hpp"
#include "modsig/null_model.hpp"

namespace modsig {

/// Q̂ = Σ_{i<j} [A_ij − d_i d_j / ‖d‖₁] δ_{g(i)=g(j)}.
///
/// Evaluated in O(m + n + K): an edge scan for the A term and per-group
/// degree sums for the expected term. Throws DataError on an edgeless graph
/// or an assignment of the wrong length.
double modularity_hat(const Graph& g, const CommunityAssignment& a);

/// Q = Σ_{i<j} [A_ij − π_iπ_j] δ_{g(i)=g(j)} for known π.
double population_modularity(std::span<const double> true_pi, const Graph& g,
                             const CommunityAssignment& a);

/// Node weights of the within/between degree decomposition of Q̂ − b:
/// β_i = ½ Σ E d^w / Σ E d − E d_i^w / E d_i, and α_i = ½ + β_i.
struct BetaWeights {
  std::vector<double> beta;
  std::vector<double> alpha;
};

/// O(n + K) from group sums of π. Throws DataError if any E d_i is zero.
BetaWeights beta_weights(const PiVector& pi, const CommunityAssignment& a);

/// b = Σ_{i<j} E A_ij (E d_i + E d_j − ‖π‖₂²) / E‖d‖₁ · δ_{g(i)=g(j)}, O(n + K).
double bias_hat(const PiVector& pi, const CommunityAssignment& a);

/// b′ = Σ_{i<j} (E A_ij − (E d_i E d_j + Var A_ij) / E‖d‖₁) δ_{g(i)=g(j)}.
/// Agrees with bias_hat to leading order; O(n + K).
double bias_alternative(const PiVector& pi, const EdgeModel& m, const CommunityAssignment& a);

/// s² = Σ_{i<j} [δ_{g(i)=g(j)} + β_i + β_j]² Var A_ij.
///
/// Factorized O(n + K) evaluation: with Var A_ij = c1 π_iπ_j + c2 π_i²π_j²
/// each power-weight w_ij = (π_iπ_j)^p is separable, and
///   Σ_{i,j} w_ij (δ + β_i + β_j)²
///     = Σ_k G_p[k]² + 4 Σ_k B_p[k] G_p[k] + 2 S_p T_p + 2 U_p²
/// with G_p[k] = Σ_{i∈k} π_i^p, B_p[k] = Σ_{i∈k} β_i π_i^p, S_p = Σ π_i^p,
/// T_p = Σ β_i² π_i^p, U_p = Σ β_i π_i^p. The i = j diagonal
/// Σ_i (1 + 2β_i)² π_i^{2p} is subtracted and the total halved.
///
/// Requires a CLT family (Bernoulli, Poisson, negative binomial); a clamped
/// Bernoulli model uses the pair loop. Throws DegenerateTestError when
/// K = 1, K = n, or s² vanishes relative to Σ Var A_ij.
double variance_hat(const PiVector& pi, const EdgeModel& m, const CommunityAssignment& a);

/// O(n²) pair loops mirroring the defining sums; used for cross-checks.
namespace reference {
double modularity_hat(const Graph& g, const CommunityAssignment& a);
double bias_hat(const PiVector& pi, const CommunityAssignment& a);
double bias_alternative(const PiVector& pi, const EdgeModel& m, const CommunityAssignment& a);
/// Same value as modularity::variance_hat, no degeneracy check.
double variance_hat(const PiVector& pi, const EdgeModel& m, const CommunityAssignment& a);
}  // namespace reference

/// Upper-tail standard-normal probability P(Z ≥ z) via erfc, accurate in
/// relative terms far into the tail. Throws std::invalid_argument when z is
/// not finite.
double p_value(double z);

/// p-values below this floor are reported as "<1e-300".
inline constexpr double kPValueFloor = 1e-300;

struct TestOptions {
  IsolatedPolicy isolated = IsolatedPolicy::strict;
  bool clamp_bernoulli = false;
  /// Fixed negative-binomial shape; fitted by maximum likelihood when unset.
  std::optional<double> r;
  DiagnosticThresholds thresholds;
  std::string covariate_name;
};

/// Output of the four-step procedure for a single assignment.
struct ModularityReport {
  double q_hat = 0.0;
  double b_hat = 0.0;
  double s_hat = 0.0;
  double z = 0.0;
  double p_normal = 0.0;
  std::optional<double> p_bootstrap;
  EdgeModel model;
  std::optional<double> log_likelihood;
  bool r_at_upper_cap = false;
  DiagnosticsReport diagnostics;
  std::size_t n = 0;
  std::size_t num_groups = 0;
  std::string covariate_name;
  std::vector<std::string> warnings;
};

/// The plug-in statistics for a fixed model, without fitting or diagnostics.
struct ModularityStatistics {
  double q_hat = 0.0;
  double b_hat = 0.0;
  double s_hat = 0.0;
  double z = 0.0;
  double p_normal = 0.0;
};

/// π̂ from `g`, then Q̂, b̂, ŝ, z and p. Throws DegenerateTestError when the
/// variance vanishes.
ModularityStatistics modularity_statistics(const Graph& g, const CommunityAssignment& a,
                                           const EdgeModel& m);

/// Fit (step 1), diagnostics (step 2), b̂ and ŝ (step 3), z and p (step 4).
/// `family` must be Bernoulli, Poisson or negative binomial.
ModularityReport significance_test(const Graph& g, const CommunityAssignment& a, Family family,
                                   const TestOptions& options = {});

}  // namespace modsig
