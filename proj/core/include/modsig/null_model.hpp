#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "modsig/graph.hpp"

namespace modsig {

/// Degree plug-in propensities π̂_i = d_i / sqrt(‖d‖₁) with cached power sums.
class PiVector {
 public:
  PiVector() = default;
  /// Wraps arbitrary positive propensities (true π in simulations).
  explicit PiVector(std::vector<double> pi);

  std::size_t size() const { return pi_.size(); }
  double operator[](NodeIndex i) const { return pi_[i]; }
  std::span<const double> values() const { return pi_; }

  /// Σ π_i^p for p = 1..4.
  double power_sum(int p) const { return power_sums_[static_cast<std::size_t>(p - 1)]; }
  double l1() const { return power_sums_[0]; }
  double l2_squared() const { return power_sums_[1]; }

 private:
  std::vector<double> pi_;
  std::array<double, 4> power_sums_{};
};

/// Per-group sums Σ_{i∈k} π_i^p for p = 1..4, for a fixed assignment.
struct GroupPowerSums {
  std::vector<std::array<double, 4>> sums;

  GroupPowerSums(const PiVector& pi, const CommunityAssignment& a);
  double of(GroupIndex k, int p) const { return sums[k][static_cast<std::size_t>(p - 1)]; }
};

enum class IsolatedPolicy { strict, drop };

/// Result of plug-in estimation. With IsolatedPolicy::drop, `kept` lists the
/// retained node indices of the input graph and `pi` is indexed over them.
struct PiEstimate {
  PiVector pi;
  std::vector<NodeIndex> kept;
  std::vector<std::string> warnings;
};

/// Throws DataError on an edgeless graph, or on an isolated node under
/// IsolatedPolicy::strict.
PiVector estimate_pi(const Graph& g);
PiEstimate estimate_pi(const Graph& g, IsolatedPolicy policy);

enum class Family { bernoulli, poisson, negbin, zi_poisson, zi_negbin };

std::string_view to_string(Family f);
/// Accepts the CLI spellings ("bernoulli", "poisson", "negbin", "zipoisson",
/// "zinegbin"). Returns nullopt for anything else.
std::optional<Family> parse_family(std::string_view name);

/// Edge-distribution family with its nuisance parameters.
///
/// `r` is the negative-binomial shape (Var = μ(1 + μ/r)); `omega` is the
/// zero-inflation mass. The zero-inflated families draw the base family with
/// mean π_iπ_j, so their overall mean is (1 − ω)π_iπ_j.
struct EdgeModel {
  Family family = Family::poisson;
  double r = 0.0;
  double omega = 0.0;
  /// Bernoulli means ≥ 1 are clamped to 1 − 1e-12 instead of raising.
  bool clamp_bernoulli = false;

  static EdgeModel bernoulli(bool clamp = false) { return {Family::bernoulli, 0.0, 0.0, clamp}; }
  static EdgeModel poisson() { return {Family::poisson, 0.0, 0.0, false}; }
  static EdgeModel negbin(double r) { return {Family::negbin, r, 0.0, false}; }
  static EdgeModel zi_poisson(double omega) { return {Family::zi_poisson, 0.0, omega, false}; }
  static EdgeModel zi_negbin(double omega, double r) { return {Family::zi_negbin, r, omega, false}; }

  bool has_shape() const { return family == Family::negbin || family == Family::zi_negbin; }
  bool is_zero_inflated() const { return family == Family::zi_poisson || family == Family::zi_negbin; }
  /// Families for which the modularity CLT machinery is defined.
  bool supports_clt() const { return !is_zero_inflated(); }

  /// Throws ModelError when r ≤ 0 (shape families) or ω ∉ [0, 1).
  void validate() const;

  /// Mean, variance and third central moment of A_ij when π_iπ_j = `mu`.
  double mean(double mu) const;
  double variance(double mu) const;
  double third_central_moment(double mu) const;

  friend bool operator==(const EdgeModel&, const EdgeModel&) = default;
};

/// Var A_ij = c1·μ + c2·μ² for μ = π_iπ_j. Holds for every family (the
/// zero-inflated mixtures included) as long as no Bernoulli clamping applies.
struct VarianceCoefficients {
  double c1 = 1.0;
  double c2 = 0.0;
};
VarianceCoefficients variance_coefficients(const EdgeModel& m);

/// Effective Bernoulli mean, applying the clamp policy. Throws ModelError
/// for μ ≥ 1 without clamping.
double bernoulli_mean(double mu, bool clamp);

/// π̂_iπ̂_j. Throws std::invalid_argument when i = j.
double expected_edge(const PiVector& pi, NodeIndex i, NodeIndex j);
/// Model variance of A_ij at mean π̂_iπ̂_j.
double edge_variance(const PiVector& pi, const EdgeModel& m, NodeIndex i, NodeIndex j);

/// Finite-n degree moments under the degree-based model.
struct DegreeMoments {
  std::vector<double> expected;  ///< E d_i = π_i(‖π‖₁ − π_i)
  std::vector<double> variance;  ///< Var d_i = Σ_{j≠i} Var A_ij
  double expected_total = 0.0;   ///< E‖d‖₁ = ‖π‖₁² − ‖π‖₂²
};

/// O(n) via power sums. With Bernoulli clamping active the variance falls
/// back to an O(n²) pair loop.
DegreeMoments degree_moments(const PiVector& pi, const EdgeModel& m);

/// Plug-in standard errors of π̂_i and of π̂_iπ̂_j.
class CltStandardErrors {
 public:
  CltStandardErrors(const PiVector& pi, const EdgeModel& m);

  /// sqrt(Var d_i / E‖d‖₁)
  std::span<const double> pi() const { return se_pi_; }
  /// sqrt((π_j² Var d_i + π_i² Var d_j) / E‖d‖₁)
  double edge(NodeIndex i, NodeIndex j) const;

 private:
  std::vector<double> pi_;
  std::vector<double> var_d_;
  double expected_total_ = 0.0;
  std::vector<double> se_pi_;
};

CltStandardErrors clt_standard_errors(const PiVector& pi, const EdgeModel& m);

/// Warning thresholds for the asymptotic-regime proxies.
struct DiagnosticThresholds {
  double star = 10.0;      ///< Q3/Q2 above this: a few nodes dominate
  double sparse = 0.5;     ///< Q1/sqrt(Q2) below this: too sparse
  double dense = 0.1;      ///< Q3/(n sqrt(Q2)) above this: edges too heavy
  double groups = 0.1;     ///< K/n above this: too many groups
};

struct DiagnosticsReport {
  std::size_t n = 0;
  Quartiles quartiles;
  double ratio_star = 0.0;            ///< max d / mean d
  double ratio_sparse = 0.0;          ///< min d / sqrt(mean d)
  double ratio_dense = 0.0;           ///< max d / (n sqrt(mean d))
  double quartile_star = 0.0;         ///< Q3/Q2
  double quartile_sparse = 0.0;       ///< Q1/sqrt(Q2)
  double quartile_dense = 0.0;        ///< Q3/(n sqrt(Q2))
  std::array<double, 2> dispersion_range{};  ///< min/max Var A / E A
  std::array<double, 2> skewness_range{};    ///< min/max κ₃ / Var A
  std::optional<double> k_over_n;
  std::vector<std::string> warnings;
};

/// Never throws on well-formed input; an empty or edgeless graph yields a
/// report with a warning and zeroed ratios.
DiagnosticsReport check_assumptions(const Graph& g, const EdgeModel& m,
                                    const CommunityAssignment* a = nullptr,
                                    const DiagnosticThresholds& thresholds = {});

}  // namespace modsig
