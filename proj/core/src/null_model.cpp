#include "modsig/null_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "modsig/error.hpp"

namespace modsig {

namespace {

constexpr double kBernoulliCap = 1.0 - 1e-12;

std::string format_ratio(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

/// Product of the two largest entries (the largest pair mean).
double max_pair_product(std::span<const double> pi) {
  double a = 0.0;
  double b = 0.0;
  for (double p : pi) {
    if (p > a) {
      b = a;
      a = p;
    } else if (p > b) {
      b = p;
    }
  }
  return a * b;
}

double min_pair_product(std::span<const double> pi) {
  double a = INFINITY;
  double b = INFINITY;
  for (double p : pi) {
    if (p < a) {
      b = a;
      a = p;
    } else if (p < b) {
      b = p;
    }
  }
  return a * b;
}

bool bernoulli_needs_clamp(const PiVector& pi, const EdgeModel& m) {
  if (m.family != Family::bernoulli) return false;
  if (max_pair_product(pi.values()) < 1.0) return false;
  if (!m.clamp_bernoulli) {
    throw ModelError("Bernoulli model infeasible: largest pair mean pi_i*pi_j >= 1");
  }
  return true;
}

}  // namespace

PiVector::PiVector(std::vector<double> pi) : pi_(std::move(pi)) {
  for (double p : pi_) {
    if (!std::isfinite(p) || p <= 0.0) throw DataError("propensities must be finite and positive");
    double pk = p;
    for (std::size_t k = 0; k < 4; ++k) {
      power_sums_[k] += pk;
      pk *= p;
    }
  }
}

GroupPowerSums::GroupPowerSums(const PiVector& pi, const CommunityAssignment& a)
    : sums(a.num_groups(), std::array<double, 4>{}) {
  if (a.size() != pi.size()) throw DataError("assignment length does not match propensities");
  for (NodeIndex i = 0; i < pi.size(); ++i) {
    auto& s = sums[a.group_of(i)];
    double pk = pi[i];
    for (std::size_t k = 0; k < 4; ++k) {
      s[k] += pk;
      pk *= pi[i];
    }
  }
}

PiVector estimate_pi(const Graph& g) {
  return estimate_pi(g, IsolatedPolicy::strict).pi;
}

PiEstimate estimate_pi(const Graph& g, IsolatedPolicy policy) {
  if (g.num_nodes() == 0 || !(g.total_degree() > 0.0)) {
    throw DataError("cannot estimate propensities on an edgeless graph");
  }
  const double scale = std::sqrt(g.total_degree());
  PiEstimate out;
  std::vector<double> pi;
  pi.reserve(g.num_nodes());
  for (NodeIndex i = 0; i < g.num_nodes(); ++i) {
    if (g.degree(i) > 0.0) {
      pi.push_back(g.degree(i) / scale);
      out.kept.push_back(i);
    } else if (policy == IsolatedPolicy::strict) {
      throw DataError("isolated node '" + g.label(i) + "' has zero degree");
    }
  }
  const std::size_t dropped = g.num_nodes() - out.kept.size();
  if (dropped > 0) {
    out.warnings.push_back("dropped " + std::to_string(dropped) + " isolated node(s)");
  }
  out.pi = PiVector(std::move(pi));
  return out;
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::bernoulli: return "bernoulli";
    case Family::poisson: return "poisson";
    case Family::negbin: return "negbin";
    case Family::zi_poisson: return "zipoisson";
    case Family::zi_negbin: return "zinegbin";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view name) {
  for (Family f : {Family::bernoulli, Family::poisson, Family::negbin, Family::zi_poisson,
                   Family::zi_negbin}) {
    if (name == to_string(f)) return f;
  }
  return std::nullopt;
}

void EdgeModel::validate() const {
  if (has_shape() && !(std::isfinite(r) && r > 0.0)) {
    throw ModelError("negative binomial shape r must be positive and finite");
  }
  if (is_zero_inflated() && !(omega >= 0.0 && omega < 1.0)) {
    throw ModelError("zero-inflation mass omega must lie in [0, 1)");
  }
}

double bernoulli_mean(double mu, bool clamp) {
  if (mu < 1.0) return mu;
  if (!clamp) throw ModelError("Bernoulli mean " + format_ratio(mu) + " is not below 1");
  return kBernoulliCap;
}

namespace {

struct BaseMoments {
  double mean;
  double variance;
  double third;
};

BaseMoments base_moments(const EdgeModel& m, double mu) {
  switch (m.family) {
    case Family::bernoulli: {
      const double p = bernoulli_mean(mu, m.clamp_bernoulli);
      return {p, p * (1.0 - p), p * (1.0 - p) * (1.0 - 2.0 * p)};
    }
    case Family::poisson:
    case Family::zi_poisson:
      return {mu, mu, mu};
    case Family::negbin:
    case Family::zi_negbin: {
      const double v = mu * (1.0 + mu / m.r);
      return {mu, v, v * (1.0 + 2.0 * mu / m.r)};
    }
  }
  return {mu, mu, mu};
}

}  // namespace

double EdgeModel::mean(double mu) const {
  const BaseMoments b = base_moments(*this, mu);
  return is_zero_inflated() ? (1.0 - omega) * b.mean : b.mean;
}

double EdgeModel::variance(double mu) const {
  const BaseMoments b = base_moments(*this, mu);
  if (!is_zero_inflated()) return b.variance;
  return (1.0 - omega) * (b.variance + omega * b.mean * b.mean);
}

double EdgeModel::third_central_moment(double mu) const {
  const BaseMoments b = base_moments(*this, mu);
  if (!is_zero_inflated()) return b.third;
  const double q = 1.0 - omega;
  const double y1 = b.mean;
  const double y2 = b.variance + y1 * y1;
  const double y3 = b.third + 3.0 * y1 * b.variance + y1 * y1 * y1;
  const double x1 = q * y1;
  const double x2 = q * y2;
  const double x3 = q * y3;
  return x3 - 3.0 * x1 * x2 + 2.0 * x1 * x1 * x1;
}

VarianceCoefficients variance_coefficients(const EdgeModel& m) {
  switch (m.family) {
    case Family::bernoulli: return {1.0, -1.0};
    case Family::poisson: return {1.0, 0.0};
    case Family::negbin: return {1.0, 1.0 / m.r};
    case Family::zi_poisson: return {1.0 - m.omega, (1.0 - m.omega) * m.omega};
    case Family::zi_negbin: return {1.0 - m.omega, (1.0 - m.omega) * (1.0 / m.r + m.omega)};
  }
  return {};
}

double expected_edge(const PiVector& pi, NodeIndex i, NodeIndex j) {
  if (i == j) throw std::invalid_argument("expected_edge: i == j (no self-loops)");
  return pi[i] * pi[j];
}

double edge_variance(const PiVector& pi, const EdgeModel& m, NodeIndex i, NodeIndex j) {
  return m.variance(expected_edge(pi, i, j));
}

DegreeMoments degree_moments(const PiVector& pi, const EdgeModel& m) {
  m.validate();
  const std::size_t n = pi.size();
  const double s1 = pi.l1();
  const double s2 = pi.l2_squared();
  DegreeMoments out;
  out.expected.resize(n);
  out.variance.resize(n);
  out.expected_total = s1 * s1 - s2;
  for (NodeIndex i = 0; i < n; ++i) out.expected[i] = pi[i] * (s1 - pi[i]);

  if (bernoulli_needs_clamp(pi, m)) {
    for (NodeIndex i = 0; i < n; ++i) {
      double v = 0.0;
      for (NodeIndex j = 0; j < n; ++j) {
        if (j != i) v += m.variance(pi[i] * pi[j]);
      }
      out.variance[i] = v;
    }
    return out;
  }
  const VarianceCoefficients c = variance_coefficients(m);
  for (NodeIndex i = 0; i < n; ++i) {
    const double p2 = pi[i] * pi[i];
    out.variance[i] = c.c1 * out.expected[i] + c.c2 * p2 * (s2 - p2);
  }
  return out;
}

CltStandardErrors::CltStandardErrors(const PiVector& pi, const EdgeModel& m)
    : pi_(pi.values().begin(), pi.values().end()) {
  DegreeMoments moments = degree_moments(pi, m);
  var_d_ = std::move(moments.variance);
  expected_total_ = moments.expected_total;
  if (!(expected_total_ > 0.0)) throw DataError("expected total degree is not positive");
  se_pi_.resize(pi_.size());
  for (std::size_t i = 0; i < pi_.size(); ++i) se_pi_[i] = std::sqrt(var_d_[i] / expected_total_);
}

double CltStandardErrors::edge(NodeIndex i, NodeIndex j) const {
  if (i == j) throw std::invalid_argument("standard error of a self-pair");
  return std::sqrt((pi_[j] * pi_[j] * var_d_[i] + pi_[i] * pi_[i] * var_d_[j]) / expected_total_);
}

CltStandardErrors clt_standard_errors(const PiVector& pi, const EdgeModel& m) {
  return CltStandardErrors(pi, m);
}

DiagnosticsReport check_assumptions(const Graph& g, const EdgeModel& m,
                                    const CommunityAssignment* a,
                                    const DiagnosticThresholds& thresholds) {
  DiagnosticsReport rep;
  rep.n = g.num_nodes();
  if (a != nullptr && a->size() > 0) {
    rep.k_over_n = static_cast<double>(a->num_groups()) / static_cast<double>(a->size());
    if (*rep.k_over_n > thresholds.groups) {
      rep.warnings.push_back("groups: K/n = " + format_ratio(*rep.k_over_n) + " exceeds " +
                             format_ratio(thresholds.groups) +
                             "; the number of groups should grow more slowly than n");
    }
  }
  if (g.num_nodes() == 0 || !(g.total_degree() > 0.0)) {
    rep.warnings.push_back("graph is empty or edgeless; no diagnostics available");
    return rep;
  }

  const auto degrees = g.degrees();
  const double n = static_cast<double>(g.num_nodes());
  const double mean_d = g.total_degree() / n;
  const double max_d = *std::max_element(degrees.begin(), degrees.end());
  const double min_d = *std::min_element(degrees.begin(), degrees.end());
  rep.quartiles = degree_quartiles(g);
  rep.ratio_star = max_d / mean_d;
  rep.ratio_sparse = min_d / std::sqrt(mean_d);
  rep.ratio_dense = max_d / (n * std::sqrt(mean_d));
  const Quartiles& q = rep.quartiles;
  if (q.q2 > 0.0) {
    rep.quartile_star = q.q3 / q.q2;
    rep.quartile_sparse = q.q1 / std::sqrt(q.q2);
    rep.quartile_dense = q.q3 / (n * std::sqrt(q.q2));
  }

  if (q.q2 <= 0.0) {
    rep.warnings.push_back("star: median degree is zero");
  } else if (rep.quartile_star > thresholds.star) {
    rep.warnings.push_back("star: Q3/Q2 = " + format_ratio(rep.quartile_star) + " exceeds " +
                           format_ratio(thresholds.star));
  }
  if (rep.ratio_star > thresholds.star) {
    rep.warnings.push_back("star: max degree / mean degree = " + format_ratio(rep.ratio_star) +
                           " exceeds " + format_ratio(thresholds.star) +
                           "; a few nodes dominate the network");
  }
  if (q.q2 > 0.0 && rep.quartile_sparse < thresholds.sparse) {
    rep.warnings.push_back("sparse: Q1/sqrt(Q2) = " + format_ratio(rep.quartile_sparse) +
                           " is below " + format_ratio(thresholds.sparse));
  }
  if (rep.quartile_dense > thresholds.dense) {
    rep.warnings.push_back("dense: Q3/(n sqrt(Q2)) = " + format_ratio(rep.quartile_dense) +
                           " exceeds " + format_ratio(thresholds.dense));
  }
  if (min_d <= 0.0) {
    rep.warnings.push_back("isolated nodes present (zero degree)");
  }

  // Dispersion and skewness ratios are monotone in the pair mean for every
  // family, so the extremes of π̂_iπ̂_j bound them.
  std::vector<double> pi;
  pi.reserve(degrees.size());
  const double scale = std::sqrt(g.total_degree());
  for (double d : degrees) {
    if (d > 0.0) pi.push_back(d / scale);
  }
  if (pi.size() >= 2) {
    EdgeModel probe = m;
    const double mu_hi = max_pair_product(pi);
    const double mu_lo = min_pair_product(pi);
    if (probe.family == Family::bernoulli && mu_hi >= 1.0) {
      rep.warnings.push_back("Bernoulli mean exceeds 1 for the largest pair; ratios use clamping");
      probe.clamp_bernoulli = true;
    }
    double disp[2];
    double skew[2];
    for (int k = 0; k < 2; ++k) {
      const double mu = k == 0 ? mu_lo : mu_hi;
      const double v = probe.variance(mu);
      disp[k] = v / probe.mean(mu);
      skew[k] = v > 0.0 ? probe.third_central_moment(mu) / v : 0.0;
    }
    rep.dispersion_range = {std::min(disp[0], disp[1]), std::max(disp[0], disp[1])};
    rep.skewness_range = {std::min(skew[0], skew[1]), std::max(skew[0], skew[1])};
  }
  return rep;
}

}  // namespace modsig
