#include "modsig/modularity.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "modsig/error.hpp"
#include "modsig/likelihood.hpp"

namespace modsig {

namespace {

void check_sizes(std::size_t assignment, std::size_t nodes) {
  if (assignment != nodes) {
    throw DataError("assignment covers " + std::to_string(assignment) + " nodes, expected " +
                    std::to_string(nodes));
  }
}

void check_clt_family(const EdgeModel& m) {
  if (!m.supports_clt()) {
    throw ModelError("the modularity test is defined for bernoulli, poisson and negbin only");
  }
  m.validate();
}

bool bernoulli_clamped(const PiVector& pi, const EdgeModel& m) {
  if (m.family != Family::bernoulli) return false;
  double a = 0.0;
  double b = 0.0;
  for (double p : pi.values()) {
    if (p > a) {
      b = a;
      a = p;
    } else if (p > b) {
      b = p;
    }
  }
  if (a * b < 1.0) return false;
  if (!m.clamp_bernoulli) {
    throw ModelError("Bernoulli model infeasible: largest pair mean pi_i*pi_j >= 1");
  }
  return true;
}

/// Group sizes. Groups with a single member hold no same-group pair and are
/// skipped in the factorized sums, so their contribution is exactly zero
/// rather than a cancellation residue.
std::vector<std::size_t> group_sizes(const CommunityAssignment& a) {
  std::vector<std::size_t> sizes(a.num_groups(), 0);
  for (GroupIndex k : a.groups()) ++sizes[k];
  return sizes;
}

/// Σ_{i<j, same group} of π_iπ_j, via ½ Σ_k (G1[k]² − G2[k]).
double within_pair_mass(const GroupPowerSums& groups, const std::vector<std::size_t>& sizes) {
  double total = 0.0;
  for (std::size_t k = 0; k < groups.sums.size(); ++k) {
    if (sizes[k] < 2) continue;
    total += groups.of(k, 1) * groups.of(k, 1) - groups.of(k, 2);
  }
  return 0.5 * total;
}

template <typename Visitor>
void for_each_pair(const Graph& g, Visitor&& visit) {
  const auto edges = g.edges();
  std::size_t e = 0;
  for (NodeIndex i = 0; i < g.num_nodes(); ++i) {
    for (NodeIndex j = i + 1; j < g.num_nodes(); ++j) {
      double y = 0.0;
      if (e < edges.size() && edges[e].u == i && edges[e].v == j) {
        y = edges[e].weight;
        ++e;
      }
      visit(i, j, y);
    }
  }
}

void check_degenerate(const CommunityAssignment& a) {
  if (a.num_groups() <= 1) {
    throw DegenerateTestError("degenerate test: a single group (K = 1) has zero null variance");
  }
  if (a.num_groups() == a.size()) {
    throw DegenerateTestError("degenerate test: every node is its own group (K = n)");
  }
}

}  // namespace

double modularity_hat(const Graph& g, const CommunityAssignment& a) {
  check_sizes(a.size(), g.num_nodes());
  if (!(g.total_degree() > 0.0)) throw DataError("modularity of an edgeless graph");
  double observed = 0.0;
  for (const Edge& e : g.edges()) {
    if (a.group_of(e.u) == a.group_of(e.v)) observed += e.weight;
  }
  const std::vector<std::size_t> sizes = group_sizes(a);
  std::vector<double> sum(a.num_groups(), 0.0);
  std::vector<double> sum_sq(a.num_groups(), 0.0);
  for (NodeIndex i = 0; i < g.num_nodes(); ++i) {
    sum[a.group_of(i)] += g.degree(i);
    sum_sq[a.group_of(i)] += g.degree(i) * g.degree(i);
  }
  double expected = 0.0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] >= 2) expected += sum[k] * sum[k] - sum_sq[k];
  }
  return observed - 0.5 * expected / g.total_degree();
}

double population_modularity(std::span<const double> true_pi, const Graph& g,
                             const CommunityAssignment& a) {
  check_sizes(true_pi.size(), g.num_nodes());
  check_sizes(a.size(), g.num_nodes());
  double observed = 0.0;
  for (const Edge& e : g.edges()) {
    if (a.group_of(e.u) == a.group_of(e.v)) observed += e.weight;
  }
  const std::vector<std::size_t> sizes = group_sizes(a);
  std::vector<double> sum(a.num_groups(), 0.0);
  std::vector<double> sum_sq(a.num_groups(), 0.0);
  for (NodeIndex i = 0; i < true_pi.size(); ++i) {
    sum[a.group_of(i)] += true_pi[i];
    sum_sq[a.group_of(i)] += true_pi[i] * true_pi[i];
  }
  double expected = 0.0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] >= 2) expected += sum[k] * sum[k] - sum_sq[k];
  }
  return observed - 0.5 * expected;
}

BetaWeights beta_weights(const PiVector& pi, const CommunityAssignment& a) {
  check_sizes(a.size(), pi.size());
  const GroupPowerSums groups(pi, a);
  const double s1 = pi.l1();
  const double expected_total = s1 * s1 - pi.l2_squared();
  const double expected_within_total = 2.0 * within_pair_mass(groups, group_sizes(a));
  const double global = 0.5 * expected_within_total / expected_total;

  BetaWeights out;
  out.beta.resize(pi.size());
  out.alpha.resize(pi.size());
  for (NodeIndex i = 0; i < pi.size(); ++i) {
    const double expected = pi[i] * (s1 - pi[i]);
    if (!(expected > 0.0)) throw DataError("zero expected degree at node " + std::to_string(i));
    const double group_mass = groups.of(a.group_of(i), 1);
    const double expected_within = group_mass == pi[i] ? 0.0 : pi[i] * (group_mass - pi[i]);
    out.beta[i] = global - expected_within / expected;
    out.alpha[i] = 0.5 + out.beta[i];
  }
  return out;
}

double bias_hat(const PiVector& pi, const CommunityAssignment& a) {
  check_sizes(a.size(), pi.size());
  const double s1 = pi.l1();
  const double s2 = pi.l2_squared();
  const double expected_total = s1 * s1 - s2;
  if (!(expected_total > 0.0)) throw DataError("expected total degree is not positive");

  // Σ_{i<j same} π_iπ_j (e_i + e_j) = Σ_k [Σ_{i∈k} π_i e_i · G1[k] − Σ_{i∈k} π_i² e_i]
  const GroupPowerSums groups(pi, a);
  std::vector<double> pe(a.num_groups(), 0.0);
  std::vector<double> p2e(a.num_groups(), 0.0);
  for (NodeIndex i = 0; i < pi.size(); ++i) {
    const double e = pi[i] * (s1 - pi[i]);
    pe[a.group_of(i)] += pi[i] * e;
    p2e[a.group_of(i)] += pi[i] * pi[i] * e;
  }
  const std::vector<std::size_t> sizes = group_sizes(a);
  double degree_term = 0.0;
  for (std::size_t k = 0; k < pe.size(); ++k) {
    if (sizes[k] >= 2) degree_term += pe[k] * groups.of(k, 1) - p2e[k];
  }
  return (degree_term - s2 * within_pair_mass(groups, sizes)) / expected_total;
}

double bias_alternative(const PiVector& pi, const EdgeModel& m, const CommunityAssignment& a) {
  check_sizes(a.size(), pi.size());
  m.validate();
  if (bernoulli_clamped(pi, m)) return reference::bias_alternative(pi, m, a);
  const double s1 = pi.l1();
  const double expected_total = s1 * s1 - pi.l2_squared();
  if (!(expected_total > 0.0)) throw DataError("expected total degree is not positive");

  const GroupPowerSums groups(pi, a);
  std::vector<double> e1(a.num_groups(), 0.0);
  std::vector<double> e2(a.num_groups(), 0.0);
  for (NodeIndex i = 0; i < pi.size(); ++i) {
    const double e = pi[i] * (s1 - pi[i]);
    e1[a.group_of(i)] += e;
    e2[a.group_of(i)] += e * e;
  }
  const VarianceCoefficients c = variance_coefficients(m);
  const std::vector<std::size_t> sizes = group_sizes(a);
  const double mass = within_pair_mass(groups, sizes);
  double degree_products = 0.0;
  double variance_sum = 0.0;
  for (std::size_t k = 0; k < e1.size(); ++k) {
    if (sizes[k] < 2) continue;
    degree_products += e1[k] * e1[k] - e2[k];
    variance_sum += c.c2 * (groups.of(k, 2) * groups.of(k, 2) - groups.of(k, 4));
  }
  variance_sum = 0.5 * variance_sum + c.c1 * mass;
  return mass - (0.5 * degree_products + variance_sum) / expected_total;
}

double variance_hat(const PiVector& pi, const EdgeModel& m, const CommunityAssignment& a) {
  check_sizes(a.size(), pi.size());
  check_clt_family(m);
  check_degenerate(a);

  const VarianceCoefficients c = variance_coefficients(m);
  double s2 = 0.0;
  if (bernoulli_clamped(pi, m)) {
    s2 = reference::variance_hat(pi, m, a);
  } else {
    const BetaWeights w = beta_weights(pi, a);
    const std::size_t groups = a.num_groups();
    for (int p = 1; p <= 2; ++p) {
      const double coef = p == 1 ? c.c1 : c.c2;
      if (coef == 0.0) continue;
      std::vector<double> g_sum(groups, 0.0);
      std::vector<double> b_sum(groups, 0.0);
      double s = 0.0;
      double t = 0.0;
      double u = 0.0;
      double diagonal = 0.0;
      for (NodeIndex i = 0; i < pi.size(); ++i) {
        const double weight = p == 1 ? pi[i] : pi[i] * pi[i];
        const double beta = w.beta[i];
        g_sum[a.group_of(i)] += weight;
        b_sum[a.group_of(i)] += beta * weight;
        s += weight;
        t += beta * beta * weight;
        u += beta * weight;
        const double lead = 1.0 + 2.0 * beta;
        diagonal += lead * lead * weight * weight;
      }
      double full = 2.0 * s * t + 2.0 * u * u;
      for (std::size_t k = 0; k < groups; ++k) {
        full += g_sum[k] * g_sum[k] + 4.0 * b_sum[k] * g_sum[k];
      }
      s2 += 0.5 * coef * (full - diagonal);
    }
  }

  const double s1 = pi.l1();
  const double scale = 0.5 * (c.c1 * (s1 * s1 - pi.l2_squared()) +
                              std::abs(c.c2) * (pi.l2_squared() * pi.l2_squared() - pi.power_sum(4)));
  if (!(s2 > 1e-12 * scale)) {
    throw DegenerateTestError("degenerate test: null variance of modularity is zero");
  }
  return s2;
}

namespace reference {

double modularity_hat(const Graph& g, const CommunityAssignment& a) {
  check_sizes(a.size(), g.num_nodes());
  if (!(g.total_degree() > 0.0)) throw DataError("modularity of an edgeless graph");
  double q = 0.0;
  for_each_pair(g, [&](NodeIndex i, NodeIndex j, double y) {
    if (a.group_of(i) == a.group_of(j)) q += y - g.degree(i) * g.degree(j) / g.total_degree();
  });
  return q;
}

double bias_hat(const PiVector& pi, const CommunityAssignment& a) {
  check_sizes(a.size(), pi.size());
  const double s1 = pi.l1();
  const double s2 = pi.l2_squared();
  const double expected_total = s1 * s1 - s2;
  double b = 0.0;
  for (NodeIndex i = 0; i < pi.size(); ++i) {
    const double ei = pi[i] * (s1 - pi[i]);
    for (NodeIndex j = i + 1; j < pi.size(); ++j) {
      if (a.group_of(i) != a.group_of(j)) continue;
      const double ej = pi[j] * (s1 - pi[j]);
      b += pi[i] * pi[j] * (ei + ej - s2) / expected_total;
    }
  }
  return b;
}

double bias_alternative(const PiVector& pi, const EdgeModel& m, const CommunityAssignment& a) {
  check_sizes(a.size(), pi.size());
  const double s1 = pi.l1();
  const double expected_total = s1 * s1 - pi.l2_squared();
  double b = 0.0;
  for (NodeIndex i = 0; i < pi.size(); ++i) {
    const double ei = pi[i] * (s1 - pi[i]);
    for (NodeIndex j = i + 1; j < pi.size(); ++j) {
      if (a.group_of(i) != a.group_of(j)) continue;
      const double ej = pi[j] * (s1 - pi[j]);
      const double mu = pi[i] * pi[j];
      b += mu - (ei * ej + m.variance(mu)) / expected_total;
    }
  }
  return b;
}

double variance_hat(const PiVector& pi, const EdgeModel& m, const CommunityAssignment& a) {
  check_sizes(a.size(), pi.size());
  check_clt_family(m);
  const BetaWeights w = beta_weights(pi, a);
  double s2 = 0.0;
  for (NodeIndex i = 0; i < pi.size(); ++i) {
    for (NodeIndex j = i + 1; j < pi.size(); ++j) {
      const double coef = (a.group_of(i) == a.group_of(j) ? 1.0 : 0.0) + w.beta[i] + w.beta[j];
      s2 += coef * coef * m.variance(pi[i] * pi[j]);
    }
  }
  return s2;
}

}  // namespace reference

double p_value(double z) {
  if (!std::isfinite(z)) throw std::invalid_argument("p_value: z is not finite");
  // x = z/√2 carries a rounding error δ that would cost ~2x²·ε relative in
  // the tail; remove it to first order with d log erfc(x)/dx.
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  constexpr double kInvSqrt2Low = -4.8336466567264567e-17;  // 1/√2 − kInvSqrt2
  const double x = -z * kInvSqrt2;
  const double delta = std::fma(-z, kInvSqrt2, -x) - z * kInvSqrt2Low;
  const double tail = std::erfc(-x);
  if (tail == 0.0) return 0.0;
  const double slope = 2.0 * std::numbers::inv_sqrtpi * std::exp(-x * x) / tail;
  return 0.5 * tail * (1.0 + delta * slope);
}

ModularityStatistics modularity_statistics(const Graph& g, const CommunityAssignment& a,
                                           const EdgeModel& m) {
  check_sizes(a.size(), g.num_nodes());
  check_clt_family(m);
  check_degenerate(a);
  const PiVector pi = estimate_pi(g);
  ModularityStatistics st;
  st.q_hat = modularity_hat(g, a);
  st.b_hat = bias_hat(pi, a);
  st.s_hat = std::sqrt(variance_hat(pi, m, a));
  st.z = (st.q_hat - st.b_hat) / st.s_hat;
  st.p_normal = p_value(st.z);
  return st;
}

ModularityReport significance_test(const Graph& g, const CommunityAssignment& a, Family family,
                                   const TestOptions& options) {
  check_sizes(a.size(), g.num_nodes());
  if (family != Family::bernoulli && family != Family::poisson && family != Family::negbin) {
    throw ModelError("the modularity test is defined for bernoulli, poisson and negbin only");
  }

  ModularityReport rep;
  rep.covariate_name = options.covariate_name;

  PiEstimate estimate = estimate_pi(g, options.isolated);
  Graph active_graph;
  CommunityAssignment active;
  const bool dropped = estimate.kept.size() != g.num_nodes();
  if (dropped) {
    active_graph = g.induced(estimate.kept);
    active = a.restricted(estimate.kept);
    rep.warnings.insert(rep.warnings.end(), estimate.warnings.begin(), estimate.warnings.end());
  }
  const Graph& graph = dropped ? active_graph : g;
  const CommunityAssignment& groups = dropped ? active : a;
  rep.n = graph.num_nodes();
  rep.num_groups = groups.num_groups();

  // Step 1: the edge model, with π̂ fixed at the degree plug-in.
  FitOptions fit_options;
  fit_options.clamp_bernoulli = options.clamp_bernoulli;
  if (family == Family::negbin && options.r) {
    rep.model = EdgeModel::negbin(*options.r);
    rep.model.validate();
    rep.log_likelihood = log_likelihood(graph, rep.model);
  } else {
    const FitResult fit = fit_edge_model(graph, family, fit_options);
    rep.model = fit.model;
    rep.log_likelihood = fit.log_likelihood;
    rep.r_at_upper_cap = fit.r_at_upper_cap;
    if (fit.r_at_upper_cap) {
      rep.warnings.push_back("negative binomial shape at its upper bound: effectively Poisson");
    }
  }

  // Step 2: asymptotic-regime diagnostics.
  rep.diagnostics = check_assumptions(graph, rep.model, &groups, options.thresholds);

  // Steps 3 and 4.
  const ModularityStatistics st = modularity_statistics(graph, groups, rep.model);
  rep.q_hat = st.q_hat;
  rep.b_hat = st.b_hat;
  rep.s_hat = st.s_hat;
  rep.z = st.z;
  rep.p_normal = st.p_normal;
  return rep;
}

}  // namespace modsig
