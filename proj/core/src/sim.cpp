#include "modsig/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "modsig/error.hpp"
#include "modsig/likelihood.hpp"
#include "modsig/parallel.hpp"

namespace modsig {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

/// Uniform on [0, 1) with 53 random bits.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Knuth's multiplicative method for small means, std::poisson_distribution
/// (transformed rejection) otherwise.
double draw_poisson(std::mt19937_64& rng, double mu) {
  if (mu <= 0.0) return 0.0;
  if (mu < 12.0) {
    const double limit = std::exp(-mu);
    double product = uniform01(rng);
    double k = 0.0;
    while (product > limit) {
      product *= uniform01(rng);
      k += 1.0;
    }
    return k;
  }
  std::poisson_distribution<long long> dist(mu);
  return static_cast<double>(dist(rng));
}

}  // namespace

Graph sample_graph(const PiVector& pi, const EdgeModel& m, std::uint64_t seed,
                   std::span<const std::string> labels) {
  m.validate();
  const std::size_t n = pi.size();
  if (!labels.empty() && labels.size() != n) throw DataError("label count does not match pi");
  std::mt19937_64 rng(seed);
  std::mt19937_64 mask(mix_seed(seed, ~0ULL));
  std::vector<Edge> edges;
  for (NodeIndex i = 0; i < n; ++i) {
    for (NodeIndex j = i + 1; j < n; ++j) {
      const double mu = pi[i] * pi[j];
      double y = 0.0;
      switch (m.family) {
        case Family::bernoulli:
          y = uniform01(rng) < bernoulli_mean(mu, m.clamp_bernoulli) ? 1.0 : 0.0;
          break;
        case Family::poisson:
        case Family::zi_poisson:
          y = draw_poisson(rng, mu);
          break;
        case Family::negbin:
        case Family::zi_negbin: {
          std::gamma_distribution<double> rate(m.r, mu / m.r);
          y = draw_poisson(rng, rate(rng));
          break;
        }
      }
      if (m.is_zero_inflated() && uniform01(mask) < m.omega) y = 0.0;
      if (y > 0.0) edges.push_back({i, j, y});
    }
  }
  std::vector<std::string> names(labels.begin(), labels.end());
  return Graph::from_edges(n, std::move(edges), std::move(names));
}

std::vector<ReplicateOutcome> simulate_replicates(const PiVector& pi, const EdgeModel& m,
                                                  const CommunityAssignment& a,
                                                  std::size_t replicates, std::uint64_t seed,
                                                  std::size_t workers) {
  if (a.size() != pi.size()) throw DataError("assignment length does not match propensities");
  std::vector<ReplicateOutcome> out(replicates);
  parallel_for(replicates, workers == 0 ? worker_count() : workers, [&](std::size_t b) {
    ReplicateOutcome& rep = out[b];
    try {
      const Graph g = sample_graph(pi, m, mix_seed(seed, b));
      const PiEstimate estimate = estimate_pi(g, IsolatedPolicy::drop);
      rep.dropped_nodes = g.num_nodes() - estimate.kept.size();
      if (rep.dropped_nodes > 0) {
        rep.stats = modularity_statistics(g.induced(estimate.kept), a.restricted(estimate.kept), m);
      } else {
        rep.stats = modularity_statistics(g, a, m);
      }
    } catch (const Error&) {
      rep.degenerate = true;
    }
  });
  return out;
}

UniformitySummary uniformity_summary(std::span<const double> p_values) {
  if (p_values.empty()) throw std::invalid_argument("uniformity_summary: empty input");
  double sum = 0.0;
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("uniformity_summary: p outside [0,1]");
    sum += p;
  }
  const double n = static_cast<double>(p_values.size());
  UniformitySummary out;
  out.mean = sum / n;
  if (p_values.size() > 1) {
    double ss = 0.0;
    for (double p : p_values) ss += (p - out.mean) * (p - out.mean);
    out.std = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

double ks_distance_uniform(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("ks_distance_uniform: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double x = std::clamp(sorted[i], 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - x, x - static_cast<double>(i) / n});
  }
  return d;
}

BootstrapResult bootstrap(const Graph& g, const CommunityAssignment& a, Family family,
                          const BootstrapOptions& options) {
  if (options.replicates == 0) throw std::invalid_argument("bootstrap requires at least one replicate");
  if (family != Family::bernoulli && family != Family::poisson && family != Family::negbin) {
    throw ModelError("the modularity test is defined for bernoulli, poisson and negbin only");
  }
  EdgeModel model;
  if (family == Family::negbin && options.test.r) {
    model = EdgeModel::negbin(*options.test.r);
  } else {
    FitOptions fit;
    fit.clamp_bernoulli = options.test.clamp_bernoulli;
    model = fit_edge_model(g, family, fit).model;
  }
  return bootstrap(g, a, model, options);
}

BootstrapResult bootstrap(const Graph& g, const CommunityAssignment& a, const EdgeModel& model,
                          const BootstrapOptions& options) {
  if (options.replicates == 0) throw std::invalid_argument("bootstrap requires at least one replicate");
  if (a.size() != g.num_nodes()) throw DataError("assignment length does not match graph");
  const PiEstimate estimate = estimate_pi(g, options.test.isolated);
  const bool dropped = estimate.kept.size() != g.num_nodes();
  const CommunityAssignment active = dropped ? a.restricted(estimate.kept) : a;

  BootstrapResult out;
  out.replicates = options.replicates;
  out.seed = options.seed;
  out.model = model;
  out.observed_q = dropped ? modularity_hat(g.induced(estimate.kept), active) : modularity_hat(g, a);

  const auto outcomes = simulate_replicates(estimate.pi, model, active, options.replicates,
                                            options.seed, options.workers);
  std::size_t exceed = 0;
  for (const ReplicateOutcome& rep : outcomes) {
    if (rep.degenerate) {
      ++out.degenerate_replicates;
      continue;
    }
    out.z_values.push_back(rep.stats.z);
    out.p_values.push_back(rep.stats.p_normal);
    out.q_values.push_back(rep.stats.q_hat);
    if (rep.stats.q_hat >= out.observed_q) ++exceed;
  }
  out.valid = static_cast<double>(out.degenerate_replicates) <=
              0.01 * static_cast<double>(options.replicates);
  out.bootstrap_p = (1.0 + static_cast<double>(exceed)) /
                    (1.0 + static_cast<double>(out.p_values.size()));
  if (!out.p_values.empty()) {
    const UniformitySummary summary = uniformity_summary(out.p_values);
    out.p_mean = summary.mean;
    out.p_std = summary.std;
  }
  return out;
}

}  // namespace modsig
