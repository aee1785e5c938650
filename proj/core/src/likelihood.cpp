#include "modsig/likelihood.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "modsig/error.hpp"

namespace modsig {

namespace {

constexpr double kOmegaUpper = 1.0 - 1e-9;

/// Degree plug-in over all nodes; isolated nodes get 0.
std::vector<double> plug_in(const Graph& g) {
  if (g.num_nodes() < 2 || !(g.total_degree() > 0.0)) {
    throw DataError("likelihood requires a graph with at least one positive edge");
  }
  const double scale = std::sqrt(g.total_degree());
  std::vector<double> pi(g.num_nodes());
  for (NodeIndex i = 0; i < g.num_nodes(); ++i) pi[i] = g.degree(i) / scale;
  return pi;
}

/// Visits every unordered pair i < j in row-major dense-index order with its
/// observed weight (0 for non-edges) and base mean π̂_iπ̂_j.
template <typename Visitor>
void for_each_pair(const Graph& g, const std::vector<double>& pi, Visitor&& visit) {
  const auto edges = g.edges();
  std::size_t e = 0;
  const std::size_t n = g.num_nodes();
  for (NodeIndex i = 0; i < n; ++i) {
    for (NodeIndex j = i + 1; j < n; ++j) {
      double y = 0.0;
      if (e < edges.size() && edges[e].u == i && edges[e].v == j) {
        y = edges[e].weight;
        ++e;
      }
      visit(y, pi[i] * pi[j]);
    }
  }
}

/// log NB(y; μ, r) with log Γ(r) supplied by the caller. For moderate integer
/// counts log Γ(y+r) − log Γ(r) − y log(r+μ) is summed term by term, which
/// stays accurate as r grows and the density tends to Poisson.
double negbin_log_density(double y, double mu, double r, double lgamma_r) {
  if (mu <= 0.0) return y == 0.0 ? 0.0 : -INFINITY;
  const double log_zero = -r * std::log1p(mu / r);
  if (y == 0.0) return log_zero;
  if (y <= 256.0 && y == std::floor(y)) {
    double ratio = 0.0;
    for (double k = 0.0; k < y; k += 1.0) ratio += std::log1p((k - mu) / (r + mu));
    return y * std::log(mu) + ratio - std::lgamma(y + 1.0) + log_zero;
  }
  return std::lgamma(y + r) - lgamma_r - std::lgamma(y + 1.0) + log_zero +
         y * std::log(mu / (r + mu));
}

double poisson_log_density(double y, double mu) {
  if (mu <= 0.0) return y == 0.0 ? 0.0 : -INFINITY;
  if (y == 0.0) return -mu;
  return y * std::log(mu) - mu - std::lgamma(y + 1.0);
}

double zero_inflate(double base, double y, double omega) {
  if (omega == 0.0) return base;
  if (y == 0.0) return std::log(omega + (1.0 - omega) * std::exp(base));
  return std::log1p(-omega) + base;
}

double sum_log_density(const Graph& g, const std::vector<double>& pi, const EdgeModel& m) {
  m.validate();
  double total = 0.0;
  switch (m.family) {
    case Family::bernoulli:
      for_each_pair(g, pi, [&](double y, double mu) {
        if (y != 0.0 && y != 1.0) throw DataError("Bernoulli likelihood requires 0/1 weights");
        const double p = bernoulli_mean(mu, m.clamp_bernoulli);
        total += y == 1.0 ? std::log(p) : std::log1p(-p);
      });
      break;
    case Family::poisson:
    case Family::zi_poisson:
      for_each_pair(g, pi, [&](double y, double mu) {
        total += zero_inflate(poisson_log_density(y, mu), y, m.omega);
      });
      break;
    case Family::negbin:
    case Family::zi_negbin: {
      const double lgr = std::lgamma(m.r);
      for_each_pair(g, pi, [&](double y, double mu) {
        total += zero_inflate(negbin_log_density(y, mu, m.r, lgr), y, m.omega);
      });
      break;
    }
  }
  return total;
}

struct Optimum {
  double x;
  double value;
};

/// Golden-section maximization on [lo, hi] to bracket width `tol`. The
/// endpoints and `incumbent` are also evaluated, so the result is never
/// worse than any of them.
template <typename F>
Optimum golden_max(F&& f, double lo, double hi, double tol, std::optional<Optimum> incumbent = {}) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  Optimum best = fc >= fd ? Optimum{c, fc} : Optimum{d, fd};
  for (double x : {lo, hi}) {
    const double fx = f(x);
    if (fx > best.value) best = {x, fx};
  }
  if (incumbent && incumbent->value >= best.value) best = *incumbent;
  return best;
}

}  // namespace

double log_density(const EdgeModel& m, double y, double mu) {
  m.validate();
  switch (m.family) {
    case Family::bernoulli: {
      if (y != 0.0 && y != 1.0) throw DataError("Bernoulli likelihood requires 0/1 weights");
      const double p = bernoulli_mean(mu, m.clamp_bernoulli);
      return y == 1.0 ? std::log(p) : std::log1p(-p);
    }
    case Family::poisson:
    case Family::zi_poisson:
      return zero_inflate(poisson_log_density(y, mu), y, m.omega);
    case Family::negbin:
    case Family::zi_negbin:
      return zero_inflate(negbin_log_density(y, mu, m.r, std::lgamma(m.r)), y, m.omega);
  }
  return 0.0;
}

double log_likelihood(const Graph& g, const EdgeModel& m) {
  return sum_log_density(g, plug_in(g), m);
}

double log_likelihood_dr(const Graph& g, const EdgeModel& m) {
  if (!m.has_shape()) throw ModelError("log_likelihood_dr requires a negative binomial family");
  m.validate();
  const std::vector<double> pi = plug_in(g);
  const double r = m.r;
  const double psi_r = boost::math::digamma(r);
  double total = 0.0;
  for_each_pair(g, pi, [&](double y, double mu) {
    if (mu <= 0.0) return;
    const double score = (y == 0.0 ? 0.0 : boost::math::digamma(y + r) - psi_r) -
                         std::log1p(mu / r) + 1.0 - (r + y) / (r + mu);
    if (y == 0.0 && m.omega > 0.0) {
      const double f0 = std::exp(-r * std::log1p(mu / r));
      total += (1.0 - m.omega) * f0 * score / (m.omega + (1.0 - m.omega) * f0);
    } else {
      total += score;
    }
  });
  return total;
}

double saturated_log_likelihood(const Graph& g) {
  double total = 0.0;
  for (const Edge& e : g.edges()) total += poisson_log_density(e.weight, e.weight);
  return total;
}

FitResult fit_edge_model(const Graph& g, Family family, const FitOptions& options) {
  const std::vector<double> pi = plug_in(g);
  const double log_lo = std::log(options.r_lower);
  const double log_hi = std::log(options.r_upper);
  FitResult out;

  auto nb_profile = [&](double omega) {
    return [&, omega](double log_r) {
      EdgeModel m = omega > 0.0 || family == Family::zi_negbin
                        ? EdgeModel::zi_negbin(omega, std::exp(log_r))
                        : EdgeModel::negbin(std::exp(log_r));
      return sum_log_density(g, pi, m);
    };
  };
  auto at_cap = [&](double log_r) { return log_r >= log_hi - 10.0 * options.tolerance; };
  // Near the cap the profile is flat to within rounding; prefer the cap there.
  auto snap_to_cap = [&](auto&& f, Optimum best) {
    const double at_hi = f(log_hi);
    if (at_hi >= best.value - 1e-12 * std::max(1.0, std::abs(best.value))) return Optimum{log_hi, at_hi};
    return best;
  };

  switch (family) {
    case Family::bernoulli:
      out.model = EdgeModel::bernoulli(options.clamp_bernoulli);
      out.log_likelihood = sum_log_density(g, pi, out.model);
      return out;
    case Family::poisson:
      out.model = EdgeModel::poisson();
      out.log_likelihood = sum_log_density(g, pi, out.model);
      return out;
    case Family::negbin: {
      const Optimum best =
          snap_to_cap(nb_profile(0.0), golden_max(nb_profile(0.0), log_lo, log_hi, options.tolerance));
      out.model = EdgeModel::negbin(std::exp(best.x));
      out.log_likelihood = best.value;
      out.r_at_upper_cap = at_cap(best.x);
      return out;
    }
    case Family::zi_poisson: {
      auto f = [&](double omega) { return sum_log_density(g, pi, EdgeModel::zi_poisson(omega)); };
      const Optimum best = golden_max(f, 0.0, kOmegaUpper, options.tolerance);
      out.model = EdgeModel::zi_poisson(best.x);
      out.log_likelihood = best.value;
      return out;
    }
    case Family::zi_negbin: {
      Optimum r_opt = golden_max(nb_profile(0.0), log_lo, log_hi, options.tolerance);
      double omega = 0.0;
      double value = r_opt.value;
      for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        const double r = std::exp(r_opt.x);
        auto f_omega = [&](double w) { return sum_log_density(g, pi, EdgeModel::zi_negbin(w, r)); };
        const Optimum w_opt =
            golden_max(f_omega, 0.0, kOmegaUpper, options.tolerance, Optimum{omega, value});
        const Optimum next_r =
            snap_to_cap(nb_profile(w_opt.x), golden_max(nb_profile(w_opt.x), log_lo, log_hi,
                                                        options.tolerance, Optimum{r_opt.x, w_opt.value}));
        const double step = std::max(std::abs(w_opt.x - omega), std::abs(next_r.x - r_opt.x));
        const double gain = next_r.value - value;
        omega = w_opt.x;
        r_opt = next_r;
        value = next_r.value;
        out.sweeps = sweep;
        if (step <= 10.0 * options.tolerance || gain <= 1e-12 * std::abs(value)) {
          out.model = EdgeModel::zi_negbin(omega, std::exp(r_opt.x));
          out.log_likelihood = value;
          out.r_at_upper_cap = at_cap(r_opt.x);
          return out;
        }
      }
      throw ModelError("zero-inflated negative binomial fit did not converge within " +
                       std::to_string(options.max_sweeps) + " sweeps");
    }
  }
  return out;
}

ModelComparison compare_models(const Graph& g, const FitOptions& options) {
  if (!g.has_integer_weights()) {
    throw DataError("model comparison requires integer (count) edge weights");
  }
  ModelComparison out;
  out.saturated_log_likelihood = saturated_log_likelihood(g);
  const std::size_t n = g.num_nodes();
  const std::pair<Family, std::size_t> rows[] = {
      {Family::poisson, n}, {Family::zi_poisson, n + 1}, {Family::negbin, n + 1},
      {Family::zi_negbin, n + 2}};
  for (const auto& [family, count] : rows) {
    const FitResult fit = fit_edge_model(g, family, options);
    ModelComparisonRow row;
    row.family = family;
    row.model = fit.model;
    row.parameter_count = count;
    row.log_likelihood = fit.log_likelihood;
    row.residual_deviance = std::max(0.0, 2.0 * (out.saturated_log_likelihood - fit.log_likelihood));
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace modsig
