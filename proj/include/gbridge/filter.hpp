#ifndef GBRIDGE_FILTER_HPP
#define GBRIDGE_FILTER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gbridge/mixing_law.hpp"
#include "gbridge/specfun.hpp"

// Exact Bayesian inference on the pinning time tau from one observation of
// the bridge: the phi reweighting kernel, the mixed posterior of tau,
// conditional expectations, survival probabilities and the predictive law of
// a future bridge value.  Observations are in normalized units (x in (0,1],
// x = 1 meaning the bridge has pinned).

namespace gbridge {

struct WeightedPoint {
  double location;
  double weight;
};

// Mixed posterior of tau given zeta_t = x.  Exactly one component is
// present: the prior restricted to (0,t] when x = 1, or the phi-reweighted
// tail on (t,inf) when 0 < x < 1.
struct TauPosterior {
  double observation_time = 0.0;
  double observation_value = 0.0;
  double stopped_weight = 0.0;  // 1 iff x = 1
  std::vector<WeightedPoint> support;  // normalized, sorted by location

  bool stopped() const { return stopped_weight == 1.0; }

  double total_mass() const {
    double m = 0.0;
    for (const auto& p : support) m += p.weight;
    return m;
  }

  double mean() const {
    double m = 0.0;
    for (const auto& p : support) m += p.location * p.weight;
    return m;
  }

  double tail_mass(double u) const {
    double m = 0.0;
    for (const auto& p : support)
      if (p.location > u) m += p.weight;
    return m;
  }

  double quantile(double q) const {
    if (!(q >= 0.0) || !(q <= 1.0))
      throw std::domain_error("TauPosterior::quantile: q must be in [0,1]");
    double c = 0.0;
    for (const auto& p : support) {
      c += p.weight;
      if (c >= q) return p.location;
    }
    return support.back().location;
  }

  template <class G>
  double expectation(G&& g) const {
    double m = 0.0;
    for (const auto& p : support) {
      const double v = g(p.location);
      if (!std::isfinite(v))
        throw std::runtime_error("TauPosterior::expectation: non-finite g value");
      m += v * p.weight;
    }
    return m;
  }
};

namespace detail {

// Unnormalized log phi numerator: kr ln(1-x) + ln Gamma(kr)/Gamma(k(r-t)).
// The shape rate kappa enters every beta shape only through kappa * time, so
// the general case is the standard one evaluated at rescaled times.
inline double log_phi_numerator(double x, double t, double r, double kappa = 1.0) {
  return kappa * r * std::log1p(-x) + log_gamma_ratio(kappa * r, kappa * t);
}

// Tail support of the law beyond t with normalized phi-reweighted masses.
inline std::vector<WeightedPoint> phi_reweighted_tail(double x, double t,
                                                      const MixingLaw& law,
                                                      double kappa = 1.0) {
  std::vector<WeightedPoint> pts;
  for (const auto& a : law.atoms())
    if (a.location > t) pts.push_back({a.location, a.weight});
  const auto& grid = law.grid();
  const auto& gw = law.grid_weights();
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid[i] > t) pts.push_back({grid[i], gw[i]});
  if (pts.empty())
    throw std::domain_error("filter: law has no mass on (t, inf)");
  double max_log = kNegInf;
  std::vector<double> logs(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    logs[i] = log_phi_numerator(x, t, pts[i].location, kappa);
    max_log = std::max(max_log, logs[i]);
  }
  double denom = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    pts[i].weight *= std::exp(logs[i] - max_log);
    denom += pts[i].weight;
  }
  if (!(denom > 0.0))
    throw std::domain_error("filter: phi denominator vanished");
  for (auto& p : pts) p.weight /= denom;
  std::sort(pts.begin(), pts.end(), [](const WeightedPoint& a, const WeightedPoint& b) {
    return a.location < b.location;
  });
  return pts;
}

}  // namespace detail

// phi(x; t, r) = (1-x)^r Gamma(r)/Gamma(r-t) normalized over the prior tail.
// Satisfies integrate_tail(law, t, phi) = 1.
inline double phi(double x, double t, double r, const MixingLaw& law,
                  double kappa = 1.0) {
  if (!(x > 0.0) || !(x < 1.0)) throw std::domain_error("phi: x must be in (0,1)");
  if (!(t > 0.0) || !(r > t)) throw std::domain_error("phi: need 0 < t < r");
  bool any = false;
  double max_log = kNegInf;
  law.integrate_tail(t, [&](double s) {
    any = true;
    max_log = std::max(max_log, detail::log_phi_numerator(x, t, s, kappa));
    return 0.0;
  });
  if (!any) throw std::domain_error("phi: law has no mass on (t, inf)");
  const double denom = law.integrate_tail(t, [&](double s) {
    return std::exp(detail::log_phi_numerator(x, t, s, kappa) - max_log);
  });
  if (!(denom > 0.0)) throw std::domain_error("phi: denominator vanished");
  return std::exp(detail::log_phi_numerator(x, t, r, kappa) - max_log) / denom;
}

inline TauPosterior posterior_tau(double x, double t, const MixingLaw& law,
                                  double kappa = 1.0) {
  if (!(t > 0.0)) throw std::domain_error("posterior_tau: t must be positive");
  if (!(x > 0.0) || !(x <= 1.0))
    throw std::domain_error("posterior_tau: x must be in (0,1]");
  TauPosterior post;
  post.observation_time = t;
  post.observation_value = x;
  if (x == 1.0) {
    const double ft = law.cdf(t);
    if (!(ft > 0.0))
      throw std::domain_error("posterior_tau: x = 1 requires F(t) > 0");
    post.stopped_weight = 1.0;
    for (const auto& a : law.atoms())
      if (a.location <= t) post.support.push_back({a.location, a.weight / ft});
    const auto& grid = law.grid();
    const auto& gw = law.grid_weights();
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (grid[i] <= t) post.support.push_back({grid[i], gw[i] / ft});
    std::sort(post.support.begin(), post.support.end(),
              [](const WeightedPoint& a, const WeightedPoint& b) {
                return a.location < b.location;
              });
  } else {
    post.stopped_weight = 0.0;
    post.support = detail::phi_reweighted_tail(x, t, law, kappa);
  }
  return post;
}

// E[g(tau) | zeta_t = x].
template <class G>
double conditional_expectation(G&& g, double x, double t, const MixingLaw& law,
                               double kappa = 1.0) {
  return posterior_tau(x, t, law, kappa).expectation(std::forward<G>(g));
}

// P(tau > u | zeta_t = x); zero when already stopped.
inline double survival_probability(double x, double t, double u, const MixingLaw& law,
                                   double kappa = 1.0) {
  if (!(u > t)) throw std::domain_error("survival_probability: need u > t");
  const TauPosterior post = posterior_tau(x, t, law, kappa);
  if (post.stopped()) return 0.0;
  return post.tail_mass(u);
}

// Mixed law of zeta_u given zeta_t = x: atom at 1 (pinning in (t,u]) plus a
// density on (x,1) mixed over the posterior tail beyond u.  The continuous
// part is carried as equal-width cells on (x,1) with exact per-cell masses.
struct PredictiveLaw {
  double observation_time = 0.0;
  double observation_value = 0.0;
  double horizon = 0.0;
  double atom_at_one = 0.0;
  std::vector<double> cell_edges;    // size n+1 spanning (x,1)
  std::vector<double> cell_centers;  // size n
  std::vector<double> density;       // density at cell centers
  std::vector<double> cell_mass;     // exact masses, sum = 1 - atom_at_one

  double continuous_mass() const {
    double m = 0.0;
    for (double w : cell_mass) m += w;
    return m;
  }

  double total_mass() const { return atom_at_one + continuous_mass(); }
};

inline PredictiveLaw predictive_law(double x, double t, double u,
                                    const MixingLaw& law, std::size_t cells = 512,
                                    double kappa = 1.0) {
  if (!(x > 0.0) || !(x < 1.0))
    throw std::domain_error("predictive_law: x must be in (0,1)");
  if (!(t > 0.0) || !(u > t)) throw std::domain_error("predictive_law: need 0 < t < u");
  const auto tail = detail::phi_reweighted_tail(x, t, law, kappa);
  PredictiveLaw pl;
  pl.observation_time = t;
  pl.observation_value = x;
  pl.horizon = u;
  for (const auto& p : tail)
    if (p.location <= u) pl.atom_at_one += p.weight;
  pl.cell_edges.resize(cells + 1);
  pl.cell_centers.resize(cells);
  pl.density.assign(cells, 0.0);
  pl.cell_mass.assign(cells, 0.0);
  const double h = (1.0 - x) / cells;
  for (std::size_t i = 0; i <= cells; ++i) pl.cell_edges[i] = x + i * h;
  pl.cell_edges.back() = 1.0;
  for (std::size_t i = 0; i < cells; ++i)
    pl.cell_centers[i] = 0.5 * (pl.cell_edges[i] + pl.cell_edges[i + 1]);
  for (const auto& p : tail) {
    if (p.location <= u) continue;
    const double r = p.location;
    const double a = kappa * (u - t), b = kappa * (r - u);
    double prev_cdf = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
      const double z = std::min(1.0, (pl.cell_edges[i + 1] - x) / (1.0 - x));
      const double c = regularized_incomplete_beta(z, a, b);
      pl.cell_mass[i] += p.weight * (c - prev_cdf);
      prev_cdf = c;
      pl.density[i] += p.weight * std::exp(bridge_transition_log_pdf(
                                      pl.cell_centers[i], x, kappa * t, kappa * u,
                                      kappa * r));
    }
  }
  return pl;
}

// F_t^{zeta,c}-measurable estimate: on the stopped event the realized tau is
// known and used exactly; otherwise the phi-reweighted tail expectation.
template <class G>
double path_information_estimate(G&& g, double t, double x,
                                 std::optional<double> tau_if_stopped,
                                 const MixingLaw& law, double kappa = 1.0) {
  if (!(t > 0.0)) throw std::domain_error("path_information_estimate: t must be positive");
  if (x == 1.0) {
    if (!tau_if_stopped || !(*tau_if_stopped <= t) || !(*tau_if_stopped > 0.0))
      throw std::invalid_argument(
          "path_information_estimate: x = 1 requires realized tau in (0, t]");
    return g(*tau_if_stopped);
  }
  if (tau_if_stopped)
    throw std::invalid_argument(
        "path_information_estimate: tau supplied but x != 1");
  return conditional_expectation(std::forward<G>(g), x, t, law, kappa);
}

}  // namespace gbridge

#endif  // GBRIDGE_FILTER_HPP
