#ifndef GBRIDGE_HARNESS_HPP
#define GBRIDGE_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gbridge/compensator.hpp"
#include "gbridge/filter.hpp"
#include "gbridge/mixing_law.hpp"
#include "gbridge/pathgen.hpp"
#include "gbridge/rng.hpp"
#include "gbridge/specfun.hpp"

// Independent Monte Carlo oracles and statistical gates validating the
// analytic formulas in the other modules.  Every gate is deterministic given
// (seed, config).

namespace gbridge {

struct GateResult {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::size_t sample_size = 0;
  std::uint64_t seed = 0;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

// Asymptotic critical value; c(0.01) = 1.628.
inline double ks_critical(std::size_t n, double alpha = 0.01) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c / std::sqrt(static_cast<double>(n));
}

inline GateResult ks_gate(const std::string& name, std::vector<double> samples,
                          const std::function<double(double)>& cdf,
                          std::uint64_t seed, double alpha = 0.01) {
  if (samples.size() < 1000)
    throw std::invalid_argument("ks_gate: need at least 1000 samples");
  GateResult g;
  g.name = name;
  g.sample_size = samples.size();
  g.seed = seed;
  g.statistic = ks_statistic(std::move(samples), cdf);
  g.threshold = ks_critical(g.sample_size, alpha);
  g.pass = g.statistic < g.threshold;
  return g;
}

inline double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

inline GateResult ks_two_sample_gate(const std::string& name, std::vector<double> a,
                                     std::vector<double> b, std::uint64_t seed,
                                     double alpha = 0.01) {
  GateResult g;
  g.name = name;
  g.sample_size = a.size() + b.size();
  g.seed = seed;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  g.statistic = ks_two_sample_statistic(std::move(a), std::move(b));
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  g.threshold = c * std::sqrt((na + nb) / (na * nb));
  g.pass = g.statistic < g.threshold;
  return g;
}

// ---------------------------------------------------------------------------
// Laplace transform of the subordinator: E e^{-lambda gamma_t} = (1+lambda/eta)^{-kappa t}

inline GateResult laplace_gate(const ProcessParams& params, double t,
                               const std::vector<double>& lambdas, std::size_t n,
                               std::uint64_t seed) {
  if (n < 100000) throw std::invalid_argument("laplace_gate: need n >= 1e5");
  Rng rng(seed, "laplace-gate");
  std::vector<double> samples(n);
  for (std::size_t i = 0; i < n; ++i)
    samples[i] = rng.gamma(params.kappa * t, params.eta);
  GateResult g;
  g.name = "laplace";
  g.sample_size = n;
  g.seed = seed;
  g.threshold = 3.0;
  double worst = 0.0;
  for (double lam : lambdas) {
    double sum = 0.0, sum_sq = 0.0;
    for (double x : samples) {
      const double e = std::exp(-lam * x);
      sum += e;
      sum_sq += e * e;
    }
    const double mean = sum / n;
    const double var = std::max(sum_sq / n - mean * mean, 0.0);
    const double se = std::sqrt(var / n);
    const double target = std::pow(1.0 + lam / params.eta, -params.kappa * t);
    const double z = lam == 0.0 ? (mean == target ? 0.0 : 1e9)
                                : std::fabs(mean - target) / se;
    worst = std::max(worst, z);
  }
  g.statistic = worst;
  g.pass = worst <= g.threshold;
  return g;
}

// ---------------------------------------------------------------------------
// Stopping equivalence: {zeta_t = a} XOR {tau <= t} must never occur.

inline GateResult stopping_equivalence_gate(const std::vector<double>& grid,
                                            const MixingLaw& law,
                                            const ProcessParams& params, double t,
                                            std::size_t n, std::uint64_t seed) {
  Rng tau_rng(seed, "stop-gate-tau");
  Rng path_rng(seed, "stop-gate-path");
  std::size_t violations = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto [tau, path] = sample_random_length_bridge(grid, law, params, tau_rng, path_rng);
    const bool pinned = path.value_at(std::min(t, path.times.back())) == params.endpoint;
    const bool stopped = tau <= t;
    if (pinned != stopped) ++violations;
  }
  GateResult g;
  g.name = "stopping-equivalence";
  g.sample_size = n;
  g.seed = seed;
  g.statistic = static_cast<double>(violations);
  g.threshold = 0.0;
  g.pass = violations == 0;
  return g;
}

// ---------------------------------------------------------------------------
// Posterior oracle: brute-force (tau, zeta_t) pairs, tau law tabulated per
// zeta_t bin, compared in total variation against the analytic posterior.

struct PosteriorOracleResult {
  GateResult gate;
  std::vector<double> bin_centers;
  std::vector<double> bin_tv;           // TV per occupied bin
  std::vector<std::size_t> bin_counts;
  std::size_t excluded_bins = 0;
};

// tau values are compared after binning into `tau_edges` cells (edges must
// cover the law's support; for purely atomic laws pass the atom midpoints).
// Within each zeta_t bin the analytic posterior is averaged over sub-bins
// spaced geometrically in (1 - x), weighted by the observed occupancy: the
// posterior is an exponential tilt in -ln(1-x), so a single representative
// point per bin is badly biased near x = 1.  Samples with 1 - x below x_cap
// are excluded (and counted): there the posterior varies by orders of
// magnitude across a bin of any width; the x -> 1 concentration limit is
// covered by its own direct test.
inline PosteriorOracleResult posterior_oracle(const MixingLaw& law, double t,
                                              const ProcessParams& params,
                                              const std::vector<double>& tau_edges,
                                              std::size_t n_bins, std::size_t n,
                                              std::uint64_t seed, double tv_limit,
                                              std::size_t occupancy_floor = 100,
                                              std::size_t sub_bins = 32,
                                              double x_cap = 1e-3) {
  if (n < 100000) throw std::invalid_argument("posterior_oracle: need n >= 1e5");
  Rng tau_rng(seed, "posterior-oracle-tau");
  Rng path_rng(seed, "posterior-oracle-path");
  const std::size_t n_tau = tau_edges.size() + 1;
  auto tau_bin = [&](double r) {
    return static_cast<std::size_t>(
        std::upper_bound(tau_edges.begin(), tau_edges.end(), r) - tau_edges.begin());
  };
  auto sub_bin = [&](std::size_t b, double x) {
    const double w_lo = 1.0 - static_cast<double>(b) / n_bins;
    const double w_hi = std::max(1.0 - static_cast<double>(b + 1) / n_bins, x_cap);
    const double f = std::log(w_lo / (1.0 - x)) / std::log(w_lo / w_hi);
    return std::min(static_cast<std::size_t>(std::max(f, 0.0) * sub_bins),
                    sub_bins - 1);
  };
  // joint tabulation over (zeta_t bin, tau bin); the pair is drawn through
  // the subordinator itself, not through any bridge formula.
  std::vector<std::vector<double>> counts(n_bins, std::vector<double>(n_tau, 0.0));
  std::vector<std::vector<double>> sub_sum(n_bins, std::vector<double>(sub_bins, 0.0));
  std::vector<std::vector<double>> sub_count(n_bins,
                                             std::vector<double>(sub_bins, 0.0));
  std::vector<std::size_t> occupancy(n_bins, 0);
  std::size_t capped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = law.sample(tau_rng);
    double x;
    if (tau <= t) {
      x = 1.0;
    } else {
      const double g_t = path_rng.gamma(params.kappa * t, params.eta);
      const double g_rest = path_rng.gamma(params.kappa * (tau - t), params.eta);
      x = g_t / (g_t + g_rest);
    }
    if (x >= 1.0) continue;  // stopped pairs are covered by the stopping gate
    if (1.0 - x < x_cap) {
      ++capped;
      continue;
    }
    const std::size_t b = std::min(static_cast<std::size_t>(x * n_bins), n_bins - 1);
    counts[b][tau_bin(tau)] += 1.0;
    const std::size_t s = sub_bin(b, x);
    sub_sum[b][s] += x;
    sub_count[b][s] += 1.0;
    occupancy[b] += 1;
  }
  PosteriorOracleResult res;
  double max_tv = 0.0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (occupancy[b] < occupancy_floor) {
      ++res.excluded_bins;
      continue;
    }
    const double occ = static_cast<double>(occupancy[b]);
    std::vector<double> analytic(n_tau, 0.0);
    double x_mean = 0.0;
    for (std::size_t s = 0; s < sub_bins; ++s) {
      if (sub_count[b][s] == 0.0) continue;
      const double x_rep = sub_sum[b][s] / sub_count[b][s];
      x_mean += sub_sum[b][s] / occ;
      const TauPosterior post = posterior_tau(x_rep, t, law, params.kappa);
      const double w = sub_count[b][s] / occ;
      for (const auto& p : post.support)
        analytic[tau_bin(p.location)] += w * p.weight;
    }
    double tv = 0.0;
    for (std::size_t k = 0; k < n_tau; ++k)
      tv += std::fabs(counts[b][k] / occ - analytic[k]);
    tv *= 0.5;
    res.bin_centers.push_back(x_mean);
    res.bin_tv.push_back(tv);
    res.bin_counts.push_back(occupancy[b]);
    max_tv = std::max(max_tv, tv);
  }
  res.gate.name = "posterior-oracle";
  res.gate.sample_size = n;
  res.gate.seed = seed;
  res.gate.statistic = max_tv;
  res.gate.threshold = tv_limit;
  res.gate.pass = max_tv < tv_limit;
  res.gate.detail = "capped " + std::to_string(capped) + " samples with 1-x < " +
                    std::to_string(x_cap);
  return res;
}

// ---------------------------------------------------------------------------
// Predictive oracle: conditional histogram of zeta_u given zeta_t near x.
// The comparison categories are {atom at 1} + {(zeta_t, hi]} + equal bins on
// (hi, 1), where hi is the top of the conditioning window: the transition
// density has an integrable singularity at y -> zeta_t, so the mass between
// the observed state and the window edge is kept in its own category rather
// than dropped.  The analytic side averages predictive_law over sub-windows
// of the conditioning window, weighted by the observed occupancy, to remove
// the curvature bias of evaluating at a single representative point.

// y_cap merges the float-resolution sliver (1 - y_cap, 1) into the atom on
// both sides: when tau is barely above u the simulated zeta_u rounds to 1
// (a gamma increment with near-zero shape underflows against the total),
// while the analytic law keeps that mass continuous within 1e-16 of 1.
inline GateResult predictive_oracle_gate(const MixingLaw& law, double t, double u,
                                         double x, double window,
                                         const ProcessParams& params,
                                         std::size_t n_hist_bins, std::size_t n,
                                         std::uint64_t seed, double tv_limit,
                                         std::size_t sub_windows = 8,
                                         std::size_t cells = 4096,
                                         double y_cap = 1e-12) {
  Rng tau_rng(seed, "predictive-oracle-tau");
  Rng path_rng(seed, "predictive-oracle-path");
  const double lo = x - 0.5 * window, hi = x + 0.5 * window;
  // empirical categories: 0 = atom, 1 = (zeta_t, hi], 2.. = bins on (hi, 1)
  const std::size_t n_cat = n_hist_bins + 2;
  std::vector<double> emp(n_cat, 0.0);
  std::vector<double> sub_sum(sub_windows, 0.0);
  std::vector<double> sub_count(sub_windows, 0.0);
  double total = 0.0;
  auto hist_bin = [&](double y) {
    if (y <= hi) return static_cast<std::size_t>(1);
    return 2 + std::min(static_cast<std::size_t>((y - hi) / (1.0 - hi) * n_hist_bins),
                        n_hist_bins - 1);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = law.sample(tau_rng);
    double xt, xu;
    if (tau <= t) {
      xt = 1.0;
      xu = 1.0;
    } else {
      const double g_t = path_rng.gamma(params.kappa * t, params.eta);
      if (tau <= u) {
        xt = g_t / (g_t + path_rng.gamma(params.kappa * (tau - t), params.eta));
        xu = 1.0;
      } else {
        const double g_tu = path_rng.gamma(params.kappa * (u - t), params.eta);
        const double g_rest = path_rng.gamma(params.kappa * (tau - u), params.eta);
        xt = g_t / (g_t + g_tu + g_rest);
        xu = (g_t + g_tu) / (g_t + g_tu + g_rest);
      }
    }
    if (xt <= lo || xt >= hi || xt >= 1.0) continue;
    total += 1.0;
    const std::size_t s = std::min(
        static_cast<std::size_t>((xt - lo) / window * sub_windows), sub_windows - 1);
    sub_sum[s] += xt;
    sub_count[s] += 1.0;
    emp[xu >= 1.0 - y_cap ? 0 : hist_bin(xu)] += 1.0;
  }
  GateResult g;
  g.name = "predictive-oracle";
  g.sample_size = static_cast<std::size_t>(total);
  g.seed = seed;
  g.threshold = tv_limit;
  if (total < 1000) {
    g.pass = false;
    g.detail = "conditioning window underpopulated";
    return g;
  }
  std::vector<double> ana(n_cat, 0.0);
  for (std::size_t s = 0; s < sub_windows; ++s) {
    if (sub_count[s] == 0.0) continue;
    const double x_rep = sub_sum[s] / sub_count[s];
    const double w = sub_count[s] / total;
    const PredictiveLaw pl = predictive_law(x_rep, t, u, law, cells, params.kappa);
    ana[0] += w * pl.atom_at_one;
    for (std::size_t c = 0; c < pl.cell_mass.size(); ++c)
      ana[hist_bin(pl.cell_centers[c])] += w * pl.cell_mass[c];
    // move the continuous mass of (1 - y_cap, 1) from the top bin to the atom
    double upper = 0.0;
    for (const auto& pt : detail::phi_reweighted_tail(x_rep, t, law, params.kappa))
      if (pt.location > u)
        upper += pt.weight *
                 regularized_incomplete_beta(y_cap / (1.0 - x_rep),
                                             params.kappa * (pt.location - u),
                                             params.kappa * (u - t));
    ana[0] += w * upper;
    ana[n_cat - 1] -= w * upper;
  }
  double tv = 0.0;
  for (std::size_t k = 0; k < n_cat; ++k) tv += std::fabs(emp[k] / total - ana[k]);
  tv *= 0.5;
  g.statistic = tv;
  g.pass = tv < tv_limit;
  return g;
}

// ---------------------------------------------------------------------------
// Markov gate: no history effect on zeta_u once zeta_t is known.  Within
// narrow zeta_t bins, zeta_u is regressed on zeta_t (removing within-bin
// leakage) and the residuals are compared across history groups by one-way
// analysis of variance, Bonferroni-corrected over bins.

namespace detail {

inline double f_cdf(double f, double d1, double d2) {
  if (f <= 0.0) return 0.0;
  const double z = d1 * f / (d1 * f + d2);
  return regularized_incomplete_beta(z, 0.5 * d1, 0.5 * d2);
}

}  // namespace detail

inline GateResult markov_gate(const MixingLaw& law, double t_hist, double t, double u,
                              const ProcessParams& params, std::size_t n,
                              std::uint64_t seed, double inject = 0.0,
                              std::size_t n_state_bins = 50,
                              std::size_t n_hist_groups = 3, double alpha = 0.01,
                              std::size_t min_stratum = 50) {
  if (!(t_hist < t) || !(t < u))
    throw std::invalid_argument("markov_gate: need t_hist < t < u");
  Rng tau_rng(seed, "markov-gate-tau");
  Rng path_rng(seed, "markov-gate-path");
  const std::vector<double> grid = {0.0, t_hist, t, u};
  struct Obs {
    double xh, xt, xu;
  };
  std::vector<Obs> obs;
  obs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [tau, path] = sample_random_length_bridge(grid, law, params, tau_rng, path_rng);
    const double xh = path.value_at(t_hist) / params.endpoint;
    const double xt = path.value_at(t) / params.endpoint;
    double xu = path.value_at(u) / params.endpoint;
    xu += inject * xh;  // nonzero only for the negative control
    if (xt >= 1.0 || xt <= 0.0) continue;  // stopped/degenerate: zeta_u is forced
    obs.push_back({xh, xt, xu});
  }
  std::vector<std::vector<Obs>> bins(n_state_bins);
  for (const auto& o : obs) {
    const std::size_t b =
        std::min(static_cast<std::size_t>(o.xt * n_state_bins), n_state_bins - 1);
    bins[b].push_back(o);
  }
  double min_p = 1.0;
  std::size_t tested = 0, excluded = 0;
  for (auto& bin : bins) {
    if (bin.size() < min_stratum * n_hist_groups) {
      ++excluded;
      continue;
    }
    // regress xu on xt within the bin
    const double m = static_cast<double>(bin.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& o : bin) {
      sx += o.xt;
      sy += o.xu;
      sxx += o.xt * o.xt;
      sxy += o.xt * o.xu;
    }
    const double denom = sxx - sx * sx / m;
    const double slope = denom > 0.0 ? (sxy - sx * sy / m) / denom : 0.0;
    const double intercept = (sy - slope * sx) / m;
    // history groups by xh quantile within the bin
    std::vector<double> xh_sorted;
    xh_sorted.reserve(bin.size());
    for (const auto& o : bin) xh_sorted.push_back(o.xh);
    std::sort(xh_sorted.begin(), xh_sorted.end());
    std::vector<double> cuts;
    for (std::size_t k = 1; k < n_hist_groups; ++k)
      cuts.push_back(xh_sorted[bin.size() * k / n_hist_groups]);
    std::vector<double> gsum(n_hist_groups, 0.0), gsq(n_hist_groups, 0.0);
    std::vector<std::size_t> gcount(n_hist_groups, 0);
    for (const auto& o : bin) {
      const double resid = o.xu - (intercept + slope * o.xt);
      const std::size_t gidx = static_cast<std::size_t>(
          std::upper_bound(cuts.begin(), cuts.end(), o.xh) - cuts.begin());
      gsum[gidx] += resid;
      gsq[gidx] += resid * resid;
      gcount[gidx] += 1;
    }
    double grand = 0.0;
    for (std::size_t k = 0; k < n_hist_groups; ++k) grand += gsum[k];
    grand /= m;
    double ss_between = 0.0, ss_within = 0.0;
    std::size_t groups_used = 0;
    for (std::size_t k = 0; k < n_hist_groups; ++k) {
      if (gcount[k] == 0) continue;
      ++groups_used;
      const double gm = gsum[k] / gcount[k];
      ss_between += gcount[k] * (gm - grand) * (gm - grand);
      ss_within += gsq[k] - gsum[k] * gsum[k] / gcount[k];
    }
    if (groups_used < 2) {
      ++excluded;
      continue;
    }
    const double d1 = static_cast<double>(groups_used - 1);
    const double d2 = m - static_cast<double>(groups_used);
    const double f = (ss_between / d1) / (ss_within / d2);
    const double p = 1.0 - detail::f_cdf(f, d1, d2);
    min_p = std::min(min_p, p);
    ++tested;
  }
  GateResult g;
  g.name = "markov";
  g.sample_size = obs.size();
  g.seed = seed;
  if (tested == 0) {
    g.pass = false;
    g.detail = "no populated strata";
    return g;
  }
  // Bonferroni: compare the smallest p-value against alpha / #tests
  g.statistic = min_p;
  g.threshold = alpha / static_cast<double>(tested);
  g.pass = min_p > g.threshold;
  g.detail = "tested " + std::to_string(tested) + " bins, excluded " +
             std::to_string(excluded);
  return g;
}

}  // namespace gbridge

#endif  // GBRIDGE_HARNESS_HPP
