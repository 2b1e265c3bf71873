#ifndef GBRIDGE_PATHGEN_HPP
#define GBRIDGE_PATHGEN_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gbridge/mixing_law.hpp"
#include "gbridge/rng.hpp"
#include "gbridge/specfun.hpp"

namespace gbridge {

// (eta, kappa, a): Levy measure (kappa/x) e^{-eta x} dx, bridge endpoint a.
struct ProcessParams {
  double eta = 1.0;
  double kappa = 1.0;
  double endpoint = 1.0;

  void validate() const {
    if (!(eta > 0.0) || !(kappa > 0.0) || !(endpoint > 0.0))
      throw std::invalid_argument("ProcessParams: eta, kappa, endpoint must be positive");
  }
};

struct PathPin {
  double time;
  double value;
};

// Process values recorded on a strictly increasing grid starting at 0.
// Bridge paths carry their pin; values at and after the pin time equal the
// pin value exactly (written verbatim, never recomputed).
struct Path {
  std::vector<double> times;
  std::vector<double> values;
  std::optional<PathPin> pin;

  double value_at(double t) const {
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end() || *it != t)
      throw std::invalid_argument("Path::value_at: time not on the grid");
    return values[static_cast<std::size_t>(it - times.begin())];
  }
};

// Jumps of a bridge of length `length`, truncated below `epsilon`.
struct JumpSet {
  std::vector<double> sizes;  // decreasing, all > epsilon
  std::vector<double> times;  // matching jump times in [0, length]
  double length = 0.0;
  double epsilon = 0.0;
  double truncated_mass = 0.0;  // E[mass of discarded jumps]
};

namespace detail {

inline void check_grid(const std::vector<double>& grid) {
  if (grid.empty() || grid.front() != 0.0)
    throw std::invalid_argument("time grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("time grid must be strictly increasing");
}

// Augment the grid with t when it falls strictly between grid points; the
// recorded window is never extended past the last grid time.
inline std::vector<double> grid_with(std::vector<double> grid, double t) {
  if (t >= grid.back()) return grid;
  auto it = std::lower_bound(grid.begin(), grid.end(), t);
  if (*it != t) grid.insert(it, t);
  return grid;
}

// Jump size draw from density proportional to x^{-1} e^{-eta x} on
// (epsilon, inf): log-uniform envelope below 1/eta, shifted exponential above.
inline double sample_jump_size(double epsilon, double eta, Rng& rng) {
  const double c = std::max(1.0 / eta, epsilon * 2.0);
  const double z1 = std::log(c / epsilon);          // envelope mass on (eps, c)
  const double z2 = std::exp(-eta * c) / (eta * c); // envelope mass on (c, inf)
  for (;;) {
    if (rng.uniform() * (z1 + z2) < z1) {
      const double x = epsilon * std::exp(rng.uniform() * z1);
      if (rng.uniform() < std::exp(-eta * x)) return x;
    } else {
      const double x = c + rng.exponential(eta);
      if (rng.uniform() < c / x) return x;
    }
  }
}

// Strictly-below-endpoint guard: zeta_t < a holds surely before the pin, but
// a normalized value can round to the endpoint in floats; clamp to the
// largest representable value below it so {zeta_t = a} remains exactly
// {tau <= t} on sampled paths.
inline double clamp_below_endpoint(double v, double endpoint) {
  return v >= endpoint ? std::nextafter(endpoint, 0.0) : v;
}

}  // namespace detail

// Gamma process path: independent Gamma(kappa*dt, eta) increments.
inline Path sample_gamma_path(const std::vector<double>& grid,
                              const ProcessParams& params, Rng& rng) {
  params.validate();
  detail::check_grid(grid);
  Path path;
  path.times = grid;
  path.values.resize(grid.size());
  double v = 0.0;
  path.values[0] = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    v += rng.gamma(params.kappa * (grid[i] - grid[i - 1]), params.eta);
    path.values[i] = v;
  }
  return path;
}

// Bridge of length r by global normalization: a * gamma_{t^r} / gamma_r.
inline Path sample_bridge_normalized(const std::vector<double>& grid, double r,
                                     const ProcessParams& params, Rng& rng) {
  params.validate();
  detail::check_grid(grid);
  if (!(r > 0.0)) throw std::invalid_argument("sample_bridge_normalized: r must be positive");
  const std::vector<double> full = detail::grid_with(grid, r);
  Path path;
  path.times = full;
  path.values.resize(full.size());
  std::vector<double> gamma_vals(full.size(), 0.0);
  double v = 0.0, t_prev = 0.0;
  for (std::size_t i = 1; i < full.size(); ++i) {
    const double ti = std::min(full[i], r);
    if (ti > t_prev) {
      v += rng.gamma(params.kappa * (ti - t_prev), params.eta);
      t_prev = ti;
    }
    gamma_vals[i] = v;
  }
  if (t_prev < r) v += rng.gamma(params.kappa * (r - t_prev), params.eta);
  const double gamma_r = v;
  for (std::size_t i = 0; i < full.size(); ++i)
    path.values[i] = full[i] >= r
                         ? params.endpoint
                         : detail::clamp_below_endpoint(
                               params.endpoint * gamma_vals[i] / gamma_r,
                               params.endpoint);
  path.pin = PathPin{r, params.endpoint};
  return path;
}

// Bridge of length r by sequential beta increments:
// (z_u - z_t)/(1 - z_t) ~ Beta(kappa (u-t), kappa (r-u)).
inline Path sample_bridge_markov(const std::vector<double>& grid, double r,
                                 const ProcessParams& params, Rng& rng) {
  params.validate();
  detail::check_grid(grid);
  if (!(r > 0.0)) throw std::invalid_argument("sample_bridge_markov: r must be positive");
  const std::vector<double> full = detail::grid_with(grid, r);
  Path path;
  path.times = full;
  path.values.resize(full.size());
  double z = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    const double t = full[i];
    if (t == 0.0) {
      path.values[i] = 0.0;
    } else if (t >= r) {
      path.values[i] = params.endpoint;
    } else {
      const double prev = full[i - 1];
      const double b = rng.beta(params.kappa * (t - prev), params.kappa * (r - t));
      z += (1.0 - z) * b;
      path.values[i] =
          detail::clamp_below_endpoint(params.endpoint * z, params.endpoint);
    }
  }
  path.pin = PathPin{r, params.endpoint};
  return path;
}

// One transition step of the bridge: value at u given value x at time t,
// for a bridge of length r.  Values in endpoint units.
inline double sample_bridge_transition(double x, double t, double u, double r,
                                       const ProcessParams& params, Rng& rng) {
  params.validate();
  if (!(t > 0.0) || !(t < u) || !(u < r))
    throw std::invalid_argument("sample_bridge_transition: need 0 < t < u < r");
  const double z = x / params.endpoint;
  if (!(z > 0.0) || !(z < 1.0))
    throw std::invalid_argument("sample_bridge_transition: x must be inside (0, endpoint)");
  const double b = rng.beta(params.kappa * (u - t), params.kappa * (r - u));
  return detail::clamp_below_endpoint(x + (params.endpoint - x) * b,
                                      params.endpoint);
}

// Poisson-number jump representation, truncated below epsilon.  Jump times
// are i.i.d. uniform on [0, r].
inline JumpSet sample_bridge_jumps(double r, double epsilon,
                                   const ProcessParams& params, Rng& rng,
                                   double max_expected_jumps = 5e7) {
  params.validate();
  if (!(r > 0.0) || !(epsilon > 0.0))
    throw std::invalid_argument("sample_bridge_jumps: r and epsilon must be positive");
  const double mean_count = r * params.kappa * exp_integral_e1(params.eta * epsilon);
  if (mean_count > max_expected_jumps)
    throw std::invalid_argument("sample_bridge_jumps: expected jump count exceeds cap");
  JumpSet js;
  js.length = r;
  js.epsilon = epsilon;
  js.truncated_mass = r * params.kappa * (-std::expm1(-params.eta * epsilon)) / params.eta;
  const std::uint64_t n = rng.poisson(mean_count);
  js.sizes.resize(n);
  js.times.resize(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    js.sizes[k] = detail::sample_jump_size(epsilon, params.eta, rng);
    js.times[k] = rng.uniform() * r;
  }
  // sort jointly by decreasing size
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return js.sizes[a] > js.sizes[b]; });
  JumpSet out = js;
  for (std::size_t k = 0; k < n; ++k) {
    out.sizes[k] = js.sizes[order[k]];
    out.times[k] = js.times[order[k]];
  }
  return out;
}

// Evaluate the normalized jump representation on a grid.
inline Path jump_set_to_path(const JumpSet& js, const std::vector<double>& grid,
                             const ProcessParams& params) {
  params.validate();
  detail::check_grid(grid);
  double total = 0.0;
  for (double s : js.sizes) total += s;
  if (total <= 0.0)
    throw std::invalid_argument("jump_set_to_path: empty jump set");
  Path path;
  path.times = detail::grid_with(grid, js.length);
  path.values.assign(path.times.size(), 0.0);
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    const double t = path.times[i];
    if (t >= js.length) {
      path.values[i] = params.endpoint;
      continue;
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < js.sizes.size(); ++k)
      if (js.times[k] <= t) acc += js.sizes[k];
    path.values[i] = detail::clamp_below_endpoint(params.endpoint * acc / total,
                                                  params.endpoint);
  }
  path.pin = PathPin{js.length, params.endpoint};
  return path;
}

// Random-length bridge: tau drawn from `law` on its own stream, path on a
// disjoint stream (independence by construction).  The grid is augmented
// with tau so the pin is exact.
inline std::pair<double, Path> sample_random_length_bridge(
    const std::vector<double>& grid, const MixingLaw& law,
    const ProcessParams& params, Rng& tau_rng, Rng& path_rng) {
  detail::check_grid(grid);
  const double tau = law.sample(tau_rng);
  Path path = sample_bridge_markov(grid, tau, params, path_rng);
  return {tau, path};
}

// P[U_k <= t] for the jump times of the random-length bridge:
// F(t) + t E[(1/tau) 1(tau > t)].
inline double jump_time_cdf(const MixingLaw& law, double t) {
  if (!(t >= 0.0)) throw std::domain_error("jump_time_cdf: t must be >= 0");
  if (t == 0.0) return 0.0;
  return std::min(1.0, law.cdf(t) + t * law.integrate_tail(t, [](double r) { return 1.0 / r; }));
}

}  // namespace gbridge

#endif  // GBRIDGE_PATHGEN_HPP
