#ifndef GBRIDGE_COMPENSATOR_HPP
#define GBRIDGE_COMPENSATOR_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gbridge/filter.hpp"
#include "gbridge/mixing_law.hpp"
#include "gbridge/pathgen.hpp"

// Drift/compensator computations for the bridge with random length, in the
// enlarged filtration (tau known) and in the observation filtration, plus
// the martingale-residual extraction along simulated paths.

namespace gbridge {

enum class DriftMode {
  kEnlarged,     // drift (1 - z)/(tau - s), needs the realized tau
  kObservation,  // drift (1 - z) * int (r - s)^{-1} phi dP_tau
};

// Z_s = (1 - x)/(tau - s) on {s < tau}, in normalized units.
inline double h_drift(double x, double tau, double s) {
  if (!(x >= 0.0) || !(x <= 1.0)) throw std::domain_error("h_drift: x must be in [0,1]");
  if (s >= tau) return 0.0;
  return (1.0 - x) * (1.0 / (tau - s));
}

// E[Z_s | zeta_s = x] = (1 - x) int_{(s,inf)} (r-s)^{-1} phi P_tau(dr).
// kappa enters only through the phi weights (the drift kernel itself is
// shape-rate free: the one-step conditional mean of the bridge is
// x + (1-x)(u-s)/(r-s) for every kappa).
inline double f_drift(double x, double s, const MixingLaw& law, double kappa = 1.0) {
  if (!(x >= 0.0) || !(x <= 1.0)) throw std::domain_error("f_drift: x must be in [0,1]");
  if (x == 1.0) return 0.0;
  // phi weights at x over the tail beyond s; at x = 0 the (1-x)^r factors are
  // 1 and the formula stays finite, so evaluate directly.
  std::vector<WeightedPoint> tail;
  double max_log = kNegInf;
  std::vector<double> logs;
  for (const auto& a : law.atoms())
    if (a.location > s) tail.push_back({a.location, a.weight});
  for (std::size_t i = 0; i < law.grid().size(); ++i)
    if (law.grid()[i] > s) tail.push_back({law.grid()[i], law.grid_weights()[i]});
  if (tail.empty())
    throw std::domain_error("f_drift: law has no mass beyond s");
  logs.resize(tail.size());
  for (std::size_t i = 0; i < tail.size(); ++i) {
    logs[i] = x == 0.0 ? log_gamma_ratio(kappa * tail[i].location, kappa * s)
                       : detail::log_phi_numerator(x, s, tail[i].location, kappa);
    if (logs[i] > max_log) max_log = logs[i];
  }
  double denom = 0.0, num = 0.0;
  for (std::size_t i = 0; i < tail.size(); ++i) {
    const double w = tail[i].weight * std::exp(logs[i] - max_log);
    denom += w;
    num += w * (1.0 / (tail[i].location - s));
  }
  return (1.0 - x) * (num / denom);
}

// Residuals of one path: residual_t = z_t - int_0^t drift ds (trapezoid on
// the path grid; the subinterval ending at the pin uses the left endpoint
// only, since the enlarged-filtration integrand is singular as s -> tau).
struct PathDriftRecord {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> drift_integral;
  std::vector<double> residual;
};

inline PathDriftRecord compensate_path(const Path& path, const MixingLaw& law,
                                       DriftMode mode, const ProcessParams& params) {
  params.validate();
  if (mode == DriftMode::kEnlarged && !path.pin)
    throw std::invalid_argument("compensate_path: enlarged mode needs the path pin");
  const double a = params.endpoint;
  const double pin_time = path.pin ? path.pin->time
                                   : std::numeric_limits<double>::infinity();
  const std::size_t n = path.times.size();
  PathDriftRecord rec;
  rec.times = path.times;
  rec.values = path.values;
  rec.drift_integral.resize(n);
  rec.residual.resize(n);
  auto drift_at = [&](double s, double v) {
    const double z = v / a;
    if (z >= 1.0 || s >= pin_time) return 0.0;
    return mode == DriftMode::kEnlarged ? h_drift(z, pin_time, s)
                                        : f_drift(z, s, law, params.kappa);
  };
  double integral = 0.0;
  double d_prev = drift_at(path.times[0], path.values[0]);
  rec.drift_integral[0] = 0.0;
  rec.residual[0] = path.values[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double dt = path.times[i] - path.times[i - 1];
    const double d_cur = drift_at(path.times[i], path.values[i]);
    if (path.times[i] >= pin_time) {
      integral += d_prev * dt;  // left rule into the singularity
    } else {
      integral += 0.5 * (d_prev + d_cur) * dt;
    }
    d_prev = d_cur;
    rec.drift_integral[i] = a * integral;
    rec.residual[i] = path.values[i] - rec.drift_integral[i];
  }
  return rec;
}

// Ensemble summary: per-step mean residual increment, its standard error,
// and the largest |mean|/SE over the grid.
struct DriftSummary {
  std::vector<double> step_times;      // right endpoints of grid steps
  std::vector<double> mean_increment;
  std::vector<double> standard_error;
  double max_abs_z = 0.0;
};

// `grid` is the shared base grid; each record's grid may additionally carry
// its own pin time, so residuals are looked up by time.
inline DriftSummary summarize_residuals(const std::vector<PathDriftRecord>& records,
                                        const std::vector<double>& grid) {
  if (records.empty()) throw std::invalid_argument("summarize_residuals: empty ensemble");
  const std::size_t n = grid.size();
  if (n < 2) throw std::invalid_argument("summarize_residuals: need at least 2 grid times");
  auto residual_at = [](const PathDriftRecord& r, double t) {
    auto it = std::lower_bound(r.times.begin(), r.times.end(), t);
    if (it == r.times.end() || *it != t)
      throw std::invalid_argument("summarize_residuals: grid time missing from a record");
    return r.residual[static_cast<std::size_t>(it - r.times.begin())];
  };
  DriftSummary summary;
  summary.step_times.resize(n - 1);
  summary.mean_increment.resize(n - 1);
  summary.standard_error.resize(n - 1);
  const double m = static_cast<double>(records.size());
  for (std::size_t i = 1; i < n; ++i) {
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& r : records) {
      const double inc = residual_at(r, grid[i]) - residual_at(r, grid[i - 1]);
      sum += inc;
      sum_sq += inc * inc;
    }
    const double mean = sum / m;
    const double var = std::max(sum_sq / m - mean * mean, 0.0);
    const double se = std::sqrt(var / m);
    summary.step_times[i - 1] = grid[i];
    summary.mean_increment[i - 1] = mean;
    summary.standard_error[i - 1] = se;
    if (se > 0.0) summary.max_abs_z = std::max(summary.max_abs_z, std::fabs(mean) / se);
  }
  return summary;
}

// E int_0^t Z_s ds = int (t ^ r)/r P_tau(dr) <= 1.
inline double integrated_drift_bound(const MixingLaw& law, double t) {
  if (!(t >= 0.0)) throw std::domain_error("integrated_drift_bound: t must be >= 0");
  return law.integrate([t](double r) { return std::min(t, r) / r; });
}

}  // namespace gbridge

#endif  // GBRIDGE_COMPENSATOR_HPP
