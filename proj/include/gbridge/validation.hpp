#ifndef GBRIDGE_VALIDATION_HPP
#define GBRIDGE_VALIDATION_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gbridge/harness.hpp"
#include "gbridge/io.hpp"

// Configurable gate suite behind `validate`: runs every statistical gate
// against the configured law/process, optionally with negative controls.

namespace gbridge {

struct ValidationReport {
  std::vector<GateResult> gates;
  std::vector<GateResult> negative_controls;  // expected to fail

  bool all_pass() const {
    for (const auto& g : gates)
      if (!g.pass) return false;
    return true;
  }

  bool controls_all_fail() const {
    for (const auto& g : negative_controls)
      if (g.pass) return false;
    return true;
  }
};

namespace detail {

inline double law_quantile(const MixingLaw& law, double q) {
  double c = 0.0;
  for (const auto& a : law.atoms()) {
    c += a.weight;
    if (c >= q) return a.location;
  }
  for (std::size_t i = 0; i < law.grid().size(); ++i) {
    c += law.grid_weights()[i];
    if (c >= q) return law.grid()[i];
  }
  return law.max_support();
}

inline std::vector<double> tau_bin_edges(const MixingLaw& law) {
  if (law.atoms().size() > 0 && law.grid().empty()) {
    std::vector<double> edges;
    for (std::size_t i = 1; i < law.atoms().size(); ++i)
      edges.push_back(0.5 * (law.atoms()[i - 1].location + law.atoms()[i].location));
    return edges;
  }
  // quintile cells: with finer cells the per-bin multinomial noise alone
  // would exceed the oracle's TV budget at the configured sample sizes
  std::vector<double> edges;
  for (int k = 1; k < 5; ++k) edges.push_back(law_quantile(law, k / 5.0));
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace detail

inline ValidationReport run_validation_suite(const RunConfig& cfg,
                                             bool with_negative_controls = false) {
  ValidationReport report;
  const MixingLaw law = law_from_json(cfg.law_spec);
  const ProcessParams& params = cfg.process;
  const std::uint64_t seed = cfg.seed;
  const std::size_t n = std::max<std::size_t>(cfg.ensemble_size, 100000);

  // representative bridge length and observation times
  const double r0 = detail::law_quantile(law, 0.5);
  const double t_obs = 0.5 * r0;
  const double u_obs = 0.75 * r0;

  // 1. Laplace transform of the subordinator
  report.gates.push_back(laplace_gate(params, 1.0, {0.5, 1.0, 2.0}, n, seed));

  // 2. bridge marginal, three samplers, plus pairwise agreement
  {
    const std::vector<double> grid = {0.0, t_obs, r0};
    const double a_shape = params.kappa * t_obs, b_shape = params.kappa * (r0 - t_obs);
    auto cdf = [&](double x) {
      const double z = std::clamp(x / params.endpoint, 0.0, 1.0);
      return regularized_incomplete_beta(z, a_shape, b_shape);
    };
    Rng rng_n(seed, "validate-marginal-normalized");
    Rng rng_m(seed, "validate-marginal-markov");
    Rng rng_j(seed, "validate-marginal-jumps");
    std::vector<double> sn(n), sm(n), sj(n);
    for (std::size_t i = 0; i < n; ++i) {
      sn[i] = sample_bridge_normalized(grid, r0, params, rng_n).value_at(t_obs);
      sm[i] = sample_bridge_markov(grid, r0, params, rng_m).value_at(t_obs);
      sj[i] = jump_set_to_path(sample_bridge_jumps(r0, 1e-6, params, rng_j), grid, params)
                  .value_at(t_obs);
    }
    report.gates.push_back(ks_gate("marginal-normalized", sn, cdf, seed));
    report.gates.push_back(ks_gate("marginal-markov", sm, cdf, seed));
    report.gates.push_back(ks_gate("marginal-jumps", sj, cdf, seed));
    report.gates.push_back(ks_two_sample_gate("marginal-normalized-vs-markov", sn, sm, seed));
    report.gates.push_back(ks_two_sample_gate("marginal-normalized-vs-jumps", sn, sj, seed));
    report.gates.push_back(ks_two_sample_gate("marginal-markov-vs-jumps", sm, sj, seed));
    if (with_negative_controls) {
      auto wrong_cdf = [&](double x) {
        const double z = std::clamp(x / params.endpoint, 0.0, 1.0);
        return regularized_incomplete_beta(z, b_shape + 1.0, a_shape);
      };
      report.negative_controls.push_back(
          ks_gate("control-marginal-wrong-cdf", sn, wrong_cdf, seed));
    }
  }

  // 3. transition law: zeta_u given zeta_t = x vs the scaled beta CDF
  {
    Rng rng(seed, "validate-transition");
    const double x_cond = 0.4 * params.endpoint;
    std::vector<double> zu(n);
    for (std::size_t i = 0; i < n; ++i)
      zu[i] = sample_bridge_transition(x_cond, t_obs, u_obs, r0, params, rng);
    auto cdf = [&](double y) {
      const double z = std::clamp((y - x_cond) / (params.endpoint - x_cond), 0.0, 1.0);
      return regularized_incomplete_beta(z, params.kappa * (u_obs - t_obs),
                                         params.kappa * (r0 - u_obs));
    };
    report.gates.push_back(ks_gate("transition-law", zu, cdf, seed));
  }

  // 4. stopping equivalence on the configured grid
  {
    std::vector<double> grid = cfg.grid;
    const double t_mid = grid[grid.size() / 2];
    report.gates.push_back(
        stopping_equivalence_gate(grid, law, params, t_mid, n, seed));
  }

  // 5/6. posterior and predictive oracles (need tail mass beyond t)
  if (law.tail_mass(t_obs) > 1e-12) {
    report.gates.push_back(posterior_oracle(law, t_obs, params,
                                            detail::tau_bin_edges(law), 40, n, seed,
                                            0.05)
                               .gate);
    if (law.tail_mass(u_obs) > 1e-12) {
      report.gates.push_back(predictive_oracle_gate(law, t_obs, u_obs, 0.5, 0.05,
                                                    params, 20, n, seed, 0.05));
    }
  }

  // 7. Markov property
  {
    const double th = 0.5 * t_obs;
    report.gates.push_back(markov_gate(law, th, t_obs, u_obs, params, n, seed));
    if (with_negative_controls) {
      GateResult c = markov_gate(law, th, t_obs, u_obs, params, n, seed, 0.1);
      c.name = "control-markov-injected";
      report.negative_controls.push_back(c);
    }
  }

  // 8. compensator: martingale residuals and the integrated drift bound
  {
    Rng tau_rng(seed, "validate-compensator-tau");
    Rng path_rng(seed, "validate-compensator-path");
    const std::size_t m = std::min<std::size_t>(n, 100000);
    std::vector<PathDriftRecord> f_records;
    f_records.reserve(m);
    double z_sum = 0.0, z_sq = 0.0;
    const double t_end = cfg.grid.back();
    for (std::size_t i = 0; i < m; ++i) {
      auto [tau, path] = sample_random_length_bridge(cfg.grid, law, params, tau_rng, path_rng);
      f_records.push_back(compensate_path(path, law, DriftMode::kObservation, params));
      const auto h_rec = compensate_path(path, law, DriftMode::kEnlarged, params);
      const double zi = h_rec.drift_integral.back() / params.endpoint;
      z_sum += zi;
      z_sq += zi * zi;
    }
    const DriftSummary summary = summarize_residuals(f_records, cfg.grid);
    // The trapezoid rule is exact in expectation only where the ensemble
    // drift integrand E[Z_s] = int_{(s,inf)} r^{-1} dP is smooth across the
    // step.  Its exact trapezoid defect over [a,b] is computable from the
    // law; steps where that defect is not negligible against the Monte Carlo
    // resolution (atom crossings, mass piling up near 0) are excluded and
    // counted rather than tested against a bound they cannot meet.
    double max_z = 0.0;
    std::size_t excluded = 0;
    for (std::size_t i = 0; i < summary.step_times.size(); ++i) {
      const double a = i == 0 ? cfg.grid.front() : summary.step_times[i - 1];
      const double b = summary.step_times[i];
      const double se = summary.standard_error[i];
      const double mean_z_ab = law.integrate(
          [a, b](double r) { return (std::min(b, r) - std::min(a, r)) / r; });
      auto ez = [&law](double s) {
        return law.integrate_tail(s, [](double r) { return 1.0 / r; });
      };
      const double defect = std::fabs(mean_z_ab - 0.5 * (b - a) * (ez(a) + ez(b)));
      if (se <= 0.0 || defect > 0.25 * se) {
        ++excluded;
        continue;
      }
      max_z = std::max(max_z, std::fabs(summary.mean_increment[i]) / se);
    }
    GateResult g;
    g.name = "compensator-martingale";
    g.sample_size = m;
    g.seed = seed;
    g.statistic = max_z;
    g.threshold = 4.0;
    g.pass = max_z <= 4.0;
    if (excluded > 0)
      g.detail = "excluded " + std::to_string(excluded) + " atom-crossing steps";
    report.gates.push_back(g);

    const double mean_z = z_sum / m;
    const double se_z = std::sqrt(std::max(z_sq / m - mean_z * mean_z, 0.0) / m);
    const double bound = integrated_drift_bound(law, t_end);
    GateResult b;
    b.name = "compensator-drift-bound";
    b.sample_size = m;
    b.seed = seed;
    b.statistic = se_z > 0.0 ? std::fabs(mean_z - bound) / se_z : 0.0;
    b.threshold = 3.0;
    b.pass = b.statistic <= 3.0 && mean_z <= 1.0 && bound <= 1.0;
    report.gates.push_back(b);
  }

  // 9. jump-time law of the random-length bridge.  The sampled time exists
  // only when the epsilon-truncated jump count is >= 1, which reweights tau
  // toward longer bridges; the reference CDF carries the same conditioning
  // (it converges to F(t) + t E[(1/tau) 1(tau > t)] as epsilon -> 0).
  {
    Rng tau_rng(seed, "validate-jumptime-tau");
    Rng jump_rng(seed, "validate-jumptime-path");
    const double eps = 1e-3;
    std::vector<double> first_jump;
    first_jump.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double tau = law.sample(tau_rng);
      const JumpSet js = sample_bridge_jumps(tau, eps, params, jump_rng);
      if (!js.times.empty()) first_jump.push_back(js.times.front());
    }
    const double c = params.kappa * exp_integral_e1(params.eta * eps);
    const double norm =
        law.integrate([c](double r) { return -std::expm1(-c * r); });
    auto cond_cdf = [&law, c, norm](double t) {
      return law.integrate([c, t](double r) {
               return (std::min(t, r) / r) * (-std::expm1(-c * r));
             }) /
             norm;
    };
    report.gates.push_back(ks_gate("jump-time-law", first_jump, cond_cdf, seed));
  }

  return report;
}

}  // namespace gbridge

#endif  // GBRIDGE_VALIDATION_HPP
