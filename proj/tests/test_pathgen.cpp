#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gbridge/harness.hpp"
#include "gbridge/pathgen.hpp"
#include "test_oracles.hpp"

using namespace gbridge;

namespace {

std::vector<double> linspace_grid(double end, std::size_t steps) {
  std::vector<double> g(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i)
    g[i] = end * static_cast<double>(i) / steps;
  return g;
}

}  // namespace

TEST_CASE("parameter and grid validation") {
  REQUIRE_THROWS_AS((ProcessParams{-1.0, 1.0, 1.0}.validate()), std::invalid_argument);
  REQUIRE_THROWS_AS((ProcessParams{1.0, 0.0, 1.0}.validate()), std::invalid_argument);
  REQUIRE_THROWS_AS((ProcessParams{1.0, 1.0, -2.0}.validate()), std::invalid_argument);
  Rng rng(1, "pathgen-validate");
  const ProcessParams params;
  REQUIRE_THROWS_AS(sample_gamma_path({}, params, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(sample_gamma_path({0.5, 1.0}, params, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(sample_gamma_path({0.0, 1.0, 1.0}, params, rng),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(sample_bridge_markov({0.0, 1.0}, 0.0, params, rng),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(sample_bridge_jumps(1.0, 0.0, params, rng),
                    std::invalid_argument);
}

TEST_CASE("gamma path moments match the subordinator law") {
  // gamma_t ~ Gamma(kappa t, eta): mean kappa t / eta, var kappa t / eta^2
  const std::size_t n = 100000;
  {
    const ProcessParams params{1.0, 1.0, 1.0};
    Rng rng(42, "pathgen-gamma-mean");
    std::vector<double> g2(n);
    for (std::size_t i = 0; i < n; ++i)
      g2[i] = sample_gamma_path({0.0, 1.0, 2.0}, params, rng).value_at(2.0);
    const auto mv = test_oracle::mean_se(g2);
    REQUIRE(std::fabs(mv.mean - 2.0) <= 3.0 * mv.se);
  }
  {
    const ProcessParams params{2.0, 3.0, 1.0};  // eta=2, kappa=3
    Rng rng(43, "pathgen-gamma-var");
    std::vector<double> g1(n);
    for (std::size_t i = 0; i < n; ++i)
      g1[i] = sample_gamma_path({0.0, 0.5, 1.0}, params, rng).value_at(1.0);
    const auto mv = test_oracle::mean_se(g1);
    REQUIRE(std::fabs(mv.mean - 1.5) <= 3.0 * mv.se);
    double var = 0.0;
    for (double x : g1) var += (x - mv.mean) * (x - mv.mean);
    var /= n;
    // SE of the sample variance of a Gamma: sqrt((mu4 - var^2)/n), bounded
    // loosely by 4 var^2 / sqrt(n) here
    REQUIRE(std::fabs(var - 0.75) <= 4.0 * 0.75 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("bridge paths start at 0, are nondecreasing, and pin exactly") {
  const ProcessParams params{1.5, 0.8, 2.0};
  const std::vector<double> grid = linspace_grid(3.0, 30);
  Rng rng1(7, "pathgen-shape-normalized");
  Rng rng2(7, "pathgen-shape-markov");
  for (int k = 0; k < 200; ++k) {
    const double r = 0.3 + 0.017 * k;
    for (const Path& p : {sample_bridge_normalized(grid, r, params, rng1),
                          sample_bridge_markov(grid, r, params, rng2)}) {
      REQUIRE(p.values.front() == 0.0);
      REQUIRE(p.pin.has_value());
      REQUIRE(p.pin->value == params.endpoint);
      for (std::size_t i = 1; i < p.times.size(); ++i) {
        REQUIRE(p.values[i] >= p.values[i - 1]);
        if (p.times[i] >= r) {
          REQUIRE(p.values[i] == params.endpoint);
        } else {
          REQUIRE(p.values[i] < params.endpoint);
        }
      }
      // the recorded window never extends past the grid end
      REQUIRE(p.times.back() <= grid.back());
    }
  }
}

TEST_CASE("pre-pin values stay strictly below the endpoint near the pin") {
  // r barely beyond an observation time: the beta increment has a tiny second
  // shape and can round to the endpoint without the clamp
  const ProcessParams params{1.0, 1.0, 1.0};
  const double r = 1.0 + 1e-9;
  const std::vector<double> grid = {0.0, 0.5, 1.0, 1.5};
  Rng rng(99, "pathgen-clamp");
  for (int k = 0; k < 5000; ++k) {
    const Path p = sample_bridge_markov(grid, r, params, rng);
    REQUIRE(p.value_at(1.0) < 1.0);  // 1.0 < r, so not pinned yet
    REQUIRE(p.value_at(1.5) == 1.0);
  }
}

TEST_CASE("bridge marginal mean is a*t/r for every sampler") {
  const ProcessParams params{2.0, 1.0, 3.0};
  const double r = 2.0, t = 0.75;
  const std::vector<double> grid = {0.0, t, r};
  const std::size_t n = 100000;
  Rng rng_n(11, "pathgen-mean-normalized");
  Rng rng_m(11, "pathgen-mean-markov");
  std::vector<double> sn(n), sm(n);
  for (std::size_t i = 0; i < n; ++i) {
    sn[i] = sample_bridge_normalized(grid, r, params, rng_n).value_at(t);
    sm[i] = sample_bridge_markov(grid, r, params, rng_m).value_at(t);
  }
  const double target = params.endpoint * t / r;
  const auto mvn = test_oracle::mean_se(sn);
  const auto mvm = test_oracle::mean_se(sm);
  REQUIRE(std::fabs(mvn.mean - target) <= 3.0 * mvn.se);
  REQUIRE(std::fabs(mvm.mean - target) <= 3.0 * mvm.se);
  // the two constructions produce the same marginal law
  const GateResult two = ks_two_sample_gate("normalized-vs-markov", sn, sm, 11);
  REQUIRE(two.pass);
}

TEST_CASE("transition sampler has the conditional beta mean") {
  const ProcessParams params{1.0, 2.5, 1.0};
  const double x = 0.3, t = 0.5, u = 0.8, r = 1.4;
  Rng rng(13, "pathgen-transition-mean");
  const std::size_t n = 100000;
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i)
    ys[i] = sample_bridge_transition(x, t, u, r, params, rng);
  const auto mv = test_oracle::mean_se(ys);
  const double target = x + (1.0 - x) * (u - t) / (r - t);
  REQUIRE(std::fabs(mv.mean - target) <= 3.0 * mv.se);
  for (double y : ys) {
    REQUIRE(y > x);
    REQUIRE(y < 1.0);
  }
  REQUIRE_THROWS_AS(sample_bridge_transition(0.0, t, u, r, params, rng),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(sample_bridge_transition(x, u, t, r, params, rng),
                    std::invalid_argument);
}

TEST_CASE("jump representation: count, sizes, and size law") {
  const ProcessParams params{1.0, 1.0, 1.0};
  const double r = 2.0, eps = 0.01;
  Rng rng(17, "pathgen-jumps");
  // truncated_mass is exact: r kappa (1 - e^{-eta eps})/eta
  const JumpSet first = sample_bridge_jumps(r, eps, params, rng);
  REQUIRE(first.truncated_mass ==
          Catch::Approx(r * (-std::expm1(-eps))).epsilon(1e-14));
  const double mean_count = r * exp_integral_e1(eps);
  const std::size_t trials = 3000;
  double count_sum = 0.0;
  std::vector<double> sizes;
  for (std::size_t k = 0; k < trials; ++k) {
    const JumpSet js = sample_bridge_jumps(r, eps, params, rng);
    count_sum += static_cast<double>(js.sizes.size());
    for (std::size_t i = 0; i < js.sizes.size(); ++i) {
      REQUIRE(js.sizes[i] > eps);
      if (i > 0) REQUIRE(js.sizes[i] <= js.sizes[i - 1]);
      REQUIRE(js.times[i] >= 0.0);
      REQUIRE(js.times[i] <= r);
    }
    sizes.insert(sizes.end(), js.sizes.begin(), js.sizes.end());
  }
  // Poisson mean within 3 SE
  const double se = std::sqrt(mean_count / trials);
  REQUIRE(std::fabs(count_sum / trials - mean_count) <= 3.0 * se);
  // size law: density x^{-1} e^{-x} / E1(eps) on (eps, inf)
  auto size_cdf = [eps](double y) {
    return (exp_integral_e1(eps) - exp_integral_e1(y)) / exp_integral_e1(eps);
  };
  REQUIRE(ks_gate("jump-sizes", sizes, size_cdf, 17).pass);
  REQUIRE_THROWS_AS(sample_bridge_jumps(1e9, 1e-9, params, rng),
                    std::invalid_argument);
}

TEST_CASE("jump-set path evaluation matches the normalized construction") {
  const ProcessParams params{1.0, 1.0, 2.0};
  const std::vector<double> grid = linspace_grid(1.0, 4);
  Rng rng(19, "pathgen-jumppath");
  const JumpSet js = sample_bridge_jumps(0.8, 1e-6, params, rng);
  const Path p = jump_set_to_path(js, grid, params);
  REQUIRE(p.values.front() == 0.0);
  for (std::size_t i = 1; i < p.times.size(); ++i)
    REQUIRE(p.values[i] >= p.values[i - 1]);
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    if (p.times[i] >= js.length) REQUIRE(p.values[i] == params.endpoint);
  }
  REQUIRE_THROWS_AS(jump_set_to_path(JumpSet{}, grid, params),
                    std::invalid_argument);
}

TEST_CASE("random-length bridge: pin equals the drawn tau") {
  const MixingLaw law = MixingLaw::discrete({{0.7, 0.4}, {2.4, 0.6}});
  const ProcessParams params{1.0, 1.0, 1.0};
  const std::vector<double> grid = linspace_grid(2.0, 8);
  Rng tau_rng(23, "pathgen-rlb-tau");
  Rng path_rng(23, "pathgen-rlb-path");
  for (int k = 0; k < 500; ++k) {
    auto [tau, path] = sample_random_length_bridge(grid, law, params, tau_rng, path_rng);
    REQUIRE((tau == 0.7 || tau == 2.4));
    REQUIRE(path.pin->time == tau);
    // value at any grid time >= tau is the endpoint, strictly below before
    for (std::size_t i = 0; i < path.times.size(); ++i) {
      if (path.times[i] >= tau)
        REQUIRE(path.values[i] == params.endpoint);
      else
        REQUIRE(path.values[i] < params.endpoint);
    }
  }
}

TEST_CASE("jump_time_cdf closed forms") {
  // Dirac(r): F(t) + t/r for t < r, so cdf = t/r, then 1
  const MixingLaw dirac = MixingLaw::dirac(2.0);
  REQUIRE(jump_time_cdf(dirac, 0.0) == 0.0);
  REQUIRE(jump_time_cdf(dirac, 1.0) == Catch::Approx(0.5).epsilon(1e-14));
  REQUIRE(jump_time_cdf(dirac, 2.0) == Catch::Approx(1.0).epsilon(1e-14));
  REQUIRE(jump_time_cdf(dirac, 5.0) == 1.0);
  // two atoms {2: 1/2, 4: 1/2} at t = 1: 0 + 1*(0.5/2 + 0.5/4) = 0.375
  const MixingLaw two = MixingLaw::discrete({{2.0, 0.5}, {4.0, 0.5}});
  REQUIRE(jump_time_cdf(two, 1.0) == Catch::Approx(0.375).epsilon(1e-14));
  // at t = 3: F(3) + 3 * 0.5/4 = 0.5 + 0.375 = 0.875
  REQUIRE(jump_time_cdf(two, 3.0) == Catch::Approx(0.875).epsilon(1e-14));
  REQUIRE_THROWS_AS(jump_time_cdf(two, -0.5), std::domain_error);
}

TEST_CASE("samplers are bit-deterministic in (seed, purpose, index)") {
  const ProcessParams params{1.0, 1.0, 1.0};
  const std::vector<double> grid = linspace_grid(1.0, 10);
  Rng a(555, "determinism", 3), b(555, "determinism", 3);
  const Path pa = sample_bridge_markov(grid, 0.77, params, a);
  const Path pb = sample_bridge_markov(grid, 0.77, params, b);
  REQUIRE(pa.values == pb.values);
  Rng c(555, "determinism", 4);
  const Path pc = sample_bridge_markov(grid, 0.77, params, c);
  REQUIRE(pa.values != pc.values);
  Rng d(556, "determinism", 3);
  const Path pd = sample_bridge_markov(grid, 0.77, params, d);
  REQUIRE(pa.values != pd.values);
}

TEST_CASE("value_at rejects off-grid times") {
  Rng rng(1, "pathgen-valueat");
  const Path p = sample_gamma_path({0.0, 1.0, 2.0}, ProcessParams{}, rng);
  REQUIRE_THROWS_AS(p.value_at(1.5), std::invalid_argument);
  REQUIRE_NOTHROW(p.value_at(1.0));
}
