#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "gbridge/filter.hpp"
#include "gbridge/mixing_law.hpp"

using namespace gbridge;

namespace {

const MixingLaw kTwoAtoms = MixingLaw::discrete({{2.0, 0.5}, {4.0, 0.5}});

}  // namespace

TEST_CASE("phi is identically 1 under a Dirac prior") {
  const MixingLaw law = MixingLaw::dirac(3.0);
  for (double x : {0.1, 0.5, 0.99})
    for (double t : {0.5, 1.0, 2.5})
      REQUIRE(phi(x, t, 3.0, law) == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("phi integrates to 1 against the prior tail") {
  const MixingLaw law = MixingLaw::exponential_grid(0.5, 40.0);
  for (double kappa : {1.0, 1.7}) {
    for (double x : {0.2, 0.9}) {
      const double t = 0.8;
      const double mass = law.integrate_tail(
          t, [&](double r) { return phi(x, t, r, law, kappa); });
      REQUIRE(mass == Catch::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("phi concentrates on the nearest tail point as x -> 1") {
  // two atoms with equal prior weight: the posterior weight of the smaller
  // one tends to 1, so phi at that atom tends to 1/0.5 = 2
  REQUIRE(phi(1.0 - 1e-8, 1.0, 2.0, kTwoAtoms) ==
          Catch::Approx(2.0).margin(1e-3));
  REQUIRE(phi(1.0 - 1e-8, 1.0, 4.0, kTwoAtoms) < 1e-3);
}

TEST_CASE("phi input validation") {
  REQUIRE_THROWS_AS(phi(0.0, 1.0, 2.0, kTwoAtoms), std::domain_error);
  REQUIRE_THROWS_AS(phi(1.0, 1.0, 2.0, kTwoAtoms), std::domain_error);
  REQUIRE_THROWS_AS(phi(0.5, 0.0, 2.0, kTwoAtoms), std::domain_error);
  REQUIRE_THROWS_AS(phi(0.5, 2.0, 1.0, kTwoAtoms), std::domain_error);
  // no prior mass beyond t
  REQUIRE_THROWS_AS(phi(0.5, 5.0, 6.0, kTwoAtoms), std::domain_error);
}

TEST_CASE("posterior for the two-atom prior: exact weights") {
  // prior {2: 1/2, 4: 1/2}, observation x = 1/2 at t = 1, kappa = 1:
  // weights proportional to (1/2)^r Gamma(r)/Gamma(r-1) = (1/2)^r (r-1),
  // i.e. 1/4 vs 3/16, which normalizes to 4/7 and 3/7.
  const TauPosterior post = posterior_tau(0.5, 1.0, kTwoAtoms);
  REQUIRE_FALSE(post.stopped());
  REQUIRE(post.support.size() == 2);
  REQUIRE(post.support[0].location == 2.0);
  REQUIRE(post.support[0].weight == Catch::Approx(4.0 / 7.0).epsilon(1e-12));
  REQUIRE(post.support[1].weight == Catch::Approx(3.0 / 7.0).epsilon(1e-12));
  REQUIRE(post.total_mass() == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(post.mean() == Catch::Approx(20.0 / 7.0).epsilon(1e-12));
  REQUIRE(post.tail_mass(3.0) == Catch::Approx(3.0 / 7.0).epsilon(1e-12));
  REQUIRE(post.quantile(0.5) == 2.0);
  REQUIRE(post.quantile(0.99) == 4.0);
}

TEST_CASE("posterior at x = 1 is the prior restricted to (0, t]") {
  const TauPosterior post = posterior_tau(1.0, 3.0, kTwoAtoms);
  REQUIRE(post.stopped());
  REQUIRE(post.support.size() == 1);
  REQUIRE(post.support[0].location == 2.0);
  REQUIRE(post.support[0].weight == Catch::Approx(1.0).epsilon(1e-14));
  // x = 1 before any prior mass is impossible
  REQUIRE_THROWS_AS(posterior_tau(1.0, 1.0, kTwoAtoms), std::domain_error);
}

TEST_CASE("posterior input validation and degenerate prior") {
  REQUIRE_THROWS_AS(posterior_tau(0.5, 0.0, kTwoAtoms), std::domain_error);
  REQUIRE_THROWS_AS(posterior_tau(0.0, 1.0, kTwoAtoms), std::domain_error);
  REQUIRE_THROWS_AS(posterior_tau(1.5, 1.0, kTwoAtoms), std::domain_error);
  // no tail mass beyond t with x < 1
  REQUIRE_THROWS_AS(posterior_tau(0.5, 5.0, kTwoAtoms), std::domain_error);
  // Dirac prior: posterior is the same Dirac whatever the observation
  const TauPosterior post = posterior_tau(0.3, 1.0, MixingLaw::dirac(2.0));
  REQUIRE(post.support.size() == 1);
  REQUIRE(post.support[0].location == 2.0);
  REQUIRE(post.support[0].weight == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("kappa enters only through rescaled times") {
  // posterior weights under kappa equal the kappa = 1 weights computed for
  // the law with all locations scaled by kappa, observed at kappa * t
  const double kappa = 1.6, t = 1.0, x = 0.37;
  const MixingLaw scaled =
      MixingLaw::discrete({{kappa * 2.0, 0.5}, {kappa * 4.0, 0.5}});
  const TauPosterior a = posterior_tau(x, t, kTwoAtoms, kappa);
  const TauPosterior b = posterior_tau(x, kappa * t, scaled, 1.0);
  REQUIRE(a.support.size() == b.support.size());
  for (std::size_t i = 0; i < a.support.size(); ++i)
    REQUIRE(a.support[i].weight ==
            Catch::Approx(b.support[i].weight).epsilon(1e-12));
}

TEST_CASE("conditional expectation and survival probability") {
  REQUIRE(conditional_expectation([](double r) { return r; }, 0.5, 1.0,
                                  kTwoAtoms) ==
          Catch::Approx(20.0 / 7.0).epsilon(1e-12));
  REQUIRE(survival_probability(0.5, 1.0, 3.0, kTwoAtoms) ==
          Catch::Approx(3.0 / 7.0).epsilon(1e-12));
  REQUIRE(survival_probability(0.5, 1.0, 4.0, kTwoAtoms) == 0.0);
  REQUIRE(survival_probability(1.0, 3.0, 4.0, kTwoAtoms) == 0.0);  // stopped
  REQUIRE_THROWS_AS(survival_probability(0.5, 1.0, 0.5, kTwoAtoms),
                    std::domain_error);
  REQUIRE_THROWS_AS(
      conditional_expectation(
          [](double) { return std::numeric_limits<double>::infinity(); }, 0.5,
          1.0, kTwoAtoms),
      std::runtime_error);
}

TEST_CASE("predictive law: mass accounting and frozen atom value") {
  // law {1.5: 1/2, 3: 1/2}, x = 0.4 at t = 1, horizon u = 2
  const MixingLaw law = MixingLaw::discrete({{1.5, 0.5}, {3.0, 0.5}});
  const PredictiveLaw pl = predictive_law(0.4, 1.0, 2.0, law);
  REQUIRE(pl.total_mass() == Catch::Approx(1.0).epsilon(1e-12));
  // frozen: posterior weight of r = 1.5 given x = 0.4 at t = 1
  REQUIRE(pl.atom_at_one ==
          Catch::Approx(0.34976873215780135).epsilon(1e-12));
  REQUIRE(pl.continuous_mass() ==
          Catch::Approx(1.0 - 0.34976873215780135).epsilon(1e-12));
  // cells span (x, 1) and carry consistent density/mass
  REQUIRE(pl.cell_edges.front() == 0.4);
  REQUIRE(pl.cell_edges.back() == 1.0);
  for (std::size_t i = 100; i < 400; ++i) {
    // away from the endpoint singularities the midpoint density times the
    // cell width reproduces the exact cell mass to first order
    const double w = pl.cell_edges[i + 1] - pl.cell_edges[i];
    REQUIRE(pl.density[i] * w == Catch::Approx(pl.cell_mass[i]).epsilon(0.01));
  }
}

TEST_CASE("predictive law over a gridded prior stays normalized") {
  const MixingLaw law = MixingLaw::exponential_grid(0.5, 40.0);
  for (double kappa : {1.0, 1.5}) {
    const PredictiveLaw pl = predictive_law(0.5, 0.7, 1.0, law, 256, kappa);
    REQUIRE(pl.total_mass() == Catch::Approx(1.0).epsilon(1e-11));
    REQUIRE(pl.atom_at_one > 0.0);
  }
  REQUIRE_THROWS_AS(predictive_law(0.0, 1.0, 2.0, law), std::domain_error);
  REQUIRE_THROWS_AS(predictive_law(0.5, 2.0, 1.0, law), std::domain_error);
}

TEST_CASE("predictive law is time-inhomogeneous") {
  // same horizon u - t and same observation, but different absolute times:
  // the mixture weights over tau differ, so the laws must differ
  const MixingLaw law = MixingLaw::mixed({{2.0, 0.5}}, {2.5, 4.0, 6.0},
                                         {0.2, 0.2, 0.1});
  const PredictiveLaw early = predictive_law(0.5, 0.5, 1.0, law, 128);
  const PredictiveLaw late = predictive_law(0.5, 1.5, 2.0, law, 128);
  double tv = std::fabs(early.atom_at_one - late.atom_at_one);
  for (std::size_t i = 0; i < early.cell_mass.size(); ++i)
    tv += std::fabs(early.cell_mass[i] - late.cell_mass[i]);
  REQUIRE(0.5 * tv > 1e-3);
}

TEST_CASE("path information estimate branches") {
  auto identity = [](double r) { return r; };
  // pinned with the realized tau known: exact value
  REQUIRE(path_information_estimate(identity, 3.0, 1.0, 2.0, kTwoAtoms) == 2.0);
  // pinned but tau missing or inconsistent
  REQUIRE_THROWS_AS(
      path_information_estimate(identity, 3.0, 1.0, std::nullopt, kTwoAtoms),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      path_information_estimate(identity, 1.0, 1.0, 2.0, kTwoAtoms),
      std::invalid_argument);
  // not pinned: tau must not be supplied; estimate is the posterior mean
  REQUIRE_THROWS_AS(
      path_information_estimate(identity, 1.0, 0.5, 2.0, kTwoAtoms),
      std::invalid_argument);
  REQUIRE(path_information_estimate(identity, 1.0, 0.5, std::nullopt,
                                    kTwoAtoms) ==
          Catch::Approx(20.0 / 7.0).epsilon(1e-12));
}
