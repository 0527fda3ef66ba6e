#include <cmath>

#include "doctest.h"
#include "effham/errors.hpp"
#include "effham/genericity.hpp"

using namespace effham;

TEST_CASE("ball clearance of a vertical line") {
  StableNormSolver s(Potential::preset("cos2"));
  PeriodicOrbit o = make_orbit(s.relax_from({0, 1}, 2.0, {0.0, 0.0}));
  CHECK(ball_clearance(o, {0.5, 0.5}, 0.1) == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(ball_clearance(o, {0.95, 0.2}, 0.1) == doctest::Approx(-0.05).epsilon(1e-9));
}

TEST_CASE("membership probe on cos2 and on the free case") {
  const Potential cos2 = Potential::preset("cos2");
  const MembershipProbe a = probe_membership(cos2, {1, 0}, 0.5, {2.0});
  REQUIRE(a.verdicts.size() == 1);
  CHECK(a.verdicts[0].is_linear);
  CHECK(a.verdicts[0].routes_agree);

  const MembershipProbe b = probe_membership(cos2, {0, 1}, 0.5, {2.0, 1.2});
  REQUIRE(b.verdicts.size() == 1);
  CHECK(b.skipped.size() == 1);
  CHECK_FALSE(b.verdicts[0].is_linear);

  const MembershipProbe z = probe_membership(Potential::preset("zero"), {1, 1}, 0.5, {1.0});
  REQUIRE(z.verdicts.size() == 1);
  CHECK_FALSE(z.verdicts[0].is_linear);
  CHECK(z.to_json()["verdicts"].size() == 1);
}

TEST_CASE("bump experiment refuses a bump on the extreme orbit") {
  // For cos1 the unique minimal vertical loop runs along x1 = 0.
  ExperimentOptions o;
  o.bump = {{0.05, 0.5}, 0.1, 0.2};
  CHECK_THROWS_AS(run_bump_experiment(Potential::preset("cos1"), o), InvalidArgument);
  o.bump = {{0.5, 0.5}, 0.1, 0.7};
  CHECK_THROWS_AS(run_bump_experiment(Potential::preset("cos2"), o), InvalidArgument);
}
