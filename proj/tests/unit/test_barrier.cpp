#include <cmath>

#include "doctest.h"
#include "effham/barrier.hpp"
#include "effham/errors.hpp"
#include "oracles.hpp"

using namespace effham;

namespace {

PeriodicOrbit vertical(StableNormSolver& s, double x, double c) {
  PeriodicOrbit o = make_orbit(s.relax_from({0, 1}, c, {x, 0.0}));
  if (o.cls != HomologyClass{0, 1}) o = o.reversed();
  return o;
}

}  // namespace

TEST_CASE("barrier from an orbit to itself vanishes") {
  StableNormSolver s(Potential::preset("cos2"));
  const PeriodicOrbit o = make_orbit(s.evaluate({1, 0}, 2.0));
  const BarrierReport r = barrier_du(s.potential(), {std::sqrt(2.0), 0.0}, 2.0, nullptr, o, o);
  CHECK(std::abs(r.d_u) <= 1e-3);
  CHECK(r.sweep.size() >= 3);
}

TEST_CASE("barrier needs a corrector for non-translates") {
  StableNormSolver s(Potential::preset("cos2"));
  const PeriodicOrbit a = vertical(s, 0.1, 2.0), b = vertical(s, 0.3, 2.0);
  CHECK_THROWS_AS(barrier_du(s.potential(), {0, 1}, 2.0, nullptr, a, b), InvalidArgument);
}

TEST_CASE("edge of cos2 with normal (1,0): both barriers against quadrature") {
  // p0 = (sqrt 2, 0.3) lies on the edge {p1 = sqrt 2, |p2| <= 4/pi}.
  StableNormSolver s(Potential::preset("cos2"));
  const double half = oracle::simpson([](double t) { return 2.0 * std::abs(std::sin(oracle::pi * t)); });
  const FlatCondition f = check_flat_condition(s, {std::sqrt(2.0), 0.3}, {1, 0});
  CHECK(f.c0 == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(f.d_plus == doctest::Approx(half - 0.3).epsilon(1e-3));
  CHECK(f.d_minus == doctest::Approx(half + 0.3).epsilon(1e-3));
  CHECK(f.predicted_edge == doctest::Approx(2.0 * half).epsilon(1e-3));
  for (const auto* r : {&f.plus, &f.minus}) CHECK(r->sweep_monotone);
}

TEST_CASE("free case has no barrier") {
  StableNormSolver s(Potential::preset("zero"));
  const FlatCondition f = check_flat_condition(s, {1.0, 1.0}, {1, 1});
  CHECK(std::abs(f.tau_plus) <= 1e-3);
  CHECK(std::abs(f.tau_minus) <= 1e-3);
}

TEST_CASE("foliated cos2: zero barriers, additivity and the glued solution") {
  const Potential v = Potential::preset("cos2");
  StableNormSolver s(v);
  const Vec2 p0{0.0, oracle::action_cos(1.0, 2.0)};
  const Corrector corr = solve_cell(v, p0, 64, 64);
  const std::vector<PeriodicOrbit> lines{vertical(s, 0.1, 2.0), vertical(s, 0.3, 2.0), vertical(s, 0.5, 2.0)};
  const AdditivityResult a = additivity_check(v, p0, 2.0, &corr, lines);
  for (double d : a.consecutive) CHECK(std::abs(d) <= 1e-3);
  CHECK(a.deviation <= 1e-3);

  const AdditivityResult two = additivity_check(v, p0, 2.0, &corr, {lines[0], lines[1]});
  CHECK(two.deviation == 0.0);

  const GlueReport g = glue_solution(v, p0, 2.0, corr, lines[0], lines[1], 0.0, std::max(a.consecutive[0], 0.0));
  CHECK(g.mismatch_xi1 <= 1e-2);
  CHECK(g.deviation_from_u <= 1e-2);
  CHECK(g.residual <= 5e-2);
  CHECK_THROWS_AS(glue_solution(v, p0, 2.0, corr, lines[0], lines[1], 1.0, 0.5), InvalidArgument);
}
