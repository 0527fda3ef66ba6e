#include <cmath>
#include <numeric>

#include "doctest.h"
#include "effham/errors.hpp"
#include "effham/maupertuis.hpp"
#include "oracles.hpp"

using namespace effham;

TEST_CASE("irreducible classes up to Lmax") {
  const auto cls = irreducible_classes(2);
  CHECK(cls.size() == 8);  // (1,0) (0,1) (1,+-1) (1,+-2) (2,+-1)
  for (const auto& c : cls) CHECK(std::gcd(std::abs(c.m), std::abs(c.n)) == 1);
}

TEST_CASE("free stable norm is sqrt(2c)|l|") {
  StableNormSolver s(Potential::preset("zero"));
  for (const HomologyClass c : {HomologyClass{1, 0}, HomologyClass{1, 1}, HomologyClass{2, -3}})
    CHECK(s.evaluate(c, 2.0).length == doctest::Approx(2.0 * c.length()).epsilon(1e-10));
}

TEST_CASE("cos2 stable norms: ridge and quadrature") {
  StableNormSolver s(Potential::preset("cos2"));
  CHECK(s.evaluate({1, 0}, 2.0).length == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(s.evaluate({0, 1}, 2.0).length == doctest::Approx(oracle::action_cos(1.0, 2.0)).epsilon(1e-8));
}

TEST_CASE("stable norm is symmetric, increasing in c and inside the conformal sandwich") {
  StableNormSolver s(Potential::preset("sep"));
  const double c1 = s.vmax() + 0.4, c2 = s.vmax() + 0.8;
  const StableNormTable t1 = tabulate_stable_norms(s, c1, 2), t2 = tabulate_stable_norms(s, c2, 2);
  for (const auto& [cls, e] : t1.entries) {
    CHECK(t1.entries.at(-cls).length == e.length);
    CHECK(t2.entries.at(cls).length > e.length);
    CHECK(e.length >= std::sqrt(2.0 * (c1 - s.vmax())) * cls.length());
    CHECK(e.length <= std::sqrt(2.0 * (c1 - s.vmin())) * cls.length());
  }
  // Triangle inequality for primitive sums.
  const double a = t1.entries.at({1, 0}).length, b = t1.entries.at({0, 1}).length;
  CHECK(t1.entries.at({1, 1}).length <= a + b + 1e-6);
}

TEST_CASE("levels at or below max V are refused") {
  StableNormSolver s(Potential::preset("cos1"));
  CHECK_THROWS_AS(s.evaluate({1, 0}, 1.0), DegenerateMetricError);
}

TEST_CASE("dual H-bar: free case and a separable value") {
  CHECK(hbar_dual(Potential::preset("zero"), {1.0, 1.0}).hbar == doctest::Approx(1.0).epsilon(1e-8));
  // For V = cos 2 pi x2 and p = (3, 0): 9/2 + max V.
  StableNormSolver s(Potential::preset("cos2"));
  const DualResult d = hbar_dual(s, {3.0, 0.0});
  CHECK(d.hbar == doctest::Approx(5.5).epsilon(1e-6));
  REQUIRE(d.supporting.has_value());
}

TEST_CASE("dual H-bar on the flat branch returns max V") {
  StableNormSolver s(Potential::preset("cos1"));
  const DualResult d = hbar_dual(s, {0.5, 0.0});
  CHECK(d.hbar == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(d.supporting.has_value());
}

TEST_CASE("dual against the separable quadrature oracle") {
  StableNormSolver s(Potential::preset("sep"));
  for (const Vec2 p : {Vec2{1.5, 0.5}, Vec2{2.0, 1.5}}) {
    const double exact = oracle::hbar_cos(1.0, p.x) + oracle::hbar_cos(0.5, p.y);
    CHECK(std::abs(hbar_dual(s, p).hbar - exact) <= 1e-2);
  }
}

TEST_CASE("level_for_length inverts the stable norm") {
  StableNormSolver s(Potential::preset("egg"));
  const double target = s.evaluate({1, 1}, 3.0).length;
  const auto c = s.level_for_length({1, 1}, target, s.vmax() + 1e-4);
  REQUIRE(c.has_value());
  CHECK(*c == doctest::Approx(3.0).epsilon(1e-8));
  CHECK_FALSE(s.level_for_length({1, 1}, 1e-3, s.vmax() + 1e-4).has_value());
}

TEST_CASE("minimal orbits pass the quality checks") {
  const Potential v = Potential::preset("egg");
  for (const HomologyClass c : {HomologyClass{1, 0}, HomologyClass{1, 1}, HomologyClass{2, 1}}) {
    const PeriodicOrbit o = minimal_orbit(v, 3.0, c);
    const OrbitQuality q = orbit_quality(v, o);
    CHECK(q.energy_error <= 1e-2 * 3.0);
    CHECK(q.el_residual <= 1e-2 * q.el_scale);
    CHECK_FALSE(q.self_intersects);
    CHECK(q.ok(3.0, 1.0 / 256));
    CHECK(o.action == doctest::Approx(stable_norm(v, 3.0, c).length).epsilon(1e-9));
    CHECK(norm(o.rotation - c.vec() / o.period) <= 1e-12);
  }
}

TEST_CASE("reversed orbit closes with the opposite class") {
  const PeriodicOrbit o = minimal_orbit(Potential::preset("egg"), 3.0, {1, 1});
  const PeriodicOrbit r = o.reversed();
  CHECK(r.cls == HomologyClass{-1, -1});
  CHECK(norm(r.points.front() - o.points.front()) == 0.0);
  CHECK(norm(r.points[1] - (o.points.back() - o.shift())) <= 1e-14);
  CHECK(r.period == o.period);
}

TEST_CASE("uniform time samples conserve energy") {
  const Potential v = Potential::preset("cos2");
  const PeriodicOrbit o = minimal_orbit(v, 2.5, {1, 1});
  std::vector<Vec2> vel;
  const auto x = sample_in_time(v, o, 128, &vel);
  REQUIRE(x.size() == 128);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(0.5 * norm2(vel[i]) + v.eval(x[i]) - 2.5) <= 2.5e-2);
}

TEST_CASE("extreme orbits of a foliated direction") {
  StableNormSolver s(Potential::preset("cos2"));
  const Vec2 p{0.0, oracle::action_cos(1.0, 2.0)};
  const ExtremeOrbits e = extreme_orbits(s, p, {0, 1}, 2.0);
  CHECK(e.degenerate_family);
  CHECK(e.a.cls == e.b.cls);
}
