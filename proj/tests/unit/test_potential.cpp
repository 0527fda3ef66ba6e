#include <cmath>
#include <random>

#include "doctest.h"
#include "effham/errors.hpp"
#include "effham/potential.hpp"
#include "oracles.hpp"

using namespace effham;

TEST_CASE("zero potential vanishes everywhere") {
  const Potential z = Potential::preset("zero");
  CHECK(z.is_zero());
  CHECK(z.eval({0.3, -7.2}) == 0.0);
  CHECK(norm(z.grad({0.1, 0.2})) == 0.0);
}

TEST_CASE("presets match their closed forms") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const Potential cos1 = Potential::preset("cos1"), cos2 = Potential::preset("cos2");
  const Potential egg = Potential::preset("egg"), sep = Potential::preset("sep");
  for (int k = 0; k < 50; ++k) {
    const Vec2 x{u(rng), u(rng)};
    const double c1 = std::cos(2 * oracle::pi * x.x), c2 = std::cos(2 * oracle::pi * x.y);
    CHECK(cos1.eval(x) == doctest::Approx(c1).epsilon(1e-12));
    CHECK(cos2.eval(x) == doctest::Approx(c2).epsilon(1e-12));
    CHECK(egg.eval(x) == doctest::Approx(c1 + c2).epsilon(1e-12));
    CHECK(sep.eval(x) == doctest::Approx(c1 + 0.5 * c2).epsilon(1e-12));
  }
}

TEST_CASE("bump lowers the potential by its depth at the center") {
  const Potential v0 = Potential::preset("cos2");
  const Vec2 c0{0.5, 0.5};
  const Potential v = v0.perturb_bump(c0, 0.1, 0.2);
  CHECK(v.eval(c0) == doctest::Approx(v0.eval(c0) - 0.2).epsilon(1e-14));
  // Periodic copies of the centre and points outside the ball.
  CHECK(v.eval(c0 + Vec2{1.0, -2.0}) == doctest::Approx(v0.eval(c0) - 0.2).epsilon(1e-12));
  CHECK(v.eval({0.5, 0.61}) == v0.eval({0.5, 0.61}));
  CHECK(v.eval({0.39, 0.5}) == v0.eval({0.39, 0.5}));
}

TEST_CASE("perturb_bump never raises the potential") {
  const Potential v0 = Potential::preset("egg");
  const Potential v = v0.perturb_bump({0.2, 0.7}, 0.15, 0.3);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const Vec2 x{u(rng), u(rng)};
    CHECK(v.eval(x) <= v0.eval(x));
  }
}

TEST_CASE("bump radius must stay below a quarter") {
  CHECK_THROWS_AS(Potential::preset("zero").perturb_bump({0.5, 0.5}, 0.3, 0.1), InvalidArgument);
  CHECK_THROWS_AS(Potential::preset("zero").perturb_bump({0.5, 0.5}, 0.1, -0.1), InvalidArgument);
}

TEST_CASE("analytic gradient agrees with central differences") {
  const Potential v = Potential::random(5, 4).perturb_bump({0.3, 0.3}, 0.2, 0.4);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double h = 1e-6;
  for (int k = 0; k < 200; ++k) {
    const Vec2 x{u(rng), u(rng)};
    const Vec2 g = v.grad(x);
    const double gx = (v.eval(x + Vec2{h, 0}) - v.eval(x - Vec2{h, 0})) / (2 * h);
    const double gy = (v.eval(x + Vec2{0, h}) - v.eval(x - Vec2{0, h})) / (2 * h);
    CHECK(g.x == doctest::Approx(gx).epsilon(1e-6).scale(1.0));
    CHECK(g.y == doctest::Approx(gy).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("extrema of the presets") {
  const Extrema e = Potential::preset("egg").extrema();
  CHECK(e.vmax == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(e.vmin == doctest::Approx(-2.0).epsilon(1e-12));
  const Extrema b = Potential::preset("cos2").perturb_bump({0.5, 0.5}, 0.1, 0.2).extrema();
  CHECK(b.vmin == doctest::Approx(-1.2).epsilon(1e-9));
}

TEST_CASE("JSON round trip and random presets") {
  const Potential v = Potential::random(42, 3).perturb_bump({0.1, 0.9}, 0.05, 0.2);
  CHECK(Potential::from_json(v.to_json()) == v);
  CHECK(Potential::preset("random:42:3") == Potential::random(42, 3));
  CHECK(Potential::random(42, 3).modes().size() == 3);
  CHECK_THROWS_AS(Potential::from_source("no-such-preset-or-file"), InvalidArgument);
}

TEST_CASE("separable split") {
  const auto parts = Potential::preset("sep").separate();
  REQUIRE(parts.has_value());
  CHECK(parts->first.eval({0.2, 0.9}) == doctest::Approx(std::cos(0.4 * oracle::pi)));
  CHECK(parts->second.eval({0.9, 0.2}) == doctest::Approx(0.5 * std::cos(0.4 * oracle::pi)));
  CHECK_FALSE(Potential::preset("cos2").perturb_bump({0.5, 0.5}, 0.1, 0.2).separate().has_value());
  CHECK(Potential::preset("cos2").independent_of(0));
  CHECK_FALSE(Potential::preset("cos2").independent_of(1));
}
