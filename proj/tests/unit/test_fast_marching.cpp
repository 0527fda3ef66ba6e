#include <cmath>
#include <random>

#include "doctest.h"
#include "effham/barrier.hpp"
#include "effham/errors.hpp"
#include "effham/fast_marching.hpp"

using namespace effham;

TEST_CASE("constant metric distance") {
  // sqrt(2 c) = 2 per unit length at c = 2.
  const Potential z = Potential::preset("zero");
  const CoverGrid w = distance_field(z, 2.0, Vec2{0, 0}, {{-0.5, -0.5}, {1.5, 0.5}}, 64);
  CHECK(w.interpolate({1.0, 0.0}) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(w.interpolate({0.0, 0.0}) == doctest::Approx(0.0).scale(1.0));
  // Diagonal directions carry the first-order error of the scheme.
  CHECK(w.interpolate({0.4, 0.4}) == doctest::Approx(2.0 * std::sqrt(0.32)).epsilon(0.05));
}

TEST_CASE("polished distance is exact in the free case and vanishes at the source") {
  const Potential z = Potential::preset("zero");
  CHECK(mane_h(z, 2.0, {0, 0}, {1, 0}) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(mane_h(z, 2.0, {0.3, 0.2}, {0.3, 0.2}) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("triangle inequality on random triples") {
  const Potential v = Potential::preset("egg");
  const double c = 3.0, cell = 1.0 / 32;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double rate = std::sqrt(2.0 * (c - v.extrema().vmin));
  for (int k = 0; k < 6; ++k) {
    const Vec2 x{u(rng), u(rng)}, y{u(rng), u(rng)}, z{u(rng), u(rng)};
    const double xz = mane_h(v, c, x, z), xy = mane_h(v, c, x, y), yz = mane_h(v, c, y, z);
    CHECK(xz <= xy + yz + 2 * cell * rate);
  }
}

TEST_CASE("degenerate levels are refused") {
  const Potential v = Potential::preset("cos1");
  CHECK_THROWS_AS(distance_field(v, 1.0, Vec2{0, 0}, {{-1, -1}, {1, 1}}, 16), DegenerateMetricError);
}

TEST_CASE("backtracked path ends at the target and starts at the source") {
  const Potential v = Potential::preset("cos2");
  const Vec2 s{0, 0}, t{1.0, 0.7};
  const CoverGrid w = distance_field(v, 2.5, s, {{-0.5, -0.5}, {1.5, 1.2}}, 64);
  const auto path = backtrack(w, t, {s});
  REQUIRE(path.size() >= 2);
  CHECK(norm(path.back() - t) <= 1e-12);
  CHECK(norm(path.front() - s) <= 2.0 / 64);
}
