#include <cmath>
#include <random>

#include "doctest.h"
#include "effham/geometry.hpp"
#include "oracles.hpp"

using namespace effham;

TEST_CASE("Bezout partners") {
  for (const HomologyClass c : {HomologyClass{1, 0}, HomologyClass{0, 1}, HomologyClass{3, 2}, HomologyClass{5, -3}}) {
    const Vec2 b = bezout_partner(c);
    CHECK(c.m * b.y - c.n * b.x == doctest::Approx(1.0));
    CHECK(std::abs(dot(b, c.vec())) <= 0.5 * norm2(c.vec()) + 1e-12);
  }
}

TEST_CASE("free level set is a convex polygon around the circle") {
  StableNormSolver s(Potential::preset("zero"));
  const LevelSetPolygon poly = level_polygon(s, 2.0, 3);
  CHECK(poly.convex());
  // Outside the circle of radius 2, inside the circumscribed polygon.
  for (const Vec2& v : poly.vertices) {
    CHECK(norm(v) >= 2.0 - 1e-9);
    CHECK(norm(v) <= 2.0 / std::cos(oracle::pi / 8) + 1e-9);
  }
  CHECK(poly.contains({1.9, 0.0}));
  CHECK_FALSE(poly.contains({2.1, 2.1}));
}

TEST_CASE("strictly convex level sets have no edges") {
  StableNormSolver s(Potential::preset("zero"));
  const LevelSetPolygon poly = level_polygon(s, 2.0, 3);
  const EdgeReport rep = detect_edges(s, poly);
  CHECK(rep.edges.empty());
}

TEST_CASE("cos2 edge with normal (1,0) has length 8/pi") {
  StableNormSolver s(Potential::preset("cos2"));
  const LevelSetPolygon poly = level_polygon(s, 2.0, 4);
  CHECK(poly.convex());
  EdgeOptions o;
  o.only = {{1, 0}};
  const EdgeReport rep = detect_edges(s, poly, o);
  REQUIRE(rep.edges.size() == 2);  // (1,0) and its mirror
  for (const auto& e : rep.edges) CHECK(e.length == doctest::Approx(8.0 / oracle::pi).epsilon(1e-3));
}

TEST_CASE("foliated direction is not an edge") {
  StableNormSolver s(Potential::preset("cos2"));
  const LevelSetPolygon poly = level_polygon(s, 2.0, 4);
  EdgeOptions o;
  o.only = {{0, 1}};
  CHECK(detect_edges(s, poly, o).edges.empty());
}

TEST_CASE("polygon from a table keeps every facet on its supporting line") {
  StableNormSolver s(Potential::preset("egg"));
  const StableNormTable t = tabulate_stable_norms(s, 3.0, 2);
  const LevelSetPolygon poly = polygon_from_table(t, 2);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const HomologyClass& c = poly.facet_classes[i];
    const Vec2 a = poly.vertices[i], b = poly.vertices[(i + 1) % poly.size()];
    CHECK(dot(a, c.vec()) == doctest::Approx(t.entries.at(c).length).epsilon(1e-10));
    CHECK(dot(b, c.vec()) == doctest::Approx(t.entries.at(c).length).epsilon(1e-10));
  }
}

TEST_CASE("subdifferential in the free case is {p}") {
  StableNormSolver s(Potential::preset("zero"));
  const Subdifferential d = normal_and_subdifferential(s, {1.0, 0.0}, 3);
  CHECK(norm(d.q - Vec2{1, 0}) <= 1e-12);
  CHECK(d.a == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(d.b == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(d.c == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("fit_patch: exact on a one-dimensional convex function, fails on |p|^2/2") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Vec2 center{1.0, 0.5}, q{0.0, 1.0};
  const double r = 0.5;
  std::vector<Vec2> pts;
  std::vector<double> one_d, free;
  while (pts.size() < 200) {
    const Vec2 p = center + r * Vec2{u(rng), u(rng)};
    if (norm(p - center) > r) continue;
    pts.push_back(p);
    one_d.push_back(std::max(0.0, p.y - 0.5) + 0.3 * p.y);
    free.push_back(0.5 * norm2(p));
  }
  CHECK(fit_patch(center, r, q, pts, one_d).residual <= 1e-2);
  CHECK(fit_patch(center, r, q, pts, free).residual >= 0.1 * r * r);
}
