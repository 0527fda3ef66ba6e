#include <cmath>
#include <random>

#include "doctest.h"
#include "effham/curve.hpp"

using namespace effham;

TEST_CASE("tridiagonal solves against the product") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 9;
  for (const bool cyclic : {false, true}) {
    std::vector<double> a(n), b(n), c(n), d(n);
    for (int i = 0; i < n; ++i) {
      a[i] = u(rng);
      c[i] = u(rng);
      b[i] = 4.0 + u(rng);
      d[i] = u(rng);
    }
    if (!cyclic) a[0] = c[n - 1] = 0.0;
    const auto x = solve_tridiagonal(a, b, c, d, cyclic);
    for (int i = 0; i < n; ++i) {
      const double lhs = a[i] * x[(i + n - 1) % n] + b[i] * x[i] + c[i] * x[(i + 1) % n];
      CHECK(lhs == doctest::Approx(d[i]).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("straight closed line in a constant metric") {
  const Potential z = Potential::preset("zero");
  const ConformalMetric m(z, 2.0);
  std::vector<Vec2> x;
  for (int i = 0; i < 20; ++i) x.push_back({0.3 + i / 20.0, 0.1 + i / 20.0});
  CHECK(closed_length(m, x, {1, 1}) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("relaxation moves a closed curve onto the ridge") {
  // For cos2 the shortest horizontal loop runs along x2 = 0, where V is largest.
  const Potential v = Potential::preset("cos2");
  const ConformalMetric m(v, 2.0);
  std::vector<Vec2> x;
  for (int i = 0; i < 32; ++i) x.push_back({i / 32.0, 0.2 + 0.05 * std::sin(2 * 3.14159265358979 * i / 32.0)});
  const CurveStats st = polish_closed(m, x, {1, 0}, 64);
  CHECK(st.length == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  for (const Vec2& p : x) CHECK(std::abs(p.y - std::round(p.y)) <= 1e-6);
}

TEST_CASE("open resampling keeps endpoints") {
  std::vector<Vec2> x{{0, 0}, {0.5, 0.1}, {1.0, 1.0}};
  resample_open(x, 17);
  REQUIRE(x.size() == 17);
  CHECK(norm(x.front()) == 0.0);
  CHECK(norm(x.back() - Vec2{1, 1}) <= 1e-15);
}
