#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "effham/cell_pde.hpp"
#include "effham/errors.hpp"
#include "effham/maupertuis.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace effham;

TEST_CASE("free case is exact") {
  const Potential z = Potential::preset("zero");
  for (const Vec2 p : {Vec2{1.0, 0.0}, Vec2{-1.5, 2.0}, Vec2{0.0, 0.0}}) {
    const Corrector c = solve_cell(z, p, 32, 32);
    CHECK(c.hbar == doctest::Approx(0.5 * norm2(p)).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("minimum value is max V") {
  const Corrector c = solve_cell(Potential::preset("cos1"), {0.0, 0.0}, 64, 64);
  CHECK(c.hbar == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("one-dimensional profile against quadrature") {
  const Potential cos1 = Potential::preset("cos1");
  for (const Vec2 p : {Vec2{2.0, 0.3}, Vec2{0.5, 0.3}, Vec2{1.6, -1.0}}) {
    const Corrector c = solve_cell(cos1, p, 64, 64);
    const double exact = oracle::hbar_cos(1.0, p.x) + 0.5 * p.y * p.y;
    CHECK(std::abs(c.hbar - exact) <= 5e-3);
  }
}

TEST_CASE("accepted solves carry a small residual and a tight bracket") {
  CellOptions o;
  const Corrector c = solve_cell(Potential::preset("egg"), {1.0, 0.5}, 64, 64, o);
  CHECK(c.residual_sup <= o.residual_tol);
  CHECK(c.bracket_hi - c.bracket_lo <= 2 * o.residual_tol);
  CHECK(c.bracket_lo <= c.hbar);
  CHECK(c.hbar <= c.bracket_hi);
  CHECK(std::abs(c.v.mean()) <= 1e-12);
}

TEST_CASE("quadratic growth sandwich") {
  const Potential v = Potential::random(7, 3);
  const Extrema e = v.extrema();
  for (const Vec2 p : {Vec2{0.3, 0.2}, Vec2{2.0, -1.0}, Vec2{-0.7, 1.4}}) {
    const double h = solve_cell(v, p, 48, 48).hbar;
    CHECK(h >= 0.5 * norm2(p) + e.vmin - 1e-3);
    CHECK(h <= 0.5 * norm2(p) + e.vmax + 1e-3);
  }
}

TEST_CASE("Lax-Friedrichs option away from the flat part") {
  CellOptions lf;
  lf.scheme = Scheme::LaxFriedrichs;
  const Potential cos1 = Potential::preset("cos1");
  const double exact = oracle::hbar_cos(1.0, 2.0) + 0.5 * 0.09;
  const Corrector c = solve_cell(cos1, {2.0, 0.3}, 64, 64, lf);
  CHECK(std::abs(c.hbar - exact) <= 5e-3);
}

TEST_CASE("inf-max bound lies above the solution") {
  const Potential v = Potential::preset("sep");
  const Vec2 p{1.5, 0.5};
  const Corrector c = solve_cell(v, p, 64, 64);
  CHECK(infmax_bound(v, p) >= c.hbar - 1e-9);
  CHECK(infmax_bound(v, p, &c) >= c.hbar - 1e-3);
  CHECK(infmax_bound(v, p, &c) <= infmax_bound(v, p) + 1e-9);
}

TEST_CASE("separable oracle matches two quadratures") {
  const auto h = separable_oracle(Potential::preset("sep"), {1.5, 0.5});
  REQUIRE(h.has_value());
  CHECK(*h == doctest::Approx(oracle::hbar_cos(1.0, 1.5) + oracle::hbar_cos(0.5, 0.5)).epsilon(1e-8));
  CHECK_FALSE(separable_oracle(Potential::random(3, 3), {1.0, 1.0}).has_value());
}

TEST_CASE("corrector snapshot round trip") {
  const Corrector c = solve_cell(Potential::preset("egg"), {0.5, 0.5}, 32, 48);
  const auto path = std::filesystem::temp_directory_path() / "effham_unit_snapshot.bin";
  c.v.write_binary(path);
  const ScalarField back = ScalarField::read_binary(path);
  std::filesystem::remove(path);
  REQUIRE(back.nx() == 32);
  REQUIRE(back.ny() == 48);
  for (std::size_t k = 0; k < back.size(); ++k) CHECK(back.values()[k] == c.v.values()[k]);
}

TEST_CASE("extrapolated estimate") {
  // V(x) = cos 2 pi (x1 + 2 x2); with s = x1 + 2 x2 the cell problem reduces to the
  // 1d one at P = p.(1,2)/sqrt 5. Both grids are already accurate here.
  const Potential v = Potential::from_json(nlohmann::json::parse(R"({"modes":[[1,2,1.0,0.0]]})"));
  const Vec2 p = (1.8 / std::sqrt(5.0)) * Vec2{1, 2};
  const PdeEstimate e = hbar_pde(v, p, 64, 64);
  CHECK(e.hbar == doctest::Approx(oracle::hbar_cos(1.0, 1.8)).epsilon(1e-4));
  CHECK(e.hbar == 2.0 * e.fine - e.coarse);
  CHECK(e.corrector.hbar == e.fine);
  CHECK_THROWS_AS(hbar_pde(v, p, 48, 64), InvalidArgument);

  // Random potential with a (1,2) supporting orbit: the first-order error dominates
  // and extrapolation removes most of it (dual as reference).
  const Potential r = Potential::from_source("random:20240601:3");
  const Vec2 q{-0.2375, -1.6319};
  StableNormSolver solver(r);
  DualOptions d;
  d.lmax = 4;
  const double ref = hbar_dual(solver, q, d).hbar;
  const PdeEstimate f = hbar_pde(r, q, 128, 128);
  CHECK(std::abs(f.hbar - ref) < 0.5 * std::abs(f.fine - ref));
}
