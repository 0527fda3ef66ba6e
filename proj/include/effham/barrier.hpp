#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "effham/cell_pde.hpp"
#include "effham/fast_marching.hpp"
#include "effham/maupertuis.hpp"

namespace effham {

struct BarrierOptions {
  int coarse_grid = 32;     // fast-marching nodes per unit for the initial geodesic
  int polish_nodes = 32;    // open-curve nodes per unit length
  int first_window = 3;     // periods in the first window; doubled each round
  int max_doublings = 6;
  int crossing_phases = 8;  // shadowing starts per window besides the fast-marching path
  double settle = 1e-3;     // change in the extrapolated barrier at which growth stops
  int glue_grid = 128;      // nodes per unit for glue_solution
  int glue_periods = 8;     // source periods behind the evaluation window
  double margin = 1e-4;
};

struct Geodesic {
  double length = 0.0;
  std::vector<Vec2> path;  // polished, from x to y
};

/// Maupertuis distance h(x, y) on the cover: fast-marching path, then length
/// minimization of the open curve with extrapolation in node density.
Geodesic mane_geodesic(const Potential& pot, double c, const Vec2& x, const Vec2& y, const BarrierOptions& opts = {});
double mane_h(const Potential& pot, double c, const Vec2& x, const Vec2& y, const BarrierOptions& opts = {});

struct SweepEntry {
  int window = 0;         // periods between the endpoints
  double objective = 0.0; // h(x, y + W l) - (u(y + W l) - u(x))
  double extrapolated = 0.0;
};

struct BarrierReport {
  PeriodicOrbit xi1, xi2;
  double c = 0.0;
  Vec2 p0;
  double d_u = 0.0;
  Vec2 argmin_x, argmin_y;
  std::string corrector_id;
  std::vector<SweepEntry> sweep;
  bool sweep_monotone = true;  // objective non-increasing as the window grows
  std::vector<Vec2> geodesic;  // minimizing path for the last window
};

/// Barrier d_u(xi1, xi2) for u = p0.x + v. The corrector may be null when xi2 is an
/// integer translate of xi1 (its contribution cancels). Orbits must have energy c.
BarrierReport barrier_du(const Potential& pot, const Vec2& p0, double c, const Corrector* corr,
                         const PeriodicOrbit& xi1, const PeriodicOrbit& xi2, const BarrierOptions& opts = {});

struct FlatCondition {
  HomologyClass cls;
  Vec2 p0;
  double c0 = 0.0;   // level whose facet of cls passes through p0
  double d_plus = 0.0, d_minus = 0.0;
  double tau_plus = 0.0, tau_minus = 0.0;
  double predicted_edge = 0.0;  // (tau_plus + tau_minus) |cls|
  PeriodicOrbit orbit;
  BarrierReport plus, minus;
};

/// d_u between a minimal orbit of cls and its neighbour translated by (-n, m), both ways.
FlatCondition check_flat_condition(StableNormSolver& solver, const Vec2& p0, const HomologyClass& cls,
                                   const BarrierOptions& opts = {});

struct AdditivityResult {
  double deviation = 0.0;
  std::vector<double> consecutive;  // d_u(L_k, L_k+1)
  std::vector<double> prefix;       // d_u(L_1, L_k), k >= 2
  std::vector<BarrierReport> reports;
};

/// max_k |d_u(L_1, L_k) - sum_{j<k} d_u(L_j, L_j+1)| over nested orbits L_1..L_k.
AdditivityResult additivity_check(const Potential& pot, const Vec2& p0, double c, const Corrector* corr,
                                  const std::vector<PeriodicOrbit>& orbits, const BarrierOptions& opts = {});

struct GlueReport {
  CoverGrid u_delta;
  double delta = 0.0;
  double residual = 0.0;          // sup of |1/2 |Du|^2 + V - c| between the orbits
  double mismatch_xi1 = 0.0;      // max |u_delta - u| on xi1
  double mismatch_xi2 = 0.0;      // max |u_delta - (u + delta)| on xi2
  double deviation_from_u = 0.0;  // max |u_delta - u| between the orbits
};

/// u_delta(x) = inf { g(y) + h(y, x) } with g = u on xi1 and u + delta on xi2,
/// evaluated on one period between the two orbits.
GlueReport glue_solution(const Potential& pot, const Vec2& p0, double c, const Corrector& corr,
                         const PeriodicOrbit& xi1, const PeriodicOrbit& xi2, double delta, double d_u,
                         const BarrierOptions& opts = {});

/// CSV row per report: orbit classes, c, p0, d_u, argmin.
void write_barrier_csv(const std::filesystem::path& path, const std::vector<BarrierReport>& reports);

}  // namespace effham
