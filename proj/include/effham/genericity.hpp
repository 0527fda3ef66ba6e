#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "effham/barrier.hpp"
#include "effham/geometry.hpp"

namespace effham {

struct ProbeOptions {
  int lmax = 8;
  double tau_tol = 1e-3;  // tau above which the barrier route calls a point linear
  EdgeOptions edges;
  BarrierOptions barrier;
};

struct MembershipVerdict {
  double c = 0.0;
  Vec2 p;                 // point of S_c with normal q
  bool on_facet = false;  // false when q lies in a vertex's normal cone
  bool is_linear = false;
  std::optional<EdgeRecord> edge;
  double d_u = 0.0;       // d_plus + d_minus
  double tau_plus = 0.0, tau_minus = 0.0;
  bool routes_agree = true;  // edge found exactly when tau_plus + tau_minus > tau_tol
};

struct MembershipProbe {
  HomologyClass cls;
  Vec2 q;
  double r = 0.0;
  std::vector<double> c_list;
  std::vector<double> skipped;  // requested levels below max V + r
  std::vector<MembershipVerdict> verdicts;

  nlohmann::json to_json() const;
};

/// Tests at each level whether the point of S_c with normal q lies on an edge,
/// by Bezout refinement of the polygon and by the barrier route.
MembershipProbe probe_membership(const Potential& pot, const HomologyClass& cls, double r,
                                 const std::vector<double>& levels, const ProbeOptions& opts = {},
                                 const MetricOptions& mopts = {});

struct BumpSpec {
  Vec2 center{0.5, 0.5};
  double radius = 0.1;
  double depth = 0.2;
};

struct ExperimentOptions {
  HomologyClass cls{0, 1};
  double c0 = 2.0;
  BumpSpec bump;
  int cell_grid = 128;
  int lmax = 8;
  EdgeOptions edges{0.01, {8, 16, 32, 64}, 0.2, {}};
  BarrierOptions barrier;
  MetricOptions metric;
};

struct ExperimentSide {
  double hbar_pde = 0.0;
  double hbar_dual = 0.0;
  double pde_residual = 0.0;
  std::optional<EdgeRecord> edge;  // edge of normal q through p0, if any
  FlatCondition flat;
  double d_u = 0.0;                // d_plus + d_minus
};

struct BumpExperiment {
  Potential base, perturbed;
  HomologyClass cls;
  Vec2 q, p0;
  double c0 = 0.0;
  double t_star = 0.0;  // length_c0(cls) on the base
  BumpSpec bump;
  ExperimentSide before, after;
  PeriodicOrbit xi_alpha, xi_beta;
  std::string orbit_selection;
  double orbit_clearance = 0.0;  // distance from the bump ball to the extreme orbits
  double line_margin = 0.0;      // length of the line through the bump center minus t_star, after
  double edge_gap = 0.0;         // |tau_plus + tau_minus - edge length| / edge length, after

  nlohmann::json to_json() const;
  void write_json(const std::filesystem::path& path) const;
};

/// Distance from the closed ball to the orbit on the torus (negative when they meet).
double ball_clearance(const PeriodicOrbit& orbit, const Vec2& center, double radius);

/// Perturbs a foliated base by a bump away from the extreme orbits and compares
/// H-bar, edges and barriers at p0 before and after. Throws InvalidArgument when the
/// bump ball comes closer than its radius to an extreme orbit.
BumpExperiment run_bump_experiment(const Potential& base, const ExperimentOptions& opts = {});

struct DepthPoint {
  double depth = 0.0;
  double d_u = 0.0;
  double hbar_pde = 0.0;
  double hbar_dual = 0.0;
};

struct DepthSweep {
  double reference_hbar = 0.0;  // base H-bar at p0
  std::vector<DepthPoint> points;
  bool monotone = true;         // d_u non-decreasing in depth
  double max_hbar_change = 0.0;

  nlohmann::json to_json() const;
};

/// Barrier across the bump column and H-bar at p0 for each depth, at a fixed center and radius.
DepthSweep depth_sweep(const Potential& base, const std::vector<double>& depths, const ExperimentOptions& opts = {});

}  // namespace effham
