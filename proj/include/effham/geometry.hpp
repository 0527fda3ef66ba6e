#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "effham/maupertuis.hpp"
#include "effham/vec2.hpp"

namespace effham {

/// Convex polygon {p : p.l <= length_c(l) for all tabulated l}, counter-clockwise.
/// Facet i runs from vertices[i] to vertices[i+1] and lies on the line of facet_classes[i].
struct LevelSetPolygon {
  double c = 0.0;
  int lmax = 0;
  std::vector<Vec2> vertices;
  std::vector<HomologyClass> facet_classes;
  std::vector<double> facet_offsets;  // length_c of each facet class
  bool outer_flat_approximation = false;
  double half_margin_change = 0.0;  // flat sets only: support change when the margin is halved

  std::size_t size() const { return vertices.size(); }
  double facet_length(std::size_t i) const;
  /// max over vertices of v.u, for a unit vector u.
  double support(const Vec2& u) const;
  bool contains(const Vec2& p, double tol = 1e-12) const;
  bool convex(double tol = 1e-12) const;
  /// Facet whose class is cls, if present.
  std::optional<std::size_t> facet_of(const HomologyClass& cls) const;

  void write_csv(const std::filesystem::path& path) const;
};

/// Intersection of the half-planes of a stable-norm table (both signs of each class).
LevelSetPolygon polygon_from_table(const StableNormTable& table, int lmax);

/// Dual polygon of the level set {H-bar <= c}. Throws DegenerateMetricError near max V.
LevelSetPolygon level_polygon(StableNormSolver& solver, double c, int lmax);

/// Outer approximation of the flat set at c = max V + margin, compared against the
/// polygon at half the margin.
LevelSetPolygon flat_set(StableNormSolver& solver, int lmax);

struct EdgeRecord {
  Vec2 p, p2;  // endpoints
  Vec2 q;      // outward unit normal, cls / |cls|
  HomologyClass cls;
  double length = 0.0;           // extrapolated edge length
  double polygon_length = 0.0;   // facet length in the truncated polygon
  std::vector<int> levels;       // Bezout levels L used in the refinement
  std::vector<double> level_lengths;  // facet length with neighbours L cls +- b
  double previous_estimate = 0.0;      // extrapolation one level coarser
};

struct EdgeReport {
  std::vector<EdgeRecord> edges;
  std::vector<EdgeRecord> unresolved;  // long facets that shrink under refinement
  void write_csv(const std::filesystem::path& path) const;
};

struct EdgeOptions {
  double edge_tol = 0.05;
  std::vector<int> levels{8, 16, 32, 64};
  double stability = 0.2;
  std::vector<HomologyClass> only;  // restrict the search to these classes when nonempty
};

/// Bezout partner b of a class: cross(cls, b) = 1 with the smallest |b|.
Vec2 bezout_partner(const HomologyClass& cls);

/// Length of the facet of cls when its neighbours are the classes L cls +- b.
double refined_facet_length(StableNormSolver& solver, double c, const HomologyClass& cls, int level,
                            Vec2* lo = nullptr, Vec2* hi = nullptr);

/// Edges of the polygon confirmed by Bezout refinement.
EdgeReport detect_edges(StableNormSolver& solver, const LevelSetPolygon& poly, const EdgeOptions& opts = {});

struct Subdifferential {
  Vec2 q;           // unit outward normal
  double a = 0.0;   // the subdifferential is {lambda q : a <= lambda <= b}
  double b = 0.0;
  double c = 0.0;   // level through p
  std::optional<HomologyClass> cls;
  bool vertex = false;  // p sits on a corner of the truncated polygon
  Vec2 cone_lo, cone_hi;  // normal cone at a vertex
  double rotation_a = 0.0, rotation_b = 0.0;  // |rotation| of the extreme orbits
};

/// Normal and subdifferential interval at p from one-sided difference quotients of
/// c -> length_c(cls), cross-checked against extreme-orbit rotation vectors.
Subdifferential normal_and_subdifferential(StableNormSolver& solver, const Vec2& p, int lmax = 8,
                                           double eps = 2e-3, bool with_orbits = true);

struct PatchFit {
  Vec2 center;
  double radius = 0.0;
  Vec2 q;
  std::vector<double> knots;   // t-values
  std::vector<double> values;  // f at the knots
  double residual = 0.0;       // max |H-bar - f(q.p)| over the samples
  double rms = 0.0;

  double operator()(double t) const;
};

/// Least-squares convex piecewise-linear fit of values against t = q.p over 32 bins.
PatchFit fit_patch(const Vec2& center, double radius, const Vec2& q, const std::vector<Vec2>& samples,
                   const std::vector<double>& values, int bins = 32);

}  // namespace effham
