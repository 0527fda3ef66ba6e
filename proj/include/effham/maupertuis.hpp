#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "effham/curve.hpp"
#include "effham/potential.hpp"
#include "effham/vec2.hpp"

namespace effham {

/// Irreducible integer class (m, n).
struct HomologyClass {
  int m = 1;
  int n = 0;

  HomologyClass() = default;
  /// Throws InvalidArgument unless (m, n) != 0 and gcd(|m|, |n|) = 1.
  HomologyClass(int m_, int n_);

  Vec2 vec() const { return {double(m), double(n)}; }
  double length() const { return std::hypot(double(m), double(n)); }
  HomologyClass operator-() const { return {-m, -n}; }
  /// Representative of {l, -l} with m > 0, or m = 0 and n > 0.
  HomologyClass canonical() const;
  /// The translation (-n, m) used for neighbouring copies of an orbit.
  Vec2 transverse() const { return {double(-n), double(m)}; }

  friend bool operator==(const HomologyClass&, const HomologyClass&) = default;
  friend auto operator<=>(const HomologyClass&, const HomologyClass&) = default;
};

/// One representative per pair {l, -l} with max(|m|, |n|) <= lmax, sorted by angle.
std::vector<HomologyClass> irreducible_classes(int lmax);

struct MetricOptions {
  int grid = 256;          // fast-marching nodes per unit cell
  int starts = 64;         // base offsets in the multi-start search
  int coarse_nodes = 16;   // curve nodes per unit length during the search
  int fine_nodes = 64;     // curve nodes per unit length for polishing
  int candidates = 3;      // search results carried into polishing
  double margin = 1e-4;    // c must exceed max V by this much
};

struct StableNormResult {
  HomologyClass cls;
  double c = 0.0;
  double length = 0.0;  // extrapolated minimal Maupertuis length
  double period = 0.0;  // d length / d c
  Vec2 base;            // first curve node, reduced to [0,1)^2
  std::vector<Vec2> curve;
};

/// Stable norms with per-class caching of minimizing curves, so that repeated
/// evaluations at nearby levels warm-start from earlier minimizers.
/// Not thread-safe; use one solver per worker.
class StableNormSolver {
 public:
  StableNormSolver(Potential pot, MetricOptions opts = {});

  const Potential& potential() const { return pot_; }
  const MetricOptions& options() const { return opts_; }
  double vmax() const { return ext_.vmax; }
  double vmin() const { return ext_.vmin; }
  const Extrema& extrema() const { return ext_; }

  /// Global multi-start search followed by polishing.
  StableNormResult evaluate(const HomologyClass& cls, double c);
  /// Polishes the cached candidates of this class at c; searches if there are none.
  StableNormResult track(const HomologyClass& cls, double c);

  /// Local minimizer relaxed from the straight line of class cls through `through`.
  StableNormResult relax_from(const HomologyClass& cls, double c, const Vec2& through);

  /// Every relaxed multi-start minimizer at level c, polished, unsorted.
  std::vector<StableNormResult> all_minimizers(const HomologyClass& cls, double c);

  /// Smallest c >= max V + margin with length(c) >= target; nullopt when already
  /// satisfied at the margin. Newton on the concave map c -> length(c).
  std::optional<double> level_for_length(const HomologyClass& cls, double target, double c_start);

  int evaluations() const { return evaluations_; }

 private:
  void require_level(double c) const;
  StableNormResult finish(const HomologyClass& cls, double c, std::vector<Vec2> curve, const CurveStats& st) const;

  Potential pot_;
  MetricOptions opts_;
  Extrema ext_;
  std::map<HomologyClass, std::vector<std::vector<Vec2>>> cache_;
  std::map<HomologyClass, double> floor_length_;  // length at max V + margin
  int evaluations_ = 0;
};

/// Free-function form: min over base points of d_c(x, x + (m, n)).
StableNormResult stable_norm(const Potential& pot, double c, const HomologyClass& cls, const MetricOptions& opts = {});

struct StableNormEntry {
  double length = 0.0;
  Vec2 base;
};

/// Stable norms at one level; both l and -l are stored.
struct StableNormTable {
  double c = 0.0;
  std::map<HomologyClass, StableNormEntry> entries;

  void write_csv(const std::filesystem::path& path) const;
};
StableNormTable tabulate_stable_norms(StableNormSolver& solver, double c, int lmax);

/// Closed minimizing curve lifted to the plane, with mechanical-time data.
struct PeriodicOrbit {
  std::vector<Vec2> points;  // nodes; closes with points[0] + cls
  HomologyClass cls;
  double c = 0.0;
  double period = 0.0;
  double action = 0.0;  // equals the Maupertuis length of one period
  Vec2 rotation;        // cls / period

  Vec2 shift() const { return cls.vec(); }
  /// Copy translated by an integer vector.
  PeriodicOrbit translated(const Vec2& k) const;
  /// The same curve traversed backwards, of class -cls.
  PeriodicOrbit reversed() const;
};

PeriodicOrbit make_orbit(const StableNormResult& r);

struct OrbitQuality {
  double energy_error = 0.0;    // max |1/2 |x'|^2 + V - c|
  double el_residual = 0.0;     // max |x'' + DV| on uniform time samples
  double el_scale = 0.0;        // max |DV| over the torus
  double displacement_error = 0.0;
  bool self_intersects = false;
  bool ok(double c, double grid_h) const;
};

/// Energy, Euler-Lagrange, displacement and torus-embedding diagnostics.
OrbitQuality orbit_quality(const Potential& pot, const PeriodicOrbit& orbit, int samples_per_period = 256);

/// Samples the orbit at uniform mechanical time via a periodic cubic spline.
std::vector<Vec2> sample_in_time(const Potential& pot, const PeriodicOrbit& orbit, int samples,
                                 std::vector<Vec2>* velocity = nullptr);

/// Minimal periodic orbit of class cls at energy c.
PeriodicOrbit minimal_orbit(const Potential& pot, double c, const HomologyClass& cls, const MetricOptions& opts = {});

struct DualOptions {
  int lmax = 8;
  double margin = 1e-4;
  double tol = 1e-10;  // Newton step size at which a class level is accepted
};

struct DualResult {
  double hbar = 0.0;
  std::optional<HomologyClass> supporting;  // none on the flat branch
  int classes_solved = 0;
};

/// H-bar(p) as the least c with p.l <= length_c(l) for every tabulated class.
DualResult hbar_dual(StableNormSolver& solver, const Vec2& p, const DualOptions& opts = {});
DualResult hbar_dual(const Potential& pot, const Vec2& p, const DualOptions& opts = {}, const MetricOptions& mopts = {});

struct ExtremeOrbits {
  PeriodicOrbit a;
  PeriodicOrbit b;
  bool identical = false;
  bool degenerate_family = false;  // a continuum of minimizers was found
  std::string selection;           // how the pair was chosen
  std::vector<double> epsilons;    // the approach sequence used
};

/// Two extreme minimizers of the supporting class at hbar(p), as limits of
/// minimizers at hbar(p) +- eps.
ExtremeOrbits extreme_orbits(StableNormSolver& solver, const Vec2& p, const HomologyClass& cls, double c);

/// Orbits as CSV polylines: orbit,index,x,y.
void write_orbits_csv(const std::filesystem::path& path, const std::vector<PeriodicOrbit>& orbits);

}  // namespace effham
