#pragma once

#include <utility>
#include <vector>

#include "effham/potential.hpp"
#include "effham/vec2.hpp"

namespace effham {

/// Axis-aligned rectangle of the universal cover.
struct CoverRect {
  Vec2 lo;
  Vec2 hi;
};

/// Node values on a uniform lattice covering a CoverRect; not periodic.
class CoverGrid {
 public:
  CoverGrid() = default;
  CoverGrid(const CoverRect& rect, int per_unit);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  Vec2 origin() const { return origin_; }
  Vec2 node(int i, int j) const { return {origin_.x + i * h_, origin_.y + j * h_}; }
  bool contains(const Vec2& x) const;

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(j) * nx_ + i]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(j) * nx_ + i]; }

  /// Bilinear interpolation, clamped to the lattice.
  double interpolate(const Vec2& x) const;
  /// Gradient of the bilinear interpolant.
  Vec2 gradient(const Vec2& x) const;

 private:
  Vec2 origin_;
  double h_ = 0.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> data_;
};

/// Seeds for multi-source marching: value at the seed point.
using Seed = std::pair<Vec2, double>;

/// First-order fast marching for |Dw| = sqrt(2 (c - V)) with w = value at each seed.
/// Throws DegenerateMetricError when c <= max V + margin.
CoverGrid distance_field(const Potential& pot, double c, const std::vector<Seed>& seeds, const CoverRect& rect,
                         int per_unit, double margin = 1e-4);
CoverGrid distance_field(const Potential& pot, double c, const Vec2& source, const CoverRect& rect, int per_unit,
                         double margin = 1e-4);

/// Steepest descent through w from target until it reaches a seed region.
/// Returns the path from the seed end to target. Throws on a flat gradient.
std::vector<Vec2> backtrack(const CoverGrid& w, const Vec2& target, const std::vector<Vec2>& sources);

}  // namespace effham
