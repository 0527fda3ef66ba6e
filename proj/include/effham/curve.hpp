#pragma once

#include <vector>

#include "effham/potential.hpp"
#include "effham/vec2.hpp"

namespace effham {

struct MetricJet {
  double g = 0.0;
  Vec2 dg;
  Sym2 hg;
};

/// Conformal factor g = sqrt(2 (c - V)) of the Maupertuis metric at energy c.
/// Points with V >= c report g = 0 from g() and are rejected by the relaxers.
class ConformalMetric {
 public:
  ConformalMetric(const Potential& pot, double c) : pot_(&pot), c_(c) {}

  double c() const { return c_; }
  const Potential& potential() const { return *pot_; }

  double g(const Vec2& x) const;
  MetricJet jet(const Vec2& x) const;

 private:
  const Potential* pot_;
  double c_;
};

/// Polyline conventions: a closed curve of class l stores nodes X[0..N-1] and closes
/// with X[N] = X[0] + l. An open curve stores both endpoints explicitly.
struct CurveStats {
  double length = 0.0;    // midpoint-rule Maupertuis length
  double period = 0.0;    // sum of |dx| / g, the mechanical travel time
  int iterations = 0;
  double gradient = 0.0;  // final max normal gradient component
};

double closed_length(const ConformalMetric& m, const std::vector<Vec2>& x, const Vec2& shift);
double closed_period(const ConformalMetric& m, const std::vector<Vec2>& x, const Vec2& shift);
double open_length(const ConformalMetric& m, const std::vector<Vec2>& x);

/// Damped Newton descent of the discrete length with nodes moving along their normals.
CurveStats relax_closed(const ConformalMetric& m, std::vector<Vec2>& x, const Vec2& shift, int max_iter,
                        double grad_tol = 1e-12);
CurveStats relax_open(const ConformalMetric& m, std::vector<Vec2>& x, int max_iter, double grad_tol = 1e-12);

/// Redistribute nodes uniformly in Euclidean arclength.
void resample_closed(std::vector<Vec2>& x, const Vec2& shift, int n);
void resample_open(std::vector<Vec2>& x, int n);

/// Relax at n and 2n nodes, resampling in between, and combine the two lengths
/// and periods by Richardson extrapolation for the second-order midpoint rule.
/// On return x holds the finer curve.
CurveStats polish_closed(const ConformalMetric& m, std::vector<Vec2>& x, const Vec2& shift, int n);
CurveStats polish_open(const ConformalMetric& m, std::vector<Vec2>& x, int n);

/// Solve a x[i-1] + b x[i] + c x[i+1] = r, indices cyclic when `cyclic` is set.
std::vector<double> solve_tridiagonal(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                                      std::vector<double> r, bool cyclic);

}  // namespace effham
