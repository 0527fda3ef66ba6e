#pragma once

// Reference values from closed forms and plain quadrature, independent of the library.

#include <algorithm>
#include <cmath>
#include <functional>

namespace oracle {

inline constexpr double pi = 3.14159265358979323846;

inline double simpson(const std::function<double(double)>& f, double a = 0.0, double b = 1.0, int n = 4000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Maupertuis length of one period of the 1d profile a cos(2 pi s) at energy c.
inline double action_cos(double a, double c) {
  return simpson([&](double s) { return std::sqrt(std::max(0.0, 2.0 * (c - a * std::cos(2 * pi * s)))); });
}

/// H-bar of 1/2 p^2 + a cos(2 pi s) in one dimension.
inline double hbar_cos(double a, double p) {
  const double top = std::abs(a);
  p = std::abs(p);
  if (p <= action_cos(a, top)) return top;
  double lo = top, hi = top + 0.5 * p * p + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (action_cos(a, mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
