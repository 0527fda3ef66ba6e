#pragma once

#include <cmath>
#include <ostream>

namespace effham {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return a *= (1.0 / s); }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Vec2& v) {
    return os << '(' << v.x << ", " << v.y << ')';
  }
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
constexpr double norm2(const Vec2& a) { return dot(a, a); }
/// Counter-clockwise rotation by a quarter turn.
constexpr Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }

/// Symmetric 2x2 matrix, used for Hessians.
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  constexpr Vec2 operator*(const Vec2& v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
  constexpr double quad(const Vec2& u, const Vec2& v) const { return dot(u, (*this) * v); }
};

/// Reduce a point to the fundamental domain [0,1)^2.
inline Vec2 wrap_unit(const Vec2& p) {
  Vec2 r{p.x - std::floor(p.x), p.y - std::floor(p.y)};
  if (r.x >= 1.0) r.x -= 1.0;
  if (r.y >= 1.0) r.y -= 1.0;
  return r;
}

/// Shortest periodic image of a displacement, components in [-1/2, 1/2].
inline Vec2 min_image(const Vec2& d) { return {d.x - std::round(d.x), d.y - std::round(d.y)}; }

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

}  // namespace effham
