#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "effham/scalar_field.hpp"
#include "effham/vec2.hpp"

namespace effham {

/// a_cos cos(2 pi k.x) + a_sin sin(2 pi k.x)
struct FourierMode {
  int k1 = 0;
  int k2 = 0;
  double a_cos = 0.0;
  double a_sin = 0.0;
  friend bool operator==(const FourierMode&, const FourierMode&) = default;
};

/// -depth * phi(|x - center| / radius) with phi(r) = exp(1 - 1/(1 - r^2)) on r < 1.
struct Bump {
  Vec2 center;
  double radius = 0.1;
  double depth = 0.2;
  friend bool operator==(const Bump&, const Bump&) = default;
};

struct PotentialJet {
  double value = 0.0;
  Vec2 grad;
  Sym2 hess;
};

struct Extrema {
  double vmin = 0.0;
  double vmax = 0.0;
  Vec2 argmax;
  Vec2 argmin;
};

/// Z^2-periodic potential V stored analytically as trigonometric modes plus bumps.
/// Immutable after construction; safe to share across threads.
class Potential {
 public:
  Potential() = default;
  Potential(std::vector<FourierMode> modes, std::vector<Bump> bumps = {});

  const std::vector<FourierMode>& modes() const { return modes_; }
  const std::vector<Bump>& bumps() const { return bumps_; }
  bool is_zero() const { return modes_.empty() && bumps_.empty(); }

  double eval(const Vec2& x) const;
  Vec2 grad(const Vec2& x) const;
  PotentialJet jet(const Vec2& x) const;

  /// Global min and max by a dense grid scan followed by Newton refinement.
  Extrema extrema(int scan_resolution = 512) const;

  /// V - depth*phi with phi supported in the ball of the given radius.
  Potential perturb_bump(const Vec2& center, double radius, double depth) const;

  /// True when V does not depend on the coordinate `axis` (0 = x1, 1 = x2).
  bool independent_of(int axis) const;

  /// Split V = h(x1) + g(x2) when possible; bumps are never separable.
  std::optional<std::pair<Potential, Potential>> separate() const;

  /// Sample the potential on an nx-by-ny grid.
  ScalarField sample(int nx, int ny) const;

  /// Maximum of |grad V| over a scan grid.
  double max_grad_norm(int scan_resolution = 256) const;

  nlohmann::json to_json() const;
  static Potential from_json(const nlohmann::json& j);

  /// Preset name ("zero", "cos1", "cos2", "egg", "sep", "random:<seed>:<nmodes>")
  /// or a path to a JSON potential file.
  static Potential from_source(const std::string& source);
  static Potential preset(const std::string& name);
  static Potential random(std::uint64_t seed, int nmodes);

  friend bool operator==(const Potential&, const Potential&) = default;

 private:
  std::vector<FourierMode> modes_;
  std::vector<Bump> bumps_;
};

/// Bump profile phi(r/R) and derivatives with respect to s = (r/R)^2.
struct BumpProfile {
  double psi = 0.0;
  double dpsi = 0.0;
  double d2psi = 0.0;
};
BumpProfile bump_profile(double s);

}  // namespace effham
