#include "effham/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <utility>

#include "effham/errors.hpp"

namespace effham {

BumpProfile bump_profile(double s) {
  if (s >= 1.0) return {};
  const double om = 1.0 - s;
  const double psi = std::exp(1.0 - 1.0 / om);
  const double inv2 = 1.0 / (om * om);
  return {psi, -psi * inv2, psi * (inv2 * inv2 - 2.0 * inv2 / om)};
}

Potential::Potential(std::vector<FourierMode> modes, std::vector<Bump> bumps)
    : modes_(std::move(modes)), bumps_(std::move(bumps)) {
  for (const auto& b : bumps_) {
    if (!(b.radius > 0.0) || b.radius >= 0.25) throw InvalidArgument("bump radius must lie in (0, 1/4)");
    if (!(b.depth > 0.0)) throw InvalidArgument("bump depth must be positive");
  }
}

double Potential::eval(const Vec2& x) const {
  double v = 0.0;
  for (const auto& m : modes_) {
    const double th = kTwoPi * (m.k1 * x.x + m.k2 * x.y);
    v += m.a_cos * std::cos(th) + m.a_sin * std::sin(th);
  }
  for (const auto& b : bumps_) {
    const Vec2 d = min_image(x - b.center);
    const double s = norm2(d) / (b.radius * b.radius);
    if (s < 1.0) v -= b.depth * bump_profile(s).psi;
  }
  return v;
}

Vec2 Potential::grad(const Vec2& x) const { return jet(x).grad; }

PotentialJet Potential::jet(const Vec2& x) const {
  PotentialJet r;
  for (const auto& m : modes_) {
    const double w1 = kTwoPi * m.k1;
    const double w2 = kTwoPi * m.k2;
    const double th = w1 * x.x + w2 * x.y;
    const double c = std::cos(th);
    const double s = std::sin(th);
    const double val = m.a_cos * c + m.a_sin * s;
    const double d1 = m.a_sin * c - m.a_cos * s;
    r.value += val;
    r.grad.x += d1 * w1;
    r.grad.y += d1 * w2;
    r.hess.xx -= val * w1 * w1;
    r.hess.xy -= val * w1 * w2;
    r.hess.yy -= val * w2 * w2;
  }
  for (const auto& b : bumps_) {
    const Vec2 d = min_image(x - b.center);
    const double r2 = b.radius * b.radius;
    const double s = norm2(d) / r2;
    if (s >= 1.0) continue;
    const BumpProfile bp = bump_profile(s);
    const Vec2 ds = (2.0 / r2) * d;
    r.value -= b.depth * bp.psi;
    r.grad -= (b.depth * bp.dpsi) * ds;
    r.hess.xx -= b.depth * (bp.d2psi * ds.x * ds.x + bp.dpsi * 2.0 / r2);
    r.hess.xy -= b.depth * (bp.d2psi * ds.x * ds.y);
    r.hess.yy -= b.depth * (bp.d2psi * ds.y * ds.y + bp.dpsi * 2.0 / r2);
  }
  return r;
}

namespace {

// Newton iteration toward a critical point of sign*V; sign=+1 climbs to a max.
Vec2 refine_extremum(const Potential& pot, Vec2 x, double sign) {
  double mu = 1e-3;
  double f = sign * pot.eval(x);
  for (int it = 0; it < 200; ++it) {
    const PotentialJet j = pot.jet(x);
    const Vec2 g = sign * j.grad;
    if (norm(j.grad) <= 1e-12) break;
    const Sym2 h{sign * j.hess.xx, sign * j.hess.xy, sign * j.hess.yy};
    // Shift so that -(h - shift) is positive definite.
    const double tr = h.xx + h.yy;
    const double disc = std::sqrt(0.25 * (h.xx - h.yy) * (h.xx - h.yy) + h.xy * h.xy);
    const double lmax = 0.5 * tr + disc;
    bool accepted = false;
    for (int t = 0; t < 60; ++t) {
      const double shift = std::max(0.0, lmax) + mu * (1.0 + std::abs(tr));
      const double a = shift - h.xx, bb = -h.xy, d = shift - h.yy;  // (shift I - h)
      const double det = a * d - bb * bb;
      const Vec2 step{(d * g.x - bb * g.y) / det, (a * g.y - bb * g.x) / det};
      const Vec2 xn = x + step;
      const double fn = sign * pot.eval(xn);
      if (fn >= f - 1e-15) {
        x = xn;
        f = fn;
        mu = std::max(mu * 0.1, 1e-14);
        accepted = true;
        break;
      }
      mu *= 10.0;
    }
    if (!accepted) break;
  }
  return wrap_unit(x);
}

}  // namespace

Extrema Potential::extrema(int scan_resolution) const {
  if (is_zero()) return {0.0, 0.0, {0.0, 0.0}, {0.0, 0.0}};
  const int n = scan_resolution;
  std::vector<double> grid(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(j) * n + i] = eval({double(i) / n, double(j) / n});
  auto at = [&](int i, int j) { return grid[static_cast<std::size_t>((j + n) % n) * n + (i + n) % n]; };

  auto best_of = [&](double sign) {
    // Grid local extrema, best eight by value.
    std::vector<std::pair<double, int>> cand;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const double v = sign * at(i, j);
        bool local = true;
        for (int dj = -1; dj <= 1 && local; ++dj)
          for (int di = -1; di <= 1; ++di)
            if ((di || dj) && sign * at(i + di, j + dj) > v) {
              local = false;
              break;
            }
        if (local) cand.emplace_back(v, j * n + i);
      }
    }
    std::sort(cand.begin(), cand.end(), [](auto& a, auto& b) { return a.first > b.first; });
    if (cand.size() > 8) cand.resize(8);
    Vec2 best_x;
    double best_v = -1e300;
    for (const auto& [v, idx] : cand) {
      const Vec2 x0{double(idx % n) / n, double(idx / n) / n};
      const Vec2 x = refine_extremum(*this, x0, sign);
      const double fv = sign * eval(x);
      // Ties go to the lexicographically smallest point.
      if (fv > best_v + 1e-13 || (std::abs(fv - best_v) <= 1e-13 && (x.x < best_x.x || (x.x == best_x.x && x.y < best_x.y)))) {
        best_v = fv;
        best_x = x;
      }
    }
    return std::pair{best_x, sign * best_v};
  };
  const auto [xmax, vmax] = best_of(+1.0);
  const auto [xmin, vmin] = best_of(-1.0);
  return {vmin, vmax, xmax, xmin};
}

Potential Potential::perturb_bump(const Vec2& center, double radius, double depth) const {
  if (radius >= 0.25) throw InvalidArgument("perturb_bump: radius must be < 1/4");
  if (!(radius > 0.0)) throw InvalidArgument("perturb_bump: radius must be positive");
  if (!(depth > 0.0)) throw InvalidArgument("perturb_bump: depth must be positive");
  auto bumps = bumps_;
  bumps.push_back({wrap_unit(center), radius, depth});
  return Potential(modes_, std::move(bumps));
}

bool Potential::independent_of(int axis) const {
  if (!bumps_.empty()) return false;
  for (const auto& m : modes_) {
    const int k = axis == 0 ? m.k1 : m.k2;
    if (k != 0 && (m.a_cos != 0.0 || m.a_sin != 0.0)) return false;
  }
  return true;
}

std::optional<std::pair<Potential, Potential>> Potential::separate() const {
  if (!bumps_.empty()) return std::nullopt;
  std::vector<FourierMode> h, g;
  for (const auto& m : modes_) {
    if (m.k2 == 0)
      h.push_back(m);
    else if (m.k1 == 0)
      g.push_back(m);
    else
      return std::nullopt;
  }
  return std::pair{Potential(std::move(h)), Potential(std::move(g))};
}

ScalarField Potential::sample(int nx, int ny) const {
  ScalarField f(nx, ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) f(i, j) = eval({double(i) / nx, double(j) / ny});
  return f;
}

double Potential::max_grad_norm(int scan_resolution) const {
  double m = 0.0;
  const int n = scan_resolution;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) m = std::max(m, norm(grad({double(i) / n, double(j) / n})));
  return m;
}

nlohmann::json Potential::to_json() const {
  nlohmann::json j;
  j["modes"] = nlohmann::json::array();
  for (const auto& m : modes_) j["modes"].push_back({m.k1, m.k2, m.a_cos, m.a_sin});
  j["bumps"] = nlohmann::json::array();
  for (const auto& b : bumps_) j["bumps"].push_back({b.center.x, b.center.y, b.radius, b.depth});
  return j;
}

Potential Potential::from_json(const nlohmann::json& j) {
  std::vector<FourierMode> modes;
  std::vector<Bump> bumps;
  try {
    if (j.contains("modes")) {
      for (const auto& m : j.at("modes")) {
        if (m.size() != 4) throw InvalidArgument("potential: each mode needs [k1,k2,acos,asin]");
        modes.push_back({m[0].get<int>(), m[1].get<int>(), m[2].get<double>(), m[3].get<double>()});
      }
    }
    if (j.contains("bumps")) {
      for (const auto& b : j.at("bumps")) {
        if (b.size() != 4) throw InvalidArgument("potential: each bump needs [cx,cy,radius,depth]");
        bumps.push_back({{b[0].get<double>(), b[1].get<double>()}, b[2].get<double>(), b[3].get<double>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("potential: malformed JSON: ") + e.what());
  }
  return Potential(std::move(modes), std::move(bumps));
}

Potential Potential::preset(const std::string& name) {
  if (name == "zero") return {};
  if (name == "cos1") return Potential({{1, 0, 1.0, 0.0}});
  if (name == "cos2") return Potential({{0, 1, 1.0, 0.0}});
  if (name == "egg") return Potential({{1, 0, 1.0, 0.0}, {0, 1, 1.0, 0.0}});
  if (name == "sep") return Potential({{1, 0, 1.0, 0.0}, {0, 1, 0.5, 0.0}});
  if (name.rfind("random:", 0) == 0) {
    const auto rest = name.substr(7);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw InvalidArgument("preset random:<seed>:<nmodes> expected, got " + name);
    try {
      const auto seed = std::stoull(rest.substr(0, colon));
      const int nmodes = std::stoi(rest.substr(colon + 1));
      return random(seed, nmodes);
    } catch (const std::logic_error&) {
      throw InvalidArgument("preset random:<seed>:<nmodes> expected, got " + name);
    }
  }
  throw InvalidArgument("unknown potential preset: " + name);
}

Potential Potential::random(std::uint64_t seed, int nmodes) {
  if (nmodes < 0 || nmodes > 12) throw InvalidArgument("random potential: nmodes must be in [0, 12]");
  std::mt19937_64 rng(seed);
  // Portable uniform draw; std::uniform_real_distribution is implementation-defined.
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::set<std::pair<int, int>> used;
  std::vector<FourierMode> modes;
  while (static_cast<int>(modes.size()) < nmodes) {
    int k1 = static_cast<int>(rng() % 5) - 2;
    int k2 = static_cast<int>(rng() % 5) - 2;
    if (k1 == 0 && k2 == 0) continue;
    if (k1 < 0 || (k1 == 0 && k2 < 0)) {
      k1 = -k1;
      k2 = -k2;
    }
    if (!used.insert({k1, k2}).second) continue;
    const double ac = uniform() - 0.5;
    const double as = uniform() - 0.5;
    modes.push_back({k1, k2, ac, as});
  }
  return Potential(std::move(modes));
}

Potential Potential::from_source(const std::string& source) {
  static const std::set<std::string> names{"zero", "cos1", "cos2", "egg", "sep"};
  if (names.count(source) || source.rfind("random:", 0) == 0) return preset(source);
  std::ifstream is(source);
  if (!is) throw InvalidArgument("potential: not a preset and cannot open file '" + source + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("potential: cannot parse '" + source + "': " + e.what());
  }
  return from_json(j);
}

}  // namespace effham
