#include "effham/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "effham/curve.hpp"
#include "effham/errors.hpp"

namespace effham {

Geodesic mane_geodesic(const Potential& pot, double c, const Vec2& x, const Vec2& y, const BarrierOptions& opts) {
  Geodesic g;
  if (norm(y - x) < 1e-14) {
    g.path = {x, y};
    return g;
  }
  const CoverRect rect{{std::min(x.x, y.x) - 1.5, std::min(x.y, y.y) - 1.5},
                       {std::max(x.x, y.x) + 1.5, std::max(x.y, y.y) + 1.5}};
  const CoverGrid w = distance_field(pot, c, x, rect, opts.coarse_grid, opts.margin);
  g.path = backtrack(w, y, {x});
  double euclid = 0.0;
  for (std::size_t i = 1; i < g.path.size(); ++i) euclid += norm(g.path[i] - g.path[i - 1]);
  const int n = std::max(8, static_cast<int>(std::lround(opts.polish_nodes * euclid)));
  const ConformalMetric m(pot, c);
  g.length = polish_open(m, g.path, n).length;
  return g;
}

double mane_h(const Potential& pot, double c, const Vec2& x, const Vec2& y, const BarrierOptions& opts) {
  return mane_geodesic(pot, c, x, y, opts).length;
}

namespace {

// Lifted orbit node i, for any integer i.
Vec2 lifted(const PeriodicOrbit& o, long i) {
  const long n = static_cast<long>(o.points.size());
  const long q = i >= 0 ? i / n : -((-i + n - 1) / n);
  return o.points[static_cast<std::size_t>(i - q * n)] + double(q) * o.shift();
}

// Index on o whose node is longitudinally nearest to position t, searching near guess.
long nearest_along(const PeriodicOrbit& o, double t, long guess) {
  const Vec2 u = o.shift() / norm(o.shift());
  long best = guess;
  double err = std::abs(dot(lifted(o, guess), u) - t);
  for (int dir : {-1, 1})
    for (long i = guess + dir;; i += dir) {
      const double e = std::abs(dot(lifted(o, i), u) - t);
      if (e >= err && std::abs(i - guess) > 2) break;
      if (e < err) {
        err = e;
        best = i;
      }
    }
  return best;
}

bool is_integer_translate(const PeriodicOrbit& a, const PeriodicOrbit& b) {
  if (a.points.size() != b.points.size() || a.cls != b.cls) return false;
  const Vec2 k = b.points.front() - a.points.front();
  if (std::abs(k.x - std::round(k.x)) > 1e-12 || std::abs(k.y - std::round(k.y)) > 1e-12) return false;
  for (std::size_t i = 0; i < a.points.size(); ++i)
    if (norm(b.points[i] - a.points[i] - k) > 1e-12) return false;
  return true;
}

}  // namespace

BarrierReport barrier_du(const Potential& pot, const Vec2& p0, double c, const Corrector* corr,
                         const PeriodicOrbit& xi1, const PeriodicOrbit& xi2, const BarrierOptions& opts) {
  if (xi1.cls != xi2.cls) throw InvalidArgument("barrier_du: orbits must share a homology class");
  if (std::abs(xi1.c - c) > 1e-9 || std::abs(xi2.c - c) > 1e-9)
    throw InvalidArgument("barrier_du: orbit energies must equal the level c");
  const bool translate = is_integer_translate(xi1, xi2);
  if (!corr && !translate) throw InvalidArgument("barrier_du: a corrector is required unless xi2 is an integer translate");

  BarrierReport rep;
  rep.xi1 = xi1;
  rep.xi2 = xi2;
  rep.c = c;
  rep.p0 = p0;
  rep.corrector_id = corr ? corr->id : "none: corrector terms cancel for integer translates";

  const Vec2 l = xi1.shift();
  const Vec2 x0 = xi1.points.front();
  const long n1 = static_cast<long>(xi1.points.size()), n2 = static_cast<long>(xi2.points.size());
  // Node of xi2 nearest to x0 after sliding by whole periods.
  long j0 = 0;
  double best = std::numeric_limits<double>::infinity();
  for (long j = 0; j < n2; ++j) {
    const long k = std::lround(dot(x0 - xi2.points[j], l) / norm2(l));
    const double d = norm(lifted(xi2, j + k * n2) - x0);
    if (d < best) {
      best = d;
      j0 = j + k * n2;
    }
  }
  const Vec2 y0 = lifted(xi2, j0);
  const Vec2 along = l / norm(l);
  const ConformalMetric metric(pot, c);
  const double dv = translate ? 0.0 : corr->v.interpolate(y0) - corr->v.interpolate(x0);

  double prev_ext = 0.0;
  bool settled = false;
  for (int k = 0; k <= opts.max_doublings; ++k) {
    const int W = opts.first_window << k;
    const Vec2 Y = y0 + double(W) * l;
    // Candidates: the fast-marching geodesic, and paths that shadow xi1, cross over at
    // one of several points spread along the window, then shadow xi2.
    Geodesic g = mane_geodesic(pot, c, x0, Y, opts);
    const int nodes = std::max(8, static_cast<int>(std::lround(opts.polish_nodes * (W + 1) * norm(l))));
    for (int phase = 0; phase < opts.crossing_phases; ++phase) {
      const long ic = static_cast<long>(std::floor((phase + 0.5) * W * n1 / opts.crossing_phases));
      const double t = dot(lifted(xi1, ic), along);
      const long jc = std::max(j0 + 1, nearest_along(xi2, t, j0 + (ic * n2) / n1));
      const long jend = j0 + W * n2;
      if (ic < 1 || jc >= jend) continue;
      std::vector<Vec2> path;
      for (long i = 0; i <= ic; ++i) path.push_back(lifted(xi1, i));
      for (long j = jc; j <= jend; ++j) path.push_back(lifted(xi2, j));
      try {
        const double len = polish_open(metric, path, nodes).length;
        if (len < g.length) g = {len, std::move(path)};
      } catch (const DegenerateMetricError&) {
        // The straight crossing enters V >= c; skip this start.
      }
    }
    SweepEntry e;
    e.window = W;
    e.objective = g.length - dot(p0, Y - x0) - dv;
    // G(W) = d + A / W: first-order extrapolation from the last two windows.
    e.extrapolated = rep.sweep.empty() ? e.objective : 2.0 * e.objective - rep.sweep.back().objective;
    if (!rep.sweep.empty() && e.objective > rep.sweep.back().objective + 1e-6) rep.sweep_monotone = false;
    rep.sweep.push_back(e);
    rep.argmin_x = x0;
    rep.argmin_y = Y;
    rep.geodesic = std::move(g.path);
    if (k >= 2 && std::abs(e.extrapolated - prev_ext) < opts.settle) {
      settled = true;
      break;
    }
    prev_ext = e.extrapolated;
  }
  if (!settled) {
    const auto& s = rep.sweep;
    throw ConvergenceError("barrier_du: window growth did not settle", s.back().extrapolated,
                           s[s.size() - 2].extrapolated);
  }
  rep.d_u = rep.sweep.back().extrapolated;
  return rep;
}

FlatCondition check_flat_condition(StableNormSolver& solver, const Vec2& p0, const HomologyClass& cls_in,
                                   const BarrierOptions& opts) {
  HomologyClass cls = cls_in;
  if (dot(p0, cls.vec()) < 0.0) cls = -cls;
  const double target = dot(p0, cls.vec());
  const auto level = solver.level_for_length(cls.canonical(), target, solver.vmax() + solver.options().margin);
  if (!level) throw InvalidArgument("check_flat_condition: p0 lies in the flat set for this class");
  FlatCondition fc;
  fc.cls = cls;
  fc.p0 = p0;
  fc.c0 = *level;
  PeriodicOrbit orbit = make_orbit(solver.evaluate(cls.canonical(), fc.c0));
  if (orbit.cls != cls) orbit = orbit.reversed();
  fc.orbit = orbit;
  const PeriodicOrbit next = orbit.translated(cls.transverse());
  const Potential& pot = solver.potential();
  fc.plus = barrier_du(pot, p0, fc.c0, nullptr, orbit, next, opts);
  fc.minus = barrier_du(pot, p0, fc.c0, nullptr, next, orbit, opts);
  fc.d_plus = fc.plus.d_u;
  fc.d_minus = fc.minus.d_u;
  const double l2 = norm2(cls.vec());
  fc.tau_plus = fc.d_plus / l2;
  fc.tau_minus = fc.d_minus / l2;
  fc.predicted_edge = (fc.tau_plus + fc.tau_minus) * std::sqrt(l2);
  return fc;
}

AdditivityResult additivity_check(const Potential& pot, const Vec2& p0, double c, const Corrector* corr,
                                  const std::vector<PeriodicOrbit>& orbits, const BarrierOptions& opts) {
  if (orbits.size() < 2) throw InvalidArgument("additivity_check: at least two orbits are required");
  AdditivityResult r;
  for (std::size_t k = 0; k + 1 < orbits.size(); ++k) {
    r.reports.push_back(barrier_du(pot, p0, c, corr, orbits[k], orbits[k + 1], opts));
    r.consecutive.push_back(r.reports.back().d_u);
  }
  double sum = r.consecutive.front();
  r.prefix.push_back(sum);
  for (std::size_t k = 2; k < orbits.size(); ++k) {
    r.reports.push_back(barrier_du(pot, p0, c, corr, orbits.front(), orbits[k], opts));
    r.prefix.push_back(r.reports.back().d_u);
    sum += r.consecutive[k - 1];
    r.deviation = std::max(r.deviation, std::abs(r.prefix.back() - sum));
  }
  return r;
}

namespace {

// Transverse coordinate of an orbit as a function of the longitudinal one.
struct Profile {
  Vec2 along, across;
  std::vector<double> tau, sigma;

  Profile(const PeriodicOrbit& o, int periods_back, int periods_fwd) {
    const Vec2 l = o.shift();
    along = l / norm(l);
    across = perp(along);
    for (int k = -periods_back; k <= periods_fwd; ++k)
      for (const Vec2& x : o.points) {
        const Vec2 y = x + double(k) * l;
        tau.push_back(dot(y, along));
        sigma.push_back(dot(y, across));
      }
  }
  double at(double t) const {
    const auto it = std::lower_bound(tau.begin(), tau.end(), t);
    if (it == tau.begin()) return sigma.front();
    if (it == tau.end()) return sigma.back();
    const std::size_t i = static_cast<std::size_t>(it - tau.begin());
    const double w = (t - tau[i - 1]) / (tau[i] - tau[i - 1]);
    return sigma[i - 1] + w * (sigma[i] - sigma[i - 1]);
  }
};

bool monotone_along(const PeriodicOrbit& o) {
  const Vec2 l = o.shift();
  for (std::size_t i = 1; i < o.points.size(); ++i)
    if (dot(o.points[i] - o.points[i - 1], l) <= 0.0) return false;
  return dot(o.points.front() + l - o.points.back(), l) > 0.0;
}

}  // namespace

GlueReport glue_solution(const Potential& pot, const Vec2& p0, double c, const Corrector& corr,
                         const PeriodicOrbit& xi1, const PeriodicOrbit& xi2, double delta, double d_u,
                         const BarrierOptions& opts) {
  if (delta < 0.0 || delta > d_u + 1e-12) throw InvalidArgument("glue_solution: delta must lie in [0, d_u]");
  if (xi1.cls != xi2.cls) throw InvalidArgument("glue_solution: orbits must share a homology class");
  if (!monotone_along(xi1) || !monotone_along(xi2))
    throw InvalidArgument("glue_solution: orbits must be graphs over their class direction");
  (void)p0;
  GlueReport rep;
  rep.delta = delta;
  const Vec2 l = xi1.shift();
  const int back = opts.glue_periods, fwd = 2;
  std::vector<Seed> seeds;
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi = -lo;
  auto add = [&](const PeriodicOrbit& o, double offset) {
    for (int k = -back; k <= fwd; ++k)
      for (const Vec2& x : o.points) {
        const Vec2 y = x + double(k) * l;
        seeds.push_back({y, corr.u(y) + offset});
        lo = {std::min(lo.x, y.x), std::min(lo.y, y.y)};
        hi = {std::max(hi.x, y.x), std::max(hi.y, y.y)};
      }
  };
  add(xi1, 0.0);
  add(xi2, delta);
  const CoverRect rect{lo - Vec2{0.25, 0.25}, hi + Vec2{0.25, 0.25}};
  rep.u_delta = distance_field(pot, c, seeds, rect, opts.glue_grid, opts.margin);
  const CoverGrid& w = rep.u_delta;

  const Profile s1(xi1, back, fwd), s2(xi2, back, fwd);
  const double t0 = dot(xi1.points.front(), s1.along);
  const double len = norm(l);
  const double h = w.h();

  // Residual on the nodes strictly between the orbits in the window [t0, t0 + |l|).
  for (int j = 1; j + 1 < w.ny(); ++j)
    for (int i = 1; i + 1 < w.nx(); ++i) {
      const Vec2 x = w.node(i, j);
      const double t = dot(x, s1.along);
      if (t < t0 || t >= t0 + len) continue;
      const double s = dot(x, s1.across);
      const double a = s1.at(t), b = s2.at(t);
      if (s < std::min(a, b) + 2 * h || s > std::max(a, b) - 2 * h) continue;
      const double u = w(i, j);
      const double dxm = (u - w(i - 1, j)) / h, dxp = (w(i + 1, j) - u) / h;
      const double dym = (u - w(i, j - 1)) / h, dyp = (w(i, j + 1) - u) / h;
      const double qx = std::max(std::max(dxm, 0.0), -std::min(dxp, 0.0));
      const double qy = std::max(std::max(dym, 0.0), -std::min(dyp, 0.0));
      rep.residual = std::max(rep.residual, std::abs(0.5 * (qx * qx + qy * qy) + pot.eval(x) - c));
      rep.deviation_from_u = std::max(rep.deviation_from_u, std::abs(u - corr.u(x)));
    }
  for (const Vec2& x : xi1.points) rep.mismatch_xi1 = std::max(rep.mismatch_xi1, std::abs(w.interpolate(x) - corr.u(x)));
  for (const Vec2& y : xi2.points)
    rep.mismatch_xi2 = std::max(rep.mismatch_xi2, std::abs(w.interpolate(y) - corr.u(y) - delta));
  return rep;
}

void write_barrier_csv(const std::filesystem::path& path, const std::vector<BarrierReport>& reports) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << "pair,m,n,xi1_x,xi1_y,xi2_x,xi2_y,c,p0_x,p0_y,d_u,argmin_x1,argmin_x2,argmin_y1,argmin_y2,windows,corrector\n"
     << std::setprecision(12);
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    os << k << ',' << r.xi1.cls.m << ',' << r.xi1.cls.n << ',' << r.xi1.points.front().x << ','
       << r.xi1.points.front().y << ',' << r.xi2.points.front().x << ',' << r.xi2.points.front().y << ',' << r.c
       << ',' << r.p0.x << ',' << r.p0.y << ',' << r.d_u << ',' << r.argmin_x.x << ',' << r.argmin_x.y << ','
       << r.argmin_y.x << ',' << r.argmin_y.y << ',' << r.sweep.size() << ",\"" << r.corrector_id << "\"\n";
  }
}

}  // namespace effham
