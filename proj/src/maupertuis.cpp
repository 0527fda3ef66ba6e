#include "effham/maupertuis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <utility>
#include <sstream>

#include "effham/errors.hpp"

namespace effham {

HomologyClass::HomologyClass(int m_, int n_) : m(m_), n(n_) {
  if (m == 0 && n == 0) throw InvalidArgument("homology class (0,0) is not allowed");
  if (std::gcd(std::abs(m), std::abs(n)) != 1) {
    std::ostringstream os;
    os << "homology class (" << m << ',' << n << ") is not irreducible";
    throw InvalidArgument(os.str());
  }
}

HomologyClass HomologyClass::canonical() const {
  if (m > 0 || (m == 0 && n > 0)) return *this;
  return {-m, -n};
}

std::vector<HomologyClass> irreducible_classes(int lmax) {
  if (lmax < 1) throw InvalidArgument("irreducible_classes: lmax must be >= 1");
  std::vector<HomologyClass> out;
  for (int m = 0; m <= lmax; ++m)
    for (int n = -lmax; n <= lmax; ++n) {
      if (m == 0 && n <= 0) continue;
      if (std::gcd(m, std::abs(n)) != 1) continue;
      out.emplace_back(m, n);
    }
  std::sort(out.begin(), out.end(), [](const HomologyClass& a, const HomologyClass& b) {
    return std::atan2(double(a.n), double(a.m)) < std::atan2(double(b.n), double(b.m));
  });
  return out;
}

namespace {

std::vector<Vec2> straight_line(const HomologyClass& cls, const Vec2& start, int nodes) {
  std::vector<Vec2> x(nodes);
  for (int i = 0; i < nodes; ++i) x[i] = start + (double(i) / nodes) * cls.vec();
  return x;
}

bool lex_less(const Vec2& a, const Vec2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

// Base point in [0,1)^2, with coordinates a rounding error below 1 sent to 0.
Vec2 canonical_base(const Vec2& x) {
  Vec2 b = wrap_unit(x);
  if (b.x > 1.0 - 1e-9) b.x -= 1.0;
  if (b.y > 1.0 - 1e-9) b.y -= 1.0;
  return b;
}

// Farey parents a + b = cls with cross(a, b) = 1, both shorter than cls; none for
// the classes next to the axes.
std::optional<std::pair<HomologyClass, HomologyClass>> farey_parents(const HomologyClass& cls) {
  // Extended Euclid for p n - q m = 1.
  long r0 = cls.n, r1 = -cls.m, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
  while (r1 != 0) {
    const long q = r0 / r1;
    r0 = std::exchange(r1, r0 - q * r1);
    s0 = std::exchange(s1, s0 - q * s1);
    t0 = std::exchange(t1, t0 - q * t1);
  }
  if (r0 < 0) s0 = -s0, t0 = -t0;
  Vec2 a{double(s0), double(t0)};
  const Vec2 l = cls.vec();
  a = a - std::floor(dot(a, l) / norm2(l)) * l;
  const Vec2 b = l - a;
  if (norm2(a) >= norm2(l) || norm2(b) >= norm2(l) || norm2(a) == 0.0 || norm2(b) == 0.0) return std::nullopt;
  const HomologyClass ca(int(std::lround(a.x)), int(std::lround(a.y))), cb(int(std::lround(b.x)), int(std::lround(b.y)));
  if (cross(ca.vec(), cb.vec()) < 0) return std::make_pair(cb, ca);
  return std::make_pair(ca, cb);
}

// Closed curve of class a + b: A from its node nearest B (mod Z^2) once round, then B.
std::vector<Vec2> concatenate(const std::vector<Vec2>& xa, const Vec2& a, const std::vector<Vec2>& xb, const Vec2& b) {
  std::size_t ia = 0, ib = 0;
  double best = std::numeric_limits<double>::infinity();
  Vec2 k;
  for (std::size_t i = 0; i < xa.size(); ++i)
    for (std::size_t j = 0; j < xb.size(); ++j) {
      const Vec2 d = xa[i] - xb[j];
      const Vec2 kk{std::round(d.x), std::round(d.y)};
      const double e = norm2(d - kk);
      if (e < best) best = e, ia = i, ib = j, k = kk;
    }
  std::vector<Vec2> out;
  out.reserve(xa.size() + xb.size());
  for (std::size_t s = 0; s < xa.size(); ++s) {
    const std::size_t i = (ia + s) % xa.size();
    out.push_back(xa[i] + (i < ia ? a : Vec2{}));
  }
  for (std::size_t s = 0; s < xb.size(); ++s) {
    const std::size_t j = (ib + s) % xb.size();
    out.push_back(xb[j] + k + a + (j < ib ? b : Vec2{}));
  }
  return out;
}

int nodes_for(const HomologyClass& cls, int per_unit, int minimum) {
  return std::max(minimum, static_cast<int>(std::lround(per_unit * cls.length())));
}

}  // namespace

StableNormSolver::StableNormSolver(Potential pot, MetricOptions opts)
    : pot_(std::move(pot)), opts_(opts), ext_(pot_.extrema()) {
  if (opts_.starts < 1 || opts_.candidates < 1 || opts_.coarse_nodes < 4 || opts_.fine_nodes < 8)
    throw InvalidArgument("metric options: starts, candidates and node densities must be positive");
}

void StableNormSolver::require_level(double c) const {
  if (c < ext_.vmax + opts_.margin * (1.0 - 1e-9)) {
    std::ostringstream os;
    os << "energy c = " << std::setprecision(12) << c << " is within the degeneracy margin of max V = " << ext_.vmax
       << " (c - max V = " << c - ext_.vmax << ", required >= " << opts_.margin << ")";
    throw DegenerateMetricError(os.str(), c - ext_.vmax);
  }
}

StableNormResult StableNormSolver::finish(const HomologyClass& cls, double c, std::vector<Vec2> curve,
                                          const CurveStats& st) const {
  StableNormResult r;
  r.cls = cls;
  r.c = c;
  r.length = st.length;
  r.period = st.period;
  r.base = canonical_base(curve.front());
  r.curve = std::move(curve);
  return r;
}

namespace {

struct Relaxed {
  double length;
  Vec2 base;
  std::vector<Vec2> curve;
};

// Indices of the entries within tol of the minimum, smallest base point first,
// followed by the remaining entries in order of length.
std::vector<std::size_t> order_candidates(const std::vector<Relaxed>& v, double rel_tol) {
  double lmin = std::numeric_limits<double>::infinity();
  for (const auto& r : v) lmin = std::min(lmin, r.length);
  std::vector<std::size_t> tied, rest;
  for (std::size_t i = 0; i < v.size(); ++i)
    (v[i].length <= lmin + rel_tol * std::abs(lmin) + 1e-14 ? tied : rest).push_back(i);
  std::sort(tied.begin(), tied.end(), [&](auto a, auto b) { return lex_less(v[a].base, v[b].base); });
  std::sort(rest.begin(), rest.end(), [&](auto a, auto b) { return v[a].length < v[b].length; });
  tied.insert(tied.end(), rest.begin(), rest.end());
  return tied;
}

}  // namespace

StableNormResult StableNormSolver::evaluate(const HomologyClass& cls, double c) {
  require_level(c);
  ++evaluations_;
  const ConformalMetric metric(pot_, c);
  const Vec2 l = cls.vec();
  const Vec2 off = perp(l) / norm2(l);
  const int nc = nodes_for(cls, opts_.coarse_nodes, 8);
  const int nf = nodes_for(cls, opts_.fine_nodes, 16);

  // Starts span one transversal period 1/|l|; keep their spacing on the torus near 1/starts.
  const int starts = std::max(8, static_cast<int>(std::lround(opts_.starts / std::max(1.0, cls.length()))));
  std::vector<Relaxed> coarse;
  coarse.reserve(starts);
  for (int k = 0; k < starts; ++k) {
    const double t = double(k) / starts;
    auto x = straight_line(cls, t * off, nc);
    const CurveStats st = relax_closed(metric, x, l, 30);
    coarse.push_back({st.length, canonical_base(x.front()), std::move(x)});
  }
  // The straight starts can all miss a minimizer that runs close to a Farey pair of
  // shorter orbits; seed with the concatenation of their minimizers as well.
  if (const auto parents = farey_parents(cls)) {
    std::vector<Vec2> xs[2];
    const HomologyClass* pc[2] = {&parents->first, &parents->second};
    for (int s = 0; s < 2; ++s) {
      auto it = cache_.find(*pc[s]);
      xs[s] = (it != cache_.end() && !it->second.empty()) ? it->second.front() : evaluate(*pc[s], c).curve;
    }
    auto x = concatenate(xs[0], pc[0]->vec(), xs[1], pc[1]->vec());
    resample_closed(x, l, nc);
    const CurveStats st = relax_closed(metric, x, l, 30);
    coarse.push_back({st.length, canonical_base(x.front()), std::move(x)});
  }
  const auto order = order_candidates(coarse, 1e-9);

  std::vector<Relaxed> fine;
  std::vector<CurveStats> stats;
  for (std::size_t q = 0; q < order.size() && static_cast<int>(q) < opts_.candidates; ++q) {
    auto x = coarse[order[q]].curve;
    const CurveStats st = polish_closed(metric, x, l, nf);
    fine.push_back({st.length, canonical_base(x.front()), x});
    stats.push_back(st);
  }
  const auto best = order_candidates(fine, 1e-10);
  auto& slot = cache_[cls];
  slot.clear();
  for (auto i : best) slot.push_back(fine[i].curve);
  return finish(cls, c, fine[best.front()].curve, stats[best.front()]);
}

StableNormResult StableNormSolver::track(const HomologyClass& cls, double c) {
  require_level(c);
  auto it = cache_.find(cls);
  if (it == cache_.end() || it->second.empty()) return evaluate(cls, c);
  ++evaluations_;
  const ConformalMetric metric(pot_, c);
  const int nf = nodes_for(cls, opts_.fine_nodes, 16);
  std::vector<Relaxed> fine;
  std::vector<CurveStats> stats;
  try {
    for (const auto& start : it->second) {
      auto x = start;
      const CurveStats st = polish_closed(metric, x, cls.vec(), nf);
      fine.push_back({st.length, canonical_base(x.front()), x});
      stats.push_back(st);
    }
  } catch (const DegenerateMetricError&) {
    // A cached curve crosses the new forbidden region; search from scratch.
    return evaluate(cls, c);
  }
  const auto best = order_candidates(fine, 1e-10);
  it->second.clear();
  for (auto i : best) it->second.push_back(fine[i].curve);
  return finish(cls, c, fine[best.front()].curve, stats[best.front()]);
}

StableNormResult StableNormSolver::relax_from(const HomologyClass& cls, double c, const Vec2& through) {
  require_level(c);
  ++evaluations_;
  const ConformalMetric metric(pot_, c);
  auto x = straight_line(cls, through, nodes_for(cls, opts_.coarse_nodes, 8));
  relax_closed(metric, x, cls.vec(), 30);
  const CurveStats st = polish_closed(metric, x, cls.vec(), nodes_for(cls, opts_.fine_nodes, 16));
  return finish(cls, c, std::move(x), st);
}

std::vector<StableNormResult> StableNormSolver::all_minimizers(const HomologyClass& cls, double c) {
  require_level(c);
  const Vec2 off = perp(cls.vec()) / norm2(cls.vec());
  std::vector<StableNormResult> out;
  out.reserve(opts_.starts);
  for (int k = 0; k < opts_.starts; ++k) out.push_back(relax_from(cls, c, (double(k) / opts_.starts) * off));
  return out;
}

std::optional<double> StableNormSolver::level_for_length(const HomologyClass& cls, double target, double c_start) {
  const double c_floor = ext_.vmax + opts_.margin;
  auto fl = floor_length_.find(cls);
  if (fl == floor_length_.end()) fl = floor_length_.emplace(cls, track(cls, c_floor).length).first;
  if (fl->second >= target) return std::nullopt;
  double c = std::max(c_start, c_floor);
  for (int it = 0; it < 60; ++it) {
    const StableNormResult r = track(cls, c);
    const double f = r.length - target;
    // Polished lengths are reproducible to about 1e-8 relative; below that the
    // cached curve creeps and Newton only chases that noise.
    if (f >= -1e-8 * std::max(1.0, target)) return c;
    const double dc = -f / r.period;
    c += dc;
    if (dc < 1e-10 * std::max(1.0, std::abs(c))) return c;
  }
  throw ConvergenceError("level_for_length: Newton iteration did not settle", c, 0.0);
}

StableNormResult stable_norm(const Potential& pot, double c, const HomologyClass& cls, const MetricOptions& opts) {
  StableNormSolver solver(pot, opts);
  return solver.evaluate(cls, c);
}

void StableNormTable::write_csv(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << "m,n,c,length,base_x,base_y\n" << std::setprecision(12);
  for (const auto& [cls, e] : entries)
    os << cls.m << ',' << cls.n << ',' << c << ',' << e.length << ',' << e.base.x << ',' << e.base.y << '\n';
}

StableNormTable tabulate_stable_norms(StableNormSolver& solver, double c, int lmax) {
  StableNormTable t;
  t.c = c;
  for (const auto& cls : irreducible_classes(lmax)) {
    const StableNormResult r = solver.evaluate(cls, c);
    t.entries[cls] = {r.length, r.base};
    t.entries[-cls] = {r.length, r.base};
  }
  return t;
}

PeriodicOrbit PeriodicOrbit::translated(const Vec2& k) const {
  PeriodicOrbit o = *this;
  for (auto& x : o.points) x += k;
  return o;
}

PeriodicOrbit PeriodicOrbit::reversed() const {
  PeriodicOrbit o = *this;
  const std::size_t n = points.size();
  for (std::size_t i = 1; i < n; ++i) o.points[i] = points[n - i] - shift();
  o.cls = -cls;
  o.rotation = -rotation;
  return o;
}

PeriodicOrbit make_orbit(const StableNormResult& r) {
  PeriodicOrbit o;
  o.points = r.curve;
  o.cls = r.cls;
  o.c = r.c;
  o.period = r.period;
  o.action = r.length;
  o.rotation = r.cls.vec() / r.period;
  return o;
}

namespace {

// Periodic cubic spline through (t_i, y_i), i < n, with y periodic of period T.
struct PeriodicSpline {
  std::vector<double> t, y, m;
  double period;

  PeriodicSpline(std::vector<double> tt, std::vector<double> yy, double T) : t(std::move(tt)), y(std::move(yy)), period(T) {
    const int n = static_cast<int>(t.size());
    std::vector<double> a(n), b(n), c(n), r(n);
    for (int i = 0; i < n; ++i) {
      const int ip = (i + 1) % n, im = (i + n - 1) % n;
      const double hi = (i + 1 < n ? t[i + 1] : t[0] + period) - t[i];
      const double hm = t[i] - (i > 0 ? t[i - 1] : t[n - 1] - period);
      a[i] = hm;
      b[i] = 2.0 * (hm + hi);
      c[i] = hi;
      r[i] = 6.0 * ((y[ip] - y[i]) / hi - (y[i] - y[im]) / hm);
    }
    m = solve_tridiagonal(a, b, c, r, true);
  }

  // Value and first two derivatives.
  void eval(double s, double& v, double& d1, double& d2) const {
    s -= period * std::floor((s - t[0]) / period);
    const int n = static_cast<int>(t.size());
    int i = static_cast<int>(std::upper_bound(t.begin(), t.end(), s) - t.begin()) - 1;
    i = std::clamp(i, 0, n - 1);
    const int ip = (i + 1) % n;
    const double t1 = i + 1 < n ? t[i + 1] : t[0] + period;
    const double h = t1 - t[i];
    const double A = (t1 - s) / h, B = (s - t[i]) / h;
    v = A * y[i] + B * y[ip] + ((A * A * A - A) * m[i] + (B * B * B - B) * m[ip]) * h * h / 6.0;
    d1 = (y[ip] - y[i]) / h + (-(3 * A * A - 1) * m[i] + (3 * B * B - 1) * m[ip]) * h / 6.0;
    d2 = A * m[i] + B * m[ip];
  }
};

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace

std::vector<Vec2> sample_in_time(const Potential& pot, const PeriodicOrbit& orbit, int samples,
                                 std::vector<Vec2>* velocity) {
  const ConformalMetric metric(pot, orbit.c);
  const auto& x = orbit.points;
  const int n = static_cast<int>(x.size());
  const Vec2 l = orbit.shift();
  std::vector<double> t(n, 0.0);
  for (int i = 1; i < n; ++i) t[i] = t[i - 1] + norm(x[i] - x[i - 1]) / metric.g(0.5 * (x[i] + x[i - 1]));
  const Vec2 last = x[0] + l;
  const double T = t[n - 1] + norm(last - x[n - 1]) / metric.g(0.5 * (last + x[n - 1]));
  const Vec2 drift = l / T;
  std::vector<double> yx(n), yy(n);
  for (int i = 0; i < n; ++i) {
    yx[i] = x[i].x - drift.x * t[i];
    yy[i] = x[i].y - drift.y * t[i];
  }
  const PeriodicSpline sx(t, yx, T), sy(t, yy, T);
  std::vector<Vec2> out(samples);
  if (velocity) velocity->resize(samples);
  for (int k = 0; k < samples; ++k) {
    const double s = T * k / samples;
    double vx, dx, ddx, vy, dy, ddy;
    sx.eval(s, vx, dx, ddx);
    sy.eval(s, vy, dy, ddy);
    out[k] = Vec2{vx, vy} + s * drift;
    if (velocity) (*velocity)[k] = Vec2{dx, dy} + drift;
  }
  return out;
}

bool OrbitQuality::ok(double c, double grid_h) const {
  const double el_tol = std::max(1e-2 * el_scale, 1e-6);
  return energy_error <= 1e-2 * std::max(std::abs(c), 1e-12) && el_residual <= el_tol &&
         displacement_error <= 2.0 * grid_h && !self_intersects;
}

OrbitQuality orbit_quality(const Potential& pot, const PeriodicOrbit& orbit, int samples_per_period) {
  OrbitQuality q;
  const int ns = samples_per_period;
  std::vector<Vec2> vel;
  const auto xs = sample_in_time(pot, orbit, ns, &vel);
  const double dt = orbit.period / ns;
  for (int k = 0; k < ns; ++k) {
    q.energy_error = std::max(q.energy_error, std::abs(0.5 * norm2(vel[k]) + pot.eval(xs[k]) - orbit.c));
    const Vec2 prev = k > 0 ? xs[k - 1] : xs[ns - 1] - orbit.shift();
    const Vec2 next = k + 1 < ns ? xs[k + 1] : xs[0] + orbit.shift();
    const Vec2 acc = (next - 2.0 * xs[k] + prev) / (dt * dt);
    q.el_residual = std::max(q.el_residual, norm(acc + pot.grad(xs[k])));
  }
  q.el_scale = pot.max_grad_norm();
  const Vec2 end = xs[0] + orbit.shift();
  q.displacement_error = norm((end - orbit.points.front()) - orbit.shift());

  // Torus embedding: test every segment pair against integer translates.
  const auto& x = orbit.points;
  const int n = static_cast<int>(x.size());
  struct Seg {
    Vec2 a, b, lo, hi;
  };
  std::vector<Seg> segs(n);
  for (int i = 0; i < n; ++i) {
    Vec2 a = x[i], b = i + 1 < n ? x[i + 1] : x[0] + orbit.shift();
    const Vec2 o{std::floor(a.x), std::floor(a.y)};
    a -= o;
    b -= o;
    segs[i] = {a, b, {std::min(a.x, b.x), std::min(a.y, b.y)}, {std::max(a.x, b.x), std::max(a.y, b.y)}};
  }
  for (int i = 0; i < n && !q.self_intersects; ++i)
    for (int j = i; j < n && !q.self_intersects; ++j)
      for (int kx = -1; kx <= 1; ++kx)
        for (int ky = -1; ky <= 1; ++ky) {
          const bool adjacent = j == i || j == i + 1 || (i == 0 && j == n - 1);
          if (adjacent && kx == 0 && ky == 0) continue;
          const Vec2 k{double(kx), double(ky)};
          const Seg& s = segs[i];
          const Seg& t = segs[j];
          if (t.lo.x + k.x > s.hi.x || t.hi.x + k.x < s.lo.x || t.lo.y + k.y > s.hi.y || t.hi.y + k.y < s.lo.y)
            continue;
          if (segments_cross(s.a, s.b, t.a + k, t.b + k)) q.self_intersects = true;
        }
  return q;
}

PeriodicOrbit minimal_orbit(const Potential& pot, double c, const HomologyClass& cls, const MetricOptions& opts) {
  StableNormSolver solver(pot, opts);
  return make_orbit(solver.evaluate(cls, c));
}

DualResult hbar_dual(StableNormSolver& solver, const Vec2& p, const DualOptions& opts) {
  if (opts.lmax < 3) throw InvalidArgument("hbar_dual: lmax must be >= 3");
  const double vmax = solver.vmax(), vmin = solver.vmin();
  const double c0 = vmax + opts.margin;
  struct Cand {
    HomologyClass cls;
    double target, lo, hi;
  };
  std::vector<Cand> cands;
  for (const auto& cls : irreducible_classes(opts.lmax)) {
    const double pl = dot(p, cls.vec());
    const double target = std::abs(pl);
    const double l2 = norm2(cls.vec());
    // Conformal sandwich: sqrt(2 (c - max V)) |l| <= length_c(l) <= sqrt(2 (c - min V)) |l|.
    if (target <= std::sqrt(2.0 * opts.margin * l2)) continue;
    const double q = 0.5 * target * target / l2;
    cands.push_back({pl >= 0 ? cls : -cls, target, std::max(c0, vmin + q), vmax + q});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return a.lo + a.hi > b.lo + b.hi;
  });
  DualResult res;
  res.hbar = vmax;
  double best = c0;
  for (const auto& cd : cands) {
    if (cd.hi <= best) continue;
    const auto level = solver.level_for_length(cd.cls.canonical(), cd.target, cd.lo);
    ++res.classes_solved;
    if (level && *level > best) {
      best = *level;
      res.hbar = *level;
      res.supporting = cd.cls;
    }
  }
  return res;
}

DualResult hbar_dual(const Potential& pot, const Vec2& p, const DualOptions& opts, const MetricOptions& mopts) {
  MetricOptions m = mopts;
  m.margin = opts.margin;
  StableNormSolver solver(pot, m);
  return hbar_dual(solver, p, opts);
}

namespace {

struct Selection {
  Vec2 a, b;  // base points of the selected pair
  bool identical = false;
  bool family = false;
  std::string how;
};

double transverse_coord(const HomologyClass& cls, const Vec2& x) {
  const double s = cross(cls.vec(), x);
  return s - std::floor(s);
}

Selection select_extremes(StableNormSolver& solver, const HomologyClass& cls, double c) {
  auto all = solver.all_minimizers(cls, c);
  double lmin = std::numeric_limits<double>::infinity();
  for (const auto& r : all) lmin = std::min(lmin, r.length);
  std::vector<const StableNormResult*> mins;
  for (const auto& r : all)
    if (r.length <= lmin + 1e-9 * std::abs(lmin) + 1e-13) mins.push_back(&r);
  std::sort(mins.begin(), mins.end(), [&](auto x, auto y) {
    return transverse_coord(cls, x->base) < transverse_coord(cls, y->base);
  });
  const int k = static_cast<int>(mins.size());
  const double resolution = 2.5 / solver.options().starts;
  double gap = -1.0;
  int after = 0;  // index following the largest gap
  for (int i = 0; i < k; ++i) {
    const double s0 = transverse_coord(cls, mins[i]->base);
    const double s1 = transverse_coord(cls, mins[(i + 1) % k]->base) + (i + 1 == k ? 1.0 : 0.0);
    if (s1 - s0 > gap) {
      gap = s1 - s0;
      after = (i + 1) % k;
    }
  }
  Selection sel;
  if (k == 1 || 1.0 - gap < resolution) {
    const auto* best = *std::min_element(mins.begin(), mins.end(), [](auto x, auto y) { return lex_less(x->base, y->base); });
    sel.a = sel.b = best->base;
    sel.identical = true;
    sel.how = "unique minimizer";
  } else if (gap < resolution) {
    const auto* best = *std::min_element(mins.begin(), mins.end(), [](auto x, auto y) { return lex_less(x->base, y->base); });
    sel.a = sel.b = best->base;
    sel.identical = true;
    sel.family = true;
    sel.how = "minimizers foliate the torus; smallest base point";
  } else {
    sel.a = mins[(after + k - 1) % k]->base;
    sel.b = mins[after]->base;
    sel.family = true;
    sel.how = "family of minimizers with a gap; the two orbits flanking the gap";
  }
  return sel;
}

double torus_distance(const Vec2& a, const Vec2& b) { return norm(min_image(a - b)); }

}  // namespace

ExtremeOrbits extreme_orbits(StableNormSolver& solver, const Vec2& p, const HomologyClass& cls, double c) {
  (void)p;
  ExtremeOrbits out;
  const double grid_h = 1.0 / solver.options().grid;
  const double c_floor = solver.vmax() + solver.options().margin;
  std::optional<Selection> prev_lo, prev_hi;
  double drift = 0.0;
  for (double eps : {4e-3, 2e-3, 1e-3}) {
    out.epsilons.push_back(eps);
    const Selection hi = select_extremes(solver, cls, c + eps);
    const Selection lo = select_extremes(solver, cls, std::max(c - eps, c_floor));
    if (prev_lo && prev_hi) {
      // Compare points along the transverse direction only; the base slides along the curve.
      auto tdist = [&](const Vec2& x, const Vec2& y) {
        const double d = std::abs(transverse_coord(cls, x) - transverse_coord(cls, y));
        return std::min(d, 1.0 - d) / cls.length();
      };
      drift = std::max({tdist(lo.a, prev_lo->a), tdist(lo.b, prev_lo->b), tdist(hi.a, prev_hi->a), tdist(hi.b, prev_hi->b)});
    }
    prev_lo = lo;
    prev_hi = hi;
  }
  if (drift > 2.0 * grid_h + 2.5 / solver.options().starts / cls.length()) {
    throw ConvergenceError("extreme_orbits: selected minimizers do not converge as eps -> 0", drift, 0.0);
  }
  // Limits: from below for a, from above for b, re-relaxed at the level c itself.
  const StableNormResult ra = solver.relax_from(cls, c, prev_lo->a);
  const StableNormResult rb = solver.relax_from(cls, c, prev_hi->b);
  out.a = make_orbit(ra);
  out.b = make_orbit(rb);
  out.identical = prev_lo->identical && prev_hi->identical && torus_distance(ra.base, rb.base) < 2.0 * grid_h;
  out.degenerate_family = prev_lo->family || prev_hi->family;
  out.selection = prev_hi->how;
  return out;
}

void write_orbits_csv(const std::filesystem::path& path, const std::vector<PeriodicOrbit>& orbits) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << "orbit,index,x,y\n" << std::setprecision(12);
  for (std::size_t k = 0; k < orbits.size(); ++k)
    for (std::size_t i = 0; i < orbits[k].points.size(); ++i)
      os << k << ',' << i << ',' << orbits[k].points[i].x << ',' << orbits[k].points[i].y << '\n';
}

}  // namespace effham
