#include "effham/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "effham/barrier.hpp"
#include "effham/cell_pde.hpp"
#include "effham/genericity.hpp"
#include "effham/geometry.hpp"
#include "effham/maupertuis.hpp"

namespace effham {

namespace {

// Reference values here are computed from closed forms or plain quadrature and
// never call the solvers they check.

// Composite Simpson on [0, 1].
double simpson(const std::function<double(double)>& f, int n = 4000) {
  double s = f(0.0) + f(1.0);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(double(i) / n);
  return s / (3.0 * n);
}

// Effective Hamiltonian of 1/2 p^2 + a cos(2 pi s): flat at a up to the action of
// the separatrix, then the energy whose rotation action equals |p|.
double ref_1d(double a, double p) {
  const double top = std::abs(a);
  auto action = [&](double c) {
    return simpson([&](double s) { return std::sqrt(std::max(0.0, 2.0 * (c - a * std::cos(kTwoPi * s)))); });
  };
  p = std::abs(p);
  if (p <= action(top)) return top;
  double lo = top, hi = top + 0.5 * p * p + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (action(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct Solve {
  std::string pot;
  double vmin, vmax;
  Vec2 p;
  double hbar;
  bool pde;
};

struct State {
  AcceptanceOptions opts;
  std::vector<Solve> solves;
  std::vector<std::pair<double, double>> pairs;  // (pde, dual) at the same p
  std::vector<double> barriers;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << std::scientific << x;
  return os.str();
}

PdeEstimate pde(State& st, const std::string& name, const Potential& pot, const Extrema& ext, const Vec2& p) {
  PdeEstimate e = hbar_pde(pot, p, st.opts.cell_grid, st.opts.cell_grid);
  st.solves.push_back({name, ext.vmin, ext.vmax, p, e.hbar, true});
  return e;
}

double dual(State& st, const std::string& name, StableNormSolver& solver, const Vec2& p) {
  DualOptions d;
  d.lmax = st.opts.lmax;
  const double h = hbar_dual(solver, p, d).hbar;
  st.solves.push_back({name, solver.vmin(), solver.vmax(), p, h, false});
  return h;
}

CriterionResult free_case(State& st) {
  CriterionResult r{1, "free case", false, "", 0.0};
  const Potential zero = Potential::preset("zero");
  const Extrema ext = zero.extrema();
  StableNormSolver solver(zero);
  const auto t0 = std::chrono::steady_clock::now();
  double worst_pde = 0.0, worst_dual = 0.0;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) {
      const Vec2 p{-2.0 + 0.5 * i, -2.0 + 0.5 * j};
      const double exact = 0.5 * norm2(p);
      const double a = pde(st, "zero", zero, ext, p).hbar;
      const double b = dual(st, "zero", solver, p);
      st.pairs.emplace_back(a, b);
      worst_pde = std::max(worst_pde, std::abs(a - exact));
      worst_dual = std::max(worst_dual, std::abs(b - exact));
    }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = worst_pde <= 5e-3 && worst_dual <= 5e-3 && secs <= 120.0;
  r.detail = "max error pde " + fmt(worst_pde) + ", dual " + fmt(worst_dual) + " (tol 5e-3); " +
             std::to_string(static_cast<int>(secs)) + " s (limit 120 s)";
  return r;
}

CriterionResult separable(State& st) {
  CriterionResult r{2, "separable oracle", false, "", 0.0};
  const Potential sep = Potential::preset("sep");  // cos 2 pi x1 + 0.5 cos 2 pi x2
  const Extrema ext = sep.extrema();
  StableNormSolver solver(sep);
  std::mt19937_64 rng(st.opts.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_pde = 0.0, worst_dual = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double rad = 3.0 * std::sqrt(u(rng)), ang = kTwoPi * u(rng);
    const Vec2 p{rad * std::cos(ang), rad * std::sin(ang)};
    const double exact = ref_1d(1.0, p.x) + ref_1d(0.5, p.y);
    const double a = pde(st, "sep", sep, ext, p).hbar;
    const double b = dual(st, "sep", solver, p);
    st.pairs.emplace_back(a, b);
    worst_pde = std::max(worst_pde, std::abs(a - exact));
    worst_dual = std::max(worst_dual, std::abs(b - exact));
  }
  r.pass = worst_pde <= 1e-2 && worst_dual <= 1e-2;
  r.detail = "20 points, max error pde " + fmt(worst_pde) + ", dual " + fmt(worst_dual) + " (tol 1e-2)";
  return r;
}

CriterionResult flat_width(State& st) {
  CriterionResult r{3, "flat-set width", false, "", 0.0};
  StableNormSolver solver(Potential::preset("cos1"));
  const LevelSetPolygon f = flat_set(solver, st.opts.lmax);
  const double exact = 4.0 / kPi;
  const double right = f.support({1.0, 0.0}), left = f.support({-1.0, 0.0});
  const double err = std::max(std::abs(right - exact), std::abs(left - exact));
  r.pass = err <= 0.02;
  r.detail = "half-widths " + std::to_string(right) + " / " + std::to_string(left) + " vs 4/pi = " +
             std::to_string(exact) + ", error " + fmt(err) + " (tol 0.02)";
  return r;
}

CriterionResult properties(State& st) {
  CriterionResult r{4, "quadratic growth and minimum value", false, "", 0.0};
  // A p-grid containing 0 for two non-flat-free potentials, by both methods.
  double worst_min = 0.0;
  for (const std::string& name : std::vector<std::string>{"sep", "random:" + std::to_string(st.opts.seed) + ":3"}) {
    const Potential pot = Potential::from_source(name);
    const Extrema ext = pot.extrema();
    StableNormSolver solver(pot);
    double mn_pde = INFINITY, mn_dual = INFINITY;
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j) {
        const Vec2 p{0.5 * i, 0.5 * j};
        mn_pde = std::min(mn_pde, pde(st, name, pot, ext, p).hbar);
        mn_dual = std::min(mn_dual, dual(st, name, solver, p));
      }
    worst_min = std::max({worst_min, std::abs(mn_pde - ext.vmax), std::abs(mn_dual - ext.vmax)});
  }
  double worst_gap = 0.0;  // violation of 1/2|p|^2 + vmin <= hbar <= 1/2|p|^2 + vmax
  for (const Solve& s : st.solves) {
    const double q = 0.5 * norm2(s.p);
    worst_gap = std::max({worst_gap, q + s.vmin - s.hbar, s.hbar - q - s.vmax});
  }
  r.pass = worst_gap <= 1e-3 && worst_min <= 5e-3;
  r.detail = std::to_string(st.solves.size()) + " solves, worst sandwich violation " + fmt(std::max(worst_gap, 0.0)) +
             " (slack 1e-3); |min hbar - max V| " + fmt(worst_min) + " (tol 5e-3)";
  return r;
}

CriterionResult cross_method(State& st) {
  CriterionResult r{5, "cross-method gap", false, "", 0.0};
  const std::string name = "random:" + std::to_string(st.opts.seed) + ":3";
  const Potential pot = Potential::from_source(name);
  const Extrema ext = pot.extrema();
  StableNormSolver solver(pot);
  std::mt19937_64 rng(st.opts.seed + 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int accepted = 0, tried = 0;
  while (accepted < 20 && tried < 200) {
    ++tried;
    const double rad = 3.5 * std::sqrt(u(rng)), ang = kTwoPi * u(rng);
    if (0.5 * rad * rad < 0.3) continue;  // hbar <= 1/2|p|^2 + max V cannot reach max V + 0.3
    const Vec2 p{rad * std::cos(ang), rad * std::sin(ang)};
    const double a = pde(st, name, pot, ext, p).hbar;
    if (a < ext.vmax + 0.3) continue;
    const double b = dual(st, name, solver, p);
    st.pairs.emplace_back(a, b);
    worst = std::max(worst, std::abs(a - b));
    ++accepted;
  }
  double one_sided = -INFINITY;
  for (const auto& [a, b] : st.pairs) one_sided = std::max(one_sided, b - a);
  r.pass = accepted == 20 && worst <= 1e-2 && one_sided <= 1e-2;
  r.detail = std::to_string(accepted) + " points, max |pde - dual| " + fmt(worst) + " (tol 1e-2); max dual - pde over " +
             std::to_string(st.pairs.size()) + " pairs " + fmt(one_sided) + " (tol 1e-2)";
  return r;
}

// Stable norm of any integer vector by homogeneity from its primitive class.
double norm_of(const StableNormTable& t, int m, int n) {
  const int g = std::gcd(std::abs(m), std::abs(n));
  return g * t.entries.at(HomologyClass{m / g, n / g}).length;
}

CriterionResult stable_norm_structure(State& st) {
  CriterionResult r{6, "stable-norm structure", false, "", 0.0};
  const Potential pot = Potential::from_source("random:" + std::to_string(st.opts.seed) + ":3");
  StableNormSolver solver(pot);
  const int lmax = 4;
  const double c1 = solver.vmax() + 0.5, c2 = solver.vmax() + 1.0;
  const StableNormTable t1 = tabulate_stable_norms(solver, c1, lmax);
  const StableNormTable t2 = tabulate_stable_norms(solver, c2, lmax);
  bool sym = true, mono = true;
  double sandwich = 0.0, triangle = 0.0, reversed = 0.0;
  for (const auto* t : {&t1, &t2})
    for (const auto& [cls, e] : t->entries) {
      sym = sym && t->entries.at(-cls).length == e.length;
      const double ln = cls.length();
      sandwich = std::max({sandwich, std::sqrt(2.0 * (t->c - solver.vmax())) * ln - e.length,
                           e.length - std::sqrt(2.0 * (t->c - solver.vmin())) * ln});
    }
  for (const auto& [cls, e] : t1.entries) mono = mono && t2.entries.at(cls).length > e.length;
  // Independent solve of the reversed class.
  for (const HomologyClass cls : {HomologyClass{1, 0}, HomologyClass{1, 1}, HomologyClass{2, -1}}) {
    const double a = solver.evaluate(cls, c1).length, b = solver.evaluate(-cls, c1).length;
    reversed = std::max(reversed, std::abs(a - b) / a);
  }
  for (const auto* t : {&t1, &t2})
    for (const auto& [a, ea] : t->entries)
      for (const auto& [b, eb] : t->entries) {
        const int m = a.m + b.m, n = a.n + b.n;
        if ((m == 0 && n == 0) || std::abs(m) > 2 * lmax || std::abs(n) > 2 * lmax) continue;
        const int g = std::gcd(std::abs(m), std::abs(n));
        if (std::abs(m / g) > lmax || std::abs(n / g) > lmax) continue;
        triangle = std::max(triangle, norm_of(*t, m, n) - ea.length - eb.length);
      }
  r.pass = sym && reversed <= 1e-9 && mono && sandwich <= 0.0 && triangle <= 1e-6;
  r.detail = std::string("symmetry ") + (sym ? "exact" : "broken") + " (independent reversal " + fmt(reversed) +
             "); monotone " + (mono ? "yes" : "no") + "; sandwich violation " + fmt(std::max(sandwich, 0.0)) +
             "; triangle violation " + fmt(std::max(triangle, 0.0)) + " (slack 1e-6)";
  return r;
}

PeriodicOrbit line_orbit(StableNormSolver& s, double x, double c) {
  PeriodicOrbit o = make_orbit(s.relax_from({0, 1}, c, {x, 0.0}));
  if (o.cls != HomologyClass{0, 1}) o = o.reversed();
  return o;
}

CriterionResult barrier_axioms(State& st) {
  CriterionResult r{7, "barrier axioms", false, "", 0.0};
  const double c = 2.0;
  const double t_star = simpson([](double s) { return std::sqrt(2.0 * (2.0 - std::cos(kTwoPi * s))); });
  const Vec2 p0{0.0, t_star};
  const Potential cos2 = Potential::preset("cos2");
  const Potential bump = cos2.perturb_bump({0.5, 0.5}, 0.1, 0.2);

  StableNormSolver sf(cos2);
  const Corrector cf = solve_cell(cos2, p0, st.opts.cell_grid, st.opts.cell_grid);
  const AdditivityResult af =
      additivity_check(cos2, p0, c, &cf, {line_orbit(sf, 0.1, c), line_orbit(sf, 0.3, c), line_orbit(sf, 0.5, c)});
  const FlatCondition ff = check_flat_condition(sf, p0, {0, 1});

  StableNormSolver sb(bump);
  const Corrector cb = solve_cell(bump, p0, st.opts.cell_grid, st.opts.cell_grid);
  const AdditivityResult ab =
      additivity_check(bump, p0, c, &cb, {line_orbit(sb, 0.3, c), line_orbit(sb, 0.7, c), line_orbit(sb, 0.9, c)});

  double zero_barrier = std::max(ff.d_plus, ff.d_minus);
  for (double d : af.consecutive) zero_barrier = std::max(zero_barrier, std::abs(d));
  for (double d : af.prefix) zero_barrier = std::max(zero_barrier, std::abs(d));
  for (double d : af.consecutive) st.barriers.push_back(d);
  for (double d : af.prefix) st.barriers.push_back(d);
  for (double d : ab.consecutive) st.barriers.push_back(d);
  for (double d : ab.prefix) st.barriers.push_back(d);
  st.barriers.push_back(ff.d_plus);
  st.barriers.push_back(ff.d_minus);
  const double lowest = *std::min_element(st.barriers.begin(), st.barriers.end());
  r.pass = lowest >= -1e-3 && af.deviation <= 1e-3 && ab.deviation <= 1e-3 && zero_barrier <= 1e-3 &&
           ab.consecutive[0] > 1e-3 && std::abs(ab.consecutive[1]) <= 1e-3;
  r.detail = "min d_u " + fmt(lowest) + "; additivity deviation foliated " + fmt(af.deviation) + ", bump " +
             fmt(ab.deviation) + " (tol 1e-3); foliated barrier " + fmt(zero_barrier) + " (tol 1e-3); bump d(L1,L2) " +
             fmt(ab.consecutive[0]) + ", d(L2,L3) " + fmt(ab.consecutive[1]);
  return r;
}

CriterionResult bump_experiment(State& st) {
  CriterionResult r{8, "bump experiment", false, "", 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentOptions eo;
  eo.cell_grid = st.opts.cell_grid;
  eo.lmax = st.opts.lmax;
  const BumpExperiment ex = run_bump_experiment(Potential::preset("cos2"), eo);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double dp = std::abs(ex.after.hbar_pde - ex.before.hbar_pde);
  const double dd = std::abs(ex.after.hbar_dual - ex.before.hbar_dual);
  st.barriers.push_back(ex.after.flat.d_plus);
  st.barriers.push_back(ex.after.flat.d_minus);
  st.barriers.push_back(ex.before.flat.d_plus);
  st.barriers.push_back(ex.before.flat.d_minus);
  const bool edge = ex.after.edge.has_value() && !ex.before.edge.has_value();
  r.pass = dp <= 5e-3 && dd <= 5e-3 && edge && ex.edge_gap <= 0.05 && secs <= 300.0;
  r.detail = "hbar change pde " + fmt(dp) + ", dual " + fmt(dd) + " (tol 5e-3); new (0,1) edge " +
             (edge ? "yes, length " + std::to_string(ex.after.edge->length) : std::string("no")) +
             "; tau sum * |l| " + std::to_string(ex.after.flat.predicted_edge) + ", gap " +
             std::to_string(100.0 * ex.edge_gap) + "% (tol 5%); " + std::to_string(static_cast<int>(secs)) +
             " s (limit 300 s)";
  return r;
}

CriterionResult orbit_checks(State& st) {
  CriterionResult r{9, "orbit quality", false, "", 0.0};
  struct Case {
    std::string pot;
    double above;  // c - max V
    std::vector<HomologyClass> classes;
  };
  const std::string rnd = "random:" + std::to_string(st.opts.seed) + ":3";
  const std::vector<Case> cases{{"cos2", 1.5, {{1, 0}, {0, 1}, {1, 1}, {1, -1}, {2, 1}}},
                                {"sep", 0.5, {{1, 0}, {0, 1}, {1, 1}, {1, 2}}},
                                {"egg", 1.0, {{1, 0}, {1, 1}, {2, 1}}},
                                {rnd, 0.5, {{1, 0}, {0, 1}, {1, 1}}}};
  int total = 0, passed = 0;
  double e_worst = 0.0, el_worst = 0.0, d_worst = 0.0;
  std::string failures;
  auto check = [&](const std::string& name, const Potential& pot, const PeriodicOrbit& o, double grid_h) {
    const OrbitQuality q = orbit_quality(pot, o);
    ++total;
    e_worst = std::max(e_worst, q.energy_error / o.c);
    el_worst = std::max(el_worst, q.el_residual / std::max(q.el_scale, 1e-300));
    d_worst = std::max(d_worst, q.displacement_error / grid_h);
    if (q.ok(o.c, grid_h)) {
      ++passed;
    } else {
      failures += " " + name + "(" + std::to_string(o.cls.m) + "," + std::to_string(o.cls.n) + ")";
    }
  };
  for (const Case& cs : cases) {
    const Potential pot = Potential::from_source(cs.pot);
    StableNormSolver s(pot);
    const double c = s.vmax() + cs.above;
    for (const auto& cls : cs.classes) check(cs.pot, pot, make_orbit(s.evaluate(cls, c)), 1.0 / s.options().grid);
  }
  const Potential bump = Potential::preset("cos2").perturb_bump({0.5, 0.5}, 0.1, 0.2);
  StableNormSolver sb(bump);
  for (const HomologyClass cls : {HomologyClass{0, 1}, HomologyClass{1, 0}, HomologyClass{1, 1}})
    check("bump", bump, make_orbit(sb.evaluate(cls, 2.0)), 1.0 / sb.options().grid);
  r.pass = passed == total;
  r.detail = std::to_string(passed) + "/" + std::to_string(total) + " orbits pass; worst energy error/c " +
             fmt(e_worst) + " (tol 1e-2), EL/max|DV| " + fmt(el_worst) + " (tol 1e-2), displacement/cell " +
             fmt(d_worst) + " (tol 2)" + (failures.empty() ? "" : "; failing:" + failures);
  return r;
}

CriterionResult negative_control(State& st) {
  CriterionResult r{10, "negative control", false, "", 0.0};
  const Potential zero = Potential::preset("zero");
  const Extrema ext = zero.extrema();
  const Vec2 center{1.0, 0.5};
  const double radius = 0.5;
  const Vec2 q = center / norm(center);
  std::vector<Vec2> samples;
  std::vector<double> values;
  for (int i = -4; i <= 4; ++i)
    for (int j = -4; j <= 4; ++j) {
      const Vec2 p = center + (radius / 4.0) * Vec2{double(i), double(j)};
      if (norm(p - center) > radius) continue;
      samples.push_back(p);
      values.push_back(pde(st, "zero", zero, ext, p).hbar);
    }
  const PatchFit fit = fit_patch(center, radius, q, samples, values);
  const double floor = 0.1 * radius * radius;
  r.pass = fit.residual >= floor;
  r.detail = std::to_string(samples.size()) + " samples, fit residual " + fmt(fit.residual) +
             " must be >= 0.1 r^2 = " + fmt(floor);
  return r;
}

}  // namespace

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os.precision(1);
  os << (r.pass ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": " << r.detail << " (" << std::fixed
     << r.seconds << " s)";
  return os.str();
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts, std::ostream* log) {
  State st;
  st.opts = opts;
  // Property checks run after the criteria whose solves they audit.
  const std::vector<std::pair<int, CriterionResult (*)(State&)>> order{
      {1, free_case},     {2, separable},       {3, flat_width},   {5, cross_method},     {4, properties},
      {6, stable_norm_structure}, {7, barrier_axioms}, {8, bump_experiment}, {9, orbit_checks}, {10, negative_control}};
  std::vector<CriterionResult> out;
  for (const auto& [id, fn] : order) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), id) == opts.only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = fn(st);
    } catch (const std::exception& e) {
      r = {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what(), 0.0};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (log) *log << format_result(r) << std::endl;
    out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

}  // namespace effham
