#include "effham/cell_pde.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "effham/errors.hpp"

namespace effham {

namespace {

struct Grid {
  int nx, ny;
  double hx, hy;
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
};

struct SweepStats {
  double ax = 0.0;
  double ay = 0.0;
};

// Numerical Hamiltonian at node (i,j); q are the one-sided slopes including p.
inline double godunov(double qxm, double qxp, double qym, double qyp) {
  const double ax = std::max(qxm, 0.0), bx = std::min(qxp, 0.0);
  const double ay = std::max(qym, 0.0), by = std::min(qyp, 0.0);
  return 0.5 * (std::max(ax * ax, bx * bx) + std::max(ay * ay, by * by));
}

inline double lax_friedrichs(double qxm, double qxp, double qym, double qyp, double ax, double ay) {
  const double mx = 0.5 * (qxm + qxp), my = 0.5 * (qym + qyp);
  return 0.5 * (mx * mx + my * my) - 0.5 * ax * (qxp - qxm) - 0.5 * ay * (qyp - qym);
}

// Evaluates H_num(p + Dw) at every node into out.
SweepStats hamiltonian(const Grid& g, const std::vector<double>& w, const Vec2& p, Scheme scheme, double ax,
                       double ay, std::vector<double>& out) {
  SweepStats s;
  for (int j = 0; j < g.ny; ++j) {
    const int jm = j == 0 ? g.ny - 1 : j - 1;
    const int jp = j + 1 == g.ny ? 0 : j + 1;
    for (int i = 0; i < g.nx; ++i) {
      const int im = i == 0 ? g.nx - 1 : i - 1;
      const int ip = i + 1 == g.nx ? 0 : i + 1;
      const double c = w[g.idx(i, j)];
      const double qxm = p.x + (c - w[g.idx(im, j)]) / g.hx;
      const double qxp = p.x + (w[g.idx(ip, j)] - c) / g.hx;
      const double qym = p.y + (c - w[g.idx(i, jm)]) / g.hy;
      const double qyp = p.y + (w[g.idx(i, jp)] - c) / g.hy;
      s.ax = std::max({s.ax, std::abs(qxm), std::abs(qxp)});
      s.ay = std::max({s.ay, std::abs(qym), std::abs(qyp)});
      out[g.idx(i, j)] =
          scheme == Scheme::Godunov ? godunov(qxm, qxp, qym, qyp) : lax_friedrichs(qxm, qxp, qym, qyp, ax, ay);
    }
  }
  return s;
}

std::string corrector_id(const Vec2& p, int nx, int ny, const CellOptions& o) {
  std::ostringstream os;
  os << "cell:" << (o.scheme == Scheme::Godunov ? "godunov" : "lax-friedrichs") << ':' << nx << 'x' << ny
     << ":p=(" << std::setprecision(17) << p.x << ',' << p.y << "):tol=" << o.tol;
  return os.str();
}

}  // namespace

Corrector solve_cell(const Potential& pot, const Vec2& p, int nx, int ny, const CellOptions& opts) {
  if (nx < 32 || ny < 32) throw InvalidArgument("solve_cell: resolution must be at least 32x32");
  if (!(opts.tol > 0.0) || !(opts.residual_tol > 0.0) || !(opts.checkpoint > 0.0) || !(opts.cfl > 0.0))
    throw InvalidArgument("solve_cell: tolerances, checkpoint and CFL must be positive");
  const Grid g{nx, ny, 1.0 / nx, 1.0 / ny};
  const ScalarField vf = pot.sample(nx, ny);
  const std::vector<double> V(vf.values().begin(), vf.values().end());
  const double vmax_grid = vf.max();
  const double osc = vmax_grid - vf.min();
  // A-priori Lipschitz bound |p + Dv| <= sqrt(|p|^2 + 2 osc V) keeps early steps monotone.
  const double floor_speed = std::sqrt(norm2(p) + 2.0 * osc) + 1e-12;
  const std::size_t n = V.size();

  std::vector<double> w(n, 0.0), h(n), w_check(n, 0.0);
  double ax = floor_speed, ay = floor_speed;
  double t = 0.0, t_check = 0.0;
  double prev = std::numeric_limits<double>::quiet_NaN();
  double est = prev;
  double lo = 0.0, hi = 0.0;
  int quiet = 0;
  int steps = 0;

  for (;;) {
    const SweepStats s = hamiltonian(g, w, p, opts.scheme, ax, ay, h);
    ax = std::max(s.ax, floor_speed);
    ay = std::max(s.ay, floor_speed);
    double dt = opts.cfl / (ax / g.hx + ay / g.hy);
    if (t + dt > t_check + opts.checkpoint) dt = t_check + opts.checkpoint - t;
    for (std::size_t k = 0; k < n; ++k) w[k] -= dt * (h[k] + V[k]);
    t += dt;
    ++steps;
    if (t < t_check + opts.checkpoint - 1e-12) continue;

    const double span = t - t_check;
    double sum = 0.0;
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (std::size_t k = 0; k < n; ++k) {
      const double rate = -(w[k] - w_check[k]) / span;
      sum += rate;
      lo = std::min(lo, rate);
      hi = std::max(hi, rate);
    }
    prev = est;
    est = sum / static_cast<double>(n);
    quiet = std::abs(est - prev) < opts.tol ? quiet + 1 : 0;
    w_check = w;
    t_check = t;
    if (quiet >= 2 && hi - lo <= 2.0 * opts.residual_tol) {
      // Accept only if the instantaneous discrete residual is below tolerance.
      hamiltonian(g, w, p, opts.scheme, ax, ay, h);
      double res = 0.0;
      for (std::size_t k = 0; k < n; ++k) res = std::max(res, std::abs(h[k] + V[k] - est));
      if (res <= opts.residual_tol) {
        Corrector c;
        c.p = p;
        c.hbar = est;
        c.v = ScalarField(nx, ny);
        double mean = 0.0;
        for (double x : w) mean += x;
        mean /= static_cast<double>(n);
        auto vals = c.v.values();
        for (std::size_t k = 0; k < n; ++k) vals[k] = w[k] - mean;
        c.residual_sup = res;
        c.bracket_lo = lo;
        c.bracket_hi = hi;
        c.iterations = steps;
        c.time = t;
        c.is_flat = est - vmax_grid < 2.0 * opts.tol;
        c.id = corrector_id(p, nx, ny, opts);
        return c;
      }
    }
    if (t >= opts.max_time) {
      std::ostringstream os;
      os << "solve_cell: no convergence by t=" << t << " (last estimates " << std::setprecision(10) << est << ", "
         << prev << "; node rates in [" << lo << ", " << hi << "]); the grid may be too coarse";
      throw ConvergenceError(os.str(), est, prev);
    }
  }
}

PdeEstimate hbar_pde(const Potential& pot, const Vec2& p, int nx, int ny, const CellOptions& opts) {
  if (nx < 64 || ny < 64) throw InvalidArgument("hbar_pde: resolution must be at least 64x64");
  PdeEstimate e;
  e.corrector = solve_cell(pot, p, nx, ny, opts);
  e.fine = e.corrector.hbar;
  e.coarse = solve_cell(pot, p, nx / 2, ny / 2, opts).hbar;
  e.hbar = 2.0 * e.fine - e.coarse;
  return e;
}

double infmax_bound(const Potential& pot, const Vec2& p, const Corrector* corr) {
  if (!corr) return 0.5 * norm2(p) + pot.extrema().vmax;
  const ScalarField& v = corr->v;
  const int nx = v.nx(), ny = v.ny();
  // Per axis the one-sided slope that the upwind flux selects; zero when neither is active.
  auto upwind = [](double qm, double qp) {
    const double a = std::max(qm, 0.0), b = std::min(qp, 0.0);
    return a * a >= b * b ? a : b;
  };
  ScalarField gx(nx, ny), gy(nx, ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double c = v(i, j);
      gx(i, j) = upwind(p.x + (c - v.at(i - 1, j)) * nx, p.x + (v.at(i + 1, j) - c) * nx);
      gy(i, j) = upwind(p.y + (c - v.at(i, j - 1)) * ny, p.y + (v.at(i, j + 1) - c) * ny);
    }
  // One pass of the tensor binomial filter [1 2 1]/4 as the mollifier.
  auto smooth = [nx, ny](const ScalarField& f) {
    ScalarField a(nx, ny), b(nx, ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) a(i, j) = 0.25 * (f.at(i - 1, j) + 2.0 * f(i, j) + f.at(i + 1, j));
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) b(i, j) = 0.25 * (a.at(i, j - 1) + 2.0 * a(i, j) + a.at(i, j + 1));
    return b;
  };
  const ScalarField sx = smooth(gx), sy = smooth(gy);
  double m = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Vec2 q{sx(i, j), sy(i, j)};
      m = std::max(m, 0.5 * norm2(q) + pot.eval({double(i) / nx, double(j) / ny}));
    }
  return m;
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  constexpr int panels = 16;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double x0 = a + (b - a) * k / panels, x1 = a + (b - a) * (k + 1) / panels;
    const double f0 = f(x0), f1 = f(x1), fm = f(0.5 * (x0 + x1));
    total += simpson_step(f, x0, x1, f0, fm, f1, (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1), tol / panels, 40);
  }
  return total;
}

double profile_max(const std::function<double(double)>& f) {
  constexpr int n = 4096;
  int best = 0;
  double bv = f(0.0);
  for (int i = 1; i < n; ++i) {
    const double v = f(double(i) / n);
    if (v > bv) {
      bv = v;
      best = i;
    }
  }
  // Golden-section refinement on the bracketing cells.
  double a = double(best - 1) / n, b = double(best + 1) / n;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-13) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return std::max({bv, fc, fd});
}

}  // namespace

double action_1d(const std::function<double(double)>& profile, double c) {
  auto integrand = [&](double s) { return std::sqrt(std::max(0.0, 2.0 * (c - profile(s)))); };
  return adaptive_simpson(integrand, 0.0, 1.0, 1e-12);
}

double oracle_1d(const std::function<double(double)>& profile, double p1) {
  const double vmax = profile_max(profile);
  const double target = std::abs(p1);
  if (target <= action_1d(profile, vmax)) return vmax;
  double lo = vmax, hi = vmax + 0.5 * target * target;
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (action_1d(profile, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double oracle_1d(const Potential& profile, double p1) {
  if (profile.independent_of(1)) return oracle_1d([&](double s) { return profile.eval({s, 0.0}); }, p1);
  if (profile.independent_of(0)) return oracle_1d([&](double s) { return profile.eval({0.0, s}); }, p1);
  throw InvalidArgument("oracle_1d: potential depends on both coordinates");
}

std::optional<double> separable_oracle(const Potential& pot, const Vec2& p) {
  const auto parts = pot.separate();
  if (!parts) return std::nullopt;
  return oracle_1d(parts->first, p.x) + oracle_1d(parts->second, p.y);
}

void write_solve_csv(const std::filesystem::path& path, const std::vector<SolveRecord>& rows) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << "p1,p2,hbar,residual_sup,iterations\n" << std::setprecision(12);
  for (const auto& r : rows) os << r.p.x << ',' << r.p.y << ',' << r.hbar << ',' << r.residual_sup << ',' << r.iterations << '\n';
}

}  // namespace effham
