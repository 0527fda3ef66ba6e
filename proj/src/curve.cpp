#include "effham/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "effham/errors.hpp"

namespace effham {

double ConformalMetric::g(const Vec2& x) const {
  const double d = c_ - pot_->eval(x);
  return d > 0.0 ? std::sqrt(2.0 * d) : 0.0;
}

MetricJet ConformalMetric::jet(const Vec2& x) const {
  const PotentialJet j = pot_->jet(x);
  MetricJet r;
  const double d = c_ - j.value;
  if (!(d > 0.0)) return r;
  r.g = std::sqrt(2.0 * d);
  const double ig = 1.0 / r.g, ig3 = ig * ig * ig;
  r.dg = -ig * j.grad;
  r.hg.xx = -ig * j.hess.xx - ig3 * j.grad.x * j.grad.x;
  r.hg.xy = -ig * j.hess.xy - ig3 * j.grad.x * j.grad.y;
  r.hg.yy = -ig * j.hess.yy - ig3 * j.grad.y * j.grad.y;
  return r;
}

namespace {

// Segment k runs from node k to node k+1; for closed curves the last one wraps by shift.
inline Vec2 seg_end(const std::vector<Vec2>& x, std::size_t k, const Vec2& shift, bool closed) {
  return (k + 1 < x.size()) ? x[k + 1] : (closed ? x[0] + shift : x[k]);
}

double length_impl(const ConformalMetric& m, const std::vector<Vec2>& x, const Vec2& shift, bool closed) {
  const std::size_t segs = closed ? x.size() : x.size() - 1;
  double total = 0.0;
  for (std::size_t k = 0; k < segs; ++k) {
    const Vec2 a = x[k], b = seg_end(x, k, shift, closed);
    const double g = m.g(0.5 * (a + b));
    if (g <= 0.0) return std::numeric_limits<double>::infinity();
    total += g * norm(b - a);
  }
  return total;
}

double period_impl(const ConformalMetric& m, const std::vector<Vec2>& x, const Vec2& shift, bool closed) {
  const std::size_t segs = closed ? x.size() : x.size() - 1;
  double total = 0.0;
  for (std::size_t k = 0; k < segs; ++k) {
    const Vec2 a = x[k], b = seg_end(x, k, shift, closed);
    total += norm(b - a) / m.g(0.5 * (a + b));
  }
  return total;
}

// u^T M v for M = r/4 Hg + s1 dg e^T + s2 e dg^T + s3 g (I - e e^T) / r.
inline double block(const MetricJet& j, const Vec2& e, double r, double s1, double s2, double s3, const Vec2& u,
                    const Vec2& v) {
  const double quad = 0.25 * r * j.hg.quad(u, v);
  const double t1 = s1 * dot(u, j.dg) * dot(e, v);
  const double t2 = s2 * dot(u, e) * dot(j.dg, v);
  const double t3 = s3 * j.g / r * (dot(u, v) - dot(u, e) * dot(e, v));
  return quad + t1 + t2 + t3;
}

CurveStats relax_impl(const ConformalMetric& m, std::vector<Vec2>& x, const Vec2& shift, bool closed, int max_iter,
                      double grad_tol) {
  const int n = static_cast<int>(x.size());
  CurveStats st;
  st.length = length_impl(m, x, shift, closed);
  if (!std::isfinite(st.length)) throw DegenerateMetricError("curve enters the forbidden region V >= c", 0.0);
  if (n < 3) return st;
  const int segs = closed ? n : n - 1;
  double mu = 1e-6;
  std::vector<Vec2> nrm(n);
  std::vector<double> A(n), B(n), C(n), G(n);
  for (; st.iterations < max_iter; ++st.iterations) {
    for (int i = 0; i < n; ++i) {
      Vec2 prev, next;
      if (closed) {
        prev = i > 0 ? x[i - 1] : x[n - 1] - shift;
        next = i + 1 < n ? x[i + 1] : x[0] + shift;
      } else {
        prev = x[std::max(i - 1, 0)];
        next = x[std::min(i + 1, n - 1)];
      }
      const Vec2 t = next - prev;
      nrm[i] = perp(t) / norm(t);
    }
    std::fill(A.begin(), A.end(), 0.0);
    std::fill(B.begin(), B.end(), 0.0);
    std::fill(C.begin(), C.end(), 0.0);
    std::fill(G.begin(), G.end(), 0.0);
    for (int k = 0; k < segs; ++k) {
      const int ia = k, ib = (k + 1) % n;
      const Vec2 a = x[k], b = seg_end(x, k, shift, closed);
      const Vec2 d = b - a;
      const double r = norm(d);
      const Vec2 e = d / r;
      const MetricJet j = m.jet(0.5 * (a + b));
      const Vec2 ga = 0.5 * r * j.dg - j.g * e;
      const Vec2 gb = 0.5 * r * j.dg + j.g * e;
      G[ia] += dot(ga, nrm[ia]);
      G[ib] += dot(gb, nrm[ib]);
      B[ia] += block(j, e, r, -0.5, -0.5, 1.0, nrm[ia], nrm[ia]);
      B[ib] += block(j, e, r, 0.5, 0.5, 1.0, nrm[ib], nrm[ib]);
      const double off = block(j, e, r, 0.5, -0.5, -1.0, nrm[ia], nrm[ib]);
      C[ia] += off;
      A[ib] += off;
    }
    // Open curves keep both endpoints fixed.
    const int lo = closed ? 0 : 1;
    const int hi = closed ? n : n - 1;
    double gmax = 0.0;
    for (int i = lo; i < hi; ++i) gmax = std::max(gmax, std::abs(G[i]));
    st.gradient = gmax;
    if (gmax < grad_tol) break;
    const int nu = hi - lo;
    bool accepted = false;
    for (int tries = 0; tries < 30; ++tries) {
      std::vector<double> a(nu), bb(nu), c(nu), rhs(nu);
      for (int q = 0; q < nu; ++q) {
        const int i = q + lo;
        a[q] = A[i];
        c[q] = C[i];
        bb[q] = B[i] + mu * std::max(1.0, std::abs(B[i]));
        rhs[q] = -G[i];
      }
      if (!closed) {
        a[0] = 0.0;
        c[nu - 1] = 0.0;
      }
      const std::vector<double> step = solve_tridiagonal(a, bb, c, rhs, closed);
      std::vector<Vec2> y = x;
      bool finite = true;
      for (int q = 0; q < nu; ++q) {
        if (!std::isfinite(step[q])) finite = false;
        y[q + lo] += step[q] * nrm[q + lo];
      }
      const double ly = finite ? length_impl(m, y, shift, closed) : std::numeric_limits<double>::infinity();
      if (ly <= st.length + 1e-14 * st.length) {
        x.swap(y);
        st.length = ly;
        mu = std::max(mu * 0.3, 1e-9);
        accepted = true;
        break;
      }
      mu *= 10.0;
    }
    if (!accepted) break;
  }
  st.period = period_impl(m, x, shift, closed);
  return st;
}

void resample_impl(std::vector<Vec2>& x, const Vec2& shift, bool closed, int n) {
  const std::size_t segs = closed ? x.size() : x.size() - 1;
  std::vector<double> s(segs + 1, 0.0);
  for (std::size_t k = 0; k < segs; ++k) s[k + 1] = s[k] + norm(seg_end(x, k, shift, closed) - x[k]);
  const int pieces = closed ? n : n - 1;
  std::vector<Vec2> y(n);
  std::size_t j = 0;
  for (int k = 0; k < n; ++k) {
    const double t = s[segs] * k / pieces;
    while (j + 1 < segs && s[j + 1] < t) ++j;
    const Vec2 a = x[j], b = seg_end(x, j, shift, closed);
    const double len = s[j + 1] - s[j];
    const double f = len > 0.0 ? std::clamp((t - s[j]) / len, 0.0, 1.0) : 0.0;
    y[k] = a + f * (b - a);
  }
  if (!closed) {
    y.front() = x.front();
    y.back() = x.back();
  }
  x.swap(y);
}

// Normal-offset Newton cannot move nodes along the curve, so rough starts with corners
// stall; alternating with arc-length resampling lets the nodes redistribute.
CurveStats settle_impl(const ConformalMetric& m, std::vector<Vec2>& x, const Vec2& shift, bool closed, int n) {
  CurveStats st;
  int iterations = 0;
  for (int round = 0; round < 16; ++round) {
    resample_impl(x, shift, closed, n);
    st = relax_impl(m, x, shift, closed, 20, 1e-12);
    iterations += st.iterations;
    if (st.gradient < 1e-10) break;
  }
  st.iterations = iterations;
  return st;
}

CurveStats polish_impl(const ConformalMetric& m, std::vector<Vec2>& x, const Vec2& shift, bool closed, int n) {
  const CurveStats coarse = settle_impl(m, x, shift, closed, n);
  const int n2 = closed ? 2 * n : 2 * n - 1;
  CurveStats fine = settle_impl(m, x, shift, closed, n2);
  CurveStats out = fine;
  out.length = (4.0 * fine.length - coarse.length) / 3.0;
  out.period = (4.0 * fine.period - coarse.period) / 3.0;
  out.iterations = coarse.iterations + fine.iterations;
  return out;
}

}  // namespace

double closed_length(const ConformalMetric& m, const std::vector<Vec2>& x, const Vec2& shift) {
  return length_impl(m, x, shift, true);
}
double closed_period(const ConformalMetric& m, const std::vector<Vec2>& x, const Vec2& shift) {
  return period_impl(m, x, shift, true);
}
double open_length(const ConformalMetric& m, const std::vector<Vec2>& x) { return length_impl(m, x, {}, false); }

CurveStats relax_closed(const ConformalMetric& m, std::vector<Vec2>& x, const Vec2& shift, int max_iter,
                        double grad_tol) {
  return relax_impl(m, x, shift, true, max_iter, grad_tol);
}
CurveStats relax_open(const ConformalMetric& m, std::vector<Vec2>& x, int max_iter, double grad_tol) {
  return relax_impl(m, x, {}, false, max_iter, grad_tol);
}
void resample_closed(std::vector<Vec2>& x, const Vec2& shift, int n) { resample_impl(x, shift, true, n); }
void resample_open(std::vector<Vec2>& x, int n) { resample_impl(x, {}, false, n); }

CurveStats polish_closed(const ConformalMetric& m, std::vector<Vec2>& x, const Vec2& shift, int n) {
  return polish_impl(m, x, shift, true, n);
}
CurveStats polish_open(const ConformalMetric& m, std::vector<Vec2>& x, int n) {
  return polish_impl(m, x, {}, false, n);
}

std::vector<double> solve_tridiagonal(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                                      std::vector<double> r, bool cyclic) {
  const int n = static_cast<int>(b.size());
  auto thomas = [n](const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c,
                    const std::vector<double>& r) {
    std::vector<double> cp(n), dp(n), x(n);
    cp[0] = c[0] / b[0];
    dp[0] = r[0] / b[0];
    for (int i = 1; i < n; ++i) {
      const double den = b[i] - a[i] * cp[i - 1];
      cp[i] = c[i] / den;
      dp[i] = (r[i] - a[i] * dp[i - 1]) / den;
    }
    x[n - 1] = dp[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = dp[i] - cp[i] * x[i + 1];
    return x;
  };
  if (!cyclic || n < 3) return thomas(a, b, c, r);
  // Sherman-Morrison for the corner entries a[0] and c[n-1].
  const double alpha = c[n - 1], beta = a[0], gamma = -b[0];
  b[0] -= gamma;
  b[n - 1] -= alpha * beta / gamma;
  std::vector<double> x = thomas(a, b, c, r);
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  const std::vector<double> z = thomas(a, b, c, u);
  const double fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
  for (int i = 0; i < n; ++i) x[i] -= fact * z[i];
  return x;
}

}  // namespace effham
