#include "effham/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>

#include "effham/errors.hpp"

namespace effham {

double LevelSetPolygon::facet_length(std::size_t i) const {
  return norm(vertices[(i + 1) % vertices.size()] - vertices[i]);
}

double LevelSetPolygon::support(const Vec2& u) const {
  double s = -std::numeric_limits<double>::infinity();
  for (const auto& v : vertices) s = std::max(s, dot(v, u));
  return s;
}

bool LevelSetPolygon::contains(const Vec2& p, double tol) const {
  for (std::size_t i = 0; i < facet_classes.size(); ++i)
    if (dot(p, facet_classes[i].vec()) > facet_offsets[i] + tol * facet_classes[i].length()) return false;
  return !vertices.empty();
}

bool LevelSetPolygon::convex(double tol) const {
  const std::size_t n = vertices.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = vertices[i], b = vertices[(i + 1) % n], c = vertices[(i + 2) % n];
    if (cross(b - a, c - b) < -tol) return false;
  }
  return true;
}

std::optional<std::size_t> LevelSetPolygon::facet_of(const HomologyClass& cls) const {
  for (std::size_t i = 0; i < facet_classes.size(); ++i)
    if (facet_classes[i] == cls) return i;
  return std::nullopt;
}

void LevelSetPolygon::write_csv(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << "index,x,y,facet_m,facet_n,facet_length,c\n" << std::setprecision(12);
  for (std::size_t i = 0; i < vertices.size(); ++i)
    os << i << ',' << vertices[i].x << ',' << vertices[i].y << ',' << facet_classes[i].m << ',' << facet_classes[i].n
       << ',' << facet_length(i) << ',' << c << '\n';
}

namespace {

struct Labelled {
  Vec2 v;
  int facet;  // index into the constraint list; -1 for the initial box
};

std::vector<Labelled> clip(const std::vector<Labelled>& poly, const Vec2& l, double off, int label) {
  std::vector<Labelled> out;
  const std::size_t n = poly.size();
  auto side = [&](const Vec2& x) { return dot(x, l) - off; };
  const double eps = 1e-13 * std::max(1.0, std::abs(off));
  for (std::size_t i = 0; i < n; ++i) {
    const Labelled& a = poly[i];
    const Labelled& b = poly[(i + 1) % n];
    const double sa = side(a.v), sb = side(b.v);
    const bool ina = sa <= eps, inb = sb <= eps;
    if (ina) out.push_back(a);
    if (ina != inb) {
      const double t = sa / (sa - sb);
      const Vec2 x = a.v + t * (b.v - a.v);
      out.push_back({x, ina ? label : a.facet});
    }
  }
  // Drop repeated vertices.
  std::vector<Labelled> dedup;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Vec2 nxt = out[(i + 1) % out.size()].v;
    if (norm(out[i].v - nxt) > 1e-14 * std::max(1.0, norm(nxt))) dedup.push_back(out[i]);
  }
  return dedup;
}

}  // namespace

LevelSetPolygon polygon_from_table(const StableNormTable& table, int lmax) {
  std::vector<HomologyClass> cls;
  std::vector<double> off;
  double bound = 1.0;
  for (const auto& [k, e] : table.entries) {
    cls.push_back(k);
    off.push_back(e.length);
    bound = std::max(bound, 2.0 * e.length / k.length() + 1.0);
  }
  std::vector<Labelled> poly{{{-bound, -bound}, -1}, {{bound, -bound}, -1}, {{bound, bound}, -1}, {{-bound, bound}, -1}};
  for (std::size_t i = 0; i < cls.size(); ++i) {
    poly = clip(poly, cls[i].vec(), off[i], static_cast<int>(i));
    if (poly.size() < 3) throw Error("level polygon has empty interior; the stable-norm table is inconsistent");
  }
  LevelSetPolygon out;
  out.c = table.c;
  out.lmax = lmax;
  // Start at the facet with the smallest angle for a canonical ordering.
  std::size_t start = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (poly[i].facet < 0) throw Error("level polygon is not bounded by the tabulated classes");
    const Vec2 l = cls[poly[i].facet].vec();
    double ang = std::atan2(l.y, l.x);
    if (ang < 0) ang += kTwoPi;
    if (ang < best) {
      best = ang;
      start = i;
    }
  }
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Labelled& x = poly[(start + k) % poly.size()];
    out.vertices.push_back(x.v);
    out.facet_classes.push_back(cls[x.facet]);
    out.facet_offsets.push_back(off[x.facet]);
  }
  return out;
}

LevelSetPolygon level_polygon(StableNormSolver& solver, double c, int lmax) {
  return polygon_from_table(tabulate_stable_norms(solver, c, lmax), lmax);
}

LevelSetPolygon flat_set(StableNormSolver& solver, int lmax) {
  const double m = solver.options().margin;
  LevelSetPolygon outer = level_polygon(solver, solver.vmax() + m, lmax);
  MetricOptions half = solver.options();
  half.margin = 0.5 * m;
  StableNormSolver fine(solver.potential(), half);
  const LevelSetPolygon inner = level_polygon(fine, fine.vmax() + half.margin, lmax);
  double change = 0.0;
  for (int k = 0; k < 64; ++k) {
    const double a = kTwoPi * k / 64;
    const Vec2 u{std::cos(a), std::sin(a)};
    change = std::max(change, std::abs(outer.support(u) - inner.support(u)));
  }
  outer.outer_flat_approximation = true;
  outer.half_margin_change = change;
  return outer;
}

Vec2 bezout_partner(const HomologyClass& cls) {
  // Extended Euclid: m s + n t = 1, then b = (-t, s) satisfies m b.y - n b.x = 1.
  long r0 = cls.m, r1 = cls.n, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
  while (r1 != 0) {
    const long q = r0 / r1;
    r0 -= q * r1;
    std::swap(r0, r1);
    s0 -= q * s1;
    std::swap(s0, s1);
    t0 -= q * t1;
    std::swap(t0, t1);
  }
  if (r0 < 0) {
    s0 = -s0;
    t0 = -t0;
  }
  Vec2 b{double(-t0), double(s0)};
  const Vec2 l = cls.vec();
  const double k = std::round(-dot(b, l) / norm2(l));
  return b + k * l;
}

double refined_facet_length(StableNormSolver& solver, double c, const HomologyClass& cls, int level, Vec2* lo,
                            Vec2* hi) {
  const Vec2 l = cls.vec();
  const Vec2 b = bezout_partner(cls);
  const double l0 = solver.evaluate(cls.canonical(), c).length;
  const auto plus = HomologyClass(static_cast<int>(level * l.x + b.x), static_cast<int>(level * l.y + b.y));
  const auto minus = HomologyClass(static_cast<int>(level * l.x - b.x), static_cast<int>(level * l.y - b.y));
  const double lp = solver.evaluate(plus.canonical(), c).length;
  const double lm = solver.evaluate(minus.canonical(), c).length;
  const double ln = norm(l);
  const Vec2 t = perp(l) / ln;
  const Vec2 center = (l0 / norm2(l)) * l;
  const double sp = (lp - level * l0 - dot(center, b)) * ln;
  const double sm = -(lm - level * l0 + dot(center, b)) * ln;
  if (lo) *lo = center + sm * t;
  if (hi) *hi = center + sp * t;
  return sp - sm;
}

namespace {

// d from d + A/L + B/L^2 through three points.
double extrapolate3(const int* L, const double* E) {
  Eigen::Matrix3d M;
  Eigen::Vector3d r;
  for (int i = 0; i < 3; ++i) {
    const double x = 1.0 / L[i];
    M(i, 0) = 1.0;
    M(i, 1) = x;
    M(i, 2) = x * x;
    r(i) = E[i];
  }
  return M.colPivHouseholderQr().solve(r)(0);
}

}  // namespace

void EdgeReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << "status,m,n,qx,qy,p_x,p_y,p2_x,p2_y,length,polygon_length,previous_estimate\n" << std::setprecision(12);
  auto row = [&](const char* status, const EdgeRecord& e) {
    os << status << ',' << e.cls.m << ',' << e.cls.n << ',' << e.q.x << ',' << e.q.y << ',' << e.p.x << ',' << e.p.y
       << ',' << e.p2.x << ',' << e.p2.y << ',' << e.length << ',' << e.polygon_length << ',' << e.previous_estimate
       << '\n';
  };
  for (const auto& e : edges) row("edge", e);
  for (const auto& e : unresolved) row("unresolved", e);
}

EdgeReport detect_edges(StableNormSolver& solver, const LevelSetPolygon& poly, const EdgeOptions& opts) {
  if (opts.levels.size() < 4) throw InvalidArgument("detect_edges: at least four refinement levels are needed");
  EdgeReport rep;
  // The facet of -l is the mirror image of the facet of l.
  std::map<HomologyClass, std::pair<EdgeRecord, bool>> done;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const HomologyClass cls = poly.facet_classes[i];
    if (const auto it = done.find(-cls); it != done.end()) {
      EdgeRecord e = it->second.first;
      e.cls = cls;
      e.q = -e.q;
      e.p = -it->second.first.p2;
      e.p2 = -it->second.first.p;
      (it->second.second ? rep.edges : rep.unresolved).push_back(e);
      continue;
    }
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), cls) == opts.only.end() &&
        std::find(opts.only.begin(), opts.only.end(), -cls) == opts.only.end())
      continue;
    EdgeRecord e;
    e.cls = cls;
    e.q = cls.vec() / cls.length();
    e.p = poly.vertices[i];
    e.p2 = poly.vertices[(i + 1) % poly.size()];
    e.polygon_length = poly.facet_length(i);
    e.length = e.polygon_length;
    if (e.polygon_length <= opts.edge_tol) {
      rep.unresolved.push_back(e);
      continue;
    }
    bool rejected = false;
    double estimate = 0.0;
    for (std::size_t k = 0; k < opts.levels.size(); ++k) {
      Vec2 lo, hi;
      e.levels.push_back(opts.levels[k]);
      e.level_lengths.push_back(refined_facet_length(solver, poly.c, cls, opts.levels[k], &lo, &hi));
      if (k == 1 && 2.0 * e.level_lengths[1] - e.level_lengths[0] < 0.25 * opts.edge_tol) {
        // Two-point extrapolation d + A/L already far below the tolerance.
        e.length = 2.0 * e.level_lengths[1] - e.level_lengths[0];
        rejected = true;
        break;
      }
      if (k < 2) continue;
      e.previous_estimate = estimate;
      estimate = extrapolate3(&e.levels[k - 2], &e.level_lengths[k - 2]);
      e.length = estimate;
      e.p = lo;
      e.p2 = hi;
      // Facets that extrapolate to well below the tolerance at the first fit are artifacts.
      if (k == 2 && estimate < 0.5 * opts.edge_tol) {
        rejected = true;
        break;
      }
    }
    if (!rejected) {
      // Endpoints from the finest level, rescaled about the centre to the extrapolated length.
      if (e.level_lengths.back() > 0.0) {
        const Vec2 mid = 0.5 * (e.p + e.p2);
        const double s = e.length / e.level_lengths.back();
        e.p = mid + s * (e.p - mid);
        e.p2 = mid + s * (e.p2 - mid);
      }
      rejected = !(e.length > opts.edge_tol) ||
                 std::abs(e.length - e.previous_estimate) > opts.stability * std::abs(e.length);
    }
    (rejected ? rep.unresolved : rep.edges).push_back(e);
    done.emplace(cls, std::make_pair(e, !rejected));
  }
  return rep;
}

Subdifferential normal_and_subdifferential(StableNormSolver& solver, const Vec2& p, int lmax, double eps,
                                           bool with_orbits) {
  DualOptions dopts;
  dopts.lmax = lmax;
  dopts.margin = solver.options().margin;
  const DualResult d = hbar_dual(solver, p, dopts);
  if (!d.supporting || d.hbar - eps <= solver.vmax() + solver.options().margin) {
    throw InvalidArgument("normal_and_subdifferential: p must satisfy H-bar(p) > max V + margin + eps");
  }
  Subdifferential out;
  out.c = d.hbar;
  out.cls = d.supporting;
  const HomologyClass cls = *d.supporting;
  const double ln = cls.length();
  out.q = cls.vec() / ln;

  // Vertex test: a neighbouring class in angle order that is also active at p.
  auto classes = irreducible_classes(lmax);
  std::vector<HomologyClass> ring;
  for (const auto& k : classes) ring.push_back(k);
  for (const auto& k : classes) ring.push_back(-k);
  std::sort(ring.begin(), ring.end(), [](const HomologyClass& a, const HomologyClass& b) {
    return std::atan2(double(a.n), double(a.m)) < std::atan2(double(b.n), double(b.m));
  });
  const auto it = std::find(ring.begin(), ring.end(), cls);
  const std::size_t idx = static_cast<std::size_t>(it - ring.begin());
  out.cone_lo = out.cone_hi = out.q;
  for (int side : {-1, 1}) {
    const HomologyClass nb = ring[(idx + ring.size() + side) % ring.size()];
    const double slack = solver.evaluate(nb.canonical(), out.c).length - dot(p, nb.vec());
    if (slack < 1e-7 * nb.length()) {
      out.vertex = true;
      (side < 0 ? out.cone_lo : out.cone_hi) = nb.vec() / nb.length();
    }
  }

  const HomologyClass key = cls.canonical();
  const double l0 = solver.evaluate(key, out.c).length;
  const double lp = solver.evaluate(key, out.c + eps).length;
  const double lm = solver.evaluate(key, out.c - eps).length;
  const double t_right = (lp - l0) / eps;  // smaller period (concavity)
  const double t_left = (l0 - lm) / eps;
  out.a = ln / t_left;
  out.b = ln / t_right;
  if (with_orbits) {
    const ExtremeOrbits ex = extreme_orbits(solver, p, key, out.c);
    out.rotation_a = norm(ex.a.rotation);
    out.rotation_b = norm(ex.b.rotation);
  }
  return out;
}

double PatchFit::operator()(double t) const {
  if (knots.empty()) return 0.0;
  if (knots.size() == 1) return values.front();
  std::size_t i = static_cast<std::size_t>(std::upper_bound(knots.begin(), knots.end(), t) - knots.begin());
  i = std::clamp<std::size_t>(i, 1, knots.size() - 1);
  const double w = (t - knots[i - 1]) / (knots[i] - knots[i - 1]);
  return values[i - 1] + w * (values[i] - values[i - 1]);
}

namespace {

// Lawson-Hanson active set for min |A x - y| with x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
  const int n = static_cast<int>(A.cols());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-12 * std::max(1.0, A.norm() * y.norm());
  for (int outer = 0; outer < 3 * n + 10; ++outer) {
    const Eigen::VectorXd w = A.transpose() * (y - A * x);
    int jmax = -1;
    double wmax = tol;
    for (int j = 0; j < n; ++j)
      if (!passive[j] && w(j) > wmax) {
        wmax = w(j);
        jmax = j;
      }
    if (jmax < 0) break;
    passive[jmax] = true;
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      std::vector<int> P;
      for (int j = 0; j < n; ++j)
        if (passive[j]) P.push_back(j);
      Eigen::MatrixXd Ap(A.rows(), P.size());
      for (std::size_t k = 0; k < P.size(); ++k) Ap.col(k) = A.col(P[k]);
      const Eigen::VectorXd z = Ap.colPivHouseholderQr().solve(y);
      bool feasible = true;
      for (std::size_t k = 0; k < P.size(); ++k) feasible = feasible && z(k) > 0.0;
      if (feasible) {
        x.setZero();
        for (std::size_t k = 0; k < P.size(); ++k) x(P[k]) = z(k);
        break;
      }
      double alpha = 1.0;
      for (std::size_t k = 0; k < P.size(); ++k)
        if (z(k) <= 0.0) alpha = std::min(alpha, x(P[k]) / (x(P[k]) - z(k)));
      for (std::size_t k = 0; k < P.size(); ++k) {
        x(P[k]) += alpha * (z(k) - x(P[k]));
        if (x(P[k]) <= 1e-15) {
          x(P[k]) = 0.0;
          passive[P[k]] = false;
        }
      }
    }
  }
  return x;
}

}  // namespace

PatchFit fit_patch(const Vec2& center, double radius, const Vec2& q, const std::vector<Vec2>& samples,
                   const std::vector<double>& values, int bins) {
  if (samples.size() != values.size()) throw InvalidArgument("fit_patch: samples and values differ in size");
  if (samples.size() < 25) throw InvalidArgument("fit_patch: at least 25 samples are required");
  if (bins < 2) throw InvalidArgument("fit_patch: at least two bins are required");
  const double qn = norm(q);
  if (!(qn > 0.0)) throw InvalidArgument("fit_patch: direction must be nonzero");
  PatchFit fit;
  fit.center = center;
  fit.radius = radius;
  fit.q = q / qn;
  const int ns = static_cast<int>(samples.size());
  std::vector<double> t(ns);
  for (int i = 0; i < ns; ++i) t[i] = dot(fit.q, samples[i]);
  const double t0 = *std::min_element(t.begin(), t.end());
  const double t1 = *std::max_element(t.begin(), t.end());
  const double span = std::max(t1 - t0, 1e-12);
  for (int k = 0; k <= bins; ++k) fit.knots.push_back(t0 + span * k / bins);

  // f(t) = alpha + beta (t - t0) + sum_k gamma_k (t - t_k)_+, gamma >= 0 for convexity.
  const int nh = bins - 1;
  Eigen::MatrixXd F(ns, 2), H(ns, nh);
  Eigen::VectorXd y(ns);
  for (int i = 0; i < ns; ++i) {
    F(i, 0) = 1.0;
    F(i, 1) = t[i] - t0;
    for (int k = 0; k < nh; ++k) H(i, k) = std::max(0.0, t[i] - fit.knots[k + 1]);
    y(i) = values[i];
  }
  // Eliminate the unconstrained affine part by projection.
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(F);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(ns, 2);
  const Eigen::MatrixXd Hp = H - Q * (Q.transpose() * H);
  const Eigen::VectorXd yp = y - Q * (Q.transpose() * y);
  const Eigen::VectorXd gamma = nnls(Hp, yp);
  const Eigen::VectorXd ab = F.colPivHouseholderQr().solve(y - H * gamma);

  auto f = [&](double s) {
    double v = ab(0) + ab(1) * (s - t0);
    for (int k = 0; k < nh; ++k) v += gamma(k) * std::max(0.0, s - fit.knots[k + 1]);
    return v;
  };
  for (double k : fit.knots) fit.values.push_back(f(k));
  double sq = 0.0;
  for (int i = 0; i < ns; ++i) {
    const double r = std::abs(values[i] - f(t[i]));
    fit.residual = std::max(fit.residual, r);
    sq += r * r;
  }
  fit.rms = std::sqrt(sq / ns);
  return fit;
}

}  // namespace effham
