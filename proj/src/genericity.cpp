#include "effham/genericity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "effham/cell_pde.hpp"
#include "effham/curve.hpp"
#include "effham/errors.hpp"
#include "effham/parallel.hpp"

namespace effham {

namespace {

nlohmann::json vec_json(const Vec2& v) { return nlohmann::json::array({v.x, v.y}); }

nlohmann::json edge_json(const std::optional<EdgeRecord>& e) {
  if (!e) return nullptr;
  return {{"class", {e->cls.m, e->cls.n}}, {"p", vec_json(e->p)},         {"p2", vec_json(e->p2)},
          {"length", e->length},          {"polygon_length", e->polygon_length},
          {"levels", e->levels},          {"level_lengths", e->level_lengths},
          {"previous_estimate", e->previous_estimate}};
}

std::optional<EdgeRecord> edge_of(const EdgeReport& rep, const HomologyClass& cls) {
  for (const auto& e : rep.edges)
    if (e.cls == cls) return e;
  return std::nullopt;
}

double point_segment(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double t = std::clamp(dot(x - a, d) / std::max(norm2(d), 1e-300), 0.0, 1.0);
  return norm(x - (a + t * d));
}

// Point of S_c whose normal is q: the facet midpoint, or the vertex maximizing p.q.
std::pair<Vec2, bool> point_with_normal(const LevelSetPolygon& poly, const HomologyClass& cls) {
  if (const auto i = poly.facet_of(cls)) {
    return {0.5 * (poly.vertices[*i] + poly.vertices[(*i + 1) % poly.size()]), true};
  }
  const Vec2 q = cls.vec() / cls.length();
  Vec2 best = poly.vertices.front();
  for (const Vec2& v : poly.vertices)
    if (dot(v, q) > dot(best, q)) best = v;
  return {best, false};
}

ExperimentSide run_side(const Potential& pot, const Vec2& p0, const ExperimentOptions& opts) {
  ExperimentSide side;
  StableNormSolver solver(pot, opts.metric);
  const PdeEstimate est = hbar_pde(pot, p0, opts.cell_grid, opts.cell_grid);
  side.hbar_pde = est.hbar;
  side.pde_residual = est.corrector.residual_sup;
  DualOptions dopts;
  dopts.lmax = opts.lmax;
  dopts.margin = opts.metric.margin;
  side.hbar_dual = hbar_dual(solver, p0, dopts).hbar;

  const LevelSetPolygon poly = level_polygon(solver, opts.c0, opts.lmax);
  EdgeOptions eo = opts.edges;
  eo.only = {opts.cls};
  const EdgeReport edges = detect_edges(solver, poly, eo);
  if (auto e = edge_of(edges, opts.cls)) {
    // Keep the edge only if p0 lies on it.
    const Vec2 dir = e->p2 - e->p;
    const double s = dot(p0 - e->p, dir) / norm2(dir);
    const double off = std::abs(dot(p0 - e->p, e->q));
    if (s >= 0.0 && s <= 1.0 && off <= 1e-6 * std::max(1.0, norm(p0))) side.edge = e;
  }
  side.flat = check_flat_condition(solver, p0, opts.cls, opts.barrier);
  side.d_u = side.flat.d_plus + side.flat.d_minus;
  return side;
}

nlohmann::json side_json(const ExperimentSide& s) {
  return {{"hbar_pde", s.hbar_pde},
          {"hbar_dual", s.hbar_dual},
          {"pde_residual", s.pde_residual},
          {"edge", edge_json(s.edge)},
          {"d_plus", s.flat.d_plus},
          {"d_minus", s.flat.d_minus},
          {"tau_plus", s.flat.tau_plus},
          {"tau_minus", s.flat.tau_minus},
          {"predicted_edge", s.flat.predicted_edge},
          {"d_u", s.d_u}};
}

// Maupertuis length of the straight closed line through x in the direction of cls.
double line_length(const Potential& pot, double c, const HomologyClass& cls, const Vec2& x, int nodes) {
  const ConformalMetric metric(pot, c);
  std::vector<Vec2> curve(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) curve[static_cast<std::size_t>(i)] = x + (double(i) / nodes) * cls.vec();
  return closed_length(metric, curve, cls.vec());
}

}  // namespace

nlohmann::json MembershipProbe::to_json() const {
  nlohmann::json v = nlohmann::json::array();
  for (const auto& x : verdicts) {
    v.push_back({{"c", x.c},
                 {"p", vec_json(x.p)},
                 {"on_facet", x.on_facet},
                 {"is_linear", x.is_linear},
                 {"edge", edge_json(x.edge)},
                 {"d_u", x.d_u},
                 {"tau_plus", x.tau_plus},
                 {"tau_minus", x.tau_minus},
                 {"routes_agree", x.routes_agree}});
  }
  return {{"class", {cls.m, cls.n}}, {"q", vec_json(q)}, {"r", r}, {"levels", c_list}, {"skipped", skipped},
          {"verdicts", v}};
}

MembershipProbe probe_membership(const Potential& pot, const HomologyClass& cls, double r,
                                 const std::vector<double>& levels, const ProbeOptions& opts,
                                 const MetricOptions& mopts) {
  if (r <= 0.0) throw InvalidArgument("probe_membership: r must be positive");
  MembershipProbe probe;
  probe.cls = cls;
  probe.q = cls.vec() / cls.length();
  probe.r = r;
  StableNormSolver solver(pot, mopts);
  for (double c : levels) {
    if (c < solver.vmax() + r) {
      probe.skipped.push_back(c);
      continue;
    }
    probe.c_list.push_back(c);
    MembershipVerdict v;
    v.c = c;
    const LevelSetPolygon poly = level_polygon(solver, c, opts.lmax);
    std::tie(v.p, v.on_facet) = point_with_normal(poly, cls);
    EdgeOptions eo = opts.edges;
    eo.only = {cls};
    v.edge = edge_of(detect_edges(solver, poly, eo), cls);
    const FlatCondition fc = check_flat_condition(solver, v.p, cls, opts.barrier);
    v.tau_plus = fc.tau_plus;
    v.tau_minus = fc.tau_minus;
    v.d_u = fc.d_plus + fc.d_minus;
    const bool barrier_linear = v.tau_plus + v.tau_minus > opts.tau_tol;
    v.is_linear = v.edge.has_value() || barrier_linear;
    v.routes_agree = v.edge.has_value() == barrier_linear;
    probe.verdicts.push_back(std::move(v));
  }
  return probe;
}

double ball_clearance(const PeriodicOrbit& orbit, const Vec2& center, double radius) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = orbit.points.size();
  const Vec2 shift = orbit.shift();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = orbit.points[i];
    const Vec2 b = i + 1 < n ? orbit.points[i + 1] : orbit.points.front() + shift;
    // Nearest integer translate of the centre to this segment.
    const Vec2 mid = 0.5 * (a + b);
    const Vec2 c0 = mid + min_image(center - mid);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy) best = std::min(best, point_segment(c0 + Vec2{double(dx), double(dy)}, a, b));
  }
  return best - radius;
}

nlohmann::json BumpExperiment::to_json() const {
  return {{"base", base.to_json()},
          {"perturbed", perturbed.to_json()},
          {"class", {cls.m, cls.n}},
          {"q", vec_json(q)},
          {"p0", vec_json(p0)},
          {"c0", c0},
          {"t_star", t_star},
          {"bump", {{"center", vec_json(bump.center)}, {"radius", bump.radius}, {"depth", bump.depth}}},
          {"before", side_json(before)},
          {"after", side_json(after)},
          {"xi_alpha_base", vec_json(xi_alpha.points.front())},
          {"xi_beta_base", vec_json(xi_beta.points.front())},
          {"orbit_selection", orbit_selection},
          {"orbit_clearance", orbit_clearance},
          {"line_margin", line_margin},
          {"edge_gap", edge_gap}};
}

void BumpExperiment::write_json(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << to_json().dump(2) << '\n';
}

BumpExperiment run_bump_experiment(const Potential& base, const ExperimentOptions& opts) {
  if (opts.bump.depth <= 0.0 || opts.bump.depth > 0.5)
    throw InvalidArgument("run_bump_experiment: depth must lie in (0, 0.5]");
  BumpExperiment ex;
  ex.base = base;
  ex.cls = opts.cls;
  ex.q = opts.cls.vec() / opts.cls.length();
  ex.c0 = opts.c0;
  ex.bump = opts.bump;

  StableNormSolver solver(base, opts.metric);
  ex.t_star = solver.evaluate(opts.cls, opts.c0).length;
  ex.p0 = (ex.t_star / norm2(opts.cls.vec())) * opts.cls.vec();

  // Extreme orbits: among the base minimizers, the one farthest from the bump ball.
  // For a foliated base this single orbit bounds the bump column on both sides.
  const auto mins = solver.all_minimizers(opts.cls, opts.c0);
  double lmin = std::numeric_limits<double>::infinity();
  for (const auto& m : mins) lmin = std::min(lmin, m.length);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t pick = 0, count = 0;
  for (std::size_t i = 0; i < mins.size(); ++i) {
    if (mins[i].length > lmin * (1.0 + 1e-9)) continue;
    ++count;
    const double cl = ball_clearance(make_orbit(mins[i]), opts.bump.center, opts.bump.radius);
    if (cl > best) {
      best = cl;
      pick = i;
    }
  }
  ex.xi_alpha = make_orbit(mins[pick]);
  if (ex.xi_alpha.cls != opts.cls) ex.xi_alpha = ex.xi_alpha.reversed();
  ex.xi_beta = ex.xi_alpha;
  ex.orbit_selection = count > 1 ? "minimizers foliate; the one of largest bump clearance bounds the column on both sides"
                                 : "unique minimizer";
  ex.orbit_clearance = std::min(ball_clearance(ex.xi_alpha, opts.bump.center, opts.bump.radius),
                                ball_clearance(ex.xi_beta, opts.bump.center, opts.bump.radius));
  if (ex.orbit_clearance < opts.bump.radius) {
    const Vec2 b = ex.xi_alpha.points.front();
    throw InvalidArgument("run_bump_experiment: bump ball within its radius of the extreme orbit through (" +
                          std::to_string(b.x) + ", " + std::to_string(b.y) + ")");
  }

  ex.perturbed = base.perturb_bump(opts.bump.center, opts.bump.radius, opts.bump.depth);
  std::vector<ExperimentSide> sides(2);
  parallel_for(2, [&](std::size_t i) { sides[i] = run_side(i == 0 ? base : ex.perturbed, ex.p0, opts); });
  ex.before = std::move(sides[0]);
  ex.after = std::move(sides[1]);

  const int nodes = std::max(64, static_cast<int>(std::lround(256 * opts.cls.length())));
  ex.line_margin = line_length(ex.perturbed, opts.c0, opts.cls, opts.bump.center, nodes) - ex.t_star;
  if (ex.after.edge && ex.after.edge->length > 0.0)
    ex.edge_gap = std::abs(ex.after.flat.predicted_edge - ex.after.edge->length) / ex.after.edge->length;
  return ex;
}

nlohmann::json DepthSweep::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points)
    pts.push_back({{"depth", p.depth}, {"d_u", p.d_u}, {"hbar_pde", p.hbar_pde}, {"hbar_dual", p.hbar_dual}});
  return {{"reference_hbar", reference_hbar}, {"points", pts}, {"monotone", monotone},
          {"max_hbar_change", max_hbar_change}};
}

DepthSweep depth_sweep(const Potential& base, const std::vector<double>& depths, const ExperimentOptions& opts) {
  DepthSweep sw;
  StableNormSolver solver(base, opts.metric);
  const double t_star = solver.evaluate(opts.cls, opts.c0).length;
  const Vec2 p0 = (t_star / norm2(opts.cls.vec())) * opts.cls.vec();
  sw.reference_hbar = opts.c0;
  sw.points.resize(depths.size());
  parallel_for(depths.size(), [&](std::size_t k) {
    if (depths[k] <= 0.0 || depths[k] > 0.5) throw InvalidArgument("depth_sweep: depths must lie in (0, 0.5]");
    const Potential pot = base.perturb_bump(opts.bump.center, opts.bump.radius, depths[k]);
    StableNormSolver s(pot, opts.metric);
    DepthPoint& pt = sw.points[k];
    pt.depth = depths[k];
    const FlatCondition fc = check_flat_condition(s, p0, opts.cls, opts.barrier);
    pt.d_u = fc.d_plus + fc.d_minus;
    pt.hbar_pde = hbar_pde(pot, p0, opts.cell_grid, opts.cell_grid).hbar;
    DualOptions dopts;
    dopts.lmax = opts.lmax;
    dopts.margin = opts.metric.margin;
    pt.hbar_dual = hbar_dual(s, p0, dopts).hbar;
  });
  std::vector<std::size_t> order(depths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return depths[a] < depths[b]; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (sw.points[order[i]].d_u < sw.points[order[i - 1]].d_u - 1e-3) sw.monotone = false;
  for (const auto& p : sw.points)
    sw.max_hbar_change = std::max({sw.max_hbar_change, std::abs(p.hbar_pde - sw.reference_hbar),
                                   std::abs(p.hbar_dual - sw.reference_hbar)});
  return sw;
}

}  // namespace effham
