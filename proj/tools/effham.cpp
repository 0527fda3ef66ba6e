// effham: command-line front end.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "effham/acceptance.hpp"
#include "effham/barrier.hpp"
#include "effham/cell_pde.hpp"
#include "effham/errors.hpp"
#include "effham/genericity.hpp"
#include "effham/geometry.hpp"
#include "effham/io.hpp"
#include "effham/maupertuis.hpp"
#include "effham/parallel.hpp"

namespace fs = std::filesystem;
using namespace effham;

namespace {

struct RunConfig {
  std::string potential = "cos2";
  std::string method = "both";
  int grid = 128;
  int metric_grid = 256;
  int lmax = 8;
  double tol = 1e-4;
  std::string out = "effham_out";
  unsigned long long seed = 20240601;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Vec2 parse_vec(const std::string& s, const char* what) {
  std::istringstream is(s);
  double x = 0.0, y = 0.0;
  char comma = 0;
  if (!(is >> x >> comma >> y) || comma != ',' || !(is >> std::ws).eof() || !std::isfinite(x) || !std::isfinite(y))
    throw UsageError(std::string(what) + ": expected two numbers as x,y, got '" + s + "'");
  return {x, y};
}

HomologyClass parse_class(int m, int n) {
  if (m == 0 && n == 0) throw UsageError("class (m, n) must be nonzero");
  return {m, n};
}

MetricOptions metric_options(const RunConfig& cfg) {
  MetricOptions m;
  m.grid = cfg.metric_grid;
  return m;
}

CellOptions cell_options(const RunConfig& cfg) {
  CellOptions c;
  c.tol = cfg.tol;
  return c;
}

void validate(const RunConfig& cfg) {
  if (cfg.method != "pde" && cfg.method != "dual" && cfg.method != "both")
    throw UsageError("--method must be pde, dual or both");
  if (cfg.grid < 8 || cfg.metric_grid < 8) throw UsageError("--grid and --metric-grid must be at least 8");
  if (cfg.lmax < 1) throw UsageError("--lmax must be positive");
  if (!(cfg.tol > 0.0)) throw UsageError("--tol must be positive");
}

// Output directory with a manifest. Files registered here are removed if the
// command fails before commit().
class Output {
 public:
  Output(const RunConfig& cfg, const std::string& command) : dir_(cfg.out), manifest_(cfg.out) {
    fs::create_directories(dir_);
    manifest_.input("command", command);
    manifest_.input("potential_source", cfg.potential);
    manifest_.input("potential", Potential::from_source(cfg.potential).to_json());
    manifest_.input("method", cfg.method);
    manifest_.input("grid", cfg.grid);
    manifest_.input("metric_grid", cfg.metric_grid);
    manifest_.input("lmax", cfg.lmax);
    manifest_.input("tol", cfg.tol);
    manifest_.input("seed", cfg.seed);
  }
  ~Output() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& f : manifest_.files()) fs::remove(dir_ / f, ec);
    fs::remove(dir_ / "manifest.json", ec);
  }
  fs::path file(const std::string& name) {
    manifest_.add(name);
    return dir_ / name;
  }
  Manifest& manifest() { return manifest_; }
  void commit() {
    manifest_.write();
    committed_ = true;
    std::cout << "wrote " << manifest_.files().size() << " files and manifest.json to " << dir_.string() << '\n';
  }

 private:
  fs::path dir_;
  Manifest manifest_;
  bool committed_ = false;
};

std::string num(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

int cmd_eval(const RunConfig& cfg, const std::string& p_text) {
  const Vec2 p = parse_vec(p_text, "p");
  const Potential pot = Potential::from_source(cfg.potential);
  std::optional<PdeEstimate> est;
  std::optional<DualResult> dual;
  const bool do_pde = cfg.method != "dual", do_dual = cfg.method != "pde";
  parallel_for(2, [&](std::size_t k) {
    if (k == 0 && do_pde) est = hbar_pde(pot, p, cfg.grid, cfg.grid, cell_options(cfg));
    if (k == 1 && do_dual) {
      StableNormSolver solver(pot, metric_options(cfg));
      DualOptions d;
      d.lmax = cfg.lmax;
      dual = hbar_dual(solver, p, d);
    }
  });
  std::cout << "p = (" << num(p.x) << ", " << num(p.y) << ")\n";
  if (est) {
    const Corrector& corr = est->corrector;
    std::cout << "hbar_pde = " << num(est->hbar) << "  (grid " << cfg.grid << ": " << num(est->fine) << ", grid "
              << cfg.grid / 2 << ": " << num(est->coarse) << ")\n";
    std::cout << "residual_sup = " << num(corr.residual_sup) << "  iterations = " << corr.iterations << '\n';
    std::cout << "infmax_upper = " << num(infmax_bound(pot, p, &corr)) << '\n';
  }
  if (dual) {
    std::cout << "hbar_dual = " << num(dual->hbar) << "  supporting = ";
    if (dual->supporting)
      std::cout << '(' << dual->supporting->m << ", " << dual->supporting->n << ")\n";
    else
      std::cout << "none (flat set)\n";
  }
  if (est && dual) std::cout << "gap = " << num(std::abs(est->hbar - dual->hbar)) << '\n';
  return 0;
}

int cmd_levelset(const RunConfig& cfg, const std::vector<double>& levels) {
  const Potential pot = Potential::from_source(cfg.potential);
  Output out(cfg, "levelset");
  out.manifest().input("levels", levels);
  // Levels are written as they complete; a later failure removes the earlier files.
  std::vector<LevelSetPolygon> polys;
  StableNormSolver solver(pot, metric_options(cfg));
  for (double c : levels) {
    const StableNormTable table = tabulate_stable_norms(solver, c, cfg.lmax);
    polys.push_back(polygon_from_table(table, cfg.lmax));
    const std::string tag = "c" + num(c);
    table.write_csv(out.file("stable_norms_" + tag + ".csv"));
    polys.back().write_csv(out.file("levelset_" + tag + ".csv"));
    std::cout << "c = " << num(c) << ": " << polys.back().size() << " facets\n";
  }
  write_levelset_svg(out.file("levelset.svg"), polys);
  out.commit();
  return 0;
}

int cmd_edges(const RunConfig& cfg, double c, double edge_tol) {
  const Potential pot = Potential::from_source(cfg.potential);
  Output out(cfg, "edges");
  out.manifest().input("c", c);
  out.manifest().input("edge_tol", edge_tol);
  StableNormSolver solver(pot, metric_options(cfg));
  const LevelSetPolygon poly = level_polygon(solver, c, cfg.lmax);
  EdgeOptions eo;
  eo.edge_tol = edge_tol;
  const EdgeReport rep = detect_edges(solver, poly, eo);
  poly.write_csv(out.file("levelset.csv"));
  rep.write_csv(out.file("edges.csv"));
  write_levelset_svg(out.file("edges.svg"), {poly}, {rep});
  std::cout << rep.edges.size() << " edges, " << rep.unresolved.size() << " unresolved facets\n";
  for (const auto& e : rep.edges)
    std::cout << "  (" << e.cls.m << ", " << e.cls.n << ") length " << num(e.length) << '\n';
  out.commit();
  return 0;
}

int cmd_flatset(const RunConfig& cfg) {
  const Potential pot = Potential::from_source(cfg.potential);
  Output out(cfg, "flatset");
  StableNormSolver solver(pot, metric_options(cfg));
  const LevelSetPolygon f = flat_set(solver, cfg.lmax);
  f.write_csv(out.file("flatset.csv"));
  write_levelset_svg(out.file("flatset.svg"), {f});
  std::cout << "flat set at c = " << num(f.c) << ": " << f.size() << " vertices; support (1,0) "
            << num(f.support({1, 0})) << ", (0,1) " << num(f.support({0, 1})) << "; half-margin change "
            << num(f.half_margin_change) << '\n';
  out.commit();
  return 0;
}

int cmd_orbit(const RunConfig& cfg, double c, int m, int n) {
  const HomologyClass cls = parse_class(m, n);
  const Potential pot = Potential::from_source(cfg.potential);
  Output out(cfg, "orbit");
  out.manifest().input("c", c);
  out.manifest().input("class", {m, n});
  StableNormSolver solver(pot, metric_options(cfg));
  const PeriodicOrbit o = make_orbit(solver.evaluate(cls, c));
  const OrbitQuality q = orbit_quality(pot, o);
  write_orbits_csv(out.file("orbit.csv"), {o});
  write_potential_svg(out.file("orbit.svg"), pot, {o});
  std::cout << "length " << num(o.action) << "  period " << num(o.period) << "  energy error " << num(q.energy_error)
            << "  EL residual " << num(q.el_residual) << "  displacement error " << num(q.displacement_error)
            << "  self-intersects " << (q.self_intersects ? "yes" : "no") << '\n';
  out.commit();
  return q.ok(c, 1.0 / cfg.metric_grid) ? 0 : 1;
}

int cmd_barrier(const RunConfig& cfg, const std::string& p_text, int m, int n) {
  const Vec2 p0 = parse_vec(p_text, "p0");
  const HomologyClass cls = parse_class(m, n);
  const Potential pot = Potential::from_source(cfg.potential);
  Output out(cfg, "barrier");
  out.manifest().input("p0", {p0.x, p0.y});
  out.manifest().input("class", {m, n});
  StableNormSolver solver(pot, metric_options(cfg));
  const FlatCondition fc = check_flat_condition(solver, p0, cls);
  write_barrier_csv(out.file("barrier.csv"), {fc.plus, fc.minus});
  write_barrier_svg(out.file("barrier_plus.svg"), pot, fc.plus);
  write_barrier_svg(out.file("barrier_minus.svg"), pot, fc.minus);
  std::cout << "c0 = " << num(fc.c0) << "  d_plus = " << num(fc.d_plus) << "  d_minus = " << num(fc.d_minus)
            << "  tau_plus = " << num(fc.tau_plus) << "  tau_minus = " << num(fc.tau_minus)
            << "  predicted edge = " << num(fc.predicted_edge) << '\n';
  out.commit();
  return 0;
}

int cmd_perturb(const RunConfig& cfg, const ExperimentOptions& eo) {
  const Potential base = Potential::from_source(cfg.potential);
  Output out(cfg, "perturb");
  out.manifest().input("bump", {eo.bump.center.x, eo.bump.center.y, eo.bump.radius, eo.bump.depth});
  out.manifest().input("c0", eo.c0);
  out.manifest().input("class", {eo.cls.m, eo.cls.n});
  const BumpExperiment ex = run_bump_experiment(base, eo);
  ex.write_json(out.file("experiment.json"));
  StableNormSolver s0(ex.base, eo.metric), s1(ex.perturbed, eo.metric);
  const LevelSetPolygon before = level_polygon(s0, eo.c0, eo.lmax), after = level_polygon(s1, eo.c0, eo.lmax);
  before.write_csv(out.file("levelset_before.csv"));
  after.write_csv(out.file("levelset_after.csv"));
  write_barrier_csv(out.file("barrier.csv"), {ex.before.flat.plus, ex.before.flat.minus, ex.after.flat.plus,
                                              ex.after.flat.minus});
  write_triptych_svg(out.file("experiment.svg"), ex, before, after);
  std::cout << "p0 = (" << num(ex.p0.x) << ", " << num(ex.p0.y) << ")\n"
            << "before: hbar_pde " << num(ex.before.hbar_pde) << ", hbar_dual " << num(ex.before.hbar_dual)
            << ", edge " << (ex.before.edge ? num(ex.before.edge->length) : "none") << ", d_u " << num(ex.before.d_u)
            << "\nafter:  hbar_pde " << num(ex.after.hbar_pde) << ", hbar_dual " << num(ex.after.hbar_dual)
            << ", edge " << (ex.after.edge ? num(ex.after.edge->length) : "none") << ", d_u " << num(ex.after.d_u)
            << "\nclearance " << num(ex.orbit_clearance) << ", line margin " << num(ex.line_margin) << ", edge gap "
            << num(100.0 * ex.edge_gap) << "%\n";
  out.commit();
  return 0;
}

int cmd_selftest(const RunConfig& cfg, const std::vector<int>& only) {
  AcceptanceOptions ao;
  ao.cell_grid = cfg.grid;
  ao.lmax = cfg.lmax;
  ao.seed = cfg.seed;
  ao.only = only;
  const auto results = run_acceptance(ao, &std::cerr);
  bool all = true;
  for (const auto& r : results) {
    std::cout << format_result(r) << '\n';
    all = all && r.pass;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Effective Hamiltonians of periodic mechanical systems on the 2-torus"};
  app.require_subcommand(1);
  RunConfig cfg;
  app.add_option("--potential", cfg.potential, "preset name or JSON potential file")->capture_default_str();
  app.add_option("--method", cfg.method, "pde, dual or both")->capture_default_str();
  app.add_option("--grid", cfg.grid, "cell-problem nodes per axis (H-bar extrapolated with half of it)")->capture_default_str()->check(CLI::Range(64, 4096));
  app.add_option("--metric-grid", cfg.metric_grid, "metric resolution per unit cell")->capture_default_str();
  app.add_option("--lmax", cfg.lmax, "largest |m|, |n| of tabulated classes")->capture_default_str();
  app.add_option("--tol", cfg.tol, "cell-problem convergence tolerance")->capture_default_str();
  app.add_option("--out", cfg.out, "output directory")->capture_default_str();
  app.add_option("--seed", cfg.seed, "seed for sampled points")->capture_default_str();

  std::string p_text;
  auto* eval = app.add_subcommand("eval", "H-bar at one p");
  eval->add_option("p", p_text, "p as x,y")->required();

  std::vector<double> levels;
  auto* levelset = app.add_subcommand("levelset", "dual polygons of {H-bar <= c}");
  levelset->add_option("c", levels, "levels")->required();

  double c = 0.0, edge_tol = 0.05;
  auto* edges = app.add_subcommand("edges", "edges of S_c by Bezout refinement");
  edges->add_option("c", c, "level")->required();
  edges->add_option("--edge-tol", edge_tol, "shortest reported edge")->capture_default_str();

  auto* flatset = app.add_subcommand("flatset", "outer approximation of the flat set");

  int m = 1, n = 0;
  auto* orbit = app.add_subcommand("orbit", "minimal periodic orbit");
  orbit->add_option("c", c, "energy")->required();
  orbit->add_option("m", m)->required();
  orbit->add_option("n", n)->required();

  auto* barrier = app.add_subcommand("barrier", "barriers d_u to the neighbouring orbit at p0");
  barrier->add_option("p0", p_text, "p0 as x,y")->required();
  barrier->add_option("m", m)->required();
  barrier->add_option("n", n)->required();

  ExperimentOptions eo;
  std::string center_text = "0.5,0.5", class_text = "0,1";
  auto* perturb = app.add_subcommand("perturb", "bump experiment on a foliated base");
  perturb->add_option("--center", center_text, "bump center x,y")->capture_default_str();
  perturb->add_option("--radius", eo.bump.radius)->capture_default_str();
  perturb->add_option("--depth", eo.bump.depth)->capture_default_str();
  perturb->add_option("--c0", eo.c0, "level of p0")->capture_default_str();
  perturb->add_option("--class", class_text, "normal class m,n")->capture_default_str();
  perturb->add_option("--edge-tol", eo.edges.edge_tol)->capture_default_str();

  std::vector<int> only;
  auto* selftest = app.add_subcommand("selftest", "acceptance suite");
  selftest->add_option("--only", only, "criterion numbers to run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    validate(cfg);
    if (*eval) return cmd_eval(cfg, p_text);
    if (*levelset) return cmd_levelset(cfg, levels);
    if (*edges) return cmd_edges(cfg, c, edge_tol);
    if (*flatset) return cmd_flatset(cfg);
    if (*orbit) return cmd_orbit(cfg, c, m, n);
    if (*barrier) return cmd_barrier(cfg, p_text, m, n);
    if (*perturb) {
      eo.bump.center = parse_vec(center_text, "--center");
      const Vec2 k = parse_vec(class_text, "--class");
      if (k.x != std::round(k.x) || k.y != std::round(k.y)) throw UsageError("--class must be two integers");
      eo.cls = parse_class(static_cast<int>(k.x), static_cast<int>(k.y));
      eo.cell_grid = cfg.grid;
      eo.lmax = cfg.lmax;
      eo.metric = metric_options(cfg);
      return cmd_perturb(cfg, eo);
    }
    if (*selftest) return cmd_selftest(cfg, only);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
