#include "effham/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>

#include "effham/errors.hpp"

namespace effham {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256: digest init failed");
  std::array<char, 1 << 16> buf;
  while (is) {
    is.read(buf.data(), buf.size());
    if (is.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

void Manifest::add(const std::filesystem::path& file) {
  if (std::find(files_.begin(), files_.end(), file) == files_.end()) files_.push_back(file);
}

nlohmann::json Manifest::to_json() const {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : files_) {
    const auto full = f.is_absolute() ? f : dir_ / f;
    files.push_back({{"path", std::filesystem::relative(full, dir_).generic_string()},
                     {"bytes", std::filesystem::file_size(full)},
                     {"sha256", sha256_file(full)}});
  }
  return {{"tool", "effham"},
          {"version", "1.0.0"},
          {"compiler", __VERSION__},
          {"cxx_standard", __cplusplus},
          {"inputs", inputs_},
          {"files", files}};
}

void Manifest::write() const {
  std::ofstream os(dir_ / "manifest.json");
  if (!os) throw Error("cannot write " + (dir_ / "manifest.json").string());
  os << to_json().dump(2) << '\n';
}

namespace {

// World rectangle mapped onto a pixel box, y pointing up.
struct Frame {
  double x0, x1, y0, y1;
  double px, py, w, h;
  double sx(double x) const { return px + (x - x0) / (x1 - x0) * w; }
  double sy(double y) const { return py + h - (y - y0) / (y1 - y0) * h; }
};

std::string color(double t) {
  // Five-stop blue-green-yellow ramp.
  static const double stops[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(t));
  const double f = t - i;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", int(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                int(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                int(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

void heatmap(std::ostream& os, const Frame& f, const Potential& pot, int nx, int ny) {
  std::vector<double> v(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      v[static_cast<std::size_t>(j) * nx + i] =
          pot.eval({f.x0 + (i + 0.5) / nx * (f.x1 - f.x0), f.y0 + (j + 0.5) / ny * (f.y1 - f.y0)});
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double span = *hi - *lo > 1e-12 ? *hi - *lo : 1.0;
  const double cw = f.w / nx, ch = f.h / ny;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      os << "<rect x=\"" << f.px + i * cw << "\" y=\"" << f.py + f.h - (j + 1) * ch << "\" width=\"" << cw + 0.05
         << "\" height=\"" << ch + 0.05 << "\" fill=\"" << color((v[static_cast<std::size_t>(j) * nx + i] - *lo) / span)
         << "\"/>\n";
}

void polyline(std::ostream& os, const Frame& f, const std::vector<Vec2>& pts, const std::string& stroke, double width,
              const std::string& extra = "") {
  if (pts.size() < 2) return;
  os << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\" " << extra
     << " points=\"";
  for (const Vec2& p : pts) os << f.sx(p.x) << ',' << f.sy(p.y) << ' ';
  os << "\"/>\n";
}

// Orbit reduced mod Z^2, broken where it wraps.
void torus_orbit(std::ostream& os, const Frame& f, const PeriodicOrbit& o, const std::string& stroke) {
  std::vector<Vec2> pts = o.points;
  pts.push_back(o.points.front() + o.shift());
  std::vector<Vec2> run;
  Vec2 offset;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2 w = wrap_unit(pts[i]);
    const Vec2 off = pts[i] - w;
    if (i > 0 && norm(off - offset) > 0.5) {
      run.push_back(pts[i] - offset);  // finish the segment across the boundary
      polyline(os, f, run, stroke, 1.5);
      run.clear();
      run.push_back(pts[i - 1] - off);
    }
    offset = off;
    run.push_back(w);
  }
  polyline(os, f, run, stroke, 1.5);
}

void bumps(std::ostream& os, const Frame& f, const Potential& pot, bool periodic) {
  for (const Bump& b : pot.bumps()) {
    const int k = periodic ? 0 : 3;
    for (int dx = -k - 1; dx <= k + 1; ++dx)
      for (int dy = -k - 1; dy <= k + 1; ++dy) {
        const Vec2 c = b.center + Vec2{double(dx), double(dy)};
        if (c.x + b.radius < f.x0 || c.x - b.radius > f.x1 || c.y + b.radius < f.y0 || c.y - b.radius > f.y1) continue;
        os << "<ellipse cx=\"" << f.sx(c.x) << "\" cy=\"" << f.sy(c.y) << "\" rx=\""
           << b.radius / (f.x1 - f.x0) * f.w << "\" ry=\"" << b.radius / (f.y1 - f.y0) * f.h
           << "\" fill=\"none\" stroke=\"white\" stroke-dasharray=\"3,2\"/>\n";
      }
  }
}

void text(std::ostream& os, double x, double y, const std::string& s, int size = 12) {
  os << "<text x=\"" << x << "\" y=\"" << y << "\" font-family=\"sans-serif\" font-size=\"" << size << "\">" << s
     << "</text>\n";
}

void open_svg(std::ostream& os, double w, double h) {
  os << std::setprecision(6) << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::ofstream open_file(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  return os;
}

const char* kPalette[] = {"#d62728", "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

void potential_panel(std::ostream& os, const Frame& f, const Potential& pot, const std::vector<PeriodicOrbit>& orbits,
                     int res) {
  heatmap(os, f, pot, res, res);
  bumps(os, f, pot, true);
  for (std::size_t k = 0; k < orbits.size(); ++k) torus_orbit(os, f, orbits[k], kPalette[k % 8]);
}

Frame polygon_frame(const std::vector<const LevelSetPolygon*>& polys, double px, double py, double size) {
  double r = 1e-3;
  for (const auto* p : polys)
    for (const Vec2& v : p->vertices) r = std::max({r, std::abs(v.x), std::abs(v.y)});
  r *= 1.1;
  return {-r, r, -r, r, px, py, size, size};
}

void polygon_panel(std::ostream& os, const Frame& f, const std::vector<const LevelSetPolygon*>& polys,
                   const std::vector<const EdgeReport*>& edges, bool labels) {
  os << "<line x1=\"" << f.sx(f.x0) << "\" y1=\"" << f.sy(0) << "\" x2=\"" << f.sx(f.x1) << "\" y2=\"" << f.sy(0)
     << "\" stroke=\"#bbb\"/>\n<line x1=\"" << f.sx(0) << "\" y1=\"" << f.sy(f.y0) << "\" x2=\"" << f.sx(0)
     << "\" y2=\"" << f.sy(f.y1) << "\" stroke=\"#bbb\"/>\n";
  for (std::size_t k = 0; k < polys.size(); ++k) {
    std::vector<Vec2> pts = polys[k]->vertices;
    if (!pts.empty()) pts.push_back(pts.front());
    polyline(os, f, pts, kPalette[k % 8], 1.2);
  }
  for (std::size_t k = 0; k < edges.size(); ++k)
    for (const auto& e : edges[k]->edges) polyline(os, f, {e.p, e.p2}, "black", 3.5, "stroke-linecap=\"round\"");
  if (labels && !polys.empty()) {
    const LevelSetPolygon& outer = *polys.back();
    for (std::size_t i = 0; i < outer.size(); ++i) {
      if (outer.facet_length(i) < 0.04 * (f.x1 - f.x0)) continue;
      const Vec2 mid = 0.5 * (outer.vertices[i] + outer.vertices[(i + 1) % outer.size()]);
      const HomologyClass& c = outer.facet_classes[i];
      const Vec2 out = mid + 0.04 * (f.x1 - f.x0) * (c.vec() / c.length());
      text(os, f.sx(out.x) - 10, f.sy(out.y) + 4, "(" + std::to_string(c.m) + "," + std::to_string(c.n) + ")", 9);
    }
  }
}

void barrier_panel(std::ostream& os, const Frame& f, const Potential& pot, const BarrierReport& rep) {
  heatmap(os, f, pot, 48, 96);
  bumps(os, f, pot, false);
  auto lifted = [&](const PeriodicOrbit& o) {
    std::vector<Vec2> pts;
    const Vec2 l = o.shift();
    for (int k = -1; k <= 1 + static_cast<int>(rep.sweep.empty() ? 3 : rep.sweep.back().window); ++k)
      for (const Vec2& x : o.points) pts.push_back(x + double(k) * l);
    return pts;
  };
  polyline(os, f, lifted(rep.xi1), kPalette[0], 1.5);
  polyline(os, f, lifted(rep.xi2), kPalette[1], 1.5);
  polyline(os, f, rep.geodesic, "white", 1.2);
}

Frame barrier_frame(const BarrierReport& rep, double px, double py, double w, double h) {
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()}, hi = -lo;
  auto grow = [&](const Vec2& p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  };
  for (const Vec2& p : rep.geodesic) grow(p);
  grow(rep.argmin_x);
  grow(rep.argmin_y);
  lo = lo - Vec2{0.5, 0.5};
  hi = hi + Vec2{0.5, 0.5};
  return {lo.x, hi.x, lo.y, hi.y, px, py, w, h};
}

}  // namespace

void write_potential_svg(const std::filesystem::path& path, const Potential& pot,
                         const std::vector<PeriodicOrbit>& orbits, int resolution) {
  auto os = open_file(path);
  open_svg(os, 420, 440);
  potential_panel(os, {0, 1, 0, 1, 10, 10, 400, 400}, pot, orbits, resolution);
  text(os, 10, 432, "V on the unit cell");
  os << "</svg>\n";
}

void write_levelset_svg(const std::filesystem::path& path, const std::vector<LevelSetPolygon>& polys,
                        const std::vector<EdgeReport>& edges) {
  std::vector<const LevelSetPolygon*> pp;
  for (const auto& p : polys) pp.push_back(&p);
  std::vector<const EdgeReport*> ee;
  for (const auto& e : edges) ee.push_back(&e);
  auto os = open_file(path);
  open_svg(os, 520, 560);
  polygon_panel(os, polygon_frame(pp, 10, 10, 500), pp, ee, true);
  std::ostringstream cap;
  cap << "level sets c =";
  for (const auto& p : polys) cap << ' ' << p.c;
  text(os, 10, 530, cap.str());
  text(os, 10, 548, "thick segments: detected edges");
  os << "</svg>\n";
}

void write_barrier_svg(const std::filesystem::path& path, const Potential& pot, const BarrierReport& rep) {
  const double h = 600;
  Frame f = barrier_frame(rep, 10, 10, 0, h);
  f.w = std::clamp(h * (f.x1 - f.x0) / (f.y1 - f.y0), 80.0, 600.0);
  auto os = open_file(path);
  open_svg(os, f.w + 20, h + 40);
  barrier_panel(os, f, pot, rep);
  std::ostringstream cap;
  cap << "d_u = " << rep.d_u;
  text(os, 10, h + 30, cap.str());
  os << "</svg>\n";
}

void write_triptych_svg(const std::filesystem::path& path, const BumpExperiment& ex, const LevelSetPolygon& before,
                        const LevelSetPolygon& after) {
  auto os = open_file(path);
  const double s = 360;
  open_svg(os, 3 * s + 40, s + 50);
  potential_panel(os, {0, 1, 0, 1, 10, 10, s, s}, ex.perturbed, {ex.xi_alpha, ex.xi_beta}, 64);
  text(os, 10, s + 30, "V with bump and extreme orbits");

  std::vector<const LevelSetPolygon*> pp{&before, &after};
  Frame pf = polygon_frame(pp, 20 + s, 10, s);
  // Zoom on p0, where the new edge sits.
  const double zoom = std::max(0.15, 4.0 * std::max(ex.after.flat.predicted_edge, 1e-2));
  pf.x0 = ex.p0.x - zoom;
  pf.x1 = ex.p0.x + zoom;
  pf.y0 = ex.p0.y - zoom;
  pf.y1 = ex.p0.y + zoom;
  std::vector<EdgeReport> er(1);
  if (ex.after.edge) er[0].edges.push_back(*ex.after.edge);
  polygon_panel(os, pf, pp, {&er[0]}, true);
  text(os, 20 + s, s + 30, "level sets before (red) and after (blue)");

  const BarrierReport& rep = ex.after.flat.plus;
  Frame bf = barrier_frame(rep, 30 + 2 * s, 10, s, s);
  barrier_panel(os, bf, ex.perturbed, rep);
  std::ostringstream cap;
  cap << "barrier geodesic, d_u = " << rep.d_u;
  text(os, 30 + 2 * s, s + 30, cap.str());
  os << "</svg>\n";
}

}  // namespace effham
