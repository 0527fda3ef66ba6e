#include "effham/fast_marching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "effham/errors.hpp"

namespace effham {

CoverGrid::CoverGrid(const CoverRect& rect, int per_unit) : origin_(rect.lo), h_(1.0 / per_unit) {
  if (per_unit < 4) throw InvalidArgument("cover grid needs at least 4 nodes per unit");
  nx_ = static_cast<int>(std::ceil((rect.hi.x - rect.lo.x) * per_unit - 1e-9)) + 1;
  ny_ = static_cast<int>(std::ceil((rect.hi.y - rect.lo.y) * per_unit - 1e-9)) + 1;
  if (nx_ < 2 || ny_ < 2) throw InvalidArgument("cover rectangle is empty");
  data_.assign(static_cast<std::size_t>(nx_) * ny_, std::numeric_limits<double>::infinity());
}

bool CoverGrid::contains(const Vec2& x) const {
  return x.x >= origin_.x && x.y >= origin_.y && x.x <= origin_.x + (nx_ - 1) * h_ &&
         x.y <= origin_.y + (ny_ - 1) * h_;
}

double CoverGrid::interpolate(const Vec2& x) const {
  const double fx = std::clamp((x.x - origin_.x) / h_, 0.0, nx_ - 1.000001);
  const double fy = std::clamp((x.y - origin_.y) / h_, 0.0, ny_ - 1.000001);
  const int i = static_cast<int>(fx), j = static_cast<int>(fy);
  const double tx = fx - i, ty = fy - j;
  return (1 - tx) * (1 - ty) * (*this)(i, j) + tx * (1 - ty) * (*this)(i + 1, j) + (1 - tx) * ty * (*this)(i, j + 1) +
         tx * ty * (*this)(i + 1, j + 1);
}

Vec2 CoverGrid::gradient(const Vec2& x) const {
  const double fx = std::clamp((x.x - origin_.x) / h_, 0.0, nx_ - 1.000001);
  const double fy = std::clamp((x.y - origin_.y) / h_, 0.0, ny_ - 1.000001);
  const int i = static_cast<int>(fx), j = static_cast<int>(fy);
  const double tx = fx - i, ty = fy - j;
  const double a = (*this)(i, j), b = (*this)(i + 1, j), c = (*this)(i, j + 1), d = (*this)(i + 1, j + 1);
  return {((1 - ty) * (b - a) + ty * (d - c)) / h_, ((1 - tx) * (c - a) + tx * (d - b)) / h_};
}

namespace {

void require_level(const Potential& pot, double c, double margin) {
  const double vmax = pot.extrema().vmax;
  if (c < vmax + margin) {
    std::ostringstream os;
    os << "energy c = " << c << " is within the degeneracy margin of max V = " << vmax << " (c - max V = "
       << c - vmax << ", required >= " << margin << ")";
    throw DegenerateMetricError(os.str(), c - vmax);
  }
}

}  // namespace

CoverGrid distance_field(const Potential& pot, double c, const std::vector<Seed>& seeds, const CoverRect& rect,
                         int per_unit, double margin) {
  require_level(pot, c, margin);
  CoverGrid w(rect, per_unit);
  const int nx = w.nx(), ny = w.ny();
  const double h = w.h();
  std::vector<double> f(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) f[static_cast<std::size_t>(j) * nx + i] = std::sqrt(2.0 * (c - pot.eval(w.node(i, j))));
  enum : unsigned char { Far, Trial, Known };
  std::vector<unsigned char> state(f.size(), Far);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  auto id = [nx](int i, int j) { return static_cast<std::size_t>(j) * nx + i; };

  for (const auto& [pt, val] : seeds) {
    const double fx = (pt.x - w.origin().x) / h, fy = (pt.y - w.origin().y) / h;
    const int i0 = static_cast<int>(std::floor(fx)), j0 = static_cast<int>(std::floor(fy));
    for (int dj = 0; dj <= 1; ++dj)
      for (int di = 0; di <= 1; ++di) {
        const int i = i0 + di, j = j0 + dj;
        if (i < 0 || j < 0 || i >= nx || j >= ny) continue;
        const Vec2 q = w.node(i, j);
        const double g = std::sqrt(2.0 * (c - pot.eval(0.5 * (q + pt))));
        const double cand = val + g * norm(q - pt);
        if (cand < w(i, j)) {
          w(i, j) = cand;
          state[id(i, j)] = Trial;
          heap.push({cand, id(i, j)});
        }
      }
  }
  if (heap.empty()) throw InvalidArgument("distance_field: no seed lies inside the cover rectangle");

  auto update = [&](int i, int j) {
    double a = std::numeric_limits<double>::infinity(), b = a;
    if (i > 0 && state[id(i - 1, j)] == Known) a = std::min(a, w(i - 1, j));
    if (i + 1 < nx && state[id(i + 1, j)] == Known) a = std::min(a, w(i + 1, j));
    if (j > 0 && state[id(i, j - 1)] == Known) b = std::min(b, w(i, j - 1));
    if (j + 1 < ny && state[id(i, j + 1)] == Known) b = std::min(b, w(i, j + 1));
    const double hf = h * f[id(i, j)];
    double u;
    if (!std::isfinite(b) || (std::isfinite(a) && a + hf <= b)) {
      u = a + hf;
    } else if (!std::isfinite(a) || b + hf <= a) {
      u = b + hf;
    } else {
      const double d = a - b;
      u = 0.5 * (a + b + std::sqrt(std::max(0.0, 2.0 * hf * hf - d * d)));
    }
    return u;
  };

  while (!heap.empty()) {
    const auto [val, k] = heap.top();
    heap.pop();
    if (state[k] == Known || val > w.operator()(static_cast<int>(k % nx), static_cast<int>(k / nx))) continue;
    state[k] = Known;
    const int i = static_cast<int>(k % nx), j = static_cast<int>(k / nx);
    const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
    for (const auto& q : nb) {
      if (q[0] < 0 || q[1] < 0 || q[0] >= nx || q[1] >= ny) continue;
      const std::size_t kk = id(q[0], q[1]);
      if (state[kk] == Known) continue;
      const double u = update(q[0], q[1]);
      if (u < w(q[0], q[1])) {
        w(q[0], q[1]) = u;
        state[kk] = Trial;
        heap.push({u, kk});
      }
    }
  }
  return w;
}

CoverGrid distance_field(const Potential& pot, double c, const Vec2& source, const CoverRect& rect, int per_unit,
                         double margin) {
  return distance_field(pot, c, std::vector<Seed>{{source, 0.0}}, rect, per_unit, margin);
}

std::vector<Vec2> backtrack(const CoverGrid& w, const Vec2& target, const std::vector<Vec2>& sources) {
  const double h = w.h();
  const double step = 0.5 * h;
  const std::size_t max_steps = 8 * static_cast<std::size_t>(w.nx() + w.ny()) * 4;
  std::vector<Vec2> path{target};
  Vec2 x = target;
  auto near_source = [&](const Vec2& y) -> const Vec2* {
    for (const auto& s : sources)
      if (norm(y - s) < 1.5 * h) return &s;
    return nullptr;
  };
  for (std::size_t it = 0; it < max_steps; ++it) {
    if (const Vec2* s = near_source(x)) {
      path.push_back(*s);
      std::reverse(path.begin(), path.end());
      return path;
    }
    const Vec2 g = w.gradient(x);
    const double gn = norm(g);
    if (!(gn > 1e-12)) {
      throw ConvergenceError("backtrack: distance gradient vanishes; increase the metric grid resolution", gn, 0.0);
    }
    x -= (step / gn) * g;
    path.push_back(x);
  }
  throw ConvergenceError("backtrack: no seed reached; increase the metric grid resolution", 0.0, 0.0);
}

}  // namespace effham
