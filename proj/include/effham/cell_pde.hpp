#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "effham/potential.hpp"
#include "effham/scalar_field.hpp"
#include "effham/vec2.hpp"

namespace effham {

enum class Scheme { Godunov, LaxFriedrichs };

struct CellOptions {
  Scheme scheme = Scheme::Godunov;
  double tol = 1e-4;           // change of the H-bar estimate between checkpoints
  double residual_tol = 1e-3;  // accepted sup residual of the discrete cell equation
  double checkpoint = 1.0;     // time between estimates
  double max_time = 600.0;
  double cfl = 0.4;
};

/// Periodic corrector v at a fixed p with its effective Hamiltonian value.
struct Corrector {
  Vec2 p;
  double hbar = 0.0;
  ScalarField v;              // zero grid mean
  double residual_sup = 0.0;  // sup |H_num(p, Dv) + V - hbar|
  double bracket_lo = 0.0;    // min/max over nodes of the last checkpoint growth rate
  double bracket_hi = 0.0;
  int iterations = 0;
  double time = 0.0;
  bool is_flat = false;
  std::string id;

  /// u(x) = p.x + v(x) on the plane, v extended periodically.
  double u(const Vec2& x) const { return dot(p, x) + v.interpolate(x); }
};

/// Long-time evolution of w_t + H(p + Dw, x) = 0 from w = 0 on an nx-by-ny grid.
Corrector solve_cell(const Potential& pot, const Vec2& p, int nx, int ny, const CellOptions& opts = {});

/// H-bar from the nx-by-ny grid and the half-resolution grid, extrapolated to h = 0
/// assuming the first-order error of the scheme. The corrector is the fine one.
struct PdeEstimate {
  double hbar = 0.0;
  double fine = 0.0;    // hbar on nx-by-ny
  double coarse = 0.0;  // hbar on (nx/2)-by-(ny/2)
  Corrector corrector;
};
PdeEstimate hbar_pde(const Potential& pot, const Vec2& p, int nx, int ny, const CellOptions& opts = {});

/// Upper bound from the inf-max formula: max_x H(p + D phi, x) with phi = 0 when
/// no corrector is given, else with phi = v and a smoothed gradient.
double infmax_bound(const Potential& pot, const Vec2& p, const Corrector* corr = nullptr);

/// One-dimensional effective Hamiltonian for a 1-periodic profile.
double oracle_1d(const std::function<double(double)>& profile, double p1);

/// Same for a potential that depends on a single coordinate.
double oracle_1d(const Potential& profile, double p1);

/// Maupertuis action of one period of the 1d profile at energy c.
double action_1d(const std::function<double(double)>& profile, double c);

/// H-bar of a separable potential from two 1d oracles; nullopt if not separable.
std::optional<double> separable_oracle(const Potential& pot, const Vec2& p);

struct SolveRecord {
  Vec2 p;
  double hbar;
  double residual_sup;
  int iterations;
};
void write_solve_csv(const std::filesystem::path& path, const std::vector<SolveRecord>& rows);

}  // namespace effham
