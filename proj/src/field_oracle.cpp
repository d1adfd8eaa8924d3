#include "atmplace/field_oracle.hpp"

#include <algorithm>
#include <cmath>

namespace atmplace {

namespace {

constexpr double kPi = 3.14159265358979323846;

double overlap_1d(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace

FieldGrid rasterize_power(const DesignInstance& design, const Placement& placement) {
  const auto& ip = design.interposer();
  FieldGrid f(ip.grid, ip.grid, ip.width, ip.height);
  const double cell = f.dx() * f.dy();
  for (int i = 0; i < design.size(); ++i) {
    const auto& c = design.chiplet(i);
    if (c.power_density == 0.0) continue;
    const Vec2 d = rotated_dims(c, placement[i].theta);
    const double x0 = placement[i].x - d.x / 2, x1 = placement[i].x + d.x / 2;
    const double y0 = placement[i].y - d.y / 2, y1 = placement[i].y + d.y / 2;
    const int ix0 = std::max(0, static_cast<int>(std::floor(x0 / f.dx())));
    const int ix1 = std::min(f.nx() - 1, static_cast<int>(std::floor(x1 / f.dx())));
    const int iy0 = std::max(0, static_cast<int>(std::floor(y0 / f.dy())));
    const int iy1 = std::min(f.ny() - 1, static_cast<int>(std::floor(y1 / f.dy())));
    for (int iy = iy0; iy <= iy1; ++iy) {
      const double oy = overlap_1d(y0, y1, iy * f.dy(), (iy + 1) * f.dy());
      if (oy <= 0) continue;
      for (int ix = ix0; ix <= ix1; ++ix) {
        const double ox = overlap_1d(x0, x1, ix * f.dx(), (ix + 1) * f.dx());
        if (ox <= 0) continue;
        f.at(ix, iy) += c.power_density * ox * oy / cell;
      }
    }
  }
  return f;
}

PoissonStats solve_poisson_sor(const PoissonProblem& p, const std::vector<double>& f,
                               std::vector<double>& u, double tol, int max_sweeps) {
  const int nx = p.nx, ny = p.ny;
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  const bool dir = p.edge == EdgeCondition::Dirichlet;
  auto face = [](const std::vector<double>& v, int k) { return v.empty() ? 0.0 : v[k]; };

  // Padded storage: one ghost ring held at zero, couplings to it are dropped.
  const int px = nx + 2;
  std::vector<double> w(static_cast<std::size_t>(px) * (ny + 2), 0.0);
  std::vector<double> diag(n), rhs(n), cw(n), ce(n), cs(n), cn(n);
  double rhs_norm = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = static_cast<std::size_t>(j) * nx + i;
      double d = p.screen, r = f[c];
      cw[c] = i > 0 ? p.cx : 0.0;
      ce[c] = i < nx - 1 ? p.cx : 0.0;
      cs[c] = j > 0 ? p.cy : 0.0;
      cn[c] = j < ny - 1 ? p.cy : 0.0;
      d += cw[c] + ce[c] + cs[c] + cn[c];
      if (dir) {
        // ghost = 2 g - u  =>  2 c (u - g)
        if (i == 0) { d += 2 * p.cx; r += 2 * p.cx * face(p.left, j); }
        if (i == nx - 1) { d += 2 * p.cx; r += 2 * p.cx * face(p.right, j); }
        if (j == 0) { d += 2 * p.cy; r += 2 * p.cy * face(p.bottom, i); }
        if (j == ny - 1) { d += 2 * p.cy; r += 2 * p.cy * face(p.top, i); }
      }
      diag[c] = d;
      rhs[c] = r;
      rhs_norm += r * r;
    }
  }
  rhs_norm = std::sqrt(rhs_norm);
  u.assign(n, 0.0);
  PoissonStats st;
  if (rhs_norm == 0.0) return st;

  double rho;
  if (dir) {
    rho = (p.cx * std::cos(kPi / nx) + p.cy * std::cos(kPi / ny)) / (p.cx + p.cy);
  } else {
    const double s = 2 * (p.cx + p.cy);
    rho = s / (s + p.screen);
    // Without screening the zero-flux problem is singular; cap the relaxation.
    rho = std::min(rho, std::cos(kPi / std::max(nx, ny)));
  }
  const double omega = 2.0 / (1.0 + std::sqrt(std::max(0.0, 1.0 - rho * rho)));

  auto at = [&](int i, int j) -> double& { return w[static_cast<std::size_t>(j + 1) * px + i + 1]; };
  auto residual = [&]() {
    double s = 0.0;
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t c = static_cast<std::size_t>(j) * nx + i;
        const double r = rhs[c] - diag[c] * at(i, j) + cw[c] * at(i - 1, j) + ce[c] * at(i + 1, j) +
                         cs[c] * at(i, j - 1) + cn[c] * at(i, j + 1);
        s += r * r;
      }
    }
    return std::sqrt(s) / rhs_norm;
  };

  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (int color = 0; color < 2; ++color) {
      for (int j = 0; j < ny; ++j) {
        for (int i = (j + color) & 1; i < nx; i += 2) {
          const std::size_t c = static_cast<std::size_t>(j) * nx + i;
          double& v = at(i, j);
          const double gs = (rhs[c] + cw[c] * at(i - 1, j) + ce[c] * at(i + 1, j) +
                             cs[c] * at(i, j - 1) + cn[c] * at(i, j + 1)) /
                            diag[c];
          v += omega * (gs - v);
        }
      }
    }
    if (sweep % 10 == 0 || sweep == max_sweeps) {
      st.sweeps = sweep;
      st.residual = residual();
      if (st.residual <= tol) break;
    }
  }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) u[static_cast<std::size_t>(j) * nx + i] = at(i, j);
  if (st.residual > tol)
    throw ConvergenceError("SOR did not converge, relative residual " + std::to_string(st.residual),
                           st.residual);
  return st;
}

double sink_coefficient(const ThermalOracleConfig& cfg, double width_mm, double height_mm) {
  if (cfg.h_sink > 0) return cfg.h_sink;
  return 1.0 / (cfg.r_conv * width_mm * 1e-3 * height_mm * 1e-3);
}

FieldGrid solve_thermal_field(const FieldGrid& power, const ThermalOracleConfig& cfg) {
  if (!(cfg.kappa_eff > 0) || !(cfg.tolerance > 0) || !(cfg.h_stack > 0))
    throw DomainError("thermal oracle: kappa, h_stack and tolerance must be positive");
  const double hs = sink_coefficient(cfg, power.width(), power.height());
  if (!(hs > 0)) throw DomainError("thermal oracle: h_sink must be positive");
  PoissonProblem p;
  p.nx = power.nx();
  p.ny = power.ny();
  // κ h [W/K] over dx² with lengths in mm: κ (h·1e-3) / (dx·1e-3)².
  p.cx = cfg.kappa_eff * cfg.h_stack * 1e3 / (power.dx() * power.dx());
  p.cy = cfg.kappa_eff * cfg.h_stack * 1e3 / (power.dy() * power.dy());
  p.screen = hs;
  p.edge = EdgeCondition::ZeroFlux;
  std::vector<double> rise;
  solve_poisson_sor(p, power.values(), rise, cfg.tolerance, cfg.max_iterations);
  FieldGrid t(power.nx(), power.ny(), power.width(), power.height());
  for (std::size_t k = 0; k < rise.size(); ++k) t.values()[k] = cfg.t_ambient + rise[k];
  return t;
}

FieldGrid solve_thermal(const DesignInstance& design, const Placement& placement,
                        const ThermalOracleConfig& cfg) {
  return solve_thermal_field(rasterize_power(design, placement), cfg);
}

FieldGrid solve_warpage(const FieldGrid& thermal, const PlateOracleConfig& cfg) {
  if (!(cfg.poisson > 0 && cfg.poisson < 0.5) || !(cfg.youngs_gpa > 0) || !(cfg.alpha_cte > 0) ||
      !(cfg.h_plate > 0))
    throw DomainError("plate oracle: invalid material constants");
  const int nx = thermal.nx(), ny = thermal.ny();
  const std::size_t n = thermal.size();
  std::vector<double> dt(n);
  for (std::size_t k = 0; k < n; ++k) dt[k] = thermal.values()[k] - cfg.t_ref;
  auto v = [&](int i, int j) { return dt[static_cast<std::size_t>(j) * nx + i]; };

  // ∇⁴w = k ∇²ΔT with k in mm conventions (E in GPa, h in mm).
  const double k = (1.0 - cfg.poisson) * cfg.alpha_cte / (cfg.youngs_gpa * cfg.h_plate * cfg.h_plate);

  // First solve: harmonic v with v = ΔT on the edges, so that ∇²w = k (ΔT − v) vanishes there.
  PoissonProblem p;
  p.nx = nx;
  p.ny = ny;
  p.cx = 1.0 / (thermal.dx() * thermal.dx());
  p.cy = 1.0 / (thermal.dy() * thermal.dy());
  p.edge = EdgeCondition::Dirichlet;
  auto extrap = [](double a, double b, double c) { return (15 * a - 10 * b + 3 * c) / 8; };
  p.bottom.resize(nx);
  p.top.resize(nx);
  p.left.resize(ny);
  p.right.resize(ny);
  for (int i = 0; i < nx; ++i) {
    p.bottom[i] = extrap(v(i, 0), v(i, 1), v(i, 2));
    p.top[i] = extrap(v(i, ny - 1), v(i, ny - 2), v(i, ny - 3));
  }
  for (int j = 0; j < ny; ++j) {
    p.left[j] = extrap(v(0, j), v(1, j), v(2, j));
    p.right[j] = extrap(v(nx - 1, j), v(nx - 2, j), v(nx - 3, j));
  }
  std::vector<double> harm;
  solve_poisson_sor(p, std::vector<double>(n, 0.0), harm, cfg.tolerance, cfg.max_iterations);

  // Second solve: ∇²w = m with w = 0, i.e. (−∇²) w = −m.
  std::vector<double> src(n);
  for (std::size_t c = 0; c < n; ++c) src[c] = -k * (dt[c] - harm[c]);
  p.bottom.clear();
  p.top.clear();
  p.left.clear();
  p.right.clear();
  std::vector<double> w;
  solve_poisson_sor(p, src, w, cfg.tolerance, cfg.max_iterations);

  FieldGrid out(nx, ny, thermal.width(), thermal.height());
  for (std::size_t c = 0; c < n; ++c) out.values()[c] = w[c] * 1e3;  // mm -> µm
  return out;
}

}  // namespace atmplace
