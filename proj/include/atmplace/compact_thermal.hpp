#pragma once

#include <vector>

#include "atmplace/core.hpp"
#include "atmplace/design_io.hpp"
#include "atmplace/field_grid.hpp"

namespace atmplace {

struct CompactThermalParams {
  double A = 1e-5;   // amplitude, °C per (W/m²)
  double a = 0.5;    // decay depth (dimensionless, shared)
  double B = 25.0;   // bias, °C
  std::vector<double> lx, ly;  // per-chiplet length normalization, mm

  int size() const { return static_cast<int>(lx.size()); }
  int parameter_count() const { return 2 * size() + 3; }
  void check(int n_chiplets) const;
};

Json thermal_params_to_json(const CompactThermalParams& p);
CompactThermalParams thermal_params_from_json(const Json& j);

// Center and effective footprint of one chiplet as seen by the surrogates.
struct SourceGeom {
  double x = 0, y = 0, w = 0, h = 0;
};

// Rotated dims for snapped orientations.
std::vector<SourceGeom> snapped_geometry(const DesignInstance& design, const Placement& placement);

struct GridSpec {
  int nx = 64, ny = 64;
  double dx = 1.0, dy = 1.0;
  static GridSpec of(const DesignInstance& design);
  static GridSpec of(const FieldGrid& f) { return {f.nx(), f.ny(), f.dx(), f.dy()}; }
  double x(int ix) const { return (ix + 0.5) * dx; }
  double y(int iy) const { return (iy + 0.5) * dy; }
  int cells() const { return nx * ny; }
};

// Weighted sums of the partials of S_i = Σ F over the grid, with weights ω:
// s = Σ ω S, x = Σ ω ∂S/∂x_i, ... (for one chiplet).
struct KernelSums {
  double s = 0, x = 0, y = 0, w = 0, h = 0, lx = 0, ly = 0, a = 0;
};

// Adds scale · S_i(x,y) to `field` when non-null and fills `sums` when `weights` is non-null.
// When `terms` is non-null it receives kKernelTerms values per cell for kernel_sums().
void thermal_kernel(double a, const SourceGeom& g, double lx, double ly, const GridSpec& grid,
                    double scale, double* field, const double* weights, KernelSums* sums,
                    double* terms = nullptr);

inline constexpr int kKernelTerms = 6;  // S, L1, L2, M1, M2, Σatan
KernelSums kernel_sums(double a, const SourceGeom& g, double lx, double ly, const GridSpec& grid,
                       const double* terms, const double* weights);

// T_c at cell centers.
FieldGrid eval_Tc(const CompactThermalParams& p, const DesignInstance& design,
                  const Placement& placement, const GridSpec& grid);
FieldGrid eval_Tc_geom(const CompactThermalParams& p, const std::vector<double>& power,
                       const std::vector<SourceGeom>& geom, const GridSpec& grid, double width,
                       double height);
std::vector<double> eval_Tc_points(const CompactThermalParams& p, const DesignInstance& design,
                                   const Placement& placement, const std::vector<Vec2>& points);

// Per-chiplet derivative fields ∂T_c/∂x_i, ∂T_c/∂y_i, ∂T_c/∂w_i, ∂T_c/∂h_i.
struct ThermalGradFields {
  std::vector<FieldGrid> dx, dy, dw, dh;
};
ThermalGradFields grad_Tc(const CompactThermalParams& p, const DesignInstance& design,
                          const Placement& placement, const GridSpec& grid);

// Vector-Jacobian product: given ω = ∂L/∂T per cell, returns ∂L with respect to geometry and
// parameters.
struct ThermalVjp {
  std::vector<double> x, y, w, h, lx, ly;
  double A = 0, a = 0, B = 0;
};
ThermalVjp vjp_Tc(const CompactThermalParams& p, const std::vector<double>& power,
                  const std::vector<SourceGeom>& geom, const GridSpec& grid,
                  const std::vector<double>& weights);

std::vector<double> power_vector(const DesignInstance& design);

}  // namespace atmplace
