#pragma once

#include "atmplace/core.hpp"
#include "atmplace/field_grid.hpp"

namespace atmplace {

// Material values are stand-ins for a generic organic/silicon stack.
struct ThermalOracleConfig {
  double kappa_eff = 120.0;   // W/(m K), lateral
  double r_conv = 0.1;        // K/W, heatsink convective resistance
  double h_sink = 0.0;        // W/(m^2 K); 0 derives it as 1/(r_conv * package area)
  double t_ambient = 25.0;    // °C
  double h_stack = 1.0;       // mm, conducting thickness (stand-in)
  double tolerance = 1e-8;    // relative residual
  int max_iterations = 50000;
};

struct PlateOracleConfig {
  double youngs_gpa = 130.0;
  double poisson = 0.28;
  double alpha_cte = 2.8e-6;  // 1/K
  double h_plate = 0.1;       // mm
  double t_ref = 25.0;        // °C, stress-free temperature
  double tolerance = 1e-8;
  int max_iterations = 50000;
};

FieldGrid rasterize_power(const DesignInstance& design, const Placement& placement);

double sink_coefficient(const ThermalOracleConfig& cfg, double width_mm, double height_mm);

// κ h ∇²T − h_sink (T − T_amb) = −P on a power field in W/m², adiabatic edges.
FieldGrid solve_thermal_field(const FieldGrid& power, const ThermalOracleConfig& cfg);
FieldGrid solve_thermal(const DesignInstance& design, const Placement& placement,
                        const ThermalOracleConfig& cfg);

// Simply supported plate under thermal load; returns displacement in µm.
FieldGrid solve_warpage(const FieldGrid& thermal, const PlateOracleConfig& cfg);

// Generic cell-centered SOR solve of  -(cx δxx + cy δyy) u + s u = f.
// Dirichlet edges take face values from `g` (one per boundary face, or all zero when empty).
enum class EdgeCondition { ZeroFlux, Dirichlet };
struct PoissonProblem {
  int nx = 0, ny = 0;
  double cx = 1.0, cy = 1.0;  // 1/dx², 1/dy² times the diffusion coefficient
  double screen = 0.0;
  EdgeCondition edge = EdgeCondition::ZeroFlux;
  // Face values for Dirichlet edges: bottom[nx], top[nx], left[ny], right[ny].
  std::vector<double> bottom, top, left, right;
};
struct PoissonStats {
  int sweeps = 0;
  double residual = 0.0;
};
PoissonStats solve_poisson_sor(const PoissonProblem& prob, const std::vector<double>& f,
                               std::vector<double>& u, double tol, int max_sweeps);

}  // namespace atmplace
