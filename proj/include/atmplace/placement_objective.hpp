#pragma once

#include <utility>
#include <vector>

#include "atmplace/compact_thermal.hpp"
#include "atmplace/compact_warpage.hpp"
#include "atmplace/core.hpp"
#include "atmplace/orientation.hpp"

namespace atmplace {

// Gradient over the optimizer state: x, y in mm, θ in degrees.
struct StateGrad {
  std::vector<double> x, y, theta;
  explicit StateGrad(int n = 0) : x(n, 0.0), y(n, 0.0), theta(n, 0.0) {}
  void add(const StateGrad& o, double scale);
  double norm1() const;
};

struct PenaltyConfig {
  double lambda_dens = 0.0;  // 0 asks run_cgd to initialize it from gradient norms
  double lambda_T = 0.0;
  double lambda_W = 0.0;
  double T_th = 85.0;  // °C
  double W_th = 0.0;   // µm
  int gamma = 2;
  double rho = 1.0;     // density weight growth per unit overflow
  double t_max = 1.0;   // target bin density
  int bins_x = 0, bins_y = 0;  // 0 picks default_bins()
  double wl_smoothing = 1e-3;  // mm
  double warp_tau = 0.0;       // softmax sharpness; <= 0 picks 50/range of the current field
};

// Bell-shaped overlap profile along one axis (two quadratic pieces, C1 at w/2 + wb).
double bell(double d, double w, double wb);
double bell_slope(double d, double w, double wb);  // d/dd for d >= 0

double projected_wirelength(const DesignInstance& design, const Placement& state, double eta,
                            double smoothing, StateGrad* grad = nullptr);

// Per-bin density, row-major (bins_y rows of bins_x).
std::vector<double> projected_density(const DesignInstance& design, const Placement& state,
                                      int bins_x, int bins_y, double eta);
// Adds Σ_b ω_b ∂D_b/∂state into `grad`.
void projected_density_vjp(const DesignInstance& design, const Placement& state, int bins_x,
                           int bins_y, double eta, const std::vector<double>& omega,
                           StateGrad& grad);

// Bins about half the mean chiplet dimension wide, 4..64 per side. Much finer bins leave
// the bell profile of a large chiplet above bin capacity even when nothing overlaps.
std::pair<int, int> default_bins(const DesignInstance& design);
// cfg's bin counts with zeros replaced by the default.
std::pair<int, int> resolve_bins(const DesignInstance& design, const PenaltyConfig& cfg);

double bin_capacity(const DesignInstance& design, int bins_x, int bins_y, double t_max);
double overflow(const DesignInstance& design, const Placement& state, int bins_x, int bins_y,
                double eta, double t_max);

// Geometry fed to the compact models: expectation dims under B_z.
std::vector<SourceGeom> expected_geometry(const DesignInstance& design, const Placement& state,
                                          double eta, std::vector<ExpectedDims>* dims = nullptr);

struct ObjectiveTerms {
  double total = 0.0;
  double wl = 0.0;
  double density = 0.0;  // Σ_b max(0, D_b - M_b)², before λ
  double thermal = 0.0;  // Σ_r max(0, T - T_th)^γ, before λ
  double warpage = 0.0;  // max(0, PV - W_th)^γ, before λ
  double overflow = 0.0;
  double peak_T = 0.0;         // compact model, NaN without thermal params
  double warpage_metric = 0.0;  // compact model max - min, NaN without warpage params
};

struct ObjectiveGrads {
  StateGrad wl, density, thermal, warpage, total;
  // Gradient of Σ_b (D_b - M_b)², the non-hinged form, for weight initialization.
  StateGrad density_deviation;
};

struct PhysicsModels {
  const CompactThermalParams* thermal = nullptr;
  const CompactWarpageParams* warpage = nullptr;
};

ObjectiveTerms objective(const DesignInstance& design, const Placement& state,
                         const PhysicsModels& models, const PenaltyConfig& cfg, double eta,
                         ObjectiveGrads* grads = nullptr);

}  // namespace atmplace
