#pragma once

#include <vector>

#include "atmplace/compact_thermal.hpp"

namespace atmplace {

struct CompactWarpageParams {
  double alpha = 1.0;
  double b = 0.0;  // µm
  std::vector<double> kx, ky, lambda, c, t_ref;

  int size() const { return static_cast<int>(kx.size()); }
  int parameter_count() const { return 5 * size() + 2; }
  void check(int n_chiplets) const;
};

Json warpage_params_to_json(const CompactWarpageParams& p);
CompactWarpageParams warpage_params_from_json(const Json& j);

struct LocalShape {
  double kx, ky, lambda, c;
};
LocalShape local_shape(const CompactWarpageParams& p, int i);

double eval_w_local(const LocalShape& s, double xi, double yi, double x, double y);

FieldGrid eval_W_geom(const CompactWarpageParams& wp, const FieldGrid& thermal,
                      const std::vector<SourceGeom>& geom);
FieldGrid eval_W(const CompactWarpageParams& wp, const CompactThermalParams& tp,
                 const DesignInstance& design, const Placement& placement, const GridSpec& grid);

struct WarpageVjp {
  std::vector<double> x, y;          // direct terms through w_i
  std::vector<double> thermal_weights;  // ∂L/∂T per cell, to push through the thermal model
  double alpha = 0, b = 0;
  std::vector<double> kx, ky, lambda, c, t_ref;
};
// Given ω = ∂L/∂W per cell and the thermal field T used in the forward pass.
WarpageVjp vjp_W(const CompactWarpageParams& wp, const FieldGrid& thermal,
                 const std::vector<SourceGeom>& geom, const std::vector<double>& weights);

// Full position/dim gradient of L = Σ ω W through both models.
struct GeomGrad {
  std::vector<double> x, y, w, h;
};
GeomGrad grad_W_vjp(const CompactWarpageParams& wp, const CompactThermalParams& tp,
                    const std::vector<double>& power, const std::vector<SourceGeom>& geom,
                    const GridSpec& grid, const std::vector<double>& weights);

// Smooth peak-to-valley: log-sum-exp max minus min with sharpness τ. Fills ∂/∂field.
double smooth_peak_to_valley(const std::vector<double>& field, double tau,
                             std::vector<double>* grad);
double default_sharpness(const std::vector<double>& field);

}  // namespace atmplace
