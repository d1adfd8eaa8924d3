#pragma once

#include <cstdint>
#include <vector>

#include "atmplace/compact_thermal.hpp"
#include "atmplace/compact_warpage.hpp"

namespace atmplace {

struct FitConfig {
  int iterations = 2000;
  double learning_rate = 0.05;
  double lr_final_ratio = 0.05;  // learning rate decays geometrically to lr * ratio
  double stop_rel_change = 1e-6;
  int stop_window = 50;
  double t_ambient = 25.0;
  std::uint64_t seed = 0;
};

struct ThermalSample {
  Placement placement;
  FieldGrid label;  // °C
};

struct WarpageSample {
  Placement placement;
  FieldGrid thermal;  // oracle temperature, kept for reference
  FieldGrid label;    // µm
};

struct FitReport {
  double final_loss = 0.0;  // mean squared error per cell
  int iterations = 0;
  std::vector<double> sample_mae;
  std::vector<double> sample_pearson;
  double mean_mae = 0.0;
  double mean_pearson = 0.0;
  std::vector<double> loss_trace;
};

struct ThermalFit {
  CompactThermalParams params;
  FitReport report;
};

struct WarpageFit {
  CompactWarpageParams params;
  FitReport report;
};

CompactThermalParams initial_thermal_params(const DesignInstance& design, double delta_t_scale,
                                            double t_ambient);

ThermalFit fit_thermal(const DesignInstance& design, const std::vector<ThermalSample>& samples,
                       const FitConfig& cfg, const CompactThermalParams* init = nullptr);
WarpageFit fit_warpage(const DesignInstance& design, const CompactThermalParams& thermal,
                       const std::vector<WarpageSample>& samples, const FitConfig& cfg,
                       const CompactWarpageParams* init = nullptr);

// Per-sample MAE / Pearson of the fitted surrogate on held-out data.
FitReport evaluate_thermal(const DesignInstance& design, const CompactThermalParams& p,
                           const std::vector<ThermalSample>& samples);
FitReport evaluate_warpage(const DesignInstance& design, const CompactThermalParams& tp,
                           const CompactWarpageParams& wp, const std::vector<WarpageSample>& samples);

}  // namespace atmplace
