#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "atmplace/placement_objective.hpp"

namespace atmplace {

// Polak-Ribière conjugate directions with one normalized step per variable group.
// A group's step halves when its move reverses direction and grows by `grow` otherwise,
// never exceeding its initial value.
class CgdStepper {
 public:
  CgdStepper(std::vector<int> group_of, std::vector<double> step0, double grow = 1.05);

  // Updates x in place from gradient g. Returns the β used.
  double step(std::vector<double>& x, const std::vector<double>& g);
  // Forget the previous direction: the next step is steepest descent.
  void reset();

  const std::vector<double>& steps() const { return step_; }
  const std::vector<double>& direction() const { return d_; }

 private:
  std::vector<int> group_of_;
  std::vector<double> step0_, step_;
  double grow_;
  std::vector<double> g_prev_, d_, move_prev_;
  bool fresh_ = true;
};

struct CgdConfig {
  int max_iter = 1000;
  double eta_start = 0.5;   // orientation softmax temperature, annealed linearly
  double eta_end = 0.05;
  double step_xy_frac = 0.02;  // initial position step as a fraction of W (x) and H (y)
  double step_theta = 5.0;     // degrees
  double noise_zeta = 0.5;     // noise amplitude in bin widths
  int noise_window = 50;
  double noise_rel_change = 0.01;
  double noise_ovfl_threshold = 0.05;
  double stop_step_frac = 1e-4;  // stop when every group step shrank below this fraction
  int min_iter = 50;
  std::uint64_t seed = 0;
  PenaltyConfig penalty;
  // Physics weights are multipliers on a gradient-norm-balanced base weight.
  bool balance_physics = true;
};

struct TrajectoryRow {
  int iter = 0;
  double J = 0, WL = 0, OVFL = 0, Tmax = 0, warpage = 0, lambda_dens = 0;
  bool noise_injected = false;
};

struct CgdResult {
  Placement state;  // continuous orientations
  std::vector<TrajectoryRow> trajectory;
  double lambda_dens0 = 0.0;
  double lambda_T_eff = 0.0;
  double lambda_W_eff = 0.0;
  int iterations = 0;
  int noise_events = 0;
};

// Throws std::runtime_error naming the iteration when the gradient turns NaN.
CgdResult run_cgd(const DesignInstance& design, const Placement& init,
                  const PhysicsModels& models, const CgdConfig& cfg);

std::string trajectory_csv(const std::vector<TrajectoryRow>& rows);

}  // namespace atmplace
