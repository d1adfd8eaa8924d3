#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "atmplace/core.hpp"
#include "atmplace/milp.hpp"

namespace atmplace {

// Orientation <-> (u, v): 0° (0,0), 90° (0,1), 180° (1,1), 270° (1,0).
std::pair<int, int> orientation_to_uv(int orient);
int uv_to_orientation(int u, int v);

struct InitFormulation {
  milp::MilpProblem problem;
  double epsilon = 0.1;
  std::vector<int> x, y, u, v, z;
  std::vector<std::pair<int, int>> pairs;   // all unordered pairs i < j
  std::vector<std::array<int, 4>> delta;    // per entry of `pairs`

  Placement decode(const std::vector<double>& values) const;
  // Binaries consistent with a placement whose gaps satisfy the ε separation.
  std::vector<double> encode(const DesignInstance& design, const Placement& placement) const;
};

InitFormulation build_init_milp(const DesignInstance& design, double epsilon);

struct LegalizeFormulation {
  milp::MilpProblem problem;
  double lambda_w = 0.0;
  Placement reference;  // orientations are frozen to these
  std::vector<int> x, y;
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::array<int, 4>> delta;

  Placement decode(const std::vector<double>& values) const;
  std::vector<double> encode(const DesignInstance& design, const Placement& placement) const;
};

// Spacing margin added on top of w_gap so decoded solutions clear check_legal.
inline constexpr double kLegalMargin = 1e-5;

LegalizeFormulation build_legalize_milp(const DesignInstance& design, const Placement& opt,
                                        double lambda_w);

// Σ |x - x_opt| + |y - y_opt|.
double displacement(const Placement& a, const Placement& b);

// Decreasing-area ring search on a w_gap/2 lattice. nullopt when some chiplet finds no spot.
std::optional<Placement> greedy_legalize(const DesignInstance& design, const Placement& opt);

struct InitConfig {
  double epsilon = 0.02;  // 0.1 leaves no room on 40-50% whitespace designs
  double time_limit_seconds = 60.0;
  long node_limit = 20000;
  std::uint64_t seed = 0;
};

struct InitResult {
  Placement placement;
  milp::Status status = milp::Status::Infeasible;
  double objective = 0.0;
  long nodes = 0;
  bool fallback = false;  // shelf packing used because the MILP produced nothing
};

InitResult initialize(const DesignInstance& design, const InitConfig& cfg);

struct LegalizeConfig {
  double lambda_w = 0.0;
  double time_limit_seconds = 120.0;  // per MILP attempt
  long node_limit = 20000;            // per MILP attempt
  int greedy_threshold = 16;          // above this many chiplets only the greedy path runs
  std::uint64_t seed = 0;
};

struct LegalizeResult {
  Placement placement;
  double displacement = 0.0;
  std::string path;  // identity, milp, milp_lambda0, greedy
  milp::Status status = milp::Status::Optimal;
  long nodes = 0;
};

// Throws InfeasibleLegalization when no legal placement is found.
LegalizeResult legalize(const DesignInstance& design, const Placement& opt,
                        const LegalizeConfig& cfg);

}  // namespace atmplace
