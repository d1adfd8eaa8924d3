#pragma once

#include <cstdint>
#include <optional>

#include "atmplace/core.hpp"

namespace atmplace {

struct BenchmarkOptions {
  double min_dim = 5.0;   // mm
  double max_dim = 15.0;  // mm
  double min_power = 2e5;  // W/m^2
  double max_power = 3e6;
  double min_thickness = 0.5;  // mm
  double max_thickness = 0.8;
  int grid = 64;
  double min_spacing = 0.1;
};

DesignInstance synthesize_benchmark(std::uint64_t seed, int n_chiplets, InterfaceKind iface,
                                    double whitespace_target, const BenchmarkOptions& opt = {});

// Shelf packing at θ = 0 with `gap` between neighbours and to nothing at the border.
// Returns nullopt when the shelves overflow the interposer.
std::optional<Placement> shelf_pack(const DesignInstance& design, double gap);

double whitespace_fraction(const DesignInstance& design);

// Same design with power densities replaced.
DesignInstance with_power(const DesignInstance& design, const std::vector<double>& power);

}  // namespace atmplace
