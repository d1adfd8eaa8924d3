#pragma once

#include <vector>

#include "atmplace/core.hpp"

namespace testutil {

using namespace atmplace;

// Chiplets of the given dims, no bumps, no nets.
inline DesignInstance boxes(double W, double H, const std::vector<std::pair<double, double>>& dims,
                            double power = 1e6, int grid = 32) {
  std::vector<ChipletSpec> cs;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    ChipletSpec c;
    c.id = static_cast<int>(i);
    c.width = dims[i].first;
    c.height = dims[i].second;
    c.thickness = 0.5;
    c.power_density = power;
    cs.push_back(c);
  }
  return DesignInstance({W, H, grid, 0.1}, cs, {});
}

// Two chiplets joined by `nets` nets whose pins sit at the given offsets.
inline DesignInstance pair_design(double W, double H, Vec2 d0, Vec2 d1, Vec2 p0, Vec2 p1,
                                  int nets = 1) {
  std::vector<ChipletSpec> cs(2);
  const Vec2 dims[2] = {d0, d1};
  const Vec2 pins[2] = {p0, p1};
  for (int i = 0; i < 2; ++i) {
    cs[i].id = i;
    cs[i].width = dims[i].x;
    cs[i].height = dims[i].y;
    cs[i].thickness = 0.5;
    cs[i].power_density = 1e6;
    for (int k = 0; k < nets; ++k) cs[i].bumps.push_back({k, pins[i].x, pins[i].y, 0});
  }
  std::vector<Net> ns;
  for (int k = 0; k < nets; ++k) ns.push_back({k, {0, k}, {1, k}});
  return DesignInstance({W, H, 32, 0.1}, cs, ns);
}

}  // namespace testutil
