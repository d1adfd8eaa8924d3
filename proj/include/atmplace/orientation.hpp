#pragma once

#include <array>

#include "atmplace/core.hpp"

namespace atmplace {

// Wrap-around distance on the circle, normalized to [0, 0.5].
double angular_deviation(double theta_i, double theta_k);
// d/dθ_i of angular_deviation (one-sided value at the kinks, where rz is flat anyway).
double angular_deviation_grad(double theta_i, double theta_k);

// Piecewise quadratic closeness of θ_i to orientation θ_k, 1 at θ_k, 0 beyond 90°.
double rz(double theta_k, double theta_i);
double rz_grad(double theta_k, double theta_i);  // d/dθ_i

using OrientProbs = std::array<double, 4>;

// Softmax of rz/η over the four legal orientations.
OrientProbs bz(double theta_i, double eta);
// Probabilities and their derivatives with respect to θ_i (per degree).
void bz_with_grad(double theta_i, double eta, OrientProbs& p, OrientProbs& dp);

// argmax_k bz, lowest index on ties.
double snap_orientation(double theta_i, double eta = 0.05);
Placement snap_orientations(const Placement& placement, double eta = 0.05);

// Orientation-probability weighted dims: Σ_k B_k dims(θ^k) and derivatives.
struct ExpectedDims {
  double w = 0, h = 0, dw = 0, dh = 0;
};
ExpectedDims expected_dims(const ChipletSpec& c, const OrientProbs& p, const OrientProbs& dp);

}  // namespace atmplace
