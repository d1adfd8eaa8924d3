#include "atmplace/orientation.hpp"

#include <algorithm>
#include <cmath>

namespace atmplace {

namespace {

constexpr double kCount = 4.0;  // |Θ|

// Normalized signed difference in [0, 1).
double wrapped(double theta_i, double theta_k) {
  double t = std::fmod(theta_i - theta_k, 360.0) / 360.0;
  if (t < 0) t += 1.0;
  if (t >= 1.0) t -= 1.0;
  return t;
}

double rz_of(double d) {
  const double half = 1.0 / (2.0 * kCount), full = 1.0 / kCount;
  if (d <= half) return 1.0 - 2.0 * kCount * kCount * d * d;
  if (d <= full) return 2.0 * kCount * kCount * (d - full) * (d - full);
  return 0.0;
}

double rz_slope(double d) {
  const double half = 1.0 / (2.0 * kCount), full = 1.0 / kCount;
  if (d <= half) return -4.0 * kCount * kCount * d;
  if (d <= full) return 4.0 * kCount * kCount * (d - full);
  return 0.0;
}

}  // namespace

double angular_deviation(double theta_i, double theta_k) {
  const double t = wrapped(theta_i, theta_k);
  return std::abs(0.5 - std::abs(0.5 - t));
}

double angular_deviation_grad(double theta_i, double theta_k) {
  return wrapped(theta_i, theta_k) <= 0.5 ? 1.0 / 360.0 : -1.0 / 360.0;
}

double rz(double theta_k, double theta_i) { return rz_of(angular_deviation(theta_i, theta_k)); }

double rz_grad(double theta_k, double theta_i) {
  return rz_slope(angular_deviation(theta_i, theta_k)) * angular_deviation_grad(theta_i, theta_k);
}

void bz_with_grad(double theta_i, double eta, OrientProbs& p, OrientProbs& dp) {
  if (!(eta > 0)) throw DomainError("bz: eta must be positive");
  std::array<double, 4> r{}, dr{};
  double top = -1e300;
  for (int k = 0; k < 4; ++k) {
    r[k] = rz(kOrientations[k], theta_i) / eta;
    dr[k] = rz_grad(kOrientations[k], theta_i) / eta;
    top = std::max(top, r[k]);
  }
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) {
    p[k] = std::exp(r[k] - top);
    sum += p[k];
  }
  double mean_dr = 0.0;
  for (int k = 0; k < 4; ++k) {
    p[k] /= sum;
    mean_dr += p[k] * dr[k];
  }
  for (int k = 0; k < 4; ++k) dp[k] = p[k] * (dr[k] - mean_dr);
}

OrientProbs bz(double theta_i, double eta) {
  OrientProbs p{}, dp{};
  bz_with_grad(theta_i, eta, p, dp);
  return p;
}

double snap_orientation(double theta_i, double eta) {
  const OrientProbs p = bz(theta_i, eta);
  int best = 0;
  for (int k = 1; k < 4; ++k)
    if (p[k] > p[best]) best = k;
  return kOrientations[best];
}

Placement snap_orientations(const Placement& placement, double eta) {
  Placement out = placement;
  for (auto& pose : out) pose.theta = snap_orientation(pose.theta, eta);
  return out;
}

ExpectedDims expected_dims(const ChipletSpec& c, const OrientProbs& p, const OrientProbs& dp) {
  const double even = p[0] + p[2], odd = p[1] + p[3];
  const double deven = dp[0] + dp[2], dodd = dp[1] + dp[3];
  return {even * c.width + odd * c.height, even * c.height + odd * c.width,
          deven * c.width + dodd * c.height, deven * c.height + dodd * c.width};
}

}  // namespace atmplace
