#pragma once

// Independent oracles shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "atmplace/benchmark.hpp"
#include "atmplace/compact_thermal.hpp"
#include "atmplace/compact_warpage.hpp"
#include "atmplace/fitting.hpp"
#include "atmplace/placement_objective.hpp"
#include "atmplace/rng.hpp"

namespace checks {

using namespace atmplace;

// ---- quadrature ----

// Adaptive Gauss-Kronrod (7/15) on [lo, hi].
inline double gauss_kronrod(const std::function<double(double)>& f, double lo, double hi,
                            double tol, int depth = 0) {
  static const double xk[8] = {0.991455371120812639, 0.949107912342758525, 0.864864423359769073,
                               0.741531185599394440, 0.586087235467691130, 0.405845151377397167,
                               0.207784955007898468, 0.0};
  static const double wk[8] = {0.022935322010529225, 0.063092092629978553, 0.104790010322250184,
                               0.140653259715525919, 0.169004726639267903, 0.190350578064785410,
                               0.204432940075298892, 0.209482141084727828};
  static const double wg[4] = {0.129484966168869693, 0.279705391489276668, 0.381830050505118945,
                               0.417959183673469388};
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  double k = wk[7] * f(c), g = wg[3] * f(c);
  for (int i = 0; i < 7; ++i) {
    const double s = f(c - h * xk[i]) + f(c + h * xk[i]);
    k += wk[i] * s;
    if (i % 2 == 1) g += wg[i / 2] * s;
  }
  k *= h;
  g *= h;
  if (std::abs(k - g) <= tol || depth > 40) return k;
  return gauss_kronrod(f, lo, c, tol / 2, depth + 1) + gauss_kronrod(f, c, hi, tol / 2, depth + 1);
}

// ∫₀^∞ e^{-a²x²} erf(bx) erf(cx) / x² dx by quadrature. Below x = 1e-3 the integrand is
// replaced by its series, e^{-a²x²}(4bc/π)(1 - (b²+c²)x²/3).
inline double F_quadrature(double a, double b, double c) {
  constexpr double kPi = 3.14159265358979323846;
  const double d = 1e-3;
  auto f = [&](double x) {
    if (x < d) return std::exp(-a * a * x * x) * (4 * b * c / kPi) * (1 - (b * b + c * c) * x * x / 3);
    return std::exp(-a * a * x * x) * std::erf(b * x) * std::erf(c * x) / (x * x);
  };
  // e^{-a²x²}/x² past x_hi is below 1e-22 of the head.
  const double x_hi = std::sqrt(52.0) / a;
  double total = gauss_kronrod(f, 0.0, d, 1e-16);
  // Split where erf saturates so the adaptive rule sees smooth pieces.
  std::vector<double> cuts{d};
  for (double s : {std::abs(b), std::abs(c)})
    if (s > 0)
      for (double m : {0.5, 2.0, 6.0})
        if (m / s > d && m / s < x_hi) cuts.push_back(m / s);
  cuts.push_back(std::min(1.0 / a, x_hi));
  cuts.push_back(x_hi);
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) total += gauss_kronrod(f, cuts[i], cuts[i + 1], 1e-15);
  return total;
}

// ---- gradient checks ----

// ‖fd - analytic‖ / ‖fd‖ over one state (absolute when the fd gradient vanishes).
struct GradError {
  double num = 0, den = 0;
  void add(double fd, double an) {
    num += (fd - an) * (fd - an);
    den += fd * fd;
  }
  double value() const { return den > 0 ? std::sqrt(num / den) : std::sqrt(num); }
};

struct GradSuite {
  double thermal = 0, warpage = 0, wirelength = 0, density = 0, objective = 0;
  double worst() const { return std::max({thermal, warpage, wirelength, density, objective}); }
};

inline CompactWarpageParams random_warpage_params(const DesignInstance& d, Rng& r) {
  CompactWarpageParams wp;
  wp.alpha = 0.05;
  wp.b = 1;
  for (int i = 0; i < d.size(); ++i) {
    wp.kx.push_back(2 / d.interposer().width * r.uniform(0.5, 1.5));
    wp.ky.push_back(2 / d.interposer().height * r.uniform(0.5, 1.5));
    wp.lambda.push_back(r.uniform(-0.5, 0.5));
    wp.c.push_back(r.uniform(-1, 1));
    wp.t_ref.push_back(r.uniform(30, 60));
  }
  return wp;
}

inline double& coord(Placement& s, int i, int v) {
  return v == 0 ? s[i].x : v == 1 ? s[i].y : s[i].theta;
}

// Central differences (1e-5 mm, 1e-4 degrees) against the analytic gradients on `states`
// random 4-chiplet states. Returns the worst relative error per quantity.
inline GradSuite gradient_suite(int states, std::uint64_t seed) {
  const auto d = synthesize_benchmark(seed, 4, InterfaceKind::Standard_x16, 0.5);
  const int n = d.size();
  const double W = d.interposer().width, H = d.interposer().height;
  const auto tp = initial_thermal_params(d, 60, 25);
  Rng pr(seed + 1);
  const auto wp = random_warpage_params(d, pr);
  const PhysicsModels models{&tp, &wp};
  const GridSpec grid = GridSpec::of(d);
  const auto [bx, by] = default_bins(d);
  GradSuite out;

  for (int trial = 0; trial < states; ++trial) {
    Rng r(seed * 1000 + trial);
    Placement cont(n), snap(n);
    for (int i = 0; i < n; ++i) {
      cont[i] = {r.uniform(3, W - 3), r.uniform(3, H - 3), r.uniform(0, 360)};
      snap[i] = {cont[i].x, cont[i].y, kOrientations[r.uniform_int(0, 3)]};
    }
    const double eta = 0.3;
    std::vector<double> omega(grid.cells());
    for (auto& w : omega) w = r.uniform(-1, 1);
    const auto dot = [&](const FieldGrid& f) {
      double s = 0;
      for (std::size_t k = 0; k < f.size(); ++k) s += omega[k] * f.values()[k];
      return s;
    };

    // compact thermal: per-chiplet derivative fields, positions only (snapped dims)
    {
      const auto g = grad_Tc(tp, d, snap, grid);
      GradError e;
      for (int i = 0; i < n; ++i)
        for (int v = 0; v < 2; ++v) {
          Placement a = snap, b = snap;
          coord(a, i, v) += 1e-5;
          coord(b, i, v) -= 1e-5;
          const FieldGrid fa = eval_Tc(tp, d, a, grid), fb = eval_Tc(tp, d, b, grid);
          const FieldGrid& an = v == 0 ? g.dx[i] : g.dy[i];
          for (std::size_t k = 0; k < fa.size(); ++k)
            e.add((fa.values()[k] - fb.values()[k]) / 2e-5, an.values()[k]);
        }
      out.thermal = std::max(out.thermal, e.value());
    }
    // compact warpage: Σ ω W through both models
    {
      const auto geom = snapped_geometry(d, snap);
      const auto gg = grad_W_vjp(wp, tp, power_vector(d), geom, grid, omega);
      GradError e;
      for (int i = 0; i < n; ++i)
        for (int v = 0; v < 2; ++v) {
          Placement a = snap, b = snap;
          coord(a, i, v) += 1e-5;
          coord(b, i, v) -= 1e-5;
          const double fd = (dot(eval_W(wp, tp, d, a, grid)) - dot(eval_W(wp, tp, d, b, grid))) / 2e-5;
          e.add(fd, v == 0 ? gg.x[i] : gg.y[i]);
        }
      out.warpage = std::max(out.warpage, e.value());
    }
    // projected wirelength and density over (x, y, θ)
    {
      StateGrad gw(n), gd(n);
      projected_wirelength(d, cont, eta, 1e-3, &gw);
      projected_density_vjp(d, cont, bx, by, eta, std::vector<double>(omega.begin(), omega.begin() + bx * by), gd);
      const auto dens = [&](const Placement& s) {
        const auto v = projected_density(d, s, bx, by, eta);
        double t = 0;
        for (std::size_t k = 0; k < v.size(); ++k) t += omega[k] * v[k];
        return t;
      };
      GradError ew, ed;
      for (int i = 0; i < n; ++i)
        for (int v = 0; v < 3; ++v) {
          const double h = v == 2 ? 1e-4 : 1e-5;
          Placement a = cont, b = cont;
          coord(a, i, v) += h;
          coord(b, i, v) -= h;
          const StateGrad* gs[2] = {&gw, &gd};
          for (int q = 0; q < 2; ++q) {
            const double fd = q == 0 ? (projected_wirelength(d, a, eta, 1e-3) -
                                        projected_wirelength(d, b, eta, 1e-3)) / (2 * h)
                                     : (dens(a) - dens(b)) / (2 * h);
            const double an = v == 0 ? gs[q]->x[i] : v == 1 ? gs[q]->y[i] : gs[q]->theta[i];
            (q == 0 ? ew : ed).add(fd, an);
          }
        }
      out.wirelength = std::max(out.wirelength, ew.value());
      out.density = std::max(out.density, ed.value());
    }
    // full objective with every penalty active
    {
      PenaltyConfig c;
      c.lambda_dens = 1;
      c.lambda_T = 1;
      c.lambda_W = 1;
      c.warp_tau = 0.5;
      const auto t0 = objective(d, cont, models, c, eta);
      c.T_th = 25 + 0.5 * (t0.peak_T - 25);
      c.W_th = 0.5 * t0.warpage_metric;
      ObjectiveGrads g;
      objective(d, cont, models, c, eta, &g);
      GradError e;
      for (int i = 0; i < n; ++i)
        for (int v = 0; v < 3; ++v) {
          const double h = v == 2 ? 1e-4 : 1e-5;
          Placement a = cont, b = cont;
          coord(a, i, v) += h;
          coord(b, i, v) -= h;
          const double fd = (objective(d, a, models, c, eta).total -
                             objective(d, b, models, c, eta).total) / (2 * h);
          e.add(fd, v == 0 ? g.total.x[i] : v == 1 ? g.total.y[i] : g.total.theta[i]);
        }
      out.objective = std::max(out.objective, e.value());
    }
  }
  return out;
}

}  // namespace checks
