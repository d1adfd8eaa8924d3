#include "atmplace/compact_warpage.hpp"

#include <algorithm>
#include <cmath>

namespace atmplace {

void CompactWarpageParams::check(int n) const {
  const auto sz = static_cast<std::size_t>(n);
  if (kx.size() != sz || ky.size() != sz || lambda.size() != sz || c.size() != sz ||
      t_ref.size() != sz)
    throw DomainError("compact warpage params sized for " + std::to_string(size()) +
                      " chiplets, design has " + std::to_string(n));
  for (int i = 0; i < n; ++i)
    if (!(kx[i] > 0) || !(ky[i] > 0))
      throw DomainError("compact warpage params: k must be positive");
}

Json warpage_params_to_json(const CompactWarpageParams& p) {
  Json per = Json::array();
  for (int i = 0; i < p.size(); ++i)
    per.push_back({{"kx", p.kx[i]},
                   {"ky", p.ky[i]},
                   {"lambda", p.lambda[i]},
                   {"c", p.c[i]},
                   {"t_ref", p.t_ref[i]}});
  return {{"alpha", p.alpha}, {"b", p.b}, {"per_chiplet", per}};
}

CompactWarpageParams warpage_params_from_json(const Json& j) {
  CompactWarpageParams p;
  p.alpha = get_number(j, "alpha", "warpage_params");
  p.b = get_number(j, "b", "warpage_params");
  const Json& per = get_field(j, "per_chiplet", "warpage_params");
  for (std::size_t i = 0; i < per.size(); ++i) {
    const std::string ctx = "warpage_params.per_chiplet[" + std::to_string(i) + "]";
    p.kx.push_back(get_number(per[i], "kx", ctx));
    p.ky.push_back(get_number(per[i], "ky", ctx));
    p.lambda.push_back(get_number(per[i], "lambda", ctx));
    p.c.push_back(get_number(per[i], "c", ctx));
    p.t_ref.push_back(get_number(per[i], "t_ref", ctx));
  }
  return p;
}

LocalShape local_shape(const CompactWarpageParams& p, int i) {
  return {p.kx[i], p.ky[i], p.lambda[i], p.c[i]};
}

double eval_w_local(const LocalShape& s, double xi, double yi, double x, double y) {
  const double u = s.kx * (x - xi), v = s.ky * (y - yi);
  return u * u + v * v + s.lambda * (u + v) + s.c;
}

FieldGrid eval_W_geom(const CompactWarpageParams& wp, const FieldGrid& T,
                      const std::vector<SourceGeom>& geom) {
  const int n = static_cast<int>(geom.size());
  wp.check(n);
  FieldGrid out(T.nx(), T.ny(), T.width(), T.height(), 0.0);
  std::vector<double> su(T.nx()), sv(T.ny());
  // Accumulate Σ_i (T - Tref_i) w_i as T Σ w_i - Σ Tref_i w_i.
  std::vector<double> sw(T.size(), 0.0), sq(T.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int iy = 0; iy < T.ny(); ++iy) {
      const double v = wp.ky[i] * (T.y_center(iy) - geom[i].y);
      for (int ix = 0; ix < T.nx(); ++ix) {
        const double u = wp.kx[i] * (T.x_center(ix) - geom[i].x);
        const double w = u * u + v * v + wp.lambda[i] * (u + v) + wp.c[i];
        const std::size_t k = static_cast<std::size_t>(iy) * T.nx() + ix;
        sw[k] += w;
        sq[k] += wp.t_ref[i] * w;
      }
    }
  }
  for (std::size_t k = 0; k < T.size(); ++k)
    out.values()[k] = wp.alpha * (T.values()[k] * sw[k] - sq[k]) + wp.b;
  return out;
}

FieldGrid eval_W(const CompactWarpageParams& wp, const CompactThermalParams& tp,
                 const DesignInstance& design, const Placement& placement, const GridSpec& grid) {
  const FieldGrid T = eval_Tc(tp, design, placement, grid);
  return eval_W_geom(wp, T, snapped_geometry(design, placement));
}

WarpageVjp vjp_W(const CompactWarpageParams& wp, const FieldGrid& T,
                 const std::vector<SourceGeom>& geom, const std::vector<double>& weights) {
  const int n = static_cast<int>(geom.size());
  wp.check(n);
  WarpageVjp g;
  g.x.assign(n, 0.0);
  g.y.assign(n, 0.0);
  g.kx.assign(n, 0.0);
  g.ky.assign(n, 0.0);
  g.lambda.assign(n, 0.0);
  g.c.assign(n, 0.0);
  g.t_ref.assign(n, 0.0);
  g.thermal_weights.assign(T.size(), 0.0);
  std::vector<double> sw(T.size(), 0.0), sq(T.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    const double kx = wp.kx[i], ky = wp.ky[i], lam = wp.lambda[i], tr = wp.t_ref[i];
    double gx = 0, gy = 0, gkx = 0, gky = 0, glam = 0, gc = 0, gtr = 0;
    for (int iy = 0; iy < T.ny(); ++iy) {
      const double dy = T.y_center(iy) - geom[i].y;
      const double v = ky * dy;
      for (int ix = 0; ix < T.nx(); ++ix) {
        const double dx = T.x_center(ix) - geom[i].x;
        const double u = kx * dx;
        const double w = u * u + v * v + lam * (u + v) + wp.c[i];
        const std::size_t k = static_cast<std::size_t>(iy) * T.nx() + ix;
        sw[k] += w;
        sq[k] += tr * w;
        const double om = weights[k];
        if (om == 0.0) continue;
        const double e = om * (T.values()[k] - tr);  // ω (T - Tref_i)
        gx -= e * (2 * kx * u + lam * kx);
        gy -= e * (2 * ky * v + lam * ky);
        gkx += e * (2 * u * dx + lam * dx);
        gky += e * (2 * v * dy + lam * dy);
        glam += e * (u + v);
        gc += e;
        gtr -= om * w;
      }
    }
    g.x[i] = wp.alpha * gx;
    g.y[i] = wp.alpha * gy;
    g.kx[i] = wp.alpha * gkx;
    g.ky[i] = wp.alpha * gky;
    g.lambda[i] = wp.alpha * glam;
    g.c[i] = wp.alpha * gc;
    g.t_ref[i] = wp.alpha * gtr;
  }
  for (std::size_t k = 0; k < T.size(); ++k) {
    g.alpha += weights[k] * (T.values()[k] * sw[k] - sq[k]);
    g.b += weights[k];
    g.thermal_weights[k] = wp.alpha * weights[k] * sw[k];
  }
  return g;
}

GeomGrad grad_W_vjp(const CompactWarpageParams& wp, const CompactThermalParams& tp,
                    const std::vector<double>& power, const std::vector<SourceGeom>& geom,
                    const GridSpec& grid, const std::vector<double>& weights) {
  const FieldGrid T = eval_Tc_geom(tp, power, geom, grid, grid.nx * grid.dx, grid.ny * grid.dy);
  const WarpageVjp wv = vjp_W(wp, T, geom, weights);
  const ThermalVjp tv = vjp_Tc(tp, power, geom, grid, wv.thermal_weights);
  GeomGrad g;
  g.x = wv.x;
  g.y = wv.y;
  for (std::size_t i = 0; i < geom.size(); ++i) {
    g.x[i] += tv.x[i];
    g.y[i] += tv.y[i];
  }
  g.w = tv.w;
  g.h = tv.h;
  return g;
}

double smooth_peak_to_valley(const std::vector<double>& f, double tau, std::vector<double>* grad) {
  if (f.empty()) throw DomainError("smooth_peak_to_valley: empty field");
  const double hi = *std::max_element(f.begin(), f.end());
  const double lo = *std::min_element(f.begin(), f.end());
  double sp = 0, sn = 0;
  for (double v : f) {
    sp += std::exp(tau * (v - hi));
    sn += std::exp(-tau * (v - lo));
  }
  const double smax = hi + std::log(sp) / tau;
  const double smin = lo - std::log(sn) / tau;
  if (grad) {
    grad->resize(f.size());
    for (std::size_t k = 0; k < f.size(); ++k)
      (*grad)[k] = std::exp(tau * (f[k] - hi)) / sp - std::exp(-tau * (f[k] - lo)) / sn;
  }
  return smax - smin;
}

double default_sharpness(const std::vector<double>& f) {
  const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
  const double range = *hi - *lo;
  return range > 1e-12 ? 50.0 / range : 50.0;
}

}  // namespace atmplace
