#include "atmplace/placement_objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace atmplace {

void StateGrad::add(const StateGrad& o, double scale) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] += scale * o.x[i];
    y[i] += scale * o.y[i];
    theta[i] += scale * o.theta[i];
  }
}

double StateGrad::norm1() const {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    s += std::abs(x[i]) + std::abs(y[i]) + std::abs(theta[i]);
  return s;
}

double bell(double d, double w, double wb) {
  d = std::abs(d);
  const double d1 = 0.5 * w + wb, d2 = 0.5 * w + 2.0 * wb;
  if (d <= d1) {
    const double a = 4.0 / ((w + 2.0 * wb) * (w + 4.0 * wb));
    return 1.0 - a * d * d;
  }
  if (d <= d2) {
    const double b = 2.0 / (wb * (w + 4.0 * wb));
    return b * (d - d2) * (d - d2);
  }
  return 0.0;
}

double bell_slope(double d, double w, double wb) {
  const double d1 = 0.5 * w + wb, d2 = 0.5 * w + 2.0 * wb;
  if (d <= d1) return -2.0 * d * 4.0 / ((w + 2.0 * wb) * (w + 4.0 * wb));
  if (d <= d2) return 2.0 * (d - d2) * 2.0 / (wb * (w + 4.0 * wb));
  return 0.0;
}

// ---------------------------------------------------------------- wirelength

double projected_wirelength(const DesignInstance& design, const Placement& s, double eta,
                            double eps, StateGrad* grad) {
  const int n = design.size();
  if (static_cast<int>(s.size()) != n) throw DomainError("state size does not match design");
  if (!(eps > 0)) throw DomainError("wirelength smoothing must be positive");
  std::vector<OrientProbs> p(n), dp(n);
  for (int i = 0; i < n; ++i) bz_with_grad(s[i].theta, eta, p[i], dp[i]);
  auto smooth = [eps](double d) { return std::sqrt(d * d + eps * eps) - eps; };
  auto slope = [eps](double d) { return d / std::sqrt(d * d + eps * eps); };

  double total = 0.0;
  for (const Net& e : design.nets()) {
    const int i = e.a.chiplet, j = e.b.chiplet;
    const BumpPin& pa = design.pin(e.a);
    const BumpPin& pb = design.pin(e.b);
    Vec2 ra[4], rb[4];
    for (int k = 0; k < 4; ++k) {
      ra[k] = rotate_offset(pa.x, pa.y, k);
      rb[k] = rotate_offset(pb.x, pb.y, k);
    }
    double gx = 0, gy = 0;
    double row[4] = {0, 0, 0, 0}, col[4] = {0, 0, 0, 0};  // Σ_l B_j,l c_kl and Σ_k B_i,k c_kl
    for (int k = 0; k < 4; ++k) {
      for (int l = 0; l < 4; ++l) {
        const double dx = s[i].x + ra[k].x - s[j].x - rb[l].x;
        const double dy = s[i].y + ra[k].y - s[j].y - rb[l].y;
        const double c = smooth(dx) + smooth(dy);
        const double w = p[i][k] * p[j][l];
        total += w * c;
        if (grad) {
          gx += w * slope(dx);
          gy += w * slope(dy);
          row[k] += p[j][l] * c;
          col[l] += p[i][k] * c;
        }
      }
    }
    if (grad) {
      grad->x[i] += gx;
      grad->x[j] -= gx;
      grad->y[i] += gy;
      grad->y[j] -= gy;
      for (int k = 0; k < 4; ++k) {
        grad->theta[i] += dp[i][k] * row[k];
        grad->theta[j] += dp[j][k] * col[k];
      }
    }
  }
  return total;
}

// ---------------------------------------------------------------- density

namespace {

struct AxisProfile {
  std::vector<double> v, dv;  // normalized profile and its derivative w.r.t. the center
  bool empty = true;
};

// Normalized bell profile of a footprint of width w centered at c over `bins` bins of width wb.
AxisProfile axis_profile(double c, double w, int bins, double wb) {
  AxisProfile a;
  a.v.assign(bins, 0.0);
  a.dv.assign(bins, 0.0);
  std::vector<double> raw(bins), draw(bins);
  double sum = 0.0, dsum = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double d = (b + 0.5) * wb - c;
    raw[b] = bell(d, w, wb);
    // d/dc of P(|d|) = -sign(d) P'(|d|)
    draw[b] = d == 0.0 ? 0.0 : -(d > 0 ? 1.0 : -1.0) * bell_slope(std::abs(d), w, wb);
    sum += raw[b];
    dsum += draw[b];
  }
  if (sum <= 1e-300) return a;
  a.empty = false;
  for (int b = 0; b < bins; ++b) {
    a.v[b] = raw[b] / sum;
    a.dv[b] = draw[b] / sum - raw[b] * dsum / (sum * sum);
  }
  return a;
}

struct ChipletProfiles {
  AxisProfile px[2], py[2];  // [0] unrotated dims, [1] swapped dims
  OrientProbs p{}, dp{};
};

ChipletProfiles chiplet_profiles(const ChipletSpec& c, const ChipletPose& s, int nbx, int nby,
                                 double wbx, double wby, double eta) {
  ChipletProfiles cp;
  bz_with_grad(s.theta, eta, cp.p, cp.dp);
  cp.px[0] = axis_profile(s.x, c.width, nbx, wbx);
  cp.py[0] = axis_profile(s.y, c.height, nby, wby);
  cp.px[1] = axis_profile(s.x, c.height, nbx, wbx);
  cp.py[1] = axis_profile(s.y, c.width, nby, wby);
  return cp;
}

}  // namespace

std::vector<double> projected_density(const DesignInstance& design, const Placement& s,
                                      int nbx, int nby, double eta) {
  if (nbx < 1 || nby < 1) throw DomainError("bin grid must be at least 1x1");
  const double wbx = design.interposer().width / nbx;
  const double wby = design.interposer().height / nby;
  std::vector<double> dens(static_cast<std::size_t>(nbx) * nby, 0.0);
  for (int i = 0; i < design.size(); ++i) {
    const ChipletSpec& c = design.chiplet(i);
    const ChipletProfiles cp = chiplet_profiles(c, s[i], nbx, nby, wbx, wby, eta);
    const double mix[2] = {cp.p[0] + cp.p[2], cp.p[1] + cp.p[3]};
    for (int o = 0; o < 2; ++o) {
      if (cp.px[o].empty || cp.py[o].empty) continue;
      const double scale = c.area() * mix[o];
      for (int by = 0; by < nby; ++by) {
        const double fy = scale * cp.py[o].v[by];
        if (fy == 0.0) continue;
        double* row = &dens[static_cast<std::size_t>(by) * nbx];
        for (int bx = 0; bx < nbx; ++bx) row[bx] += fy * cp.px[o].v[bx];
      }
    }
  }
  return dens;
}

void projected_density_vjp(const DesignInstance& design, const Placement& s, int nbx, int nby,
                           double eta, const std::vector<double>& omega, StateGrad& grad) {
  const double wbx = design.interposer().width / nbx;
  const double wby = design.interposer().height / nby;
  std::vector<double> qy(nbx);
  for (int i = 0; i < design.size(); ++i) {
    const ChipletSpec& c = design.chiplet(i);
    const ChipletProfiles cp = chiplet_profiles(c, s[i], nbx, nby, wbx, wby, eta);
    const double mix[2] = {cp.p[0] + cp.p[2], cp.p[1] + cp.p[3]};
    const double dmix[2] = {cp.dp[0] + cp.dp[2], cp.dp[1] + cp.dp[3]};
    for (int o = 0; o < 2; ++o) {
      if (cp.px[o].empty || cp.py[o].empty) continue;
      // qy[bx] = Σ_by ω py, qdy[bx] = Σ_by ω dpy
      std::fill(qy.begin(), qy.end(), 0.0);
      std::vector<double> qdy(nbx, 0.0);
      for (int by = 0; by < nby; ++by) {
        const double vy = cp.py[o].v[by], dvy = cp.py[o].dv[by];
        if (vy == 0.0 && dvy == 0.0) continue;
        const double* row = &omega[static_cast<std::size_t>(by) * nbx];
        for (int bx = 0; bx < nbx; ++bx) {
          qy[bx] += row[bx] * vy;
          qdy[bx] += row[bx] * dvy;
        }
      }
      double sx = 0, sy = 0, sv = 0;
      for (int bx = 0; bx < nbx; ++bx) {
        sx += cp.px[o].dv[bx] * qy[bx];
        sy += cp.px[o].v[bx] * qdy[bx];
        sv += cp.px[o].v[bx] * qy[bx];
      }
      grad.x[i] += c.area() * mix[o] * sx;
      grad.y[i] += c.area() * mix[o] * sy;
      grad.theta[i] += c.area() * dmix[o] * sv;
    }
  }
}

std::pair<int, int> default_bins(const DesignInstance& design) {
  double mean = 0.0;
  for (const auto& c : design.chiplets()) mean += 0.5 * (c.width + c.height);
  mean = design.size() > 0 ? mean / design.size() : 1.0;
  const double wb = std::max(0.5 * mean, 1e-9);
  auto count = [&](double len) {
    return static_cast<int>(std::clamp(std::lround(len / wb), 4L, 64L));
  };
  return {count(design.interposer().width), count(design.interposer().height)};
}

std::pair<int, int> resolve_bins(const DesignInstance& design, const PenaltyConfig& cfg) {
  const auto def = default_bins(design);
  return {cfg.bins_x > 0 ? cfg.bins_x : def.first, cfg.bins_y > 0 ? cfg.bins_y : def.second};
}

double bin_capacity(const DesignInstance& design, int nbx, int nby, double t_max) {
  return t_max * (design.interposer().width / nbx) * (design.interposer().height / nby);
}

double overflow(const DesignInstance& design, const Placement& s, int nbx, int nby, double eta,
                double t_max) {
  const double S = design.total_area();
  if (!(S > 0)) throw DomainError("overflow: total chiplet area is zero");
  const double cap = bin_capacity(design, nbx, nby, t_max);
  double over = 0.0;
  for (double d : projected_density(design, s, nbx, nby, eta)) over += std::max(0.0, d - cap);
  return over / S;
}

std::vector<SourceGeom> expected_geometry(const DesignInstance& design, const Placement& s,
                                          double eta, std::vector<ExpectedDims>* dims) {
  std::vector<SourceGeom> g(design.size());
  if (dims) dims->resize(design.size());
  for (int i = 0; i < design.size(); ++i) {
    OrientProbs p{}, dp{};
    bz_with_grad(s[i].theta, eta, p, dp);
    const ExpectedDims e = expected_dims(design.chiplet(i), p, dp);
    g[i] = {s[i].x, s[i].y, e.w, e.h};
    if (dims) (*dims)[i] = e;
  }
  return g;
}

// ---------------------------------------------------------------- objective

namespace {

double ipow(double v, int g) {
  double r = 1.0;
  for (int k = 0; k < g; ++k) r *= v;
  return r;
}

void geometry_grad_to_state(const std::vector<ExpectedDims>& dims, const std::vector<double>& gx,
                            const std::vector<double>& gy, const std::vector<double>& gw,
                            const std::vector<double>& gh, StateGrad& out) {
  for (std::size_t i = 0; i < dims.size(); ++i) {
    out.x[i] += gx[i];
    out.y[i] += gy[i];
    out.theta[i] += gw[i] * dims[i].dw + gh[i] * dims[i].dh;
  }
}

}  // namespace

ObjectiveTerms objective(const DesignInstance& design, const Placement& s,
                         const PhysicsModels& models, const PenaltyConfig& cfg, double eta,
                         ObjectiveGrads* grads) {
  const int n = design.size();
  if (cfg.gamma < 1) throw DomainError("penalty exponent must be >= 1");
  if (grads) {
    grads->wl = grads->density = grads->thermal = grads->warpage = grads->total =
        grads->density_deviation = StateGrad(n);
  }
  ObjectiveTerms t;
  t.peak_T = std::numeric_limits<double>::quiet_NaN();
  t.warpage_metric = std::numeric_limits<double>::quiet_NaN();

  t.wl = projected_wirelength(design, s, eta, cfg.wl_smoothing, grads ? &grads->wl : nullptr);

  const auto [nbx, nby] = resolve_bins(design, cfg);
  const std::vector<double> dens = projected_density(design, s, nbx, nby, eta);
  const double cap = bin_capacity(design, nbx, nby, cfg.t_max);
  std::vector<double> omega(dens.size()), omega_dev(dens.size());
  double over = 0.0;
  for (std::size_t b = 0; b < dens.size(); ++b) {
    const double e = dens[b] - cap;
    const double h = std::max(0.0, e);
    t.density += h * h;
    over += h;
    omega[b] = 2.0 * h;
    omega_dev[b] = 2.0 * e;
  }
  t.overflow = over / design.total_area();
  if (grads) {
    projected_density_vjp(design, s, nbx, nby, eta, omega, grads->density);
    projected_density_vjp(design, s, nbx, nby, eta, omega_dev,
                          grads->density_deviation);
  }

  if (models.thermal) {
    const GridSpec grid = GridSpec::of(design);
    std::vector<ExpectedDims> dims;
    const std::vector<SourceGeom> geom = expected_geometry(design, s, eta, &dims);
    const std::vector<double> power = power_vector(design);
    const FieldGrid T = eval_Tc_geom(*models.thermal, power, geom, grid, design.interposer().width,
                                     design.interposer().height);
    t.peak_T = T.max();
    std::vector<double> wT(T.size(), 0.0);
    for (std::size_t r = 0; r < T.size(); ++r) {
      const double h = std::max(0.0, T.values()[r] - cfg.T_th);
      if (h <= 0.0) continue;
      t.thermal += ipow(h, cfg.gamma);
      wT[r] = cfg.gamma * ipow(h, cfg.gamma - 1);
    }
    if (grads && cfg.lambda_T > 0 && t.thermal > 0) {
      const ThermalVjp v = vjp_Tc(*models.thermal, power, geom, grid, wT);
      geometry_grad_to_state(dims, v.x, v.y, v.w, v.h, grads->thermal);
    }

    if (models.warpage) {
      const FieldGrid Wf = eval_W_geom(*models.warpage, T, geom);
      t.warpage_metric = Wf.max() - Wf.min();
      const double tau = cfg.warp_tau > 0 ? cfg.warp_tau : default_sharpness(Wf.values());
      std::vector<double> gpv;
      const double pv = smooth_peak_to_valley(Wf.values(), tau, &gpv);
      const double h = std::max(0.0, pv - cfg.W_th);
      t.warpage = h > 0 ? ipow(h, cfg.gamma) : 0.0;
      if (grads && cfg.lambda_W > 0 && h > 0) {
        const double scale = cfg.gamma * ipow(h, cfg.gamma - 1);
        for (double& g : gpv) g *= scale;
        const WarpageVjp wv = vjp_W(*models.warpage, T, geom, gpv);
        const ThermalVjp tv = vjp_Tc(*models.thermal, power, geom, grid, wv.thermal_weights);
        std::vector<double> gx = wv.x, gy = wv.y;
        for (int i = 0; i < n; ++i) {
          gx[i] += tv.x[i];
          gy[i] += tv.y[i];
        }
        geometry_grad_to_state(dims, gx, gy, tv.w, tv.h, grads->warpage);
      }
    }
  }

  t.total = t.wl + cfg.lambda_dens * t.density + cfg.lambda_T * t.thermal +
            cfg.lambda_W * t.warpage;
  if (grads) {
    grads->total.add(grads->wl, 1.0);
    grads->total.add(grads->density, cfg.lambda_dens);
    grads->total.add(grads->thermal, cfg.lambda_T);
    grads->total.add(grads->warpage, cfg.lambda_W);
  }
  return t;
}

}  // namespace atmplace
