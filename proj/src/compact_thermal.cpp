#include "atmplace/compact_thermal.hpp"

#include <cmath>

#include "atmplace/aux_function.hpp"

namespace atmplace {

namespace {

constexpr double kTwoOverSqrtPi = 1.12837916709551257390;

// Multiplies the ratio (|c|+Δ)/p into num/den so that log(num/den) = Σ asinh(c/p).
inline void accumulate_asinh(double c, double delta, double p, double& num, double& den) {
  if (c >= 0) {
    num *= c + delta;
    den *= p;
  } else {
    num *= p;
    den *= delta - c;
  }
}

}  // namespace

void CompactThermalParams::check(int n) const {
  if (size() != n || static_cast<int>(ly.size()) != n)
    throw DomainError("compact thermal params sized for " + std::to_string(size()) +
                      " chiplets, design has " + std::to_string(n));
  if (!(a > 0)) throw DomainError("compact thermal params: a must be positive");
  for (int i = 0; i < n; ++i)
    if (!(lx[i] > 0) || !(ly[i] > 0))
      throw DomainError("compact thermal params: length normalization must be positive");
}

Json thermal_params_to_json(const CompactThermalParams& p) {
  Json per = Json::array();
  for (int i = 0; i < p.size(); ++i) per.push_back({{"lx", p.lx[i]}, {"ly", p.ly[i]}});
  return {{"A", p.A}, {"a", p.a}, {"B", p.B}, {"per_chiplet", per}};
}

CompactThermalParams thermal_params_from_json(const Json& j) {
  CompactThermalParams p;
  p.A = get_number(j, "A", "thermal_params");
  p.a = get_number(j, "a", "thermal_params");
  p.B = get_number(j, "B", "thermal_params");
  const Json& per = get_field(j, "per_chiplet", "thermal_params");
  for (std::size_t i = 0; i < per.size(); ++i) {
    const std::string ctx = "thermal_params.per_chiplet[" + std::to_string(i) + "]";
    p.lx.push_back(get_number(per[i], "lx", ctx));
    p.ly.push_back(get_number(per[i], "ly", ctx));
  }
  return p;
}

GridSpec GridSpec::of(const DesignInstance& d) {
  const auto& ip = d.interposer();
  return {ip.grid, ip.grid, ip.width / ip.grid, ip.height / ip.grid};
}

std::vector<SourceGeom> snapped_geometry(const DesignInstance& design, const Placement& pl) {
  if (static_cast<int>(pl.size()) != design.size())
    throw DomainError("placement size does not match design");
  std::vector<SourceGeom> g(pl.size());
  for (int i = 0; i < design.size(); ++i) {
    const Vec2 d = rotated_dims(design.chiplet(i), pl[i].theta);
    g[i] = {pl[i].x, pl[i].y, d.x, d.y};
  }
  return g;
}

std::vector<double> power_vector(const DesignInstance& design) {
  std::vector<double> p;
  for (const auto& c : design.chiplets()) p.push_back(c.power_density);
  return p;
}

void thermal_kernel(double a, const SourceGeom& g, double lx, double ly, const GridSpec& grid,
                    double scale, double* field, const double* weights, KernelSums* sums,
                    double* terms) {
  const double a2 = a * a;
  const int nx = grid.nx, ny = grid.ny;
  std::vector<double> col(6 * static_cast<std::size_t>(nx)), row(6 * static_cast<std::size_t>(ny));
  for (int ix = 0; ix < nx; ++ix) {
    const double d = grid.x(ix) - g.x;
    double* c = &col[6 * ix];
    c[0] = (g.w / 2 - d) / lx;
    c[1] = (g.w / 2 + d) / lx;
    c[2] = a2 + c[0] * c[0];
    c[3] = a2 + c[1] * c[1];
    c[4] = std::sqrt(c[2]);
    c[5] = std::sqrt(c[3]);
  }
  for (int iy = 0; iy < ny; ++iy) {
    const double d = grid.y(iy) - g.y;
    double* r = &row[6 * iy];
    r[0] = (g.h / 2 - d) / ly;
    r[1] = (g.h / 2 + d) / ly;
    r[2] = a2 + r[0] * r[0];
    r[3] = a2 + r[1] * r[1];
    r[4] = std::sqrt(r[2]);
    r[5] = std::sqrt(r[3]);
  }

  double ss = 0, sx = 0, sy = 0, sw = 0, sh = 0, slx = 0, sly = 0, sa = 0;
  for (int iy = 0; iy < ny; ++iy) {
    const double* r = &row[6 * iy];
    const double c1 = r[0], c2 = r[1];
    const double c1s = c1 * c1, c2s = c2 * c2;
    double* frow = field ? field + static_cast<std::size_t>(iy) * nx : nullptr;
    const double* wrow = weights ? weights + static_cast<std::size_t>(iy) * nx : nullptr;
    for (int ix = 0; ix < nx; ++ix) {
      const double* c = &col[6 * ix];
      const double b1 = c[0], b2 = c[1];
      const double d11 = std::sqrt(c[2] + c1s);
      const double d12 = std::sqrt(c[2] + c2s);
      const double d21 = std::sqrt(c[3] + c1s);
      const double d22 = std::sqrt(c[3] + c2s);

      double n1 = 1, e1 = 1, n2 = 1, e2 = 1, m1 = 1, f1 = 1, m2 = 1, f2 = 1;
      accumulate_asinh(c1, d11, c[4], n1, e1);
      accumulate_asinh(c2, d12, c[4], n1, e1);
      accumulate_asinh(c1, d21, c[5], n2, e2);
      accumulate_asinh(c2, d22, c[5], n2, e2);
      accumulate_asinh(b1, d11, r[4], m1, f1);
      accumulate_asinh(b2, d21, r[4], m1, f1);
      accumulate_asinh(b1, d12, r[5], m2, f2);
      accumulate_asinh(b2, d22, r[5], m2, f2);
      const double L1 = std::log(n1 / e1), L2 = std::log(n2 / e2);
      const double M1 = std::log(m1 / f1), M2 = std::log(m2 / f2);

      // Σ atan(b c / (a Δ)) as the argument of a product of complex numbers, two at a time.
      const double x11 = a * d11, x12 = a * d12, x21 = a * d21, x22 = a * d22;
      const double y11 = b1 * c1, y12 = b1 * c2, y21 = b2 * c1, y22 = b2 * c2;
      const double phi = std::atan2(x11 * y12 + x12 * y11, x11 * x12 - y11 * y12) +
                         std::atan2(x21 * y22 + x22 * y21, x21 * x22 - y21 * y22);

      const double S = kTwoOverSqrtPi * (b1 * L1 + b2 * L2 + c1 * M1 + c2 * M2 - a * phi);
      if (frow) frow[ix] += scale * S;
      if (terms) {
        double* t = terms + kKernelTerms * (static_cast<std::size_t>(iy) * nx + ix);
        t[0] = S;
        t[1] = L1;
        t[2] = L2;
        t[3] = M1;
        t[4] = M2;
        t[5] = phi;
      }
      if (wrow) {
        const double w = wrow[ix];
        ss += w * S;
        sx += w * (L1 - L2);
        sw += w * (L1 + L2);
        slx += w * (b1 * L1 + b2 * L2);
        sy += w * (M1 - M2);
        sh += w * (M1 + M2);
        sly += w * (c1 * M1 + c2 * M2);
        sa += w * phi;
      }
    }
  }
  if (sums) {
    const double K = kTwoOverSqrtPi;
    sums->s = ss;
    sums->x = K * sx / lx;
    sums->w = K * sw / (2 * lx);
    sums->lx = -K * slx / lx;
    sums->y = K * sy / ly;
    sums->h = K * sh / (2 * ly);
    sums->ly = -K * sly / ly;
    sums->a = -K * sa;
  }
}

KernelSums kernel_sums(double a, const SourceGeom& g, double lx, double ly, const GridSpec& grid,
                       const double* terms, const double* weights) {
  (void)a;
  double ss = 0, sx = 0, sy = 0, sw = 0, sh = 0, slx = 0, sly = 0, sa = 0;
  std::vector<double> b1(grid.nx), b2(grid.nx);
  for (int ix = 0; ix < grid.nx; ++ix) {
    const double d = grid.x(ix) - g.x;
    b1[ix] = (g.w / 2 - d) / lx;
    b2[ix] = (g.w / 2 + d) / lx;
  }
  for (int iy = 0; iy < grid.ny; ++iy) {
    const double d = grid.y(iy) - g.y;
    const double c1 = (g.h / 2 - d) / ly, c2 = (g.h / 2 + d) / ly;
    for (int ix = 0; ix < grid.nx; ++ix) {
      const std::size_t k = static_cast<std::size_t>(iy) * grid.nx + ix;
      const double w = weights[k];
      const double* t = terms + kKernelTerms * k;
      ss += w * t[0];
      sx += w * (t[1] - t[2]);
      sw += w * (t[1] + t[2]);
      slx += w * (b1[ix] * t[1] + b2[ix] * t[2]);
      sy += w * (t[3] - t[4]);
      sh += w * (t[3] + t[4]);
      sly += w * (c1 * t[3] + c2 * t[4]);
      sa += w * t[5];
    }
  }
  const double K = kTwoOverSqrtPi;
  KernelSums s;
  s.s = ss;
  s.x = K * sx / lx;
  s.w = K * sw / (2 * lx);
  s.lx = -K * slx / lx;
  s.y = K * sy / ly;
  s.h = K * sh / (2 * ly);
  s.ly = -K * sly / ly;
  s.a = -K * sa;
  return s;
}

FieldGrid eval_Tc_geom(const CompactThermalParams& p, const std::vector<double>& power,
                       const std::vector<SourceGeom>& geom, const GridSpec& grid, double width,
                       double height) {
  p.check(static_cast<int>(geom.size()));
  FieldGrid f(grid.nx, grid.ny, width, height, p.B);
  for (std::size_t i = 0; i < geom.size(); ++i) {
    if (power[i] == 0.0) continue;
    thermal_kernel(p.a, geom[i], p.lx[i], p.ly[i], grid, p.A * power[i], f.values().data(), nullptr,
                   nullptr);
  }
  return f;
}

FieldGrid eval_Tc(const CompactThermalParams& p, const DesignInstance& design,
                  const Placement& placement, const GridSpec& grid) {
  return eval_Tc_geom(p, power_vector(design), snapped_geometry(design, placement), grid,
                      grid.nx * grid.dx, grid.ny * grid.dy);
}

std::vector<double> eval_Tc_points(const CompactThermalParams& p, const DesignInstance& design,
                                   const Placement& placement, const std::vector<Vec2>& points) {
  p.check(design.size());
  const auto geom = snapped_geometry(design, placement);
  std::vector<double> out(points.size(), p.B);
  for (std::size_t k = 0; k < points.size(); ++k) {
    for (int i = 0; i < design.size(); ++i) {
      const auto& g = geom[i];
      const double dx = points[k].x - g.x, dy = points[k].y - g.y;
      const double b1 = (g.w / 2 - dx) / p.lx[i], b2 = (g.w / 2 + dx) / p.lx[i];
      const double c1 = (g.h / 2 - dy) / p.ly[i], c2 = (g.h / 2 + dy) / p.ly[i];
      const double S = aux_F(p.a, b1, c1) + aux_F(p.a, b1, c2) + aux_F(p.a, b2, c1) +
                       aux_F(p.a, b2, c2);
      out[k] += p.A * design.chiplet(i).power_density * S;
    }
  }
  return out;
}

ThermalGradFields grad_Tc(const CompactThermalParams& p, const DesignInstance& design,
                          const Placement& placement, const GridSpec& grid) {
  p.check(design.size());
  const auto geom = snapped_geometry(design, placement);
  const double W = grid.nx * grid.dx, H = grid.ny * grid.dy;
  ThermalGradFields out;
  // Per-cell derivatives come from the kernel with a one-hot weight; that would be O(M⁴),
  // so evaluate the closed-form partials directly instead.
  for (int i = 0; i < design.size(); ++i) {
    FieldGrid fx(grid.nx, grid.ny, W, H), fy(grid.nx, grid.ny, W, H);
    FieldGrid fw(grid.nx, grid.ny, W, H), fh(grid.nx, grid.ny, W, H);
    const auto& g = geom[i];
    const double scale = p.A * design.chiplet(i).power_density;
    const double lx = p.lx[i], ly = p.ly[i];
    for (int iy = 0; iy < grid.ny; ++iy) {
      for (int ix = 0; ix < grid.nx; ++ix) {
        const double dx = grid.x(ix) - g.x, dy = grid.y(iy) - g.y;
        const double b[2] = {(g.w / 2 - dx) / lx, (g.w / 2 + dx) / lx};
        const double c[2] = {(g.h / 2 - dy) / ly, (g.h / 2 + dy) / ly};
        double db[2] = {0, 0}, dc[2] = {0, 0};
        for (int s = 0; s < 2; ++s) {
          for (int t = 0; t < 2; ++t) {
            const auto gr = aux_F_grad(p.a, b[s], c[t]);
            db[s] += gr[1];
            dc[t] += gr[2];
          }
        }
        fx.at(ix, iy) = scale * (db[0] - db[1]) / lx;
        fw.at(ix, iy) = scale * (db[0] + db[1]) / (2 * lx);
        fy.at(ix, iy) = scale * (dc[0] - dc[1]) / ly;
        fh.at(ix, iy) = scale * (dc[0] + dc[1]) / (2 * ly);
      }
    }
    out.dx.push_back(std::move(fx));
    out.dy.push_back(std::move(fy));
    out.dw.push_back(std::move(fw));
    out.dh.push_back(std::move(fh));
  }
  return out;
}

ThermalVjp vjp_Tc(const CompactThermalParams& p, const std::vector<double>& power,
                  const std::vector<SourceGeom>& geom, const GridSpec& grid,
                  const std::vector<double>& weights) {
  const int n = static_cast<int>(geom.size());
  p.check(n);
  ThermalVjp v;
  v.x.assign(n, 0.0);
  v.y.assign(n, 0.0);
  v.w.assign(n, 0.0);
  v.h.assign(n, 0.0);
  v.lx.assign(n, 0.0);
  v.ly.assign(n, 0.0);
  for (double w : weights) v.B += w;
  for (int i = 0; i < n; ++i) {
    if (power[i] == 0.0) continue;
    KernelSums s;
    thermal_kernel(p.a, geom[i], p.lx[i], p.ly[i], grid, 0.0, nullptr, weights.data(), &s);
    const double k = p.A * power[i];
    v.x[i] = k * s.x;
    v.y[i] = k * s.y;
    v.w[i] = k * s.w;
    v.h[i] = k * s.h;
    v.lx[i] = k * s.lx;
    v.ly[i] = k * s.ly;
    v.a += k * s.a;
    v.A += power[i] * s.s;
  }
  return v;
}

}  // namespace atmplace
