#include "atmplace/fitting.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace atmplace {

namespace {

class Adam {
 public:
  explicit Adam(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}
  void step(std::vector<double>& x, const std::vector<double>& g, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(kB1, t_), c2 = 1.0 - std::pow(kB2, t_);
    for (std::size_t k = 0; k < x.size(); ++k) {
      m_[k] = kB1 * m_[k] + (1 - kB1) * g[k];
      v_[k] = kB2 * v_[k] + (1 - kB2) * g[k] * g[k];
      x[k] -= lr * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + 1e-12);
    }
  }

 private:
  static constexpr double kB1 = 0.9, kB2 = 0.999;
  std::vector<double> m_, v_;
  int t_ = 0;
};

using LossFn = std::function<double(const std::vector<double>&, std::vector<double>&)>;

struct AdamRun {
  std::vector<double> best;
  double best_loss;
  int iterations;
  std::vector<double> trace;
};

AdamRun run_adam(const LossFn& fn, std::vector<double> x, const FitConfig& cfg) {
  Adam opt(x.size());
  std::vector<double> g(x.size());
  AdamRun r{x, std::numeric_limits<double>::infinity(), 0, {}};
  const int iters = std::max(1, cfg.iterations);
  for (int k = 0; k < iters; ++k) {
    const double loss = fn(x, g);
    r.trace.push_back(loss);
    r.iterations = k + 1;
    bool finite = std::isfinite(loss);
    for (double v : g) finite = finite && std::isfinite(v);
    if (!finite) {
      std::ostringstream msg;
      msg << "fit diverged at iteration " << k << "; recent losses:";
      const std::size_t from = r.trace.size() > 10 ? r.trace.size() - 10 : 0;
      for (std::size_t t = from; t < r.trace.size(); ++t) msg << ' ' << r.trace[t];
      throw FitDivergence(msg.str());
    }
    if (loss < r.best_loss) {
      r.best_loss = loss;
      r.best = x;
    }
    if (k >= cfg.stop_window) {
      const double old = r.trace[k - cfg.stop_window];
      if (std::abs(old - loss) <= cfg.stop_rel_change * std::abs(old)) break;
    }
    const double frac = iters > 1 ? static_cast<double>(k) / (iters - 1) : 0.0;
    opt.step(x, g, cfg.learning_rate * std::pow(cfg.lr_final_ratio, frac));
  }
  return r;
}

// Least-squares fit label ≈ s·G + t over all cells.
std::pair<double, double> affine_fit(const std::vector<std::vector<double>>& G,
                                     const std::vector<const FieldGrid*>& labels) {
  double n = 0, sg = 0, sl = 0, sgg = 0, sgl = 0;
  for (std::size_t s = 0; s < G.size(); ++s) {
    const auto& lab = labels[s]->values();
    for (std::size_t k = 0; k < lab.size(); ++k) {
      n += 1;
      sg += G[s][k];
      sl += lab[k];
      sgg += G[s][k] * G[s][k];
      sgl += G[s][k] * lab[k];
    }
  }
  const double var = sgg - sg * sg / n;
  if (!(var > 0)) return {0.0, sl / n};
  const double slope = (sgl - sg * sl / n) / var;
  return {slope, (sl - slope * sg) / n};
}

double label_std(const std::vector<const FieldGrid*>& labels, double* mean_out) {
  double n = 0, s = 0, ss = 0;
  for (const FieldGrid* f : labels)
    for (double v : f->values()) {
      n += 1;
      s += v;
      ss += v * v;
    }
  const double mean = s / n;
  if (mean_out) *mean_out = mean;
  return std::sqrt(std::max(0.0, ss / n - mean * mean));
}

void fill_report(FitReport& rep, const std::vector<FieldGrid>& pred,
                 const std::vector<const FieldGrid*>& labels) {
  rep.sample_mae.clear();
  rep.sample_pearson.clear();
  for (std::size_t s = 0; s < pred.size(); ++s) {
    rep.sample_mae.push_back(field_mae(pred[s], *labels[s]));
    double r = 0.0;
    try {
      r = field_pearson(pred[s], *labels[s]);
    } catch (const DegenerateField&) {
      r = 0.0;
    }
    rep.sample_pearson.push_back(r);
  }
  const double n = static_cast<double>(pred.size());
  rep.mean_mae = std::accumulate(rep.sample_mae.begin(), rep.sample_mae.end(), 0.0) / n;
  rep.mean_pearson = std::accumulate(rep.sample_pearson.begin(), rep.sample_pearson.end(), 0.0) / n;
}

}  // namespace

CompactThermalParams initial_thermal_params(const DesignInstance& design, double delta_t_scale,
                                            double t_ambient) {
  CompactThermalParams p;
  double sum_p = 0.0, sum_t = 0.0;
  for (const auto& c : design.chiplets()) {
    sum_p += c.power_density;
    sum_t += c.thickness;
    p.lx.push_back(c.width / 2);
    p.ly.push_back(c.height / 2);
  }
  p.A = sum_p > 0 ? delta_t_scale / sum_p : 1e-6;
  p.a = design.size() > 0 ? sum_t / design.size() : 0.5;
  p.B = t_ambient;
  return p;
}

ThermalFit fit_thermal(const DesignInstance& design, const std::vector<ThermalSample>& samples,
                       const FitConfig& cfg, const CompactThermalParams* init) {
  if (samples.size() < 2) throw DomainError("fit_thermal: need at least 2 training samples");
  const int n = design.size();
  const GridSpec grid = GridSpec::of(samples.front().label);
  const std::size_t cells = static_cast<std::size_t>(grid.cells());
  const auto power = power_vector(design);
  std::vector<std::vector<SourceGeom>> geoms;
  std::vector<const FieldGrid*> labels;
  double t_max = -1e300;
  for (const auto& s : samples) {
    if (s.label.nx() != grid.nx || s.label.ny() != grid.ny)
      throw DomainError("fit_thermal: label grids differ");
    geoms.push_back(snapped_geometry(design, s.placement));
    labels.push_back(&s.label);
    t_max = std::max(t_max, s.label.max());
  }
  double mean_label = 0.0;
  const double sd = label_std(labels, &mean_label);
  const double b_scale = sd > 1e-9 ? sd : 1.0;

  CompactThermalParams p0 = init ? *init : initial_thermal_params(design, t_max - cfg.t_ambient,
                                                                   cfg.t_ambient);
  p0.check(n);

  std::vector<std::vector<double>> terms(samples.size() * n,
                                         std::vector<double>(kKernelTerms * cells));
  std::vector<std::vector<double>> fields(samples.size(), std::vector<double>(cells));

  // Shape pass: fills fields with Σ P_i S_i (A = 1, B = 0) and caches kernel terms.
  auto shape_pass = [&](double a, const std::vector<double>& lx, const std::vector<double>& ly) {
    for (std::size_t s = 0; s < samples.size(); ++s) {
      std::fill(fields[s].begin(), fields[s].end(), 0.0);
      for (int i = 0; i < n; ++i) {
        if (power[i] == 0.0) continue;
        thermal_kernel(a, geoms[s][i], lx[i], ly[i], grid, power[i], fields[s].data(), nullptr,
                       nullptr, terms[s * n + i].data());
      }
    }
  };

  shape_pass(p0.a, p0.lx, p0.ly);
  {
    auto [slope, icpt] = affine_fit(fields, labels);
    if (slope > 0) {
      p0.A = slope;
      p0.B = icpt;
    }
  }
  const double a_scale = std::abs(p0.A) > 0 ? std::abs(p0.A) : 1.0;

  // θ = [A/a_scale, log a, B/b_scale, log lx..., log ly...]
  std::vector<double> theta(3 + 2 * n);
  theta[0] = p0.A / a_scale;
  theta[1] = std::log(p0.a);
  theta[2] = p0.B / b_scale;
  for (int i = 0; i < n; ++i) {
    theta[3 + i] = std::log(p0.lx[i]);
    theta[3 + n + i] = std::log(p0.ly[i]);
  }
  auto decode = [&](const std::vector<double>& t) {
    CompactThermalParams p;
    p.A = t[0] * a_scale;
    p.a = std::exp(t[1]);
    p.B = t[2] * b_scale;
    for (int i = 0; i < n; ++i) {
      p.lx.push_back(std::exp(t[3 + i]));
      p.ly.push_back(std::exp(t[3 + n + i]));
    }
    return p;
  };

  const double norm = 1.0 / (static_cast<double>(cells) * samples.size());
  std::vector<double> weights(cells);
  LossFn fn = [&](const std::vector<double>& t, std::vector<double>& g) {
    const CompactThermalParams p = decode(t);
    shape_pass(p.a, p.lx, p.ly);
    std::fill(g.begin(), g.end(), 0.0);
    double loss = 0.0, dA = 0.0, da = 0.0, dB = 0.0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const auto& lab = labels[s]->values();
      for (std::size_t k = 0; k < cells; ++k) {
        const double r = p.A * fields[s][k] + p.B - lab[k];
        loss += r * r;
        weights[k] = 2.0 * r * norm;
        dB += weights[k];
      }
      for (int i = 0; i < n; ++i) {
        if (power[i] == 0.0) continue;
        const KernelSums ks =
            kernel_sums(p.a, geoms[s][i], p.lx[i], p.ly[i], grid, terms[s * n + i].data(),
                        weights.data());
        dA += power[i] * ks.s;
        da += p.A * power[i] * ks.a;
        g[3 + i] += p.A * power[i] * ks.lx * p.lx[i];
        g[3 + n + i] += p.A * power[i] * ks.ly * p.ly[i];
      }
    }
    g[0] = dA * a_scale;
    g[1] = da * p.a;
    g[2] = dB * b_scale;
    return loss * norm;
  };

  AdamRun run = run_adam(fn, theta, cfg);
  CompactThermalParams best = decode(run.best);
  // Closed-form polish of the linear pair (A, B) at the final shape.
  shape_pass(best.a, best.lx, best.ly);
  {
    auto [slope, icpt] = affine_fit(fields, labels);
    best.A = slope;
    best.B = icpt;
  }

  ThermalFit out;
  out.params = best;
  std::vector<FieldGrid> pred;
  double loss = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    FieldGrid f(grid.nx, grid.ny, labels[s]->width(), labels[s]->height());
    for (std::size_t k = 0; k < cells; ++k) {
      f.values()[k] = best.A * fields[s][k] + best.B;
      const double r = f.values()[k] - labels[s]->values()[k];
      loss += r * r;
    }
    pred.push_back(std::move(f));
  }
  out.report.final_loss = loss * norm;
  out.report.iterations = run.iterations;
  out.report.loss_trace = std::move(run.trace);
  fill_report(out.report, pred, labels);
  (void)mean_label;
  return out;
}

namespace {

// Ridge-regularized least squares on column-normalized basis vectors. The per-chiplet offset
// columns are collinear with the constant, so the ridge picks the minimum-norm split.
std::vector<double> ridge_solve(const std::vector<std::vector<double>>& gram,
                                const std::vector<double>& rhs) {
  const std::size_t m = rhs.size();
  std::vector<double> scale(m);
  for (std::size_t i = 0; i < m; ++i) scale[i] = gram[i][i] > 0 ? 1.0 / std::sqrt(gram[i][i]) : 1.0;
  std::vector<double> a(m * m), b(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) a[i * m + j] = gram[i][j] * scale[i] * scale[j];
    a[i * m + i] += 1e-10;
    b[i] = rhs[i] * scale[i];
  }
  // Cholesky
  for (std::size_t j = 0; j < m; ++j) {
    double d = a[j * m + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * m + k] * a[j * m + k];
    d = std::sqrt(std::max(d, 1e-300));
    a[j * m + j] = d;
    for (std::size_t i = j + 1; i < m; ++i) {
      double v = a[i * m + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * m + k] * a[j * m + k];
      a[i * m + j] = v / d;
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= a[i * m + k] * b[k];
    b[i] = v / a[i * m + i];
  }
  for (std::size_t i = m; i-- > 0;) {
    double v = b[i];
    for (std::size_t k = i + 1; k < m; ++k) v -= a[k * m + i] * b[k];
    b[i] = v / a[i * m + i];
  }
  for (std::size_t i = 0; i < m; ++i) b[i] *= scale[i];
  return b;
}

}  // namespace

WarpageFit fit_warpage(const DesignInstance& design, const CompactThermalParams& thermal,
                       const std::vector<WarpageSample>& samples, const FitConfig& cfg,
                       const CompactWarpageParams* init) {
  if (samples.size() < 2) throw DomainError("fit_warpage: need at least 2 training samples");
  const int n = design.size();
  thermal.check(n);
  const GridSpec grid = GridSpec::of(samples.front().label);
  const std::size_t cells = static_cast<std::size_t>(grid.cells());
  const auto power = power_vector(design);
  std::vector<std::vector<SourceGeom>> geoms;
  std::vector<FieldGrid> temps;
  std::vector<const FieldGrid*> labels;
  double t_sum = 0.0, t_sq = 0.0, t_n = 0.0;
  for (const auto& s : samples) {
    if (s.label.nx() != grid.nx || s.label.ny() != grid.ny)
      throw DomainError("fit_warpage: label grids differ");
    geoms.push_back(snapped_geometry(design, s.placement));
    temps.push_back(eval_Tc_geom(thermal, power, geoms.back(), grid, s.label.width(),
                                 s.label.height()));
    labels.push_back(&s.label);
    for (double v : temps.back().values()) {
      t_sum += v;
      t_sq += v * v;
      t_n += 1;
    }
  }
  const double t_mean = t_sum / t_n;
  const double t_sd = std::max(1e-6, std::sqrt(std::max(0.0, t_sq / t_n - t_mean * t_mean)));
  const double extent = std::max(grid.nx * grid.dx, grid.ny * grid.dy);

  CompactWarpageParams p0;
  if (init) {
    p0 = *init;
  } else {
    for (int i = 0; i < n; ++i) {
      p0.kx.push_back(2.0 / extent);
      p0.ky.push_back(2.0 / extent);
      p0.lambda.push_back(0.0);
      p0.c.push_back(0.0);
      p0.t_ref.push_back(t_mean);
    }
  }
  p0.check(n);

  // Given k and T_ref the model is linear in (α, αλ_i, αc_i, b), so only those three
  // per-chiplet values are searched; the rest is a least-squares solve at every step.
  // θ = per chiplet (log kx, log ky, (Tref - T̄)/σ_T)
  std::vector<double> theta(3 * n);
  for (int i = 0; i < n; ++i) {
    theta[3 * i] = std::log(p0.kx[i]);
    theta[3 * i + 1] = std::log(p0.ky[i]);
    theta[3 * i + 2] = (p0.t_ref[i] - t_mean) / t_sd;
  }
  const std::size_t m = 2 + 2 * static_cast<std::size_t>(n);  // α, u_i, v_i, b
  std::vector<double> basis(m);

  // Basis values at cell k of sample s: [Q, L_1..L_n, C_1..C_n, 1].
  auto fill_basis = [&](const CompactWarpageParams& p, std::size_t s, int ix, int iy) {
    const double T = temps[s].at(ix, iy);
    const double x = temps[s].x_center(ix), y = temps[s].y_center(iy);
    double q = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = p.kx[i] * (x - geoms[s][i].x), v = p.ky[i] * (y - geoms[s][i].y);
      const double e = T - p.t_ref[i];
      q += e * (u * u + v * v);
      basis[1 + i] = e * (u + v);
      basis[1 + n + i] = e;
    }
    basis[0] = q;
    basis[m - 1] = 1.0;
  };
  auto decode = [&](const std::vector<double>& t) {
    CompactWarpageParams p;
    p.alpha = 1.0;
    for (int i = 0; i < n; ++i) {
      p.kx.push_back(std::exp(t[3 * i]));
      p.ky.push_back(std::exp(t[3 * i + 1]));
      p.lambda.push_back(0.0);
      p.c.push_back(0.0);
      p.t_ref.push_back(t_mean + t[3 * i + 2] * t_sd);
    }
    std::vector<std::vector<double>> gram(m, std::vector<double>(m, 0.0));
    std::vector<double> rhs(m, 0.0);
    for (std::size_t s = 0; s < samples.size(); ++s) {
      for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
          fill_basis(p, s, ix, iy);
          const double lab = labels[s]->at(ix, iy);
          for (std::size_t a = 0; a < m; ++a) {
            rhs[a] += basis[a] * lab;
            for (std::size_t b = 0; b <= a; ++b) gram[a][b] += basis[a] * basis[b];
          }
        }
      }
    }
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b) gram[a][b] = gram[b][a];
    const std::vector<double> coef = ridge_solve(gram, rhs);
    // α = 0 would leave λ, c undefined; keep a tiny amplitude instead.
    p.alpha = std::abs(coef[0]) > 1e-300 ? coef[0] : 1e-300;
    for (int i = 0; i < n; ++i) {
      p.lambda[i] = coef[1 + i] / p.alpha;
      p.c[i] = coef[1 + n + i] / p.alpha;
    }
    p.b = coef[m - 1];
    return p;
  };

  const double norm = 1.0 / (static_cast<double>(cells) * samples.size());
  std::vector<double> weights(cells);
  LossFn fn = [&](const std::vector<double>& t, std::vector<double>& g) {
    const CompactWarpageParams p = decode(t);
    std::fill(g.begin(), g.end(), 0.0);
    double loss = 0.0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const FieldGrid W = eval_W_geom(p, temps[s], geoms[s]);
      const auto& lab = labels[s]->values();
      for (std::size_t k = 0; k < cells; ++k) {
        const double r = W.values()[k] - lab[k];
        loss += r * r;
        weights[k] = 2.0 * r * norm;
      }
      // The linear part sits at its optimum, so the partials are the full gradient.
      const WarpageVjp v = vjp_W(p, temps[s], geoms[s], weights);
      for (int i = 0; i < n; ++i) {
        g[3 * i] += v.kx[i] * p.kx[i];
        g[3 * i + 1] += v.ky[i] * p.ky[i];
        g[3 * i + 2] += v.t_ref[i] * t_sd;
      }
    }
    return loss * norm;
  };

  AdamRun run = run_adam(fn, theta, cfg);
  const CompactWarpageParams best = decode(run.best);

  WarpageFit out;
  out.params = best;
  std::vector<FieldGrid> pred;
  double loss = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    pred.push_back(eval_W_geom(best, temps[s], geoms[s]));
    for (std::size_t k = 0; k < cells; ++k) {
      const double r = pred.back().values()[k] - labels[s]->values()[k];
      loss += r * r;
    }
  }
  out.report.final_loss = loss * norm;
  out.report.iterations = run.iterations;
  out.report.loss_trace = std::move(run.trace);
  fill_report(out.report, pred, labels);
  return out;
}

FitReport evaluate_thermal(const DesignInstance& design, const CompactThermalParams& p,
                           const std::vector<ThermalSample>& samples) {
  FitReport rep;
  std::vector<FieldGrid> pred;
  std::vector<const FieldGrid*> labels;
  for (const auto& s : samples) {
    pred.push_back(eval_Tc(p, design, s.placement, GridSpec::of(s.label)));
    labels.push_back(&s.label);
  }
  if (!pred.empty()) fill_report(rep, pred, labels);
  return rep;
}

FitReport evaluate_warpage(const DesignInstance& design, const CompactThermalParams& tp,
                           const CompactWarpageParams& wp, const std::vector<WarpageSample>& samples) {
  FitReport rep;
  std::vector<FieldGrid> pred;
  std::vector<const FieldGrid*> labels;
  for (const auto& s : samples) {
    pred.push_back(eval_W(wp, tp, design, s.placement, GridSpec::of(s.label)));
    labels.push_back(&s.label);
  }
  if (!pred.empty()) fill_report(rep, pred, labels);
  return rep;
}

}  // namespace atmplace
