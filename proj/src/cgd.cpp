#include "atmplace/cgd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "atmplace/field_grid.hpp"
#include "atmplace/rng.hpp"

namespace atmplace {

CgdStepper::CgdStepper(std::vector<int> group_of, std::vector<double> step0, double grow)
    : group_of_(std::move(group_of)), step0_(step0), step_(std::move(step0)), grow_(grow) {}

void CgdStepper::reset() {
  fresh_ = true;
  move_prev_.clear();
}

double CgdStepper::step(std::vector<double>& x, const std::vector<double>& g) {
  const std::size_t n = x.size();
  double beta = 0.0;
  if (fresh_ || d_.size() != n) {
    d_.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) d_[k] = -g[k];
  } else {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      num += g[k] * (g[k] - g_prev_[k]);
      den += g_prev_[k] * g_prev_[k];
    }
    beta = std::max(0.0, num / (den + 1e-30));
    double slope = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      d_[k] = -g[k] + beta * d_[k];
      slope += d_[k] * g[k];
    }
    if (slope >= 0.0) {
      beta = 0.0;
      for (std::size_t k = 0; k < n; ++k) d_[k] = -g[k];
    }
  }

  const std::size_t groups = step_.size();
  std::vector<double> norm(groups, 0.0), turn(groups, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    norm[group_of_[k]] += d_[k] * d_[k];
    if (move_prev_.size() == n) turn[group_of_[k]] += d_[k] * move_prev_[k];
  }
  if (move_prev_.size() == n) {
    for (std::size_t q = 0; q < groups; ++q)
      step_[q] = turn[q] < 0.0 ? 0.5 * step_[q] : std::min(step0_[q], step_[q] * grow_);
  }
  move_prev_.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double nn = std::sqrt(norm[group_of_[k]]);
    if (nn == 0.0) continue;
    move_prev_[k] = step_[group_of_[k]] * d_[k] / nn;
    x[k] += move_prev_[k];
  }
  g_prev_ = g;
  fresh_ = false;
  return beta;
}

namespace {

std::vector<double> pack(const Placement& s) {
  const std::size_t n = s.size();
  std::vector<double> v(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = s[i].x;
    v[n + i] = s[i].y;
    v[2 * n + i] = s[i].theta;
  }
  return v;
}

void unpack(const std::vector<double>& v, Placement& s) {
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    s[i].x = v[i];
    s[i].y = v[n + i];
    s[i].theta = v[2 * n + i];
  }
}

std::vector<double> pack(const StateGrad& g) {
  std::vector<double> v;
  v.insert(v.end(), g.x.begin(), g.x.end());
  v.insert(v.end(), g.y.begin(), g.y.end());
  v.insert(v.end(), g.theta.begin(), g.theta.end());
  return v;
}

double balanced(double numerator, double denominator) {
  return denominator > 0.0 ? numerator / denominator : 0.0;
}

}  // namespace

CgdResult run_cgd(const DesignInstance& design, const Placement& init,
                  const PhysicsModels& models, const CgdConfig& cfg) {
  const int n = design.size();
  if (cfg.max_iter < 1) throw DomainError("run_cgd: max_iter must be >= 1");
  if (static_cast<int>(init.size()) != n) throw DomainError("run_cgd: state size mismatch");
  const double W = design.interposer().width;
  const double H = design.interposer().height;

  std::vector<int> group(3 * n);
  for (int i = 0; i < 3 * n; ++i) group[i] = i / std::max(n, 1);
  CgdStepper stepper(group, {cfg.step_xy_frac * W, cfg.step_xy_frac * H, cfg.step_theta});
  const std::vector<double> step0 = stepper.steps();

  Rng rng(cfg.seed);
  PenaltyConfig pen = cfg.penalty;
  const bool want_T = models.thermal && cfg.penalty.lambda_T > 0;
  const bool want_W = models.thermal && models.warpage && cfg.penalty.lambda_W > 0;
  double lambda_T = 0.0, lambda_W = 0.0;  // effective weights, set on first activation
  bool have_T = !cfg.balance_physics, have_W = !cfg.balance_physics;
  if (!cfg.balance_physics) {
    lambda_T = cfg.penalty.lambda_T;
    lambda_W = cfg.penalty.lambda_W;
  }

  CgdResult res;
  res.state = init;
  Placement& s = res.state;
  std::vector<double> x = pack(s);
  double lambda_dens = cfg.penalty.lambda_dens;
  std::vector<double> ovfl_hist;
  int last_noise = 0;
  const auto [nbx, nby] = resolve_bins(design, pen);
  const double wb = std::min(W / nbx, H / nby);

  for (int k = 0; k < cfg.max_iter; ++k) {
    const double eta = cfg.max_iter > 1 ? cfg.eta_start + (cfg.eta_end - cfg.eta_start) * k /
                                                              (cfg.max_iter - 1)
                                        : cfg.eta_end;
    // Physics gradients are only assembled when their weight is positive.
    pen.lambda_T = want_T ? 1.0 : 0.0;
    pen.lambda_W = want_W ? 1.0 : 0.0;
    pen.lambda_dens = 1.0;
    ObjectiveGrads g;
    const ObjectiveTerms t = objective(design, s, models, pen, eta, &g);

    const double wl_norm = g.wl.norm1();
    if (k == 0) {
      if (lambda_dens <= 0.0) {
        lambda_dens = balanced(wl_norm, g.density.norm1());
        if (lambda_dens <= 0.0) lambda_dens = balanced(wl_norm, g.density_deviation.norm1());
        if (lambda_dens <= 0.0) lambda_dens = 1.0;
      }
      res.lambda_dens0 = lambda_dens;
    }
    if (want_T && !have_T && t.thermal > 0.0) {
      lambda_T = cfg.penalty.lambda_T * balanced(wl_norm, g.thermal.norm1());
      have_T = lambda_T > 0.0;
    }
    if (want_W && !have_W && t.warpage > 0.0) {
      lambda_W = cfg.penalty.lambda_W * balanced(wl_norm, g.warpage.norm1());
      have_W = lambda_W > 0.0;
    }

    StateGrad total(n);
    total.add(g.wl, 1.0);
    total.add(g.density, lambda_dens);
    if (want_T) total.add(g.thermal, lambda_T);
    if (want_W) total.add(g.warpage, lambda_W);
    const std::vector<double> gv = pack(total);
    for (std::size_t q = 0; q < gv.size(); ++q) {
      if (!std::isfinite(gv[q])) {
        std::ostringstream os;
        os << "run_cgd: non-finite gradient at iteration " << k << " (J=" << t.total
           << ", WL=" << t.wl << ", OVFL=" << t.overflow << ", lambda_dens=" << lambda_dens
           << ")";
        throw std::runtime_error(os.str());
      }
    }

    TrajectoryRow row;
    row.iter = k;
    row.WL = t.wl;
    row.OVFL = t.overflow;
    row.Tmax = t.peak_T;
    row.warpage = t.warpage_metric;
    row.lambda_dens = lambda_dens;
    row.J = t.wl + lambda_dens * t.density + (want_T ? lambda_T * t.thermal : 0.0) +
            (want_W ? lambda_W * t.warpage : 0.0);

    stepper.step(x, gv);

    // Keep centers inside the interposer for the current expected dims.
    unpack(x, s);
    const std::vector<SourceGeom> geom = expected_geometry(design, s, eta);
    for (int i = 0; i < n; ++i) {
      x[i] = std::clamp(x[i], std::min(0.5 * geom[i].w, 0.5 * W), std::max(W - 0.5 * geom[i].w, 0.5 * W));
      x[n + i] = std::clamp(x[n + i], std::min(0.5 * geom[i].h, 0.5 * H),
                            std::max(H - 0.5 * geom[i].h, 0.5 * H));
    }

    lambda_dens *= 1.0 + pen.rho * t.overflow;

    ovfl_hist.push_back(t.overflow);
    if (k - last_noise >= cfg.noise_window && k >= cfg.noise_window &&
        t.overflow > cfg.noise_ovfl_threshold) {
      const double before = ovfl_hist[k - cfg.noise_window];
      const double change = std::abs(t.overflow - before) / std::max(before, 1e-12);
      if (change < cfg.noise_rel_change) {
        for (int i = 0; i < 2 * n; ++i) x[i] += rng.uniform(-1.0, 1.0) * cfg.noise_zeta * wb;
        stepper.reset();
        last_noise = k;
        row.noise_injected = true;
        ++res.noise_events;
      }
    }
    unpack(x, s);
    res.trajectory.push_back(row);
    res.iterations = k + 1;

    if (k + 1 >= cfg.min_iter) {
      bool small = true;
      for (std::size_t q = 0; q < step0.size(); ++q)
        small = small && stepper.steps()[q] < cfg.stop_step_frac * step0[q];
      if (small) break;
    }
  }
  res.lambda_T_eff = lambda_T;
  res.lambda_W_eff = lambda_W;
  return res;
}

std::string trajectory_csv(const std::vector<TrajectoryRow>& rows) {
  std::string out = "iter,J,WL,OVFL,Tmax,warpage,lambda_dens,noise_injected\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iter);
    for (double v : {r.J, r.WL, r.OVFL, r.Tmax, r.warpage, r.lambda_dens}) {
      out += ',';
      out += std::isfinite(v) ? format_double(v) : std::string("nan");
    }
    out += r.noise_injected ? ",1\n" : ",0\n";
  }
  return out;
}

}  // namespace atmplace
