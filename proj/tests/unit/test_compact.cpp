#include <doctest.h>

#include <cmath>

#include "atmplace/aux_function.hpp"
#include "atmplace/benchmark.hpp"
#include "atmplace/compact_thermal.hpp"
#include "atmplace/compact_warpage.hpp"
#include "atmplace/fitting.hpp"
#include "checks.hpp"
#include "helpers.hpp"

using namespace atmplace;

namespace {

DesignInstance small_design(std::uint64_t seed, int n) {
  BenchmarkOptions o;
  o.grid = 24;
  return synthesize_benchmark(seed, n, InterfaceKind::Standard_x16, 0.5, o);
}

Placement random_snapped(const DesignInstance& d, Rng& r) {
  Placement s;
  for (int i = 0; i < d.size(); ++i)
    s.push_back({r.uniform(2, d.interposer().width - 2), r.uniform(2, d.interposer().height - 2),
                 kOrientations[r.uniform_int(0, 3)]});
  return s;
}

}  // namespace

TEST_CASE("aux_F closed form") {
  for (double a : {0.3, 1.0, 2.0})
    for (double c : {-2.0, 0.5, 3.0}) CHECK(aux_F(a, 0.0, c) == 0.0);
  CHECK(aux_F(0.7, 1.3, -2.1) == doctest::Approx(aux_F(0.7, -2.1, 1.3)).epsilon(1e-14));
  CHECK(aux_F(1, 1, 1) == doctest::Approx(checks::F_quadrature(1, 1, 1)).epsilon(1e-6));
  CHECK_THROWS_AS(aux_F(0.0, 1, 1), DomainError);
  CHECK_THROWS_AS(aux_F(-1.0, 1, 1), DomainError);
  // the quadrature oracle on a few known-hard spots
  for (double a : {0.1, 5.0})
    for (double b : {-5.0, 0.2})
      CHECK(aux_F(a, b, 3.0) == doctest::Approx(checks::F_quadrature(a, b, 3.0)).epsilon(1e-6));
}

TEST_CASE("aux_F gradient") {
  const auto fd = [](double a, double b, double c, int k) {
    double p[3] = {a, b, c}, m[3] = {a, b, c};
    p[k] += 1e-6;
    m[k] -= 1e-6;
    return (aux_F(p[0], p[1], p[2]) - aux_F(m[0], m[1], m[2])) / 2e-6;
  };
  CHECK(aux_F_grad(1, 0, 1)[1] == doctest::Approx(fd(1, 0, 1, 1)).epsilon(1e-6));
  Rng r(4);
  for (int t = 0; t < 50; ++t) {
    const double a = r.uniform(0.1, 3), b = r.uniform(-4, 4), c = r.uniform(-4, 4);
    const auto g = aux_F_grad(a, b, c);
    for (int k = 0; k < 3; ++k) CHECK(g[k] == doctest::Approx(fd(a, b, c, k)).epsilon(1e-5).scale(1e-8));
    CHECK(g[1] == doctest::Approx(aux_F_grad(a, c, b)[2]).epsilon(1e-13));
  }
  for (double a : {0.1, 0.5, 1.0, 2.0, 5.0})
    for (double b : {0.1, 1.0, 4.0})
      for (double c : {0.2, 1.5, 5.0}) CHECK(aux_F_grad(a, b, c)[0] <= 0.0);
  const auto z = aux_F_grad(1.3, 0, 0);
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);
  CHECK(z[2] == 0.0);
}

TEST_CASE("eval_Tc examples") {
  CompactThermalParams p;
  p.B = 31.5;
  const auto none = DesignInstance({10, 10, 16, 0.1}, {}, {});
  const FieldGrid f0 = eval_Tc(p, none, {}, GridSpec::of(none));
  CHECK(f0.min() == 31.5);
  CHECK(f0.max() == 31.5);

  const auto one = testutil::boxes(20, 20, {{4, 4}}, 1e6, 32);
  auto q = initial_thermal_params(one, 40, 25);
  q.lx = {1.7};
  q.ly = {1.7};
  const FieldGrid t = eval_Tc(q, one, {{10, 10, 0}}, GridSpec::of(one));
  double asym = 0;
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i) asym = std::max(asym, std::abs(t.at(i, j) - t.at(j, i)));
  CHECK(asym <= 1e-10);
  // argmax at the center: the four cells around (10, 10) tie
  CHECK(t.max() == doctest::Approx(t.at(15, 15)).epsilon(1e-14));
  CHECK(t.max() == doctest::Approx(t.at(16, 16)).epsilon(1e-14));

  // ∂T/∂x_i vanishes on the symmetry line through the center
  const auto g = grad_Tc(q, one, {{10, 10, 0}}, GridSpec::of(one));
  CHECK(std::abs(g.dx[0].at(15, 15) + g.dx[0].at(16, 15)) <= 1e-12 * std::abs(g.dx[0].at(15, 15)));
  const auto pts = eval_Tc_points(q, one, {{10, 10, 0}}, {{10, 10}, {10.5, 10}, {9.5, 10}});
  CHECK(pts[1] == doctest::Approx(pts[2]).epsilon(1e-14));
  CHECK(pts[0] > pts[1]);

  CompactThermalParams bad = q;
  bad.lx.push_back(1);
  CHECK_THROWS(eval_Tc(bad, one, {{10, 10, 0}}, GridSpec::of(one)));
}

TEST_CASE("eval_Tc gradient decays far away") {
  // The four-term sum decays like a point source: T - B ~ 1/r and the gradient ~ 1/r².
  const auto near = testutil::boxes(20, 20, {{2, 2}}, 1e6, 32);
  const auto q = initial_thermal_params(near, 40, 25);
  const auto gn = grad_Tc(q, near, {{10, 10, 0}}, GridSpec::of(near));
  double peak = 0;
  for (double v : gn.dx[0].values()) peak = std::max(peak, std::abs(v));

  const double L = 2e5;  // arguments ≈ 1e5
  const auto far = testutil::boxes(L, L, {{2, 2}}, 1e6, 8);
  const GridSpec grid = GridSpec::of(far);
  const auto gf = grad_Tc(q, far, {{1, 1, 0}}, grid);
  CHECK(std::abs(gf.dx[0].at(7, 7)) < 1e-8 * peak);
  // doubling the distance quarters the gradient; the row y = y_1 isolates the x part
  const ChipletPose at{1, grid.y(0), 0};
  const auto g2 = grad_Tc(q, far, {at}, grid);
  const double r1 = grid.x(3) - 1, r2 = grid.x(7) - 1;
  CHECK(g2.dx[0].at(7, 0) / g2.dx[0].at(3, 0) == doctest::Approx(r1 * r1 / (r2 * r2)).epsilon(0.02));
}

TEST_CASE("eval_Tc permutation and power linearity") {
  const auto d = small_design(3, 4);
  Rng r(7);
  auto p = initial_thermal_params(d, 40, 25);
  for (int i = 0; i < d.size(); ++i) {
    p.lx[i] *= r.uniform(0.5, 2);
    p.ly[i] *= r.uniform(0.5, 2);
  }
  const Placement s = random_snapped(d, r);
  const GridSpec grid = GridSpec::of(d);
  const FieldGrid base = eval_Tc(p, d, s, grid);

  // reverse the chiplet order, params and placement alike
  std::vector<ChipletSpec> cs(d.chiplets().rbegin(), d.chiplets().rend());
  for (int i = 0; i < d.size(); ++i) {
    cs[i].id = i;
    cs[i].bumps.clear();
  }
  const DesignInstance rev(d.interposer(), cs, {});
  CompactThermalParams pr = p;
  std::reverse(pr.lx.begin(), pr.lx.end());
  std::reverse(pr.ly.begin(), pr.ly.end());
  const Placement sr(s.rbegin(), s.rend());
  const FieldGrid other = eval_Tc(pr, rev, sr, grid);
  for (std::size_t k = 0; k < base.size(); ++k)
    CHECK(other.values()[k] == doctest::Approx(base.values()[k]).epsilon(1e-12));

  // scaling chiplet 1 by s scales its contribution exactly
  std::vector<double> pw = power_vector(d);
  std::vector<double> zero1 = pw, triple1 = pw;
  zero1[1] = 0;
  triple1[1] *= 3;
  const auto geom = snapped_geometry(d, s);
  const double W = d.interposer().width, H = d.interposer().height;
  const FieldGrid f0 = eval_Tc_geom(p, zero1, geom, grid, W, H);
  const FieldGrid f3 = eval_Tc_geom(p, triple1, geom, grid, W, H);
  for (std::size_t k = 0; k < base.size(); ++k) {
    const double c1 = base.values()[k] - f0.values()[k];
    CHECK(f3.values()[k] - f0.values()[k] == doctest::Approx(3 * c1).epsilon(1e-10).scale(1e-12));
  }
}

TEST_CASE("eval_w_local examples") {
  const LocalShape s{1, 1, 0, 0};
  CHECK(eval_w_local(s, 2, 3, 5, 7) == doctest::Approx(25));
  const LocalShape t{0.7, 1.3, 0.4, -2.5};
  CHECK(eval_w_local(t, 1, 2, 1, 2) == -2.5);
  const LocalShape u{0.7, 1.3, 0.0, 0.8};
  CHECK(eval_w_local(u, 1, 2, 1.6, 2) == doctest::Approx(eval_w_local(u, 1, 2, 0.4, 2)));
  CHECK(eval_w_local(u, 1, 2, 1, 2.9) == doctest::Approx(eval_w_local(u, 1, 2, 1, 1.1)));
}

TEST_CASE("eval_W examples and affinity") {
  const auto d = small_design(5, 3);
  Rng r(2);
  const auto tp = initial_thermal_params(d, 40, 25);
  auto wp = checks::random_warpage_params(d, r);
  const Placement s = random_snapped(d, r);
  const GridSpec grid = GridSpec::of(d);
  const FieldGrid w = eval_W(wp, tp, d, s, grid);

  CompactWarpageParams z = wp;
  z.alpha = 0;
  const FieldGrid wz = eval_W(z, tp, d, s, grid);
  CHECK(wz.min() == wp.b);
  CHECK(wz.max() == wp.b);

  const auto none = DesignInstance({10, 10, 16, 0.1}, {}, {});
  CompactWarpageParams empty;
  empty.b = 2.5;
  CompactThermalParams te;
  const FieldGrid we = eval_W(empty, te, none, {}, GridSpec::of(none));
  CHECK(we.min() == 2.5);
  CHECK(we.max() == 2.5);

  // T ≡ T_ref: a uniform thermal field at every reference temperature
  CompactWarpageParams flat = wp;
  for (auto& t : flat.t_ref) t = 40.0;
  FieldGrid T(grid.nx, grid.ny, d.interposer().width, d.interposer().height, 40.0);
  const FieldGrid wf = eval_W_geom(flat, T, snapped_geometry(d, s));
  CHECK(wf.min() == doctest::Approx(wp.b).epsilon(1e-12));
  CHECK(wf.max() == doctest::Approx(wp.b).epsilon(1e-12));

  CompactWarpageParams sc = wp;
  sc.alpha *= 2.5;
  const FieldGrid w2 = eval_W(sc, tp, d, s, grid);
  CompactWarpageParams sh = wp;
  sh.b += 7;
  const FieldGrid w3 = eval_W(sh, tp, d, s, grid);
  for (std::size_t k = 0; k < w.size(); ++k) {
    CHECK(w2.values()[k] - wp.b == doctest::Approx(2.5 * (w.values()[k] - wp.b)).epsilon(1e-12));
  }
  CHECK(warpage_metric(w3) == doctest::Approx(warpage_metric(w)).epsilon(1e-12));

  // α = 0 gives a zero gradient
  std::vector<double> omega(grid.cells(), 1.0);
  const auto g0 = grad_W_vjp(z, tp, power_vector(d), snapped_geometry(d, s), grid, omega);
  for (int i = 0; i < d.size(); ++i) {
    CHECK(g0.x[i] == 0.0);
    CHECK(g0.y[i] == 0.0);
  }
  CompactWarpageParams bad = wp;
  bad.kx.pop_back();
  CHECK_THROWS(eval_W(bad, tp, d, s, grid));
}

TEST_CASE("peak-to-valley gradient vanishes for a centered symmetric chiplet") {
  const auto one = testutil::boxes(20, 20, {{4, 4}}, 1e6, 32);
  auto tp = initial_thermal_params(one, 40, 25);
  CompactWarpageParams wp;
  wp.alpha = 0.05;
  wp.kx = {0.1};
  wp.ky = {0.1};
  wp.lambda = {0};
  wp.c = {0.3};
  wp.t_ref = {30};
  const Placement s{{10, 10, 0}};
  const GridSpec grid = GridSpec::of(one);
  const FieldGrid w = eval_W(wp, tp, one, s, grid);
  std::vector<double> om;
  const double tau = default_sharpness(w.values());
  smooth_peak_to_valley(w.values(), tau, &om);
  const auto g = grad_W_vjp(wp, tp, power_vector(one), snapped_geometry(one, s), grid, om);
  double scale = 0;
  for (double v : om) scale += std::abs(v);
  CHECK(std::abs(g.x[0]) <= 1e-9 * scale);
  CHECK(std::abs(g.y[0]) <= 1e-9 * scale);
}

TEST_CASE("compact model gradients match central differences") {
  const auto e = checks::gradient_suite(5, 21);
  CHECK(e.thermal <= 1e-4);
  CHECK(e.warpage <= 1e-4);
  CHECK(e.wirelength <= 1e-4);
  CHECK(e.density <= 1e-4);
  CHECK(e.objective <= 1e-4);
}

TEST_CASE("thermal self-fit") {
  const auto d = small_design(8, 3);
  Rng r(12);
  auto truth = initial_thermal_params(d, 30, 25);
  truth.a *= 1.4;
  for (int i = 0; i < d.size(); ++i) truth.lx[i] *= r.uniform(0.7, 1.4);
  std::vector<ThermalSample> train;
  for (int k = 0; k < 4; ++k) {
    const Placement s = random_snapped(d, r);
    train.push_back({s, eval_Tc(truth, d, s, GridSpec::of(d))});
  }
  FitConfig cfg;
  cfg.iterations = 3000;
  const ThermalFit fit = fit_thermal(d, train, cfg);
  CHECK(fit.report.mean_mae < 0.01);

  // bias absorption: a constant offset moves B and nothing else
  std::vector<ThermalSample> shifted = train;
  for (auto& s : shifted)
    for (auto& v : s.label.values()) v += 10;
  const ThermalFit fs = fit_thermal(d, shifted, cfg);
  CHECK(fs.params.B - fit.params.B == doctest::Approx(10).epsilon(0.01));
  CHECK(fs.report.mean_mae < 0.01);
  CHECK_THROWS_AS(fit_thermal(d, {train[0]}, cfg), DomainError);
}

TEST_CASE("warpage self-fit") {
  const auto d = small_design(9, 3);
  Rng r(13);
  const auto tp = initial_thermal_params(d, 30, 25);
  const auto truth = checks::random_warpage_params(d, r);
  std::vector<WarpageSample> train;
  for (int k = 0; k < 4; ++k) {
    const Placement s = random_snapped(d, r);
    const GridSpec grid = GridSpec::of(d);
    train.push_back({s, eval_Tc(tp, d, s, grid), eval_W(truth, tp, d, s, grid)});
  }
  FitConfig cfg;
  cfg.iterations = 3000;
  const WarpageFit fit = fit_warpage(d, tp, train, cfg);
  CHECK(fit.report.mean_mae < 0.01);
  std::vector<WarpageSample> shifted = train;
  for (auto& s : shifted)
    for (auto& v : s.label.values()) v += 5;
  const WarpageFit fs = fit_warpage(d, tp, shifted, cfg);
  CHECK(fs.report.mean_mae < 0.01);
  // b shares the constant with the α c_i T_ref,i offsets, so only the field shift is exact
  CHECK(fs.params.b - fit.params.b == doctest::Approx(5).epsilon(0.1));
  for (const auto& s : train) {
    const FieldGrid a = eval_W(fit.params, tp, d, s.placement, GridSpec::of(d));
    const FieldGrid b = eval_W(fs.params, tp, d, s.placement, GridSpec::of(d));
    for (std::size_t k = 0; k < a.size(); ++k)
      CHECK(b.values()[k] - a.values()[k] == doctest::Approx(5).epsilon(0.01));
  }
}

TEST_CASE("fit is deterministic and reports divergence") {
  const auto d = small_design(8, 3);
  Rng r(1);
  const auto truth = initial_thermal_params(d, 30, 25);
  std::vector<ThermalSample> train;
  for (int k = 0; k < 3; ++k) {
    const Placement s = random_snapped(d, r);
    train.push_back({s, eval_Tc(truth, d, s, GridSpec::of(d))});
  }
  FitConfig cfg;
  cfg.iterations = 200;
  const auto a = fit_thermal(d, train, cfg), b = fit_thermal(d, train, cfg);
  CHECK(thermal_params_to_json(a.params) == thermal_params_to_json(b.params));
  CHECK(thermal_params_from_json(thermal_params_to_json(a.params)).A == a.params.A);

  std::vector<ThermalSample> nan = train;
  nan[0].label.values()[3] = std::nan("");
  CHECK_THROWS_AS(fit_thermal(d, nan, cfg), FitDivergence);
}
