#include <doctest.h>

#include <cmath>
#include <numeric>

#include "atmplace/benchmark.hpp"
#include "atmplace/cgd.hpp"
#include "atmplace/orientation.hpp"
#include "atmplace/placement_objective.hpp"
#include "atmplace/rng.hpp"
#include "checks.hpp"
#include "helpers.hpp"

using namespace atmplace;

namespace {

Placement random_state(const DesignInstance& d, Rng& r, bool snapped, double margin) {
  Placement s;
  for (int i = 0; i < d.size(); ++i)
    s.push_back({r.uniform(margin, d.interposer().width - margin),
                 r.uniform(margin, d.interposer().height - margin),
                 snapped ? kOrientations[r.uniform_int(0, 3)] : r.uniform(0, 360)});
  return s;
}

}  // namespace

TEST_CASE("angular deviation") {
  CHECK(angular_deviation(30, 30) == 0.0);
  CHECK(angular_deviation(350, 0) == doctest::Approx(10.0 / 360));
  CHECK(angular_deviation(45, 180) == doctest::Approx(0.375));
  CHECK(angular_deviation(-90, 270) == doctest::Approx(0).epsilon(1e-12));
  Rng r(1);
  for (int k = 0; k < 200; ++k) {
    const double a = r.uniform(-720, 720), b = r.uniform(-720, 720);
    const double v = angular_deviation(a, b);
    CHECK(v >= 0.0);
    CHECK(v <= 0.5);
    CHECK(v == doctest::Approx(angular_deviation(b, a)).epsilon(1e-12));
  }
}

TEST_CASE("rz branches") {
  CHECK(rz(90, 90) == 1.0);
  CHECK(rz(0, 45) == doctest::Approx(0.5));
  CHECK(rz(180, 45) == 0.0);
  // second branch: Δθ = 0.2 → 2·16·(0.2 - 0.25)² = 0.08
  CHECK(rz(0, 72) == doctest::Approx(0.08));
  for (double t = 0.5; t < 90; t += 0.5) {
    CHECK(rz(0, t) >= 0.0);
    CHECK(rz(0, t) <= 1.0);
    CHECK(rz(0, t) == doctest::Approx(rz(0, -t)));
    const double fd = (rz(0, t + 1e-6) - rz(0, t - 1e-6)) / 2e-6;
    CHECK(rz_grad(0, t) == doctest::Approx(fd).epsilon(1e-5).scale(1e-6));
  }
}

TEST_CASE("bz probabilities") {
  Rng r(2);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto p = bz(r.uniform(-360, 720), r.uniform(0.01, 2));
    worst = std::max(worst, std::abs(p[0] + p[1] + p[2] + p[3] - 1));
  }
  CHECK(worst <= 1e-12);
  CHECK(bz(90, 1e-3)[1] == doctest::Approx(1).epsilon(1e-12));
  for (double eta : {0.05, 0.3, 2.0}) {
    const auto p = bz(45, eta);
    CHECK(p[0] == doctest::Approx(p[1]).epsilon(1e-12));
    CHECK(p[2] == doctest::Approx(p[3]).epsilon(1e-12));
  }
  // derivative
  for (int k = 0; k < 50; ++k) {
    const double t = r.uniform(0, 360), eta = r.uniform(0.05, 1);
    OrientProbs p, dp;
    bz_with_grad(t, eta, p, dp);
    const auto a = bz(t + 1e-6, eta), b = bz(t - 1e-6, eta);
    for (int q = 0; q < 4; ++q) CHECK(dp[q] == doctest::Approx((a[q] - b[q]) / 2e-6).epsilon(1e-4).scale(1e-5));
  }
}

TEST_CASE("snap orientations") {
  CHECK(snap_orientation(89) == 90);
  CHECK(snap_orientation(45) == 0);  // tie goes to the lowest index
  CHECK(snap_orientation(359) == 0);
  CHECK(snap_orientation(-100) == 270);
  for (double t : kOrientations) CHECK(snap_orientation(t) == t);
  const Placement p{{1, 2, 181}, {3, 4, 271}};
  const auto s = snap_orientations(p);
  CHECK(s[0].theta == 180);
  CHECK(s[1].theta == 270);
  CHECK(s[0].x == 1);
}

TEST_CASE("bell profile") {
  Rng r(3);
  for (int k = 0; k < 50; ++k) {
    const double w = r.uniform(0.5, 10), wb = r.uniform(0.2, 3);
    const double d1 = w / 2 + wb, d2 = w / 2 + 2 * wb;
    CHECK(bell(0, w, wb) == 1.0);
    CHECK(bell(d1 - 1e-9, w, wb) == doctest::Approx(bell(d1 + 1e-9, w, wb)).epsilon(1e-7));
    CHECK(bell_slope(d1 - 1e-9, w, wb) == doctest::Approx(bell_slope(d1 + 1e-9, w, wb)).epsilon(1e-6));
    CHECK(bell(d2, w, wb) == 0.0);
    CHECK(bell(d2 + 0.1, w, wb) == 0.0);
    CHECK(bell(-0.3 * d1, w, wb) == bell(0.3 * d1, w, wb));
    const double d = r.uniform(0, d2);
    CHECK(bell_slope(d, w, wb) ==
          doctest::Approx((bell(d + 1e-7, w, wb) - bell(d - 1e-7, w, wb)) / 2e-7).epsilon(1e-5).scale(1e-5));
  }
}

TEST_CASE("projected wirelength") {
  const auto d = synthesize_benchmark(6, 5, InterfaceKind::Standard_x16, 0.5);
  Rng r(4);
  for (int k = 0; k < 10; ++k) {
    const auto s = random_state(d, r, true, 2);
    CHECK(projected_wirelength(d, s, 1e-3, 1e-9) ==
          doctest::Approx(exact_wirelength(d, s)).epsilon(1e-6));

    const auto c = random_state(d, r, false, 2);
    Placement t = c;
    for (auto& q : t) q.x += 3.3, q.y -= 1.7;
    StateGrad g(d.size());
    const double v = projected_wirelength(d, c, 0.3, 1e-3, &g);
    CHECK(projected_wirelength(d, t, 0.3, 1e-3) == doctest::Approx(v).epsilon(1e-12));
    const double gx = std::accumulate(g.x.begin(), g.x.end(), 0.0);
    const double gy = std::accumulate(g.y.begin(), g.y.end(), 0.0);
    CHECK(std::abs(gx) <= 1e-9 * (1 + g.norm1()));
    CHECK(std::abs(gy) <= 1e-9 * (1 + g.norm1()));
  }
}

TEST_CASE("projected density normalization") {
  const auto d = synthesize_benchmark(7, 6, InterfaceKind::Standard_x16, 0.5);
  const auto [bx, by] = default_bins(d);
  Rng r(5);
  for (int k = 0; k < 20; ++k) {
    // keep the bell support inside the interposer
    const auto s = random_state(d, r, false, 0);
    Placement in = s;
    for (int i = 0; i < d.size(); ++i) {
      const double m = std::max(d.chiplet(i).width, d.chiplet(i).height) / 2 +
                       2 * std::max(d.interposer().width / bx, d.interposer().height / by);
      in[i].x = std::clamp(in[i].x, m, d.interposer().width - m);
      in[i].y = std::clamp(in[i].y, m, d.interposer().height - m);
    }
    const auto v = projected_density(d, in, bx, by, r.uniform(0.05, 0.5));
    CHECK(std::accumulate(v.begin(), v.end(), 0.0) == doctest::Approx(d.total_area()).epsilon(1e-6));
  }
  const auto one = testutil::boxes(20, 20, {{3, 2}});
  const auto v = projected_density(one, {{10, 10, 30}}, 1, 1, 0.2);
  REQUIRE(v.size() == 1u);
  CHECK(v[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("overflow") {
  const auto d = testutil::boxes(40, 40, {{2, 2}, {3, 1}, {1, 2}});
  const Placement spread{{8, 8, 0}, {30, 10, 0}, {20, 32, 90}};
  CHECK(overflow(d, spread, 4, 4, 0.05, 1.0) == 0.0);

  // one bin: OVFL = (S - cap)/S exactly
  const Placement stack{{20, 20, 0}, {20, 20, 0}, {20, 20, 0}};
  const double S = d.total_area(), cap = 0.004 * 40 * 40;
  CHECK(overflow(d, stack, 1, 1, 0.05, 0.004) == doctest::Approx((S - cap) / S).epsilon(1e-12));

  // doubling every die's area never lowers overflow
  const auto big = testutil::boxes(40, 40, {{4, 2}, {6, 1}, {2, 2}});
  Rng r(6);
  for (int k = 0; k < 20; ++k) {
    Placement s;
    for (int i = 0; i < 3; ++i) s.push_back({r.uniform(10, 30), r.uniform(10, 30), 0});
    CHECK(overflow(big, s, 8, 8, 0.05, 0.5) >= overflow(d, s, 8, 8, 0.05, 0.5) - 1e-12);
  }
  CHECK_THROWS_AS(overflow(testutil::boxes(10, 10, {}), {}, 2, 2, 0.1, 1.0), DomainError);
}

TEST_CASE("objective reductions") {
  const auto d = synthesize_benchmark(8, 4, InterfaceKind::Standard_x16, 0.5);
  const auto tp = initial_thermal_params(d, 60, 25);
  Rng pr(1);
  const auto wp = checks::random_warpage_params(d, pr);
  const PhysicsModels models{&tp, &wp};
  Rng r(7);
  const auto s = random_state(d, r, false, 3);

  PenaltyConfig none;
  const auto t0 = objective(d, s, models, none, 0.3);
  CHECK(t0.total == t0.wl);
  CHECK(t0.wl == projected_wirelength(d, s, 0.3, none.wl_smoothing));

  // every constraint met: the hinged terms vanish
  PenaltyConfig slack;
  slack.lambda_dens = slack.lambda_T = slack.lambda_W = 5;
  slack.T_th = 1e6;
  slack.W_th = 1e9;
  slack.t_max = 1e6;
  const auto t1 = objective(d, s, models, slack, 0.3);
  CHECK(t1.density == 0.0);
  CHECK(t1.thermal == 0.0);
  CHECK(t1.warpage == 0.0);
  CHECK(t1.total == t1.wl);

  // snapped, sharp η, tiny smoothing: WL' + λ density is exact WL + λ density
  const auto snapped = snap_orientations(s);
  PenaltyConfig dens;
  dens.lambda_dens = 2;
  dens.wl_smoothing = 1e-9;
  const auto t2 = objective(d, snapped, models, dens, 1e-3);
  CHECK(t2.total == doctest::Approx(exact_wirelength(d, snapped) + 2 * t2.density).epsilon(1e-6));
}

TEST_CASE("thermal hinge is monotone in the threshold") {
  const auto d = synthesize_benchmark(8, 4, InterfaceKind::Standard_x16, 0.5);
  const auto tp = initial_thermal_params(d, 60, 25);
  const PhysicsModels models{&tp, nullptr};
  Rng r(8);
  for (int k = 0; k < 5; ++k) {
    const auto s = random_state(d, r, false, 3);
    PenaltyConfig c;
    c.lambda_T = 1;
    double prev = -1;
    for (double th = 200; th >= 20; th -= 5) {
      c.T_th = th;
      const double v = objective(d, s, models, c, 0.3).thermal;
      CHECK(v >= prev);
      prev = v;
    }
    CHECK(prev > 0);
  }
}

TEST_CASE("cgd on a quadratic") {
  CgdStepper st({0, 1}, {1.0, 1.0});
  std::vector<double> x{0, 0};
  int it = 0;
  for (; it < 200; ++it) {
    if (std::abs(x[0] - 3) < 1e-6 && std::abs(x[1] - 1) < 1e-6) break;
    st.step(x, {2 * (x[0] - 3), 2 * (x[1] - 1)});
  }
  CHECK(it <= 200);
  CHECK(x[0] == doctest::Approx(3).epsilon(1e-6));
  CHECK(x[1] == doctest::Approx(1).epsilon(1e-6));

  // β of the first step is zero; restart clamps negative β
  CgdStepper s2({0}, {0.1});
  std::vector<double> y{0};
  CHECK(s2.step(y, {1.0}) == 0.0);
  CHECK(s2.step(y, {-5.0}) >= 0.0);
}

TEST_CASE("run_cgd: initial density weight and determinism") {
  const auto d = synthesize_benchmark(3, 5, InterfaceKind::Standard_x16, 0.5);
  const double W = d.interposer().width, H = d.interposer().height;
  Placement init;
  Rng r(9);
  for (int i = 0; i < d.size(); ++i)
    init.push_back({W / 2 + r.uniform(-1, 1), H / 2 + r.uniform(-1, 1), 0});
  CgdConfig cfg;
  cfg.max_iter = 60;
  cfg.seed = 5;
  const auto a = run_cgd(d, init, {}, cfg);
  const auto b = run_cgd(d, init, {}, cfg);
  CHECK(a.state == b.state);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (std::size_t k = 0; k < a.trajectory.size(); ++k) {
    CHECK(a.trajectory[k].J == b.trajectory[k].J);
    CHECK(a.trajectory[k].OVFL == b.trajectory[k].OVFL);
  }
  CHECK(trajectory_csv(a.trajectory).rfind("iter,J,WL,OVFL,Tmax,warpage,lambda_dens,noise_injected\n", 0) == 0);

  // ‖∇WL'‖₁ / ‖∇D‖₁ at iteration 0, both by central differences
  const double eta = cfg.eta_start;
  const auto [bx, by] = resolve_bins(d, cfg.penalty);
  const double cap = bin_capacity(d, bx, by, cfg.penalty.t_max);
  auto pen = [&](const Placement& s) {
    double v = 0;
    for (double q : projected_density(d, s, bx, by, eta)) v += std::pow(std::max(0.0, q - cap), 2);
    return v;
  };
  double nw = 0, nd = 0;
  for (int i = 0; i < d.size(); ++i)
    for (int v = 0; v < 3; ++v) {
      const double h = v == 2 ? 1e-4 : 1e-5;
      Placement p = init, m = init;
      checks::coord(p, i, v) += h;
      checks::coord(m, i, v) -= h;
      nw += std::abs(projected_wirelength(d, p, eta, cfg.penalty.wl_smoothing) -
                     projected_wirelength(d, m, eta, cfg.penalty.wl_smoothing)) / (2 * h);
      nd += std::abs(pen(p) - pen(m)) / (2 * h);
    }
  REQUIRE(nd > 0);
  CHECK(a.lambda_dens0 == doctest::Approx(nw / nd).epsilon(1e-4));
  CHECK(a.trajectory[0].lambda_dens == a.lambda_dens0);
}

TEST_CASE("run_cgd: noise on stagnating overflow") {
  // target density far below what the dies need: overflow cannot fall
  const auto d = testutil::boxes(12, 12, {{4, 4}, {4, 4}, {4, 4}});
  CgdConfig cfg;
  cfg.max_iter = 160;
  cfg.min_iter = 160;
  cfg.penalty.t_max = 0.05;
  const Placement init{{6, 6, 0}, {6.5, 6, 0}, {6, 6.5, 0}};
  const auto res = run_cgd(d, init, {}, cfg);
  CHECK(res.noise_events >= 1);
  int flagged = 0;
  for (const auto& row : res.trajectory) flagged += row.noise_injected;
  CHECK(flagged == res.noise_events);
  // never two injections inside one window
  int last = -1000;
  for (const auto& row : res.trajectory)
    if (row.noise_injected) {
      CHECK(row.iter - last >= cfg.noise_window);
      last = row.iter;
    }

  cfg.noise_ovfl_threshold = 1e9;
  CHECK(run_cgd(d, init, {}, cfg).noise_events == 0);
  cfg.max_iter = 0;
  CHECK_THROWS_AS(run_cgd(d, init, {}, cfg), DomainError);
}

TEST_CASE("run_cgd reduces the wirelength-plus-density objective") {
  const auto d = synthesize_benchmark(12, 5, InterfaceKind::Standard_x16, 0.5);
  const auto init = *shelf_pack(d, 0.5);
  CgdConfig cfg;
  cfg.max_iter = 300;
  const auto res = run_cgd(d, init, {}, cfg);
  CHECK(res.trajectory.back().WL < res.trajectory.front().WL);
  for (const auto& q : res.state) {
    CHECK(std::isfinite(q.x));
    CHECK(q.x >= 0);
    CHECK(q.x <= d.interposer().width);
  }
}
