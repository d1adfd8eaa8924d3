// Acceptance runner: one PASS/FAIL line per criterion.
//   acceptance [--criterion N]    (all criteria when N is omitted)

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "atmplace/aux_function.hpp"
#include "atmplace/benchmark.hpp"
#include "atmplace/compact_thermal.hpp"
#include "atmplace/field_oracle.hpp"
#include "atmplace/flow.hpp"
#include "atmplace/milp.hpp"
#include "atmplace/seed_legal.hpp"
#include "checks.hpp"
#include "milp_oracle.hpp"
#include "placement_oracles.hpp"

using namespace atmplace;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- 1

Outcome closed_form() {
  const double as[] = {0.1, 0.3, 1.0, 3.0, 10.0};
  const double bs[] = {-4.0, -0.5, 0.1, 1.0, 5.0};
  double worst = 0;
  std::string at;
  for (double a : as)
    for (double b : bs)
      for (double c : bs) {
        const double ref = checks::F_quadrature(a, b, c);
        const double rel = std::abs(aux_F(a, b, c) - ref) / std::abs(ref);
        if (rel > worst) {
          worst = rel;
          at = fmt("(%g, %g, %g)", a, b, c);
        }
      }
  return {worst <= 1e-6, fmt("125 points, worst relative error %.2e at %s", worst, at.c_str())};
}

// ---------------------------------------------------------------- 2

Outcome gradients() {
  const auto g = checks::gradient_suite(20, 2);
  return {g.worst() <= 1e-4,
          fmt("20 states; thermal %.1e, warpage %.1e, wirelength %.1e, density %.1e, objective %.1e",
              g.thermal, g.warpage, g.wirelength, g.density, g.objective)};
}

// ---------------------------------------------------------------- 3

Outcome fidelity() {
  bool ok = true;
  std::string d;
  for (int n : {6, 8, 12}) {
    const auto design = synthesize_benchmark(7, n, InterfaceKind::Advanced_x32, 0.6);
    DatasetConfig dc;
    dc.count = 20;
    dc.seed = 5;
    const auto ds = generate_dataset(design, dc);
    FitOptions fo;
    fo.n_train = 10;
    const auto fit = fit_models(design, ds, fo);
    const double rt = fit.thermal_metrics.test_pearson, rw = fit.warpage_metrics.test_pearson;
    ok = ok && rt >= 0.95 && rw >= 0.90;
    d += fmt("%sN=%d thermal %.3f warpage %.3f", d.empty() ? "" : "; ", n, rt, rw);
  }
  return {ok, d + " (need 0.95 / 0.90)"};
}

// ---------------------------------------------------------------- 4

Outcome speed() {
  const auto d = synthesize_benchmark(7, 12, InterfaceKind::Advanced_x32, 0.6);
  const auto tp = initial_thermal_params(d, 60, 25);
  const auto pl = *shelf_pack(d, 0.5);
  const auto sp = measure_speedup(d, tp, pl, ThermalOracleConfig{}, 100);
  return {sp.speedup >= 100,
          fmt("N=12 M=%d, oracle %.2f ms, compact %.2f ms, ratio %.1fx (need 100x)",
              d.interposer().grid, 1e3 * sp.oracle_seconds, 1e3 * sp.compact_seconds, sp.speedup)};
}

// ---------------------------------------------------------------- 5

Outcome milp_exact() {
  Rng rng(2024);
  int match = 0, feasible = 0, maxb = 0;
  for (int k = 0; k < 50; ++k) {
    const bool big = k >= 25;
    const int nb = big ? rng.uniform_int(15, 30) : rng.uniform_int(4, 14);
    const int card = big ? 3 : 0;
    const auto p = checks::random_milp(rng, nb, card, rng.uniform_int(2, 6));
    const auto ref = checks::enumerate_milp(p, big ? card : 1 << 30);
    const auto s = milp::solve(p, 1);
    maxb = std::max(maxb, nb);
    bool same;
    if (!ref.feasible) {
      same = s.status == milp::Status::Infeasible;
    } else {
      ++feasible;
      same = s.status == milp::Status::Optimal &&
             std::abs(s.objective - ref.objective) <= 1e-6 * (1 + std::abs(ref.objective)) &&
             milp::max_violation(p, s.values) <= 1e-6;
    }
    match += same;
  }
  const auto two = DesignInstance(
      {3, 1, 16, 0.1},
      [] {
        std::vector<ChipletSpec> cs(2);
        const Vec2 pin[2] = {{0.3, 0.2}, {-0.4, 0.1}};
        for (int i = 0; i < 2; ++i) {
          cs[i].id = i;
          cs[i].width = cs[i].height = 1;
          cs[i].thickness = 0.5;
          cs[i].power_density = 1e6;
          cs[i].bumps = {{0, pin[i].x, pin[i].y, 0}};
        }
        return cs;
      }(),
      {{0, {0, 0}, {1, 0}}});
  const auto f = build_init_milp(two, 0.1);
  const auto s = milp::solve(f.problem);
  const double ref = checks::init_grid_oracle(two, 0.1, 0.05);
  const bool init_ok = s.status == milp::Status::Optimal && s.objective <= ref + 1e-6 &&
                       ref - s.objective <= 2 * 0.05 + 1e-9;
  return {match == 50 && init_ok,
          fmt("%d/50 match enumeration (%d feasible, up to %d binaries); 2-die init %.4f vs grid %.4f",
              match, feasible, maxb, s.objective, ref)};
}

// ---------------------------------------------------------------- 6

Outcome wl_quality() {
  BenchmarkOptions bo;
  bo.min_dim = 3;
  bo.max_dim = 6;
  const auto d = synthesize_benchmark(11, 4, InterfaceKind::Standard_x16, 0.5, bo);
  RunConfig rc;
  const auto out = place(d, {}, rc);
  const double ref = checks::twl_grid_oracle4(d, 0.25);
  const bool legal = check_legal(d, out.placement).legal();
  return {legal && out.twl <= 1.05 * ref,
          fmt("interposer %.2f x %.2f, TWL %.3f vs grid optimum %.3f (ratio %.4f, need <= 1.05)",
              d.interposer().width, d.interposer().height, out.twl, ref, out.twl / ref)};
}

// ---------------------------------------------------------------- 7

Outcome tm_effect() {
  // Fixed in advance: seed 7, 8 dies of 4-8 mm, the three most connected dies at 3e6 W/m²,
  // the rest at 2e5.
  BenchmarkOptions bo;
  bo.min_dim = 4;
  bo.max_dim = 8;
  const auto d0 = synthesize_benchmark(7, 8, InterfaceKind::Advanced_x32, 0.6, bo);
  std::vector<std::pair<int, std::pair<int, int>>> pr;
  for (const auto& [a, b] : d0.connected_pairs()) pr.push_back({d0.net_count(a, b), {a, b}});
  std::sort(pr.rbegin(), pr.rend());
  std::vector<int> hot{pr[0].second.first, pr[0].second.second};
  while (hot.size() < 3) {
    int best = -1, bc = -1;
    for (int i = 0; i < 8; ++i) {
      if (std::count(hot.begin(), hot.end(), i)) continue;
      int c = 0;
      for (int h : hot) c += d0.net_count(std::min(i, h), std::max(i, h));
      if (c > bc) bc = c, best = i;
    }
    hot.push_back(best);
  }
  std::vector<double> pw(8, 2e5);
  for (int h : hot) pw[h] = 3e6;
  const auto d = with_power(d0, pw);

  DatasetConfig dc;
  dc.seed = 7;
  const auto ds = generate_dataset(d, dc);
  const auto fit = fit_models(d, ds, FitOptions{});
  const PhysicsParams pp{&fit.thermal, &fit.warpage};

  RunConfig wl;
  wl.seed = 7;
  auto t0 = std::chrono::steady_clock::now();
  const auto a = place(d, pp, wl);
  const double s_wl = seconds_since(t0);
  RunConfig tm = wl;
  tm.mode = PlaceMode::TmAware;
  t0 = std::chrono::steady_clock::now();
  const auto b = place(d, pp, tm);
  const double s_tm = seconds_since(t0);

  const double drop = (a.peak_T - b.peak_T) / a.peak_T;
  const bool ok = drop >= 0.05 && b.twl >= a.twl && s_wl < 600 && s_tm < 600 &&
                  check_legal(d, a.placement).legal() && check_legal(d, b.placement).legal();
  return {ok, fmt("WL peak %.2f C TWL %.1f (%.0f s); TM peak %.2f C TWL %.1f (%.0f s); "
                  "peak drop %.1f%% (need >= 5%%), fit test r thermal %.3f warpage %.3f",
                  a.peak_T, a.twl, s_wl, b.peak_T, b.twl, s_tm, 100 * drop,
                  fit.thermal_metrics.test_pearson, fit.warpage_metrics.test_pearson)};
}

// ---------------------------------------------------------------- 8

Outcome legality() {
  int total = 0, legal = 0;
  auto audit = [&](const DesignInstance& d, const Placement& p) {
    ++total;
    legal += check_legal(d, p).legal();
  };
  for (int n : {4, 6, 10}) {
    const auto d = synthesize_benchmark(100 + n, n, InterfaceKind::Standard_x16, 0.5);
    DatasetConfig dc;
    dc.count = 6;
    dc.seed = n;
    const auto ds = generate_dataset(d, dc);
    for (const auto& s : ds) audit(d, s.placement);
    FitOptions fo;
    fo.n_train = 4;
    fo.fit.iterations = 300;
    const auto fit = fit_models(d, ds, fo);
    const PhysicsParams pp{&fit.thermal, &fit.warpage};
    for (auto mode : {PlaceMode::WlDriven, PlaceMode::TmAware}) {
      RunConfig rc;
      rc.mode = mode;
      rc.seed = n;
      rc.cgd.max_iter = 400;
      const auto out = place(d, pp, rc);
      audit(d, out.placement);
      audit(d, out.init.placement);
    }
  }
  // greedy path on a large instance
  const auto big = synthesize_benchmark(40, 40, InterfaceKind::Standard_x16, 0.5);
  Rng r(40);
  Placement opt;
  for (int i = 0; i < 40; ++i)
    opt.push_back({r.uniform(0, big.interposer().width), r.uniform(0, big.interposer().height),
                   kOrientations[r.uniform_int(0, 3)]});
  audit(big, legalize(big, opt, LegalizeConfig{}).placement);
  return {legal == total, fmt("%d/%d emitted placements pass check_legal (gap >= 0.1 mm)", legal, total)};
}

// ---------------------------------------------------------------- 9

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(ATMPLACE_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::map<std::string, std::string> result_files(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (name.find("_timing.json") != std::string::npos || name.rfind("log_", 0) == 0) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).string()] = ss.str();
  }
  return out;
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "atmplace_acceptance_det";
  fs::remove_all(base);
  std::map<std::string, std::string> runs[2];
  int failures = 0;
  for (int r = 0; r < 2; ++r) {
    const fs::path root = base / ("run" + std::to_string(r));
    fs::create_directories(root);
    const std::string design = (root / "gen" / "design.json").string();
    const std::string ds = (root / "ds").string(), fit = (root / "fit").string();
    const std::string cfgp = (root / "log_config.json").string();
    std::ofstream(cfgp) << R"({"cgd": {"max_iter": 400}})";
    const std::string cfg = " --config " + cfgp;
    const std::vector<std::string> steps = {
        "--seed 5 --out " + (root / "gen").string() + " gen --n 5 --iface x16 --ws 0.5",
        "--seed 5 --out " + ds + " dataset --design " + design + " --count 6",
        "--seed 5 --out " + fit + " fit --design " + design + " --dataset " + ds +
            " --train 4 --iterations 300 --speed-reps 3",
        "--seed 5" + cfg + " --out " + (root / "wl").string() + " place --design " + design + " --mode wl",
        "--seed 5" + cfg + " --out " + (root / "tm").string() + " place --design " + design +
            " --params " + fit + " --mode tm",
        "--seed 5" + cfg + " --threads 2 --out " + (root / "pareto").string() + " pareto --design " +
            design + " --params " + fit + " --grid-a 0,1 --grid-b 1",
        "--seed 5" + cfg + " --threads 2 --out " + (root / "tune").string() + " tune --design " +
            design + " --params " + fit + " --mode tm --budget 3",
        "--seed 5 --out " + (root / "audit").string() + " audit --oracle --design " + design +
            " --placement " + (root / "tm" / "placement.json").string() + " --report " +
            (root / "tm" / "place_report.json").string(),
    };
    for (std::size_t k = 0; k < steps.size(); ++k)
      failures += run_cli(steps[k], root / ("log_" + std::to_string(k) + ".txt")) != 0;
    runs[r] = result_files(root);
  }
  int differ = 0;
  std::string first;
  for (const auto& [name, body] : runs[0]) {
    const auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != body) {
      ++differ;
      if (first.empty()) first = name;
    }
  }
  differ += static_cast<int>(runs[1].size() > runs[0].size());
  fs::remove_all(base);
  return {failures == 0 && differ == 0 && !runs[0].empty(),
          fmt("%zu result files compared, %d differ%s%s, %d failed commands", runs[0].size(), differ,
              first.empty() ? "" : " (first: ", first.empty() ? "" : (first + ")").c_str(), failures)};
}

// ---------------------------------------------------------------- 10

double linf(const FieldGrid& a, const FieldGrid& b) {
  double e = 0;
  for (std::size_t k = 0; k < a.size(); ++k) e = std::max(e, std::abs(a.values()[k] - b.values()[k]));
  return e;
}

Outcome oracle_convergence() {
  const double W = 20, H = 16;
  std::vector<double> et, ew;
  // thermal: T* = T_amb + cos(πx/W) cos(πy/H), adiabatic edges hold exactly
  ThermalOracleConfig tc;
  tc.tolerance = 1e-12;
  tc.max_iterations = 400000;
  const double hs = sink_coefficient(tc, W, H);
  const double lap = tc.kappa_eff * tc.h_stack * 1e3 * (std::pow(kPi / W, 2) + std::pow(kPi / H, 2));
  // plate: w* = s f(x) g(y) with f = x⁴ - 2Lx³ + L³x (w = w'' = 0 at both ends)
  PlateOracleConfig pc;
  pc.tolerance = 1e-12;
  pc.max_iterations = 400000;
  const double k = (1 - pc.poisson) * pc.alpha_cte / (pc.youngs_gpa * pc.h_plate * pc.h_plate);
  auto f = [](double x, double L) { return (x * x * x * x - 2 * L * x * x * x + L * L * L * x) / std::pow(L, 4); };
  auto f2 = [](double x, double L) { return (12 * x * x - 12 * L * x) / std::pow(L, 4); };
  const double s = 10.0 / (3 * 0.3125 * (1 / (W * W) + 1 / (H * H)));  // |ΔT| up to about 10 K

  for (int m : {16, 32, 64}) {
    FieldGrid P(m, m, W, H), Tex(m, m, W, H), dT(m, m, W, H), wex(m, m, W, H);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        const double x = P.x_center(i), y = P.y_center(j);
        const double cc = std::cos(kPi * x / W) * std::cos(kPi * y / H);
        P.at(i, j) = (lap + hs) * cc;
        Tex.at(i, j) = tc.t_ambient + cc;
        dT.at(i, j) = pc.t_ref + s * (f2(x, W) * f(y, H) + f(x, W) * f2(y, H));
        wex.at(i, j) = k * s * f(x, W) * f(y, H) * 1e3;
      }
    et.push_back(linf(solve_thermal_field(P, tc), Tex));
    ew.push_back(linf(solve_warpage(dT, pc), wex) / wex.max());
  }
  const double rt1 = et[0] / et[1], rt2 = et[1] / et[2], rw1 = ew[0] / ew[1], rw2 = ew[1] / ew[2];
  return {std::min({rt1, rt2, rw1, rw2}) >= 3.5,
          fmt("thermal Linf %.2e %.2e %.2e (ratios %.2f, %.2f); plate rel Linf %.2e %.2e %.2e "
              "(ratios %.2f, %.2f); need >= 3.5",
              et[0], et[1], et[2], rt1, rt2, ew[0], ew[1], ew[2], rw1, rw2)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> table = {
      {1, {"closed-form F vs quadrature", closed_form}},
      {2, {"gradient suite", gradients}},
      {3, {"surrogate fidelity", fidelity}},
      {4, {"surrogate speed", speed}},
      {5, {"MILP correctness", milp_exact}},
      {6, {"WL-driven quality", wl_quality}},
      {7, {"TM-aware effect", tm_effect}},
      {8, {"legality", legality}},
      {9, {"determinism", determinism}},
      {10, {"oracle convergence", oracle_convergence}},
  };
  // wall-clock caps from the criteria text, seconds
  const std::map<int, double> cap = {{1, 5}, {2, 60}, {3, 900}, {6, 600}};

  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--criterion" && i + 1 < argc) which.push_back(std::atoi(argv[++i]));
  }
  if (which.empty())
    for (const auto& [k, v] : table) which.push_back(k);

  bool all = true;
  for (int c : which) {
    const auto it = table.find(c);
    if (it == table.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", c);
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    const auto cp = cap.find(c);
    if (cp != cap.end() && secs >= cp->second) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s limit", cp->second);
    }
    std::printf("criterion %d %s: %s | %s (%.1f s)\n", c, it->second.first, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
