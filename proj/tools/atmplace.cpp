// atmplace command line: gen, dataset, fit, place, pareto, tune, audit.
// Exit codes: 0 ok, 1 runtime failure, 2 usage or precondition error.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "atmplace/benchmark.hpp"
#include "atmplace/flow.hpp"

using namespace atmplace;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string config;
  int threads = 1;
};

std::string out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out);
  return (fs::path(g.out) / name).string();
}

void print_warnings(const std::vector<std::string>& w) {
  for (const auto& s : w) std::fprintf(stderr, "warning: %s\n", s.c_str());
}

DesignInstance read_design(const std::string& path) {
  std::vector<std::string> w;
  DesignInstance d = load_design(path, &w);
  print_warnings(w);
  return d;
}

RunConfig base_config(const Globals& g) {
  RunConfig rc;
  if (!g.config.empty()) {
    std::vector<std::string> w;
    rc = run_config_from_json(parse_json_text(read_text(g.config), g.config), rc, &w);
    print_warnings(w);
  }
  rc.seed = g.seed;
  return rc;
}

struct LoadedParams {
  CompactThermalParams thermal;
  CompactWarpageParams warpage;
  bool have_thermal = false, have_warpage = false;
  PhysicsParams view() const {
    return {have_thermal ? &thermal : nullptr, have_warpage ? &warpage : nullptr};
  }
};

LoadedParams read_params(const std::string& dir, const DesignInstance& design) {
  LoadedParams p;
  if (dir.empty()) return p;
  const std::string tp = (fs::path(dir) / "thermal_params.json").string();
  const std::string wp = (fs::path(dir) / "warpage_params.json").string();
  p.thermal = thermal_params_from_json(parse_json_text(read_text(tp), tp));
  p.thermal.check(design.size());
  p.have_thermal = true;
  if (fs::exists(wp)) {
    p.warpage = warpage_params_from_json(parse_json_text(read_text(wp), wp));
    p.warpage.check(design.size());
    p.have_warpage = true;
  }
  return p;
}

// Training/dataset wall-clock carried over from an earlier fit, when present.
Json upstream_times(const std::string& params_dir) {
  Json j = {{"dataset", nullptr}, {"training", nullptr}};
  if (params_dir.empty()) return j;
  const std::string path = (fs::path(params_dir) / "fit_timing.json").string();
  if (!fs::exists(path)) return j;
  const Json t = parse_json_text(read_text(path), path);
  if (t.contains("dataset_seconds")) j["dataset"] = t["dataset_seconds"];
  if (t.contains("training_seconds")) j["training"] = t["training_seconds"];
  return j;
}

int cmd_gen(const Globals& g, int n, const std::string& iface, double ws, double pmin,
            double pmax) {
  BenchmarkOptions opt;
  if (pmin > 0) opt.min_power = pmin;
  if (pmax > 0) opt.max_power = pmax;
  if (opt.min_power > opt.max_power) throw DomainError("gen: --power-min exceeds --power-max");
  const DesignInstance d = synthesize_benchmark(g.seed, n, parse_interface(iface), ws, opt);
  const std::string path = out_path(g, "design.json");
  save_design(path, d);
  std::printf("Case   | Bump Type | Dies | Nets | Width (mm) | Height (mm) | Whitespace/%%\n");
  std::printf("seed%-2llu | %-9s | %4d | %4zu | %10.1f | %11.1f | %.0f\n",
              static_cast<unsigned long long>(g.seed), interface_name(parse_interface(iface)).c_str(),
              d.size(), d.nets().size(), d.interposer().width, d.interposer().height,
              100.0 * whitespace_fraction(d));
  std::printf("%d dies written to %s\n", d.size(), path.c_str());
  return 0;
}

int cmd_dataset(const Globals& g, const std::string& design_path, int count) {
  const DesignInstance d = read_design(design_path);
  DatasetConfig cfg;
  cfg.count = count;
  cfg.seed = g.seed;
  const auto t0 = std::chrono::steady_clock::now();
  const auto samples = generate_dataset(d, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  fs::create_directories(g.out);
  write_dataset(g.out, samples, cfg);
  write_text(out_path(g, "dataset_timing.json"),
             dump_json({{"schema_version", kSchemaVersion}, {"dataset_seconds", secs}}));
  for (const auto& s : samples) {
    if (!check_legal(d, s.placement).legal()) {
      std::fprintf(stderr, "dataset: sample %d is not legal\n", s.id);
      return 1;
    }
  }
  std::printf("%zu samples written to %s\n", samples.size(), g.out.c_str());
  return 0;
}

int cmd_fit(const Globals& g, const std::string& design_path, const std::string& dataset_dir,
            int n_train, int iterations, int reps) {
  const DesignInstance d = read_design(design_path);
  const auto samples = read_dataset(dataset_dir, d);
  FitOptions opt;
  opt.n_train = n_train;
  opt.fit.seed = g.seed;
  if (iterations > 0) opt.fit.iterations = iterations;
  opt.speed_repetitions = reps;
  const int n_test = static_cast<int>(samples.size()) - n_train;
  FitOutcome fit;
  try {
    fit = fit_models(d, samples, opt);
  } catch (const FitDivergence& e) {
    Json rep = {{"schema_version", kSchemaVersion}, {"error", e.what()}};
    write_text(out_path(g, "fit_report.json"), dump_json(rep));
    std::fprintf(stderr, "fit diverged: %s\n", e.what());
    return 1;
  }
  write_text(out_path(g, "thermal_params.json"), dump_json(thermal_params_to_json(fit.thermal)));
  write_text(out_path(g, "warpage_params.json"), dump_json(warpage_params_to_json(fit.warpage)));
  write_text(out_path(g, "fit_report.json"), dump_json(fit_report_json(fit, n_train, n_test)));

  const SpeedReport sp = measure_speedup(d, fit.thermal, samples.front().placement, opt.thermal, reps);
  Json timing = {{"schema_version", kSchemaVersion},
                 {"training_seconds", fit.seconds},
                 {"speedup",
                  {{"oracle_seconds", sp.oracle_seconds},
                   {"compact_seconds", sp.compact_seconds},
                   {"ratio", sp.speedup},
                   {"repetitions", sp.repetitions}}}};
  const std::string ds_timing = (fs::path(dataset_dir) / "dataset_timing.json").string();
  if (fs::exists(ds_timing)) {
    const Json t = parse_json_text(read_text(ds_timing), ds_timing);
    if (t.contains("dataset_seconds")) timing["dataset_seconds"] = t["dataset_seconds"];
  }
  write_text(out_path(g, "fit_timing.json"), dump_json(timing));
  std::printf("thermal pearson train %.4f test %.4f | warpage pearson train %.4f test %.4f | speedup %.1fx\n",
              fit.thermal_metrics.train_pearson, fit.thermal_metrics.test_pearson,
              fit.warpage_metrics.train_pearson, fit.warpage_metrics.test_pearson, sp.speedup);
  return 0;
}

int cmd_place(const Globals& g, const std::string& design_path, const std::string& params_dir,
              const std::string& mode) {
  const DesignInstance d = read_design(design_path);
  RunConfig rc = base_config(g);
  if (!mode.empty()) rc.mode = parse_mode(mode);
  const LoadedParams params = read_params(params_dir, d);
  PlaceOutcome out;
  try {
    out = place(d, params.view(), rc);
  } catch (const InfeasibleLegalization& e) {
    std::fprintf(stderr, "place: %s\n", e.what());
    return 1;
  }
  rc.normalize();
  save_placement(out_path(g, "placement.json"), out.placement);
  write_text(out_path(g, "trajectory.csv"), trajectory_csv(out.cgd.trajectory));
  write_text(out_path(g, "place_report.json"), dump_json(place_report_json(d, out, rc)));
  Json stages = upstream_times(params_dir);
  stages["init"] = out.times.init;
  stages["opt"] = out.times.opt;
  stages["legalization"] = out.times.legalization;
  stages["audit"] = out.times.audit;
  write_text(out_path(g, "place_timing.json"),
             dump_json({{"schema_version", kSchemaVersion}, {"stages_seconds", stages}}));
  std::printf("mode %s: TWL %.3f mm, peak T %.2f C, warpage %.3f um, legal\n",
              mode_name(rc.mode).c_str(), out.twl, out.peak_T, out.warpage);
  return 0;
}

int cmd_pareto(const Globals& g, const std::string& design_path, const std::string& params_dir,
               const std::string& sweep, const std::vector<double>& ga,
               const std::vector<double>& gb) {
  const DesignInstance d = read_design(design_path);
  const LoadedParams params = read_params(params_dir, d);
  ParetoConfig pc;
  pc.base = base_config(g);
  if (sweep == "lambda") {
    pc.kind = SweepKind::Lambda;
  } else if (sweep == "threshold") {
    pc.kind = SweepKind::Threshold;
  } else {
    throw DomainError("pareto: --sweep must be lambda or threshold");
  }
  if (!ga.empty()) pc.grid_a = ga;
  if (!gb.empty()) pc.grid_b = gb;
  pc.threads = g.threads;
  auto pts = run_pareto(d, params.view(), pc);
  write_text(out_path(g, "pareto.csv"), pareto_csv(pts, pc.kind));
  std::vector<ParetoPoint> front;
  for (const auto& p : pts)
    if (p.on_front) front.push_back(p);
  write_text(out_path(g, "pareto_front.csv"), pareto_csv(front, pc.kind));
  write_text(out_path(g, "pareto.svg"), pareto_svg(pts));
  int ok = 0;
  std::vector<double> a, t;
  for (const auto& p : pts) {
    if (!p.ok) continue;
    ++ok;
    a.push_back(p.a);
    t.push_back(p.peak_T);
  }
  Json rep = {{"schema_version", kSchemaVersion},
              {"sweep", sweep},
              {"points", pts.size()},
              {"succeeded", ok},
              {"front_size", front.size()}};
  rep["spearman_a_vs_Tmax"] = ok >= 2 && std::isfinite(spearman(a, t)) ? Json(spearman(a, t)) : Json(nullptr);
  Json failures = Json::array();
  for (const auto& p : pts)
    if (!p.ok) failures.push_back({{"index", p.index}, {"error", p.error}});
  rep["failures"] = failures;
  write_text(out_path(g, "pareto_report.json"), dump_json(rep));
  std::printf("%d/%zu runs ok, %zu on the front\n", ok, pts.size(), front.size());
  return ok > 0 ? 0 : 1;
}

int cmd_tune(const Globals& g, const std::string& design_path, const std::string& params_dir,
             const std::string& mode, int budget) {
  const DesignInstance d = read_design(design_path);
  const LoadedParams params = read_params(params_dir, d);
  RunConfig base = base_config(g);
  if (!mode.empty()) base.mode = parse_mode(mode);
  const TuneResult r = tune(d, params.view(), base, budget, g.seed, g.threads);
  Json table = Json::array();
  for (const auto& c : r.candidates) {
    Json row = {{"index", c.index}, {"ok", c.ok}};
    if (c.ok) {
      row["score"] = c.score;
      row["twl"] = c.twl;
      row["peak_temperature_c"] = c.peak_T;
      row["warpage_um"] = c.warpage;
    } else {
      row["error"] = c.error;
    }
    row["config"] = run_config_to_json(c.config);
    table.push_back(row);
  }
  Json rep = {{"schema_version", kSchemaVersion}, {"budget", budget}, {"best", r.best}};
  rep["candidates"] = table;
  write_text(out_path(g, "tune_report.json"), dump_json(rep));
  if (r.best < 0) {
    std::fprintf(stderr, "tune: every candidate failed\n");
    return 1;
  }
  write_text(out_path(g, "best_config.json"),
             dump_json(run_config_to_json(r.candidates[r.best].config)));
  std::printf("best candidate %d, score %.6f\n", r.best, r.candidates[r.best].score);
  return 0;
}

int cmd_audit(const Globals& g, const std::string& design_path, const std::string& placement_path,
              const std::string& report_path, bool oracle) {
  const DesignInstance d = read_design(design_path);
  std::vector<std::string> w;
  const Placement p = load_placement(placement_path, &w);
  print_warnings(w);
  if (static_cast<int>(p.size()) != d.size())
    throw ValidationError("audit: placement size does not match the design");
  const LegalityReport lr = check_legal(d, p);
  const double twl = exact_wirelength(d, p);
  Json rep = {{"schema_version", kSchemaVersion}, {"twl", twl}};
  rep["legality"] = legality_json(lr);
  bool ok = lr.legal();
  if (!report_path.empty()) {
    const Json r = parse_json_text(read_text(report_path), report_path);
    const double claimed = get_number(r, "twl", report_path);
    const double rel = std::abs(claimed - twl) / std::max(std::abs(twl), 1e-300);
    rep["reported_twl"] = claimed;
    rep["twl_relative_error"] = rel;
    rep["twl_matches"] = rel <= 1e-9;
    ok = ok && rel <= 1e-9;
  }
  if (oracle) {
    const RunConfig rc = base_config(g);
    const FieldGrid T = solve_thermal(d, p, rc.thermal_oracle);
    rep["peak_temperature_c"] = T.max();
    rep["warpage_um"] = warpage_metric(detrend_plane(solve_warpage(T, rc.plate_oracle)));
  }
  rep["pass"] = ok;
  const std::string text = dump_json(rep);
  std::fputs(text.c_str(), stdout);
  if (g.out != ".") write_text(out_path(g, "audit_report.json"), text);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermo-mechanically aware chiplet placement"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random stream")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--config", g.config, "Run configuration JSON");
  app.add_option("--threads", g.threads, "Worker threads for pareto/tune")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::string design, params, dataset, mode, placement, report, sweep = "lambda", iface = "x32";
  int n = 6, count = 20, n_train = 10, iters = 0, reps = 100, budget = 8;
  double ws = 0.4, pmin = 0, pmax = 0;
  bool oracle = false;
  std::vector<double> grid_a, grid_b;

  auto* gen = app.add_subcommand("gen", "Synthesize a benchmark design");
  gen->add_option("--n", n, "Chiplet count")->capture_default_str();
  gen->add_option("--iface", iface, "x16 or x32")->capture_default_str();
  gen->add_option("--ws", ws, "Whitespace fraction")->capture_default_str();
  gen->add_option("--power-min", pmin, "Minimum power density, W/m^2");
  gen->add_option("--power-max", pmax, "Maximum power density, W/m^2");

  auto* ds = app.add_subcommand("dataset", "Oracle-labelled random legal placements");
  ds->add_option("--design", design)->required();
  ds->add_option("--count", count)->capture_default_str();

  auto* fit = app.add_subcommand("fit", "Fit the compact thermal and warpage models");
  fit->add_option("--design", design)->required();
  fit->add_option("--dataset", dataset)->required();
  fit->add_option("--train", n_train, "Leading samples used for training")->capture_default_str();
  fit->add_option("--iterations", iters, "Optimizer iterations (0 keeps the default)");
  fit->add_option("--speed-reps", reps)->capture_default_str();

  auto* pl = app.add_subcommand("place", "Run init, CGD, snapping and legalization");
  pl->add_option("--design", design)->required();
  pl->add_option("--params", params, "Directory holding fitted params");
  pl->add_option("--mode", mode, "wl or tm");

  auto* pa = app.add_subcommand("pareto", "Sweep penalty weights or thresholds");
  pa->add_option("--design", design)->required();
  pa->add_option("--params", params)->required();
  pa->add_option("--sweep", sweep, "lambda or threshold")->capture_default_str();
  pa->add_option("--grid-a", grid_a, "lambda_T values (or T_th)")->delimiter(',');
  pa->add_option("--grid-b", grid_b, "lambda_W values (or W_th)")->delimiter(',');

  auto* tu = app.add_subcommand("tune", "Random search over optimizer settings");
  tu->add_option("--design", design)->required();
  tu->add_option("--params", params);
  tu->add_option("--mode", mode, "wl or tm");
  tu->add_option("--budget", budget)->capture_default_str();

  auto* au = app.add_subcommand("audit", "Re-check an emitted placement");
  au->add_option("--design", design)->required();
  au->add_option("--placement", placement)->required();
  au->add_option("--report", report, "place_report.json to compare TWL against");
  au->add_flag("--oracle", oracle, "Also solve both oracles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) return cmd_gen(g, n, iface, ws, pmin, pmax);
    if (*ds) return cmd_dataset(g, design, count);
    if (*fit) return cmd_fit(g, design, dataset, n_train, iters, reps);
    if (*pl) return cmd_place(g, design, params, mode);
    if (*pa) return cmd_pareto(g, design, params, sweep, grid_a, grid_b);
    if (*tu) {
      if (budget < 1) throw DomainError("tune: --budget must be >= 1");
      return cmd_tune(g, design, params, mode, budget);
    }
    if (*au) return cmd_audit(g, design, placement, report, oracle);
  } catch (const DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const InvalidOrientation& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
