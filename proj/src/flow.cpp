#include "atmplace/flow.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "atmplace/rng.hpp"

namespace atmplace {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sample_stem(int id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%03d", id);
  return buf;
}

Placement random_positions(const DesignInstance& design, Rng& rng) {
  const double W = design.interposer().width, H = design.interposer().height;
  Placement p(design.size());
  for (int i = 0; i < design.size(); ++i) {
    const double th = kOrientations[rng.uniform_int(0, 3)];
    const Vec2 d = rotated_dims(design.chiplet(i), th);
    p[i] = {rng.uniform(0.5 * d.x, std::max(0.5 * d.x, W - 0.5 * d.x)),
            rng.uniform(0.5 * d.y, std::max(0.5 * d.y, H - 0.5 * d.y)), th};
  }
  return p;
}

double oracle_warpage(const FieldGrid& thermal, const PlateOracleConfig& plate) {
  return warpage_metric(detrend_plane(solve_warpage(thermal, plate)));
}

}  // namespace

double self_heating_peak(const CompactThermalParams& p, const DesignInstance& design,
                         const Placement& placement) {
  double peak = p.B;
  for (int i = 0; i < design.size(); ++i) {
    // centre of an isolated chiplet is its hottest point
    CompactThermalParams q = p;
    q.lx = {p.lx[i]};
    q.ly = {p.ly[i]};
    Placement single{placement[i]};
    const std::vector<Vec2> at{{placement[i].x, placement[i].y}};
    std::vector<ChipletSpec> cs{design.chiplet(i)};
    cs[0].id = 0;
    cs[0].bumps.clear();
    const DesignInstance alone(design.interposer(), cs, {});
    peak = std::max(peak, eval_Tc_points(q, alone, single, at)[0]);
  }
  return peak;
}

// ---- helpers ----

void parallel_for(int count, int threads, const std::function<void(int)>& job) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

Json legality_json(const LegalityReport& rep) {
  Json j;
  j["legal"] = rep.legal();
  j["containment_ok"] = rep.containment_ok;
  j["min_pairwise_gap"] =
      std::isfinite(rep.min_pairwise_gap) ? Json(rep.min_pairwise_gap) : Json(nullptr);
  Json pairs = Json::array();
  for (auto [a, b] : rep.overlap_pairs) pairs.push_back({a, b});
  j["overlap_pairs"] = pairs;
  j["containment_violations"] = rep.containment_violations;
  return j;
}

// ---- dataset ----

std::vector<DatasetSample> generate_dataset(const DesignInstance& design,
                                            const DatasetConfig& cfg) {
  if (cfg.count < 2) throw DomainError("dataset: count must be >= 2 (fitting needs two samples)");
  Rng master(cfg.seed);
  std::vector<DatasetSample> out;
  for (int k = 0; k < cfg.count; ++k) {
    Rng rng = master.split(static_cast<std::uint64_t>(k));
    DatasetSample s;
    s.id = k;
    LegalizeConfig lc;
    lc.node_limit = cfg.legalize_node_limit;
    lc.seed = cfg.seed + k;
    bool done = false;
    for (int attempt = 0; attempt < 50 && !done; ++attempt) {
      try {
        s.placement = legalize(design, random_positions(design, rng), lc).placement;
        done = true;
      } catch (const InfeasibleLegalization&) {
      }
    }
    if (!done) throw std::runtime_error("dataset: sample " + std::to_string(k) + " could not be legalized");
    try {
      s.thermal = solve_thermal(design, s.placement, cfg.thermal);
      s.warpage = solve_warpage(s.thermal, cfg.plate);
    } catch (const std::exception& e) {
      throw std::runtime_error("dataset: oracle failed on sample " + std::to_string(k) + ": " +
                               e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_dataset(const std::string& dir, const std::vector<DatasetSample>& samples,
                   const DatasetConfig& cfg) {
  fs::create_directories(dir);
  Json m;
  m["schema_version"] = kSchemaVersion;
  m["seed"] = cfg.seed;
  m["count"] = samples.size();
  Json list = Json::array();
  for (const auto& s : samples) {
    const std::string stem = sample_stem(s.id);
    save_placement((fs::path(dir) / (stem + ".placement.json")).string(), s.placement);
    write_text((fs::path(dir) / (stem + ".thermal.csv")).string(), field_to_csv(s.thermal));
    write_text((fs::path(dir) / (stem + ".warpage.csv")).string(), field_to_csv(s.warpage));
    Json e;
    e["id"] = s.id;
    e["placement"] = stem + ".placement.json";
    e["thermal"] = stem + ".thermal.csv";
    e["warpage"] = stem + ".warpage.csv";
    e["peak_temperature_c"] = s.thermal.max();
    e["warpage_um"] = warpage_metric(detrend_plane(s.warpage));
    list.push_back(e);
  }
  m["samples"] = list;
  write_text((fs::path(dir) / "manifest.json").string(), dump_json(m));
}

std::vector<DatasetSample> read_dataset(const std::string& dir, const DesignInstance& design) {
  const std::string mpath = (fs::path(dir) / "manifest.json").string();
  const Json m = parse_json_text(read_text(mpath), mpath);
  const Json& list = get_field(m, "samples", "manifest");
  std::vector<DatasetSample> out;
  const double W = design.interposer().width, H = design.interposer().height;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string ctx = "manifest.samples[" + std::to_string(k) + "]";
    const Json& e = list[k];
    DatasetSample s;
    s.id = get_int(e, "id", ctx);
    auto file = [&](const char* key) {
      const Json& v = get_field(e, key, ctx);
      if (!v.is_string()) throw ParseError(ctx + "." + key + ": expected a file name");
      return (fs::path(dir) / v.get<std::string>()).string();
    };
    s.placement = load_placement(file("placement"));
    if (static_cast<int>(s.placement.size()) != design.size())
      throw ValidationError(ctx + ": placement size does not match the design");
    s.thermal = field_from_csv(read_text(file("thermal")), W, H);
    s.warpage = field_from_csv(read_text(file("warpage")), W, H);
    out.push_back(std::move(s));
  }
  return out;
}

// ---- fit ----

FitOutcome fit_models(const DesignInstance& design, const std::vector<DatasetSample>& samples,
                      const FitOptions& opt) {
  if (opt.n_train < 2 || opt.n_train > static_cast<int>(samples.size()))
    throw DomainError("fit: n_train must be in [2, sample count]");
  std::vector<ThermalSample> ttr, tte;
  std::vector<WarpageSample> wtr, wte;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    const bool train = static_cast<int>(k) < opt.n_train;
    (train ? ttr : tte).push_back({s.placement, s.thermal});
    (train ? wtr : wte).push_back({s.placement, s.thermal, detrend_plane(s.warpage)});
  }
  FitOutcome out;
  const auto t0 = Clock::now();
  ThermalFit tf = fit_thermal(design, ttr, opt.fit);
  WarpageFit wf = fit_warpage(design, tf.params, wtr, opt.fit);
  out.seconds = seconds_since(t0);
  out.thermal = tf.params;
  out.warpage = wf.params;

  auto fill = [](ModelMetrics& m, const FitReport& train, const FitReport* test) {
    m.train_mae = train.mean_mae;
    m.train_pearson = train.mean_pearson;
    m.iterations = train.iterations;
    m.final_loss = train.final_loss;
    m.test_mae = test ? test->mean_mae : std::numeric_limits<double>::quiet_NaN();
    m.test_pearson = test ? test->mean_pearson : std::numeric_limits<double>::quiet_NaN();
  };
  if (tte.empty()) {
    fill(out.thermal_metrics, tf.report, nullptr);
    fill(out.warpage_metrics, wf.report, nullptr);
  } else {
    const FitReport te = evaluate_thermal(design, out.thermal, tte);
    const FitReport we = evaluate_warpage(design, out.thermal, out.warpage, wte);
    fill(out.thermal_metrics, tf.report, &te);
    fill(out.warpage_metrics, wf.report, &we);
  }
  return out;
}

SpeedReport measure_speedup(const DesignInstance& design, const CompactThermalParams& params,
                            const Placement& placement, const ThermalOracleConfig& oracle,
                            int repetitions) {
  if (repetitions < 1) throw DomainError("measure_speedup: repetitions must be >= 1");
  SpeedReport r;
  r.repetitions = repetitions;
  const GridSpec grid = GridSpec::of(design);
  double sink = 0.0;  // keeps the evaluations observable
  auto t0 = Clock::now();
  for (int k = 0; k < repetitions; ++k) sink += eval_Tc(params, design, placement, grid).max();
  r.compact_seconds = seconds_since(t0) / repetitions;
  t0 = Clock::now();
  for (int k = 0; k < repetitions; ++k) sink += solve_thermal(design, placement, oracle).max();
  r.oracle_seconds = seconds_since(t0) / repetitions;
  r.speedup = r.oracle_seconds / std::max(r.compact_seconds, 1e-12);
  if (!std::isfinite(sink)) r.speedup = std::numeric_limits<double>::quiet_NaN();
  return r;
}

namespace {

Json metrics_json(const ModelMetrics& m) {
  auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  Json j;
  j["mae_train"] = num(m.train_mae);
  j["pearson_train"] = num(m.train_pearson);
  j["mae_test"] = num(m.test_mae);
  j["pearson_test"] = num(m.test_pearson);
  j["iterations"] = m.iterations;
  j["final_loss"] = num(m.final_loss);
  return j;
}

}  // namespace

Json fit_report_json(const FitOutcome& fit, int n_train, int n_test) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["n_train"] = n_train;
  j["n_test"] = n_test;
  j["thermal"] = metrics_json(fit.thermal_metrics);
  j["thermal"]["parameter_count"] = fit.thermal.parameter_count();
  j["warpage"] = metrics_json(fit.warpage_metrics);
  j["warpage"]["parameter_count"] = fit.warpage.parameter_count();
  return j;
}

// ---- place ----

std::string mode_name(PlaceMode m) { return m == PlaceMode::WlDriven ? "wl" : "tm"; }

PlaceMode parse_mode(const std::string& s) {
  if (s == "wl" || s == "WlDriven" || s == "wl-driven") return PlaceMode::WlDriven;
  if (s == "tm" || s == "TmAware" || s == "tm-aware") return PlaceMode::TmAware;
  throw ParseError("unknown mode '" + s + "' (expected wl or tm)");
}

RunConfig::RunConfig() {
  init.node_limit = 3000;
  legalize.node_limit = 5000;
  cgd.penalty.lambda_T = 1.0;
  cgd.penalty.lambda_W = 1.0;
}

void RunConfig::normalize() {
  if (mode == PlaceMode::WlDriven) {
    cgd.penalty.lambda_T = 0.0;
    cgd.penalty.lambda_W = 0.0;
  }
  init.seed = seed;
  cgd.seed = seed + 1;
  legalize.seed = seed + 2;
  legalize.lambda_w = mode == PlaceMode::WlDriven ? legalize_lambda_w_wl : legalize_lambda_w_tm;
}

Json run_config_to_json(const RunConfig& c) {
  Json j;
  j["mode"] = mode_name(c.mode);
  j["seed"] = c.seed;
  j["init"] = {{"epsilon", c.init.epsilon},
               {"node_limit", c.init.node_limit},
               {"time_limit", c.init.time_limit_seconds}};
  const auto& g = c.cgd;
  j["cgd"] = {{"max_iter", g.max_iter},
              {"eta_start", g.eta_start},
              {"eta_end", g.eta_end},
              {"step_xy_frac", g.step_xy_frac},
              {"step_theta", g.step_theta},
              {"noise_zeta", g.noise_zeta},
              {"noise_window", g.noise_window},
              {"noise_rel_change", g.noise_rel_change},
              {"noise_ovfl_threshold", g.noise_ovfl_threshold},
              {"stop_step_frac", g.stop_step_frac},
              {"min_iter", g.min_iter},
              {"balance_physics", g.balance_physics}};
  const auto& p = g.penalty;
  j["penalty"] = {{"lambda_dens", p.lambda_dens}, {"lambda_T", p.lambda_T},
                  {"lambda_W", p.lambda_W},       {"T_th", p.T_th},
                  {"W_th", p.W_th},               {"gamma", p.gamma},
                  {"rho", p.rho},                 {"t_max", p.t_max},
                  {"bins_x", p.bins_x},           {"bins_y", p.bins_y},
                  {"wl_smoothing", p.wl_smoothing}, {"warp_tau", p.warp_tau}};
  j["legalize"] = {{"lambda_w_wl", c.legalize_lambda_w_wl},
                   {"lambda_w_tm", c.legalize_lambda_w_tm},
                   {"node_limit", c.legalize.node_limit},
                   {"time_limit", c.legalize.time_limit_seconds},
                   {"greedy_threshold", c.legalize.greedy_threshold}};
  j["thresholds"] = {{"auto", c.auto_thresholds},
                     {"T_frac", c.T_frac},
                     {"W_frac", c.W_frac},
                     {"t_ambient", c.t_ambient}};
  return j;
}

namespace {

template <class T>
void take(const Json& obj, const char* key, T& dst, const std::string& ctx) {
  if (!obj.contains(key)) return;
  const Json& v = obj[key];
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ParseError(ctx + "." + key + ": expected a boolean");
    dst = v.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ParseError(ctx + "." + key + ": expected an integer");
    dst = v.get<T>();
  } else {
    if (!v.is_number()) throw ParseError(ctx + "." + key + ": expected a number");
    dst = v.get<double>();
  }
}

const Json* section(const Json& j, const char* key) {
  if (!j.contains(key)) return nullptr;
  if (!j[key].is_object()) throw ParseError(std::string("config.") + key + ": expected an object");
  return &j[key];
}

}  // namespace

RunConfig run_config_from_json(const Json& j, RunConfig c, std::vector<std::string>* warnings) {
  if (!j.is_object()) throw ParseError("config: expected a JSON object");
  warn_unknown(j, {"mode", "seed", "init", "cgd", "penalty", "legalize", "thresholds"}, "config",
               warnings);
  if (j.contains("mode")) {
    if (!j["mode"].is_string()) throw ParseError("config.mode: expected a string");
    c.mode = parse_mode(j["mode"].get<std::string>());
  }
  take(j, "seed", c.seed, "config");
  if (const Json* s = section(j, "init")) {
    warn_unknown(*s, {"epsilon", "node_limit", "time_limit"}, "config.init", warnings);
    take(*s, "epsilon", c.init.epsilon, "config.init");
    take(*s, "node_limit", c.init.node_limit, "config.init");
    take(*s, "time_limit", c.init.time_limit_seconds, "config.init");
  }
  if (const Json* s = section(j, "cgd")) {
    const std::string ctx = "config.cgd";
    warn_unknown(*s,
                 {"max_iter", "eta_start", "eta_end", "step_xy_frac", "step_theta", "noise_zeta",
                  "noise_window", "noise_rel_change", "noise_ovfl_threshold", "stop_step_frac",
                  "min_iter", "balance_physics"},
                 ctx, warnings);
    auto& g = c.cgd;
    take(*s, "max_iter", g.max_iter, ctx);
    take(*s, "eta_start", g.eta_start, ctx);
    take(*s, "eta_end", g.eta_end, ctx);
    take(*s, "step_xy_frac", g.step_xy_frac, ctx);
    take(*s, "step_theta", g.step_theta, ctx);
    take(*s, "noise_zeta", g.noise_zeta, ctx);
    take(*s, "noise_window", g.noise_window, ctx);
    take(*s, "noise_rel_change", g.noise_rel_change, ctx);
    take(*s, "noise_ovfl_threshold", g.noise_ovfl_threshold, ctx);
    take(*s, "stop_step_frac", g.stop_step_frac, ctx);
    take(*s, "min_iter", g.min_iter, ctx);
    take(*s, "balance_physics", g.balance_physics, ctx);
  }
  if (const Json* s = section(j, "penalty")) {
    const std::string ctx = "config.penalty";
    warn_unknown(*s,
                 {"lambda_dens", "lambda_T", "lambda_W", "T_th", "W_th", "gamma", "rho", "t_max",
                  "bins_x", "bins_y", "wl_smoothing", "warp_tau"},
                 ctx, warnings);
    auto& p = c.cgd.penalty;
    take(*s, "lambda_dens", p.lambda_dens, ctx);
    take(*s, "lambda_T", p.lambda_T, ctx);
    take(*s, "lambda_W", p.lambda_W, ctx);
    take(*s, "T_th", p.T_th, ctx);
    take(*s, "W_th", p.W_th, ctx);
    take(*s, "gamma", p.gamma, ctx);
    take(*s, "rho", p.rho, ctx);
    take(*s, "t_max", p.t_max, ctx);
    take(*s, "bins_x", p.bins_x, ctx);
    take(*s, "bins_y", p.bins_y, ctx);
    take(*s, "wl_smoothing", p.wl_smoothing, ctx);
    take(*s, "warp_tau", p.warp_tau, ctx);
  }
  if (const Json* s = section(j, "legalize")) {
    const std::string ctx = "config.legalize";
    warn_unknown(*s, {"lambda_w_wl", "lambda_w_tm", "node_limit", "time_limit", "greedy_threshold"},
                 ctx, warnings);
    take(*s, "lambda_w_wl", c.legalize_lambda_w_wl, ctx);
    take(*s, "lambda_w_tm", c.legalize_lambda_w_tm, ctx);
    take(*s, "node_limit", c.legalize.node_limit, ctx);
    take(*s, "time_limit", c.legalize.time_limit_seconds, ctx);
    take(*s, "greedy_threshold", c.legalize.greedy_threshold, ctx);
  }
  if (const Json* s = section(j, "thresholds")) {
    const std::string ctx = "config.thresholds";
    warn_unknown(*s, {"auto", "T_frac", "W_frac", "t_ambient"}, ctx, warnings);
    take(*s, "auto", c.auto_thresholds, ctx);
    take(*s, "T_frac", c.T_frac, ctx);
    take(*s, "W_frac", c.W_frac, ctx);
    take(*s, "t_ambient", c.t_ambient, ctx);
  }
  const auto& p = c.cgd.penalty;
  if (p.gamma < 1) throw DomainError("config.penalty.gamma must be >= 1");
  if (!(p.rho > 0)) throw DomainError("config.penalty.rho must be > 0");
  if (!(p.t_max > 0 && p.t_max <= 1)) throw DomainError("config.penalty.t_max must lie in (0, 1]");
  if (p.lambda_dens < 0 || p.lambda_T < 0 || p.lambda_W < 0)
    throw DomainError("config.penalty: weights must be >= 0");
  if (c.cgd.max_iter < 1) throw DomainError("config.cgd.max_iter must be >= 1");
  if (!(c.cgd.eta_start > 0 && c.cgd.eta_end > 0))
    throw DomainError("config.cgd: eta must be > 0");
  return c;
}

PlaceOutcome place(const DesignInstance& design, const PhysicsParams& params, RunConfig cfg) {
  cfg.normalize();
  const bool tm = cfg.mode == PlaceMode::TmAware;
  if (tm && (!params.thermal || !params.warpage))
    throw DomainError("place: TM-aware mode needs fitted thermal and warpage params");
  PlaceOutcome out;

  auto t0 = Clock::now();
  out.init = initialize(design, cfg.init);
  out.times.init = seconds_since(t0);

  PhysicsModels models{params.thermal, params.thermal ? params.warpage : nullptr};
  if (tm && cfg.auto_thresholds) {
    PenaltyConfig probe = cfg.cgd.penalty;
    probe.lambda_T = probe.lambda_W = 0.0;
    const ObjectiveTerms t0t =
        objective(design, out.init.placement, models, probe, cfg.cgd.eta_end);
    const double floor_T = self_heating_peak(*params.thermal, design, out.init.placement);
    cfg.cgd.penalty.T_th = floor_T + cfg.T_frac * std::max(0.0, t0t.peak_T - floor_T);
    cfg.cgd.penalty.W_th = cfg.W_frac * t0t.warpage_metric;
  }
  out.T_th = cfg.cgd.penalty.T_th;
  out.W_th = cfg.cgd.penalty.W_th;

  t0 = Clock::now();
  out.cgd = run_cgd(design, out.init.placement, models, cfg.cgd);
  const Placement snapped = snap_orientations(out.cgd.state, cfg.cgd.eta_end);
  out.times.opt = seconds_since(t0);

  t0 = Clock::now();
  out.legal = legalize(design, snapped, cfg.legalize);
  out.times.legalization = seconds_since(t0);
  out.placement = out.legal.placement;
  if (!check_legal(design, out.placement).legal())
    throw InfeasibleLegalization("place: legalized placement failed the legality audit");

  t0 = Clock::now();
  out.twl = exact_wirelength(design, out.placement);
  const FieldGrid T = solve_thermal(design, out.placement, cfg.thermal_oracle);
  out.peak_T = T.max();
  out.warpage = oracle_warpage(T, cfg.plate_oracle);
  out.times.audit = seconds_since(t0);
  return out;
}

Json place_report_json(const DesignInstance& design, const PlaceOutcome& out,
                       const RunConfig& cfg) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["mode"] = mode_name(cfg.mode);
  j["seed"] = cfg.seed;
  j["chiplets"] = design.size();
  j["twl"] = out.twl;
  j["peak_temperature_c"] = out.peak_T;
  j["warpage_um"] = out.warpage;
  j["legality"] = legality_json(check_legal(design, out.placement));
  if (cfg.mode == PlaceMode::TmAware) {
    j["thresholds"] = {{"T_th", out.T_th}, {"W_th", out.W_th}};
  }
  j["weights"] = {{"lambda_dens0", out.cgd.lambda_dens0},
                  {"lambda_T", out.cgd.lambda_T_eff},
                  {"lambda_W", out.cgd.lambda_W_eff}};
  j["init"] = {{"status", milp::status_name(out.init.status)},
               {"nodes", out.init.nodes},
               {"objective", out.init.objective},
               {"fallback", out.init.fallback},
               {"twl", exact_wirelength(design, out.init.placement)}};
  const auto& last = out.cgd.trajectory.back();
  j["cgd"] = {{"iterations", out.cgd.iterations},
              {"noise_events", out.cgd.noise_events},
              {"final_overflow", last.OVFL},
              {"final_projected_wl", last.WL}};
  j["legalize"] = {{"path", out.legal.path},
                   {"status", milp::status_name(out.legal.status)},
                   {"nodes", out.legal.nodes},
                   {"displacement", out.legal.displacement}};
  j["config"] = run_config_to_json(cfg);
  return j;
}

// ---- pareto ----

bool dominates(const ParetoPoint& p, const ParetoPoint& q) {
  const bool no_worse = p.twl <= q.twl && p.peak_T <= q.peak_T && p.warpage <= q.warpage;
  const bool better = p.twl < q.twl || p.peak_T < q.peak_T || p.warpage < q.warpage;
  return no_worse && better;
}

void mark_front(std::vector<ParetoPoint>& pts) {
  for (auto& p : pts) {
    p.on_front = p.ok;
    if (!p.ok) continue;
    for (const auto& q : pts) {
      if (q.ok && dominates(q, p)) {
        p.on_front = false;
        break;
      }
    }
  }
}

std::vector<ParetoPoint> run_pareto(const DesignInstance& design, const PhysicsParams& params,
                                    const ParetoConfig& cfg) {
  if (cfg.grid_a.empty() || cfg.grid_b.empty()) throw DomainError("pareto: empty sweep grid");
  const int nb = static_cast<int>(cfg.grid_b.size());
  const int count = static_cast<int>(cfg.grid_a.size()) * nb;
  std::vector<ParetoPoint> pts(count);
  parallel_for(count, cfg.threads, [&](int k) {
    ParetoPoint& p = pts[k];
    p.index = k;
    p.a = cfg.grid_a[k / nb];
    p.b = cfg.grid_b[k % nb];
    RunConfig rc = cfg.base;
    rc.mode = PlaceMode::TmAware;
    if (cfg.kind == SweepKind::Lambda) {
      rc.cgd.penalty.lambda_T = p.a;
      rc.cgd.penalty.lambda_W = p.b;
    } else {
      rc.auto_thresholds = false;
      rc.cgd.penalty.T_th = p.a;
      rc.cgd.penalty.W_th = p.b;
    }
    try {
      const PlaceOutcome o = place(design, params, rc);
      p.twl = o.twl;
      p.peak_T = o.peak_T;
      p.warpage = o.warpage;
      p.ok = true;
    } catch (const std::exception& e) {
      p.error = e.what();
      std::fprintf(stderr, "pareto: grid point %d failed: %s\n", k, e.what());
    }
  });
  mark_front(pts);
  return pts;
}

std::string pareto_csv(const std::vector<ParetoPoint>& pts, SweepKind kind) {
  std::string out = kind == SweepKind::Lambda ? "index,lambda_T,lambda_W" : "index,T_th,W_th";
  out += ",TWL,Tmax,warpage,on_front,ok\n";
  for (const auto& p : pts) {
    out += std::to_string(p.index) + ',' + format_double(p.a) + ',' + format_double(p.b);
    for (double v : {p.twl, p.peak_T, p.warpage}) {
      out += ',';
      out += p.ok ? format_double(v) : std::string("nan");
    }
    out += p.on_front ? ",1" : ",0";
    out += p.ok ? ",1\n" : ",0\n";
  }
  return out;
}

std::string pareto_svg(const std::vector<ParetoPoint>& pts) {
  const double Wd = 480, Hd = 360, pad = 50;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& p : pts) {
    if (!p.ok) continue;
    x0 = std::min(x0, p.twl);
    x1 = std::max(x1, p.twl);
    y0 = std::min(y0, p.peak_T);
    y1 = std::max(y1, p.peak_T);
  }
  if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-9) x0 -= 1, x1 += 1;
  if (y1 - y0 < 1e-9) y0 -= 1, y1 += 1;
  auto sx = [&](double v) { return pad + (v - x0) / (x1 - x0) * (Wd - 2 * pad); };
  auto sy = [&](double v) { return Hd - pad - (v - y0) / (y1 - y0) * (Hd - 2 * pad); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Wd << "\" height=\"" << Hd
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << Hd - pad << "\" x2=\"" << Wd - pad << "\" y2=\""
     << Hd - pad << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << Hd - pad
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << Wd / 2 << "\" y=\"" << Hd - 12
     << "\" text-anchor=\"middle\" font-size=\"12\">TWL (mm) " << format_double(x0) << " - "
     << format_double(x1) << "</text>\n";
  os << "<text x=\"14\" y=\"" << Hd / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 "
     << Hd / 2 << ")\" text-anchor=\"middle\">peak T (C) " << format_double(y0) << " - "
     << format_double(y1) << "</text>\n";
  for (const auto& p : pts) {
    if (!p.ok) continue;
    os << "<circle cx=\"" << sx(p.twl) << "\" cy=\"" << sy(p.peak_T) << "\" r=\"4\" fill=\""
       << (p.on_front ? "crimson" : "gray") << "\"><title>#" << p.index << " warpage "
       << format_double(p.warpage) << " um</title></circle>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DomainError("spearman: size mismatch");
  return pearson(ranks(a), ranks(b));
}

// ---- tune ----

TuneResult tune(const DesignInstance& design, const PhysicsParams& params, const RunConfig& base,
                int budget, std::uint64_t seed, int threads) {
  if (budget < 1) throw DomainError("tune: budget must be >= 1");
  TuneResult res;
  res.candidates.resize(budget);
  Rng rng(seed);
  for (int k = 0; k < budget; ++k) {
    TuneCandidate& c = res.candidates[k];
    c.index = k;
    c.config = base;
    c.config.seed = seed;
    if (k == 0) continue;
    auto& g = c.config.cgd;
    g.eta_start = rng.uniform(0.2, 1.0);
    g.eta_end = rng.uniform(0.01, 0.1);
    g.step_xy_frac = rng.uniform(0.005, 0.05);
    g.step_theta = rng.uniform(1.0, 15.0);
    g.penalty.rho = rng.uniform(0.1, 3.0);
    g.noise_zeta = rng.uniform(0.1, 1.0);
    g.penalty.gamma = rng.uniform_int(1, 3);
  }
  parallel_for(budget, threads, [&](int k) {
    TuneCandidate& c = res.candidates[k];
    try {
      const PlaceOutcome o = place(design, params, c.config);
      c.twl = o.twl;
      c.peak_T = o.peak_T;
      c.warpage = o.warpage;
      c.ok = true;
    } catch (const std::exception& e) {
      c.error = e.what();
    }
  });
  const TuneCandidate* ref = nullptr;
  for (const auto& c : res.candidates)
    if (c.ok) {
      ref = &c;
      break;
    }
  if (!ref) return res;
  const bool tm = base.mode == PlaceMode::TmAware;
  const double t_rise = std::max(ref->peak_T - base.t_ambient, 1e-9);
  for (auto& c : res.candidates) {
    if (!c.ok) continue;
    c.score = c.twl / ref->twl;
    if (tm) {
      c.score += (c.peak_T - base.t_ambient) / t_rise;
      c.score += c.warpage / std::max(ref->warpage, 1e-12);
    }
    if (res.best < 0 || c.score < res.candidates[res.best].score) res.best = c.index;
  }
  return res;
}

}  // namespace atmplace
