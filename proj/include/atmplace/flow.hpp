#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "atmplace/cgd.hpp"
#include "atmplace/design_io.hpp"
#include "atmplace/field_oracle.hpp"
#include "atmplace/fitting.hpp"
#include "atmplace/seed_legal.hpp"

namespace atmplace {

inline constexpr int kSchemaVersion = 1;

// ---- dataset ----

struct DatasetConfig {
  int count = 20;
  std::uint64_t seed = 0;
  ThermalOracleConfig thermal;
  PlateOracleConfig plate;
  long legalize_node_limit = 200;
};

struct DatasetSample {
  int id = 0;
  Placement placement;
  FieldGrid thermal;  // °C
  FieldGrid warpage;  // µm, raw plate output
};

// Random positions and orientations, repaired by legalize, solved by both oracles.
// Throws std::runtime_error naming the sample when an oracle fails.
std::vector<DatasetSample> generate_dataset(const DesignInstance& design, const DatasetConfig& cfg);

// manifest.json plus sample_NNN.{placement.json,thermal.csv,warpage.csv} in `dir`.
void write_dataset(const std::string& dir, const std::vector<DatasetSample>& samples,
                   const DatasetConfig& cfg);
std::vector<DatasetSample> read_dataset(const std::string& dir, const DesignInstance& design);

// ---- fit ----

struct FitOptions {
  int n_train = 10;  // first n_train samples train, the rest test
  FitConfig fit;
  int speed_repetitions = 100;
  ThermalOracleConfig thermal;
  PlateOracleConfig plate;
};

struct ModelMetrics {
  double train_mae = 0, train_pearson = 0, test_mae = 0, test_pearson = 0;
  int iterations = 0;
  double final_loss = 0;
};

struct SpeedReport {
  double oracle_seconds = 0;   // one thermal oracle solve
  double compact_seconds = 0;  // one full-grid compact thermal evaluation
  double speedup = 0;
  int repetitions = 0;
};

struct FitOutcome {
  CompactThermalParams thermal;
  CompactWarpageParams warpage;
  ModelMetrics thermal_metrics, warpage_metrics;
  double seconds = 0;  // wall clock of both fits
};

FitOutcome fit_models(const DesignInstance& design, const std::vector<DatasetSample>& samples,
                      const FitOptions& opt);

// Compact full-grid evaluation vs oracle solve at the same settings, mean over repetitions.
SpeedReport measure_speedup(const DesignInstance& design, const CompactThermalParams& params,
                            const Placement& placement, const ThermalOracleConfig& oracle,
                            int repetitions);

Json fit_report_json(const FitOutcome& fit, int n_train, int n_test);

// ---- place ----

enum class PlaceMode { WlDriven, TmAware };
std::string mode_name(PlaceMode m);
PlaceMode parse_mode(const std::string& s);

struct RunConfig {
  PlaceMode mode = PlaceMode::WlDriven;
  std::uint64_t seed = 0;
  InitConfig init;
  CgdConfig cgd;
  LegalizeConfig legalize;
  // WL mode lets the legalizer trade displacement for wirelength.
  double legalize_lambda_w_wl = 1.0;
  double legalize_lambda_w_tm = 0.0;
  // TM mode thresholds from the compact prediction at the init placement; with
  // auto_thresholds off the values in cgd.penalty are used as given.
  bool auto_thresholds = true;
  double T_frac = 0.5;  // T_th = T_self + T_frac (T_init - T_self)
  double W_frac = 0.8;  // W_th = W_frac W_init
  double t_ambient = 25.0;
  ThermalOracleConfig thermal_oracle;
  PlateOracleConfig plate_oracle;

  RunConfig();
  // λ_T = λ_W = 0 in WL mode.
  void normalize();
};

Json run_config_to_json(const RunConfig& cfg);
// Overlays keys present in `j` onto `base`; unknown keys go to `warnings`.
RunConfig run_config_from_json(const Json& j, RunConfig base = {},
                               std::vector<std::string>* warnings = nullptr);

struct StageTimes {
  double init = 0, opt = 0, legalization = 0, audit = 0;
};

struct PlaceOutcome {
  Placement placement;
  InitResult init;
  CgdResult cgd;
  LegalizeResult legal;
  double twl = 0;
  double peak_T = 0;   // thermal oracle, °C
  double warpage = 0;  // plate oracle after plane removal, µm
  double T_th = 0, W_th = 0;
  StageTimes times;
};

struct PhysicsParams {
  const CompactThermalParams* thermal = nullptr;
  const CompactWarpageParams* warpage = nullptr;
};

// init -> CGD -> snap -> legalize -> oracle audit. Throws InfeasibleLegalization when no
// legal placement is found and DomainError when TM mode lacks fitted params.
PlaceOutcome place(const DesignInstance& design, const PhysicsParams& params, RunConfig cfg);

Json place_report_json(const DesignInstance& design, const PlaceOutcome& out,
                       const RunConfig& cfg);

// ---- pareto ----

struct ParetoPoint {
  int index = 0;
  double a = 0, b = 0;  // grid coordinates (λ_T, λ_W) or (T_th, W_th)
  bool ok = false;
  std::string error;
  double twl = 0, peak_T = 0, warpage = 0;
  bool on_front = false;
};

enum class SweepKind { Lambda, Threshold };

struct ParetoConfig {
  RunConfig base;
  SweepKind kind = SweepKind::Lambda;
  std::vector<double> grid_a{0.0, 0.5, 1.0, 2.0};
  std::vector<double> grid_b{0.0, 1.0};
  int threads = 1;
};

// Row-major over (grid_a, grid_b). Worker count never changes the result.
std::vector<ParetoPoint> run_pareto(const DesignInstance& design, const PhysicsParams& params,
                                    const ParetoConfig& cfg);
// Marks the non-dominated successful points (minimizing TWL, peak T and warpage).
void mark_front(std::vector<ParetoPoint>& pts);
bool dominates(const ParetoPoint& p, const ParetoPoint& q);
std::string pareto_csv(const std::vector<ParetoPoint>& pts, SweepKind kind);
std::string pareto_svg(const std::vector<ParetoPoint>& pts);
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// ---- tune ----

struct TuneCandidate {
  int index = 0;
  RunConfig config;
  bool ok = false;
  std::string error;
  double twl = 0, peak_T = 0, warpage = 0;
  double score = 0;
};

struct TuneResult {
  std::vector<TuneCandidate> candidates;
  int best = -1;
};

// Candidate 0 is `base` itself; the rest are drawn from fixed ranges. Scores are relative to
// candidate 0: TWL/TWL0, plus (T-T_amb)/(T0-T_amb) and W/W0 in TM mode. Lower is better.
TuneResult tune(const DesignInstance& design, const PhysicsParams& params, const RunConfig& base,
                int budget, std::uint64_t seed, int threads);

// ---- helpers ----

// Highest compact-model peak of any single chiplet placed alone: the part of the peak
// temperature that spreading cannot remove.
double self_heating_peak(const CompactThermalParams& p, const DesignInstance& design,
                         const Placement& placement);

// Runs job(i) for i in [0, count) on `threads` workers.
void parallel_for(int count, int threads, const std::function<void(int)>& job);

Json legality_json(const LegalityReport& rep);

}  // namespace atmplace
