#pragma once

#include <string>
#include <vector>

#include "ewh/acivp.hpp"
#include "ewh/conic.hpp"
#include "ewh/model.hpp"
#include "ewh/water.hpp"

namespace ewh {

struct RollingConfig {
  int step_minutes = 5;
  int horizon_steps = 24;  // lookahead window of each solve
  enum class Mode { Full, Acivp } mode = Mode::Full;
  double forecast_noise_sigma = 0.0;  // lognormal sigma on future wind (0 = persistence)
  unsigned long long seed = 0;
  HullMode hull = HullMode::Validated;
  SolverConfig solver;
};

/// First-interval dispatch applied at one executed step, plus the
/// end-of-interval states handed to the next step.
struct DispatchResult {
  int step = 0;
  double t_min = 0.0;
  double wind_mps = 0.0;
  double objective = 0.0;  // window objective of the solve
  double solve_time_s = 0.0;
  bool fallback = false;    // acivp fell through to the full solve
  bool infeasible = false;  // heuristic diesel-only dispatch applied
  double max_soc_gap = 0.0;

  double p_tr = 0, p_we = 0, p_fc = 0, h_fc = 0, q_hs = 0, h_meth = 0;
  int we_on = 0, fc_on = 0;
  double c_gen = 0, c_emit = 0, c_store = 0, revenue = 0;
  double storage = 0;  // hydrogen level at end of interval

  std::vector<double> p_dg;        // per diesel generator
  std::vector<double> desal_flow;  // per desalination plant
  std::vector<int> desal_seg;      // active segment 1..4 (0 in the heuristic fallback)
  std::vector<int> pump_on;        // per pump pipe
  std::vector<double> pump_flow;
  std::vector<double> pump_power;
  std::vector<double> tank_volume;  // per tank, end of interval
  std::vector<double> tank_flow;
};

/// Re-solve a `horizon_steps` lookahead at every step of the realized
/// scenario, apply the first interval, and advance tank and hydrogen
/// storage. The first interval always uses the realized wind; later
/// intervals use persistence plus optional seeded noise. Loads and demands
/// beyond the realized span wrap periodically.
std::vector<DispatchResult> run_rolling(const Network& net, const Scenario& realized,
                                        const RollingConfig& cfg,
                                        const Predictor* predictor = nullptr);

struct GenConfig {
  int n = 50;
  double sigma = 0.1;  // lognormal spread of the per-series multipliers
  unsigned long long seed = 0;
  int step_minutes = 60;
  int horizon_steps = 24;
  HullMode hull = HullMode::Validated;
  SolverConfig solver;
};

/// Draw perturbed scenarios from the historical curves (per-series lognormal
/// multipliers plus a +-1 step time warp when sigma > 0), solve each with the
/// full mixed-integer engine, and keep the solved triples. Infeasible draws
/// are dropped and counted.
std::vector<TrainingSample> generate_training_data(const Network& net, const RawCurves& curves,
                                                   const GenConfig& cfg, int* dropped = nullptr);

/// Deterministic per-step table: every dispatch field, no timing (timing
/// varies run to run and lives in timing_csv).
std::string report_csv(const std::vector<DispatchResult>& results, const Network& net);

/// Per-step solve times and fallback flags; excluded from the byte-equality
/// contract of report_csv.
std::string timing_csv(const std::vector<DispatchResult>& results);

/// Median/percentile solve times and fallback rate; with a second result
/// set, adds speedup = median(a) / median(b).
std::string report_summary(const std::vector<DispatchResult>& a, const std::string& label_a,
                           const std::vector<DispatchResult>* b = nullptr,
                           const std::string& label_b = "");

/// Parse report_csv output (merging a sibling "<path>.timing.csv" when
/// present) back into result records for summarizing.
std::vector<DispatchResult> read_results_csv(const std::string& path);

}  // namespace ewh
