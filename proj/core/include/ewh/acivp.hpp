#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ewh/conic.hpp"
#include "ewh/model.hpp"

namespace ewh {

/// A solved instance's reusable skeleton: the optimal binary assignment plus
/// the tags of inequalities that were tight. Fixing the binaries and keeping
/// only equalities, bounds, and these inequalities yields a small continuous
/// surrogate of the full program.
struct Strategy {
  std::map<std::string, int> binaries;
  std::set<std::string> active_set;

  uint64_t fingerprint() const;
  bool operator==(const Strategy& o) const {
    return binaries == o.binaries && active_set == o.active_set;
  }
};

struct TrainingSample {
  Scenario scenario;
  ConicProgram prog;
  Solution sol;
};

/// Feature vector + strategy pair, the unit stored on disk by data generation.
struct StrategySample {
  std::vector<double> features;
  Strategy strategy;
};

struct TrainingSet {
  std::vector<std::vector<double>> features;  // raw, one row per sample
  std::vector<int> strategy_of;               // row -> index into strategies
  std::vector<Strategy> strategies;           // deduplicated dictionary
  std::vector<double> mean, scale;            // z-score stats (scale 1 where variance 0)
};

/// k-nearest-neighbor strategy predictor over z-scored features.
struct Predictor {
  int k = 5;
  std::vector<double> mean, scale;
  std::vector<std::vector<double>> norm_features;  // one row per training record
  std::vector<int> strategy_of;
  std::vector<Strategy> strategies;

  bool empty() const { return norm_features.empty(); }
  int dim() const { return static_cast<int>(mean.size()); }
};

/// [wind ; total p_load ; total water demand ; h2 demand], each per step:
/// 4*T dimensions.
std::vector<double> featurize(const Scenario& sce);

/// Round the solution's binaries (error if any is further than tol from an
/// integer) and collect the active inequality tags.
Strategy extract_strategy(const ConicProgram& prog, const Solution& sol, double tol = 1e-6);

/// Deduplicate strategies by fingerprint, compute normalization statistics,
/// and build the predictor.
Predictor train_from_samples(const std::vector<StrategySample>& samples, int k = 5);
std::pair<Predictor, TrainingSet> train(const std::vector<TrainingSample>& samples, int k = 5,
                                        double tol = 1e-6);

/// Indices (into predictor.strategies) of the strategies of the k nearest
/// training records, deduplicated preserving rank. Ties break on the lower
/// record index.
std::vector<int> predict(const Predictor& p, const std::vector<double>& features, int k);

struct AcivpDiagnostics {
  bool fallback = false;
  int candidate_used = -1;  // rank of the accepted candidate, -1 on fallback
  int candidates_tried = 0;
  int surrogate_vars = 0;
  int surrogate_rows = 0;
  int surrogate_cones = 0;
  double violation = 0.0;  // full-program violation of the returned point
  double solve_time_s = 0.0;
};

/// Try each predicted strategy in rank order: restrict, solve continuously,
/// and verify the lifted point against every constraint of the original
/// program. First verified candidate wins; if none verifies, fall back to
/// the full mixed-integer solve.
Solution solve_with_acivp(const ConicProgram& prog, const Predictor& p,
                          const std::vector<double>& features, const SolverConfig& cfg,
                          AcivpDiagnostics& diag);

/// Predictor store (versioned, lossless round-trip).
std::string serialize_predictor(const Predictor& p);
Predictor deserialize_predictor(const std::string& text);
void save_predictor(const Predictor& p, const std::string& path);
Predictor load_predictor(const std::string& path);

/// Single-sample store used by the data-generation / training CLI split.
std::string serialize_sample(const StrategySample& s);
StrategySample deserialize_sample(const std::string& text);

}  // namespace ewh
