#include "ewh/acivp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ewh/active_set.hpp"
#include "ewh/common.hpp"
#include "ewh/solver.hpp"

namespace ewh {

using nlohmann::json;

uint64_t Strategy::fingerprint() const {
  std::string canon;
  for (const auto& [id, v] : binaries) {
    canon += id;
    canon += v ? "=1\n" : "=0\n";
  }
  canon += "|\n";
  for (const auto& tag : active_set) {
    canon += tag;
    canon += '\n';
  }
  return fnv1a(canon);
}

std::vector<double> featurize(const Scenario& sce) {
  const int T = sce.horizon_steps;
  std::vector<double> phi;
  phi.reserve(4 * T);
  for (int t = 0; t < T; ++t) phi.push_back(sce.wind_speed[t]);
  for (int t = 0; t < T; ++t) {
    double total = 0.0;
    for (const auto& [bus, series] : sce.p_load) total += series[t];
    phi.push_back(total);
  }
  for (int t = 0; t < T; ++t) {
    double total = 0.0;
    for (const auto& [node, series] : sce.water_demand) total += series[t];
    phi.push_back(total);
  }
  for (int t = 0; t < T; ++t) phi.push_back(sce.h2_demand[t]);
  return phi;
}

Strategy extract_strategy(const ConicProgram& prog, const Solution& sol, double tol) {
  Strategy st;
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < prog.variables.size(); ++i) {
    if (!prog.variables[i].is_binary) continue;
    double v = sol.primal[i];
    double r = std::round(v);
    if (std::fabs(v - r) > tol)
      problems.push_back(strfmt("binary %s = %.9g is not integral", prog.variables[i].id.c_str(), v));
    else
      st.binaries[prog.variables[i].id] = static_cast<int>(r);
  }
  if (!problems.empty()) throw ValidationError(problems);
  st.active_set = get_active_set(prog, sol, tol);
  return st;
}

namespace {

// Dictionary insert with first-occurrence order and collision safety.
int intern_strategy(std::vector<Strategy>& dict, std::vector<uint64_t>& prints,
                    const Strategy& st) {
  uint64_t fp = st.fingerprint();
  for (std::size_t i = 0; i < dict.size(); ++i) {
    if (prints[i] != fp) continue;
    if (!(dict[i] == st))
      throw ValidationError({"strategy fingerprint collision: " + to_hex(fp)});
    return static_cast<int>(i);
  }
  dict.push_back(st);
  prints.push_back(fp);
  return static_cast<int>(dict.size()) - 1;
}

void check_dims(const std::vector<std::vector<double>>& rows) {
  for (const auto& row : rows)
    if (row.size() != rows.front().size())
      throw ValidationError({strfmt("inconsistent feature dimensions: %zu vs %zu",
                                    row.size(), rows.front().size())});
}

std::vector<double> normalize(const std::vector<double>& x, const std::vector<double>& mean,
                              const std::vector<double>& scale) {
  if (x.size() != mean.size())
    throw ValidationError({strfmt("feature dimension %zu does not match the trained %zu",
                                  x.size(), mean.size())});
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - mean[i]) / scale[i];
  return z;
}

}  // namespace

Predictor train_from_samples(const std::vector<StrategySample>& samples, int k) {
  if (samples.empty()) throw ValidationError({"train: need at least one sample"});
  if (k < 1) throw ValidationError({"train: k must be >= 1"});
  std::vector<std::vector<double>> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back(s.features);
  check_dims(rows);
  const std::size_t n = rows.size(), d = rows.front().size();

  Predictor p;
  p.k = k;
  p.mean.assign(d, 0.0);
  p.scale.assign(d, 1.0);
  for (const auto& row : rows)
    for (std::size_t j = 0; j < d; ++j) p.mean[j] += row[j];
  for (std::size_t j = 0; j < d; ++j) p.mean[j] /= static_cast<double>(n);
  std::vector<double> var(d, 0.0);
  for (const auto& row : rows)
    for (std::size_t j = 0; j < d; ++j) {
      double c = row[j] - p.mean[j];
      var[j] += c * c;
    }
  for (std::size_t j = 0; j < d; ++j) {
    double sd = std::sqrt(var[j] / static_cast<double>(n));
    if (sd > 1e-12) p.scale[j] = sd;
  }

  std::vector<uint64_t> prints;
  for (const auto& s : samples) {
    p.strategy_of.push_back(intern_strategy(p.strategies, prints, s.strategy));
    p.norm_features.push_back(normalize(s.features, p.mean, p.scale));
  }
  return p;
}

std::pair<Predictor, TrainingSet> train(const std::vector<TrainingSample>& samples, int k,
                                        double tol) {
  std::vector<StrategySample> flat;
  flat.reserve(samples.size());
  for (const auto& s : samples)
    flat.push_back({featurize(s.scenario), extract_strategy(s.prog, s.sol, tol)});
  Predictor p = train_from_samples(flat, k);

  TrainingSet ts;
  for (const auto& s : flat) ts.features.push_back(s.features);
  ts.strategy_of = p.strategy_of;
  ts.strategies = p.strategies;
  ts.mean = p.mean;
  ts.scale = p.scale;
  return {std::move(p), std::move(ts)};
}

std::vector<int> predict(const Predictor& p, const std::vector<double>& features, int k) {
  if (p.empty()) throw ValidationError({"predict: empty predictor"});
  if (k < 1) throw ValidationError({"predict: k must be >= 1"});
  std::vector<double> q = normalize(features, p.mean, p.scale);

  std::vector<std::pair<double, int>> order;  // (squared distance, record index)
  order.reserve(p.norm_features.size());
  for (std::size_t i = 0; i < p.norm_features.size(); ++i) {
    double d2 = 0.0;
    const auto& row = p.norm_features[i];
    for (std::size_t j = 0; j < row.size(); ++j) {
      double c = row[j] - q[j];
      d2 += c * c;
    }
    order.emplace_back(d2, static_cast<int>(i));
  }
  std::sort(order.begin(), order.end());

  std::vector<int> ranked;
  for (int i = 0; i < static_cast<int>(order.size()) && i < k; ++i) {
    int sid = p.strategy_of[order[i].second];
    if (std::find(ranked.begin(), ranked.end(), sid) == ranked.end()) ranked.push_back(sid);
  }
  return ranked;
}

Solution solve_with_acivp(const ConicProgram& prog, const Predictor& p,
                          const std::vector<double>& features, const SolverConfig& cfg,
                          AcivpDiagnostics& diag) {
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  diag = AcivpDiagnostics{};

  std::vector<int> candidates = predict(p, features, p.k);
  for (int rank = 0; rank < static_cast<int>(candidates.size()); ++rank) {
    const Strategy& st = p.strategies[candidates[rank]];
    ++diag.candidates_tried;
    RestrictResult rr = restrict_program(prog, st.binaries, st.active_set);
    diag.surrogate_vars = static_cast<int>(rr.prog.variables.size());
    diag.surrogate_rows = static_cast<int>(rr.prog.linear_constraints.size());
    diag.surrogate_cones = static_cast<int>(rr.prog.soc_constraints.size());

    Solution s = solve_continuous(rr.prog, cfg);
    if (s.status != SolveStatus::Optimal) continue;
    std::vector<double> x = rr.lift(s.primal);
    double viol = max_violation(prog, x);
    if (viol > cfg.feasibility_tol) continue;

    Solution out;
    out.status = SolveStatus::Optimal;
    out.primal = std::move(x);
    out.objective = prog.objective_value(out.primal);
    compute_slacks(prog, out.primal, out.linear_slacks, out.soc_slacks);
    for (const auto& [id, v] : st.binaries) out.binary_assignment.emplace_back(id, v);
    out.iterations = s.iterations;
    out.solve_time_s = elapsed();
    diag.candidate_used = rank;
    diag.violation = viol;
    diag.solve_time_s = out.solve_time_s;
    return out;
  }

  diag.fallback = true;
  Solution out = solve_micp(prog, cfg);
  out.solve_time_s = elapsed();
  diag.solve_time_s = out.solve_time_s;
  return out;
}

std::string serialize_predictor(const Predictor& p) {
  json doc;
  doc["format"] = "acivp-predictor";
  doc["version"] = 1;
  doc["k"] = p.k;
  doc["mean"] = p.mean;
  doc["scale"] = p.scale;
  json strategies = json::array();
  for (const auto& st : p.strategies) {
    json s;
    s["fingerprint"] = to_hex(st.fingerprint());
    s["binaries"] = st.binaries;
    s["active"] = std::vector<std::string>(st.active_set.begin(), st.active_set.end());
    strategies.push_back(std::move(s));
  }
  doc["strategies"] = std::move(strategies);
  json records = json::array();
  for (std::size_t i = 0; i < p.norm_features.size(); ++i) {
    json r;
    r["z"] = p.norm_features[i];
    r["strategy"] = p.strategy_of[i];
    records.push_back(std::move(r));
  }
  doc["records"] = std::move(records);
  return doc.dump(1) + "\n";
}

Predictor deserialize_predictor(const std::string& text) {
  json doc = json::parse(text);
  if (doc.value("format", "") != "acivp-predictor" || doc.value("version", 0) != 1)
    throw ValidationError({"predictor store: unknown format/version"});
  Predictor p;
  p.k = doc.at("k").get<int>();
  p.mean = doc.at("mean").get<std::vector<double>>();
  p.scale = doc.at("scale").get<std::vector<double>>();
  for (const auto& s : doc.at("strategies")) {
    Strategy st;
    st.binaries = s.at("binaries").get<std::map<std::string, int>>();
    auto tags = s.at("active").get<std::vector<std::string>>();
    st.active_set.insert(tags.begin(), tags.end());
    std::string expect = s.at("fingerprint").get<std::string>();
    if (to_hex(st.fingerprint()) != expect)
      throw ValidationError({"predictor store: fingerprint mismatch for a strategy"});
    p.strategies.push_back(std::move(st));
  }
  for (const auto& r : doc.at("records")) {
    p.norm_features.push_back(r.at("z").get<std::vector<double>>());
    int sid = r.at("strategy").get<int>();
    if (sid < 0 || sid >= static_cast<int>(p.strategies.size()))
      throw ValidationError({"predictor store: record references missing strategy"});
    p.strategy_of.push_back(sid);
  }
  return p;
}

void save_predictor(const Predictor& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError({"cannot write " + path});
  out << serialize_predictor(p);
}

Predictor load_predictor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError({"cannot read " + path});
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_predictor(ss.str());
}

std::string serialize_sample(const StrategySample& s) {
  json doc;
  doc["format"] = "acivp-sample";
  doc["version"] = 1;
  doc["features"] = s.features;
  doc["binaries"] = s.strategy.binaries;
  doc["active"] =
      std::vector<std::string>(s.strategy.active_set.begin(), s.strategy.active_set.end());
  return doc.dump(1) + "\n";
}

StrategySample deserialize_sample(const std::string& text) {
  json doc = json::parse(text);
  if (doc.value("format", "") != "acivp-sample" || doc.value("version", 0) != 1)
    throw ValidationError({"sample store: unknown format/version"});
  StrategySample s;
  s.features = doc.at("features").get<std::vector<double>>();
  s.strategy.binaries = doc.at("binaries").get<std::map<std::string, int>>();
  auto tags = doc.at("active").get<std::vector<std::string>>();
  s.strategy.active_set.insert(tags.begin(), tags.end());
  return s;
}

}  // namespace ewh
