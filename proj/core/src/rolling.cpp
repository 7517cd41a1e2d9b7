#include "ewh/rolling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "ewh/active_set.hpp"
#include "ewh/common.hpp"
#include "ewh/hydrogen.hpp"
#include "ewh/power.hpp"
#include "ewh/solver.hpp"

namespace ewh {
namespace {

class VarView {
 public:
  explicit VarView(const ConicProgram& prog) {
    for (std::size_t i = 0; i < prog.variables.size(); ++i) idx_[prog.variables[i].id] = i;
  }
  double at(const Solution& sol, const std::string& id) const {
    auto it = idx_.find(id);
    if (it == idx_.end()) throw ValidationError({"no variable named '" + id + "' in solution"});
    return sol.primal[it->second];
  }
  double get(const Solution& sol, const std::string& id, double fallback = 0.0) const {
    auto it = idx_.find(id);
    return it == idx_.end() ? fallback : sol.primal[it->second];
  }

 private:
  std::unordered_map<std::string, std::size_t> idx_;
};

std::vector<double> window_series(const std::vector<double>& realized, int k, int len) {
  std::vector<double> out(len);
  int n = static_cast<int>(realized.size());
  for (int j = 0; j < len; ++j) out[j] = realized[(k + j) % n];
  return out;
}

/// Heuristic record when a window has no feasible dispatch: diesel covers the
/// realized electric load, everything else idles, states carry over.
DispatchResult diesel_only_step(const Network& net, const Scenario& realized, int k,
                                double solve_time_s) {
  DispatchResult r;
  r.step = k;
  r.t_min = static_cast<double>(k) * realized.step_minutes;
  r.wind_mps = realized.wind_speed[k];
  r.infeasible = true;
  r.solve_time_s = solve_time_s;

  double total_load = 0.0;
  for (const auto& [bus, series] : realized.p_load) total_load += series[k];
  double cap = 0.0;
  for (const auto& g : net.diesel) cap += g.p_max;

  double dt = realized.dt_h();
  for (const auto& g : net.diesel) {
    double share = cap > 0 ? total_load * g.p_max / cap : 0.0;
    double p = std::clamp(share, g.p_min, g.p_max);
    r.p_dg.push_back(p);
    r.c_gen += g.carbon_factor * p;
  }
  if (!net.diesel.empty()) {
    double store_cap = net.carbon.capture_ratio_max * r.c_gen;
    if (net.carbon.c_s_cap > 0) store_cap = std::min(store_cap, net.carbon.c_s_cap);
    r.c_store = store_cap;
    r.c_emit = r.c_gen - r.c_store;
  }
  double dg_sum = 0.0;
  for (double p : r.p_dg) dg_sum += p;
  r.objective = dt * (net.weights.alpha2 * dg_sum + net.weights.alpha3 * r.c_emit +
                      net.weights.alpha4 * r.c_store);

  r.desal_flow.assign(net.desalination.size(), 0.0);
  r.desal_seg.assign(net.desalination.size(), 0);
  for (const auto& p : net.pipes) {
    if (p.kind != PipeKind::Pump) continue;
    r.pump_on.push_back(0);
    r.pump_flow.push_back(0.0);
    r.pump_power.push_back(0.0);
  }
  for (const auto& tk : net.tanks) {
    r.tank_volume.push_back(tk.v_init);
    r.tank_flow.push_back(0.0);
  }
  if (!net.hydrogen.empty()) r.storage = net.hydrogen[0].storage_init;
  return r;
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double pos = q * (v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  double w = pos - lo;
  return v[lo] * (1 - w) + v[hi] * w;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

std::vector<DispatchResult> run_rolling(const Network& net, const Scenario& realized,
                                        const RollingConfig& cfg, const Predictor* predictor) {
  std::vector<std::string> errs = realized.validate(net);
  if (cfg.step_minutes != realized.step_minutes)
    errs.push_back(strfmt("config step (%d min) does not match scenario step (%d min)",
                          cfg.step_minutes, realized.step_minutes));
  if (cfg.horizon_steps < 1) errs.push_back("lookahead must be at least one step");
  if (cfg.mode == RollingConfig::Mode::Acivp && (predictor == nullptr || predictor->empty()))
    errs.push_back("acivp mode needs a trained predictor");
  if (!errs.empty()) throw ValidationError(errs);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Network cur = net;  // tanks[].v_init and hydrogen storage track the sim state
  std::vector<DispatchResult> out;
  out.reserve(realized.horizon_steps);

  for (int k = 0; k < realized.horizon_steps; ++k) {
    int L = cfg.horizon_steps;
    Scenario w;
    w.step_minutes = cfg.step_minutes;
    w.horizon_steps = L;
    w.wind_speed.assign(L, realized.wind_speed[k]);
    if (cfg.forecast_noise_sigma > 0) {
      for (int j = 1; j < L; ++j)
        w.wind_speed[j] *= std::exp(cfg.forecast_noise_sigma * gauss(rng));
    }
    for (const auto& [bus, series] : realized.p_load) w.p_load[bus] = window_series(series, k, L);
    for (const auto& [bus, series] : realized.q_load) w.q_load[bus] = window_series(series, k, L);
    for (const auto& [node, series] : realized.water_demand)
      w.water_demand[node] = window_series(series, k, L);
    if (!realized.h2_demand.empty()) w.h2_demand = window_series(realized.h2_demand, k, L);

    ConicProgram prog = assemble(cur, w, cfg.hull);
    Solution sol;
    AcivpDiagnostics diag;
    if (cfg.mode == RollingConfig::Mode::Acivp) {
      sol = solve_with_acivp(prog, *predictor, featurize(w), cfg.solver, diag);
    } else {
      sol = solve_micp(prog, cfg.solver);
      diag.solve_time_s = sol.solve_time_s;
    }

    if (sol.status != SolveStatus::Optimal) {
      out.push_back(diesel_only_step(cur, realized, k, diag.solve_time_s));
      continue;
    }

    VarView vars(prog);
    DispatchResult r;
    r.step = k;
    r.t_min = static_cast<double>(k) * realized.step_minutes;
    r.wind_mps = realized.wind_speed[k];
    r.objective = sol.objective;
    r.solve_time_s = diag.solve_time_s;
    r.fallback = diag.fallback;
    r.max_soc_gap = soc_exactness(prog, sol, cur, L).max_gap;

    if (!cur.wind.empty()) r.p_tr = vars.at(sol, pid::p_tr(0));
    if (!cur.hydrogen.empty()) {
      r.p_we = vars.at(sol, hid::p_we(0));
      r.p_fc = vars.at(sol, hid::p_fc(0));
      r.h_fc = vars.at(sol, hid::h_fc(0));
      r.q_hs = vars.at(sol, hid::q_hs(0));
      r.we_on = static_cast<int>(std::lround(vars.at(sol, hid::we_on(0))));
      r.fc_on = static_cast<int>(std::lround(vars.at(sol, hid::fc_on(0))));
      r.storage = vars.at(sol, hid::storage(0));
      cur.hydrogen[0].storage_init = r.storage;
    }
    if (!cur.diesel.empty()) {
      r.c_gen = vars.at(sol, hid::c_gen(0));
      r.c_emit = vars.at(sol, hid::c_emit(0));
      r.c_store = vars.at(sol, hid::c_store(0));
      r.revenue = vars.at(sol, hid::revenue(0));
      r.h_meth = vars.get(sol, hid::h_meth(0));
      for (const auto& g : cur.diesel) r.p_dg.push_back(vars.at(sol, pid::p_dg(g.bus, 0)));
    }
    for (const auto& d : cur.desalination) {
      r.desal_flow.push_back(vars.at(sol, wid::desal_flow(d.node, 0)));
      int seg = 0;
      for (int mu = 1; mu <= 4; ++mu)
        if (vars.at(sol, wid::desal_seg_on(d.node, mu, 0)) > 0.5) seg = mu;
      r.desal_seg.push_back(seg);
    }
    for (const auto& p : cur.pipes) {
      if (p.kind != PipeKind::Pump) continue;
      r.pump_on.push_back(static_cast<int>(std::lround(vars.at(sol, wid::pump_on(p.id, 0)))));
      r.pump_flow.push_back(vars.at(sol, wid::flow(p.id, 0)));
      r.pump_power.push_back(vars.at(sol, wid::pump_power(p.id, 0)));
    }
    for (auto& tk : cur.tanks) {
      double vol = vars.at(sol, wid::tank_volume(tk.node, 0));
      r.tank_volume.push_back(vol);
      r.tank_flow.push_back(vars.at(sol, wid::tank_flow(tk.node, 0)));
      tk.v_init = vol;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TrainingSample> generate_training_data(const Network& net, const RawCurves& curves,
                                                   const GenConfig& cfg, int* dropped) {
  if (cfg.n < 1) throw ValidationError({"sample count must be positive"});
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> warp(-1, 1);

  std::vector<TrainingSample> samples;
  samples.reserve(cfg.n);
  int drop = 0;
  int max_attempts = 20 * cfg.n + 50;
  for (int attempt = 0; attempt < max_attempts && static_cast<int>(samples.size()) < cfg.n;
       ++attempt) {
    double m_wind = 1.0, m_load = 1.0, m_wdem = 1.0, m_h2 = 1.0;
    double t0_min = 0.0;
    if (cfg.sigma > 0) {
      m_wind = std::exp(cfg.sigma * gauss(rng));
      m_load = std::exp(cfg.sigma * gauss(rng));
      m_wdem = std::exp(cfg.sigma * gauss(rng));
      m_h2 = std::exp(cfg.sigma * gauss(rng));
      t0_min = warp(rng) * cfg.step_minutes;
    }
    Scenario sce = make_scenario(curves, net, cfg.step_minutes, cfg.horizon_steps, t0_min,
                                 /*periodic=*/true);
    for (double& v : sce.wind_speed) v *= m_wind;
    for (auto& [bus, series] : sce.p_load)
      for (double& v : series) v *= m_load;
    for (auto& [bus, series] : sce.q_load)
      for (double& v : series) v *= m_load;
    for (auto& [node, series] : sce.water_demand)
      for (double& v : series) v *= m_wdem;
    for (double& v : sce.h2_demand) v *= m_h2;

    ConicProgram prog = assemble(net, sce, cfg.hull);
    Solution sol = solve_micp(prog, cfg.solver);
    if (sol.status == SolveStatus::Optimal) {
      samples.push_back({std::move(sce), std::move(prog), std::move(sol)});
    } else {
      ++drop;
    }
  }
  if (dropped != nullptr) *dropped = drop;
  if (static_cast<int>(samples.size()) < cfg.n)
    throw ValidationError({strfmt("only %zu of %d draws solved (%d dropped); "
                                  "curves may be infeasible for this network",
                                  samples.size(), cfg.n, drop)});
  return samples;
}

std::string report_csv(const std::vector<DispatchResult>& results, const Network& net) {
  std::ostringstream os;
  os << "step,t_min,wind_mps,objective,fallback,infeasible,max_soc_gap,p_tr,p_we,p_fc,h_fc,q_hs,"
        "h_meth,we_on,fc_on,c_gen,c_emit,c_store,revenue,storage";
  for (const auto& g : net.diesel) os << ",p_dg_" << g.bus;
  for (const auto& d : net.desalination) os << ",desal_flow_" << d.node << ",desal_seg_" << d.node;
  for (const auto& p : net.pipes)
    if (p.kind == PipeKind::Pump)
      os << ",pump_on_" << p.id << ",pump_flow_" << p.id << ",pump_power_" << p.id;
  for (const auto& tk : net.tanks) os << ",tank_v_" << tk.node << ",tank_f_" << tk.node;
  os << "\n";

  auto num = [](double v) { return strfmt("%.12g", v); };
  for (const auto& r : results) {
    std::size_t n_pumps = 0;
    for (const auto& p : net.pipes)
      if (p.kind == PipeKind::Pump) ++n_pumps;
    if (r.p_dg.size() != net.diesel.size() || r.desal_flow.size() != net.desalination.size() ||
        r.pump_on.size() != n_pumps || r.tank_volume.size() != net.tanks.size())
      throw ValidationError(
          {strfmt("step %d result does not match the network's asset counts", r.step)});
    os << r.step << ',' << num(r.t_min) << ',' << num(r.wind_mps) << ',' << num(r.objective) << ','
       << (r.fallback ? 1 : 0) << ',' << (r.infeasible ? 1 : 0) << ',' << num(r.max_soc_gap) << ','
       << num(r.p_tr) << ',' << num(r.p_we) << ',' << num(r.p_fc) << ',' << num(r.h_fc) << ','
       << num(r.q_hs) << ',' << num(r.h_meth) << ',' << r.we_on << ',' << r.fc_on << ','
       << num(r.c_gen) << ',' << num(r.c_emit) << ',' << num(r.c_store) << ',' << num(r.revenue)
       << ',' << num(r.storage);
    for (double v : r.p_dg) os << ',' << num(v);
    for (std::size_t i = 0; i < r.desal_flow.size(); ++i)
      os << ',' << num(r.desal_flow[i]) << ',' << r.desal_seg[i];
    for (std::size_t i = 0; i < r.pump_on.size(); ++i)
      os << ',' << r.pump_on[i] << ',' << num(r.pump_flow[i]) << ',' << num(r.pump_power[i]);
    for (std::size_t i = 0; i < r.tank_volume.size(); ++i)
      os << ',' << num(r.tank_volume[i]) << ',' << num(r.tank_flow[i]);
    os << "\n";
  }
  return os.str();
}

std::string timing_csv(const std::vector<DispatchResult>& results) {
  std::ostringstream os;
  os << "step,solve_time_s,fallback\n";
  for (const auto& r : results)
    os << r.step << ',' << strfmt("%.9g", r.solve_time_s) << ',' << (r.fallback ? 1 : 0) << "\n";
  return os.str();
}

namespace {

std::string summary_line(const std::vector<DispatchResult>& rs, const std::string& label) {
  std::vector<double> times;
  int fallbacks = 0, infeasible = 0;
  for (const auto& r : rs) {
    times.push_back(r.solve_time_s);
    fallbacks += r.fallback ? 1 : 0;
    infeasible += r.infeasible ? 1 : 0;
  }
  return strfmt("%s: n=%zu median=%.4gs mean=%.4gs p90=%.4gs max=%.4gs fallback=%.1f%% "
                "infeasible=%d",
                label.c_str(), rs.size(), percentile(times, 0.5),
                std::accumulate(times.begin(), times.end(), 0.0) / times.size(),
                percentile(times, 0.9), percentile(times, 1.0),
                100.0 * fallbacks / static_cast<double>(rs.size()), infeasible);
}

}  // namespace

std::string report_summary(const std::vector<DispatchResult>& a, const std::string& label_a,
                           const std::vector<DispatchResult>* b, const std::string& label_b) {
  if (a.empty() || (b != nullptr && b->empty()))
    throw ValidationError({"cannot summarize an empty result set"});
  std::ostringstream os;
  os << summary_line(a, label_a) << "\n";
  if (b != nullptr) {
    os << summary_line(*b, label_b) << "\n";
    std::vector<double> ta, tb;
    for (const auto& r : a) ta.push_back(r.solve_time_s);
    for (const auto& r : *b) tb.push_back(r.solve_time_s);
    double med_b = percentile(tb, 0.5);
    os << strfmt("speedup: median(%s) / median(%s) = %.2fx", label_a.c_str(), label_b.c_str(),
                 med_b > 0 ? percentile(ta, 0.5) / med_b : 0.0)
       << "\n";
  }
  return os.str();
}

std::vector<DispatchResult> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"cannot open '" + path + "'"});
  std::string line;
  if (!std::getline(in, line)) throw ValidationError({"'" + path + "' is empty"});
  std::vector<std::string> header = split_csv_line(line);
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"step", "objective", "fallback", "infeasible"})
    if (col.find(required) == col.end())
      throw ValidationError({strfmt("'%s' is missing column '%s'", path.c_str(), required)});

  std::vector<DispatchResult> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ValidationError({strfmt("'%s' row %zu has %zu cells, header has %zu", path.c_str(),
                                    out.size() + 2, cells.size(), header.size())});
    auto cell = [&](const char* name) -> const std::string& { return cells[col.at(name)]; };
    DispatchResult r;
    r.step = std::stoi(cell("step"));
    r.objective = std::stod(cell("objective"));
    r.fallback = cell("fallback") == "1";
    r.infeasible = cell("infeasible") == "1";
    if (col.count("max_soc_gap")) r.max_soc_gap = std::stod(cell("max_soc_gap"));
    if (col.count("t_min")) r.t_min = std::stod(cell("t_min"));
    if (col.count("wind_mps")) r.wind_mps = std::stod(cell("wind_mps"));
    out.push_back(r);
  }

  // Solve times live in the sidecar; merge them when it is present.
  std::string timing_path = path;
  if (timing_path.size() > 4 && timing_path.substr(timing_path.size() - 4) == ".csv")
    timing_path = timing_path.substr(0, timing_path.size() - 4);
  timing_path += ".timing.csv";
  std::ifstream tin(timing_path);
  if (tin) {
    std::unordered_map<int, double> time_of;
    std::string tline;
    std::getline(tin, tline);  // header
    while (std::getline(tin, tline)) {
      if (tline.empty()) continue;
      std::vector<std::string> cells = split_csv_line(tline);
      if (cells.size() >= 2) time_of[std::stoi(cells[0])] = std::stod(cells[1]);
    }
    for (auto& r : out) {
      auto it = time_of.find(r.step);
      if (it != time_of.end()) r.solve_time_s = it->second;
    }
  }
  return out;
}

}  // namespace ewh
