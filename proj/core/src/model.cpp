#include "ewh/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

namespace ewh {

std::vector<std::string> Network::finalize() {
  std::vector<std::string> bad;
  bus_index.clear();
  node_index.clear();

  for (size_t i = 0; i < buses.size(); ++i) {
    if (!bus_index.emplace(buses[i].id, static_cast<int>(i)).second)
      bad.push_back(strfmt("duplicate bus id %d", buses[i].id));
    if (!(buses[i].v_min > 0) || !(buses[i].v_min < buses[i].v_max))
      bad.push_back(strfmt("bus %d: voltage bounds must satisfy 0 < v_min < v_max", buses[i].id));
    buses[i].has_diesel = buses[i].has_wind = buses[i].has_hydrogen_system = false;
  }
  for (size_t i = 0; i < water_nodes.size(); ++i) {
    if (!node_index.emplace(water_nodes[i].id, static_cast<int>(i)).second)
      bad.push_back("duplicate water node id " + water_nodes[i].id);
    if (water_nodes[i].head_min > water_nodes[i].head_max)
      bad.push_back("node " + water_nodes[i].id + ": head_min > head_max");
  }

  auto check_bus = [&](int id, const std::string& what) {
    if (bus_index.count(id)) return true;
    bad.push_back(strfmt("%s references unknown bus %d", what.c_str(), id));
    return false;
  };
  auto check_node = [&](const std::string& id, const std::string& what) {
    if (node_index.count(id)) return true;
    bad.push_back(what + " references unknown water node " + id);
    return false;
  };

  for (const auto& br : branches) {
    check_bus(br.from, "branch");
    check_bus(br.to, "branch");
    if (br.r < 0 || br.x < 0) bad.push_back(strfmt("branch %d-%d: negative impedance", br.from, br.to));
    if (!(br.s_max > 0)) bad.push_back(strfmt("branch %d-%d: s_max must be positive", br.from, br.to));
    if (br.i_max != 0.0 && br.i_min > br.i_max)
      bad.push_back(strfmt("branch %d-%d: i_min > i_max", br.from, br.to));
  }
  for (const auto& d : diesel) {
    if (check_bus(d.bus, "diesel")) buses[bus_index[d.bus]].has_diesel = true;
    if (d.p_min > d.p_max) bad.push_back(strfmt("diesel at bus %d: p_min > p_max", d.bus));
    if (d.q_min > d.q_max) bad.push_back(strfmt("diesel at bus %d: q_min > q_max", d.bus));
    if (d.carbon_factor < 0) bad.push_back(strfmt("diesel at bus %d: negative carbon_factor", d.bus));
  }
  for (const auto& w : wind) {
    if (check_bus(w.bus, "wind")) buses[bus_index[w.bus]].has_wind = true;
    if (!(0 < w.cut_in && w.cut_in < w.rated_speed && w.rated_speed < w.cut_out))
      bad.push_back(strfmt("wind at bus %d: need 0 < cut_in < rated_speed < cut_out", w.bus));
    if (!(w.rated_power > 0)) bad.push_back(strfmt("wind at bus %d: rated_power must be positive", w.bus));
  }
  for (const auto& p : pipes) {
    check_node(p.from, "pipe " + p.id);
    check_node(p.to, "pipe " + p.id);
    if (p.f_min > p.f_max) bad.push_back("pipe " + p.id + ": f_min > f_max");
    if (p.r_w < 0) bad.push_back("pipe " + p.id + ": negative r_w");
    if (p.kind == PipeKind::Pump) {
      if (!p.pump) {
        bad.push_back("pipe " + p.id + ": pump pipe without pump parameters");
      } else {
        if (p.f_min < 0) bad.push_back("pipe " + p.id + ": pump pipe needs f_min >= 0");
        const auto& pp = *p.pump;
        if (!(pp.efficiency > 0 && pp.efficiency <= 1))
          bad.push_back("pipe " + p.id + ": pump efficiency must be in (0,1]");
        if (pp.a1 < 0 || pp.a0 < 0) bad.push_back("pipe " + p.id + ": pump curve coefficients must be >= 0");
        check_bus(pp.power_bus, "pump " + p.id);
      }
    }
    if (p.kind == PipeKind::Prv && p.prv_limit < 0)
      bad.push_back("pipe " + p.id + ": prv_limit must be >= 0");
    if (p.kind != PipeKind::Pump && p.pump)
      bad.push_back("pipe " + p.id + ": pump parameters on a non-pump pipe");
  }
  for (const auto& t : tanks) {
    check_node(t.node, "tank");
    if (!(t.area > 0)) bad.push_back("tank at " + t.node + ": area must be positive");
    if (!(t.v_min <= t.v_init && t.v_init <= t.v_max))
      bad.push_back("tank at " + t.node + ": need v_min <= v_init <= v_max");
    if (t.flow_min > t.flow_max) bad.push_back("tank at " + t.node + ": flow_min > flow_max");
  }
  for (const auto& d : desalination) {
    check_node(d.node, "desalination");
    check_bus(d.power_bus, "desalination at " + d.node);
    if (!(d.f_max > 0)) bad.push_back("desalination at " + d.node + ": f_max must be positive");
    for (double e : d.seg_energy)
      if (!(e > 0)) {
        bad.push_back("desalination at " + d.node + ": segment energies must be positive");
        break;
      }
  }
  for (const auto& h : hydrogen) {
    if (check_bus(h.bus, "hydrogen")) buses[bus_index[h.bus]].has_hydrogen_system = true;
    check_node(h.water_node, "hydrogen system");
    if (!(h.xi_we_p > 0 && h.xi_we_w > 0 && h.xi_fc_h > 0))
      bad.push_back(strfmt("hydrogen at bus %d: conversion factors must be positive", h.bus));
    if (h.p_we_min > h.p_we_max) bad.push_back(strfmt("hydrogen at bus %d: p_we_min > p_we_max", h.bus));
    if (h.h_fc_min > h.h_fc_max) bad.push_back(strfmt("hydrogen at bus %d: h_fc_min > h_fc_max", h.bus));
    if (!(h.storage_min <= h.storage_init && h.storage_init <= h.storage_max))
      bad.push_back(strfmt("hydrogen at bus %d: storage_init outside bounds", h.bus));
    if (!(h.s_hs_max > 0)) bad.push_back(strfmt("hydrogen at bus %d: s_hs_max must be positive", h.bus));
  }
  if (hydrogen.size() > 1) bad.push_back("at most one hydrogen system is supported");
  if (!(carbon.capture_ratio_max >= 0 && carbon.capture_ratio_max <= 1))
    bad.push_back("carbon: capture_ratio_max must be in [0,1]");
  if (carbon.rho_chi < 0) bad.push_back("carbon: rho_chi must be >= 0");
  if (weights.alpha1 < 0 || weights.alpha2 < 0 || weights.alpha3 < 0 || weights.alpha4 < 0)
    bad.push_back("weights: alphas must be >= 0");

  // Orient the power graph as a tree rooted at the (first) diesel bus.
  parent_branch.assign(buses.size(), -1);
  child_branches.assign(buses.size(), {});
  root_bus = 0;
  if (!diesel.empty() && bus_index.count(diesel[0].bus)) root_bus = bus_index[diesel[0].bus];
  if (!buses.empty()) {
    if (branches.size() != buses.size() - 1) {
      bad.push_back(strfmt("power graph is not a tree: %zu branches for %zu buses", branches.size(),
                           buses.size()));
    } else {
      std::vector<std::vector<std::pair<int, int>>> adj(buses.size());  // (neighbor, branch)
      bool refs_ok = true;
      for (size_t bi = 0; bi < branches.size(); ++bi) {
        auto itf = bus_index.find(branches[bi].from);
        auto itt = bus_index.find(branches[bi].to);
        if (itf == bus_index.end() || itt == bus_index.end()) {
          refs_ok = false;
          continue;
        }
        adj[itf->second].push_back({itt->second, static_cast<int>(bi)});
        adj[itt->second].push_back({itf->second, static_cast<int>(bi)});
      }
      if (refs_ok) {
        std::vector<char> seen(buses.size(), 0);
        std::queue<int> q;
        q.push(root_bus);
        seen[root_bus] = 1;
        size_t reached = 1;
        while (!q.empty()) {
          int u = q.front();
          q.pop();
          for (auto [v, bi] : adj[u]) {
            if (seen[v]) continue;
            seen[v] = 1;
            ++reached;
            parent_branch[v] = bi;
            child_branches[u].push_back(bi);
            q.push(v);
          }
        }
        if (reached != buses.size()) bad.push_back("power graph is not connected");
      }
    }
  }

  // Default squared-current caps from the thermal rating at the weakest voltage.
  for (auto& br : branches) {
    if (br.i_max == 0.0 && bus_index.count(br.from)) {
      const Bus& b = buses[bus_index[br.from]];
      br.i_max = br.s_max * br.s_max / b.v_min;
    }
  }
  return bad;
}

std::vector<std::string> Scenario::validate(const Network& net) const {
  std::vector<std::string> bad;
  if (horizon_steps < 1) bad.push_back("scenario: horizon_steps must be >= 1");
  if (step_minutes < 1) bad.push_back("scenario: step_minutes must be >= 1");
  auto len_ok = [&](const std::vector<double>& s, const std::string& what) {
    if (static_cast<int>(s.size()) != horizon_steps)
      bad.push_back("scenario: series " + what + " length != horizon_steps");
  };
  len_ok(wind_speed, "wind_speed");
  len_ok(h2_demand, "h2_demand");
  for (const auto& [bus, s] : p_load) len_ok(s, strfmt("p_load_%d", bus));
  for (const auto& [bus, s] : q_load) len_ok(s, strfmt("q_load_%d", bus));
  for (const auto& [node, s] : water_demand) {
    len_ok(s, "wdem_" + node);
    if (!net.node_index.count(node)) bad.push_back("scenario: unknown water node " + node);
    for (double v : s)
      if (v < 0) {
        bad.push_back("scenario: negative water demand at " + node);
        break;
      }
  }
  for (double v : h2_demand)
    if (v < 0) {
      bad.push_back("scenario: negative hydrogen demand");
      break;
    }
  for (const auto& [bus, s] : p_load)
    if (!net.bus_index.count(bus)) bad.push_back(strfmt("scenario: unknown bus %d in p_load", bus));
  return bad;
}

double wind_to_power(double v, const WindPark& park) {
  if (v < park.cut_in || v > park.cut_out) return 0.0;
  if (v >= park.rated_speed) return park.rated_power;
  double ci3 = park.cut_in * park.cut_in * park.cut_in;
  double vr3 = park.rated_speed * park.rated_speed * park.rated_speed;
  return park.rated_power * (v * v * v - ci3) / (vr3 - ci3);
}

static double interp_at(const std::vector<double>& t, const std::vector<double>& v, double tq) {
  auto it = std::upper_bound(t.begin(), t.end(), tq);
  if (it == t.begin()) return v.front();
  if (it == t.end()) return v.back();
  size_t hi = static_cast<size_t>(it - t.begin());
  size_t lo = hi - 1;
  double w = (tq - t[lo]) / (t[hi] - t[lo]);
  return v[lo] + w * (v[hi] - v[lo]);
}

std::vector<double> interpolate_series(const std::vector<double>& t_min,
                                       const std::vector<double>& values, int step_minutes,
                                       int horizon_steps, double t0_min) {
  std::vector<std::string> bad;
  if (t_min.size() < 2 || t_min.size() != values.size())
    bad.push_back("interpolate: need >= 2 (time, value) points of equal length");
  for (size_t i = 0; i + 1 < t_min.size(); ++i)
    if (!(t_min[i] < t_min[i + 1])) {
      bad.push_back("interpolate: timestamps must be strictly increasing");
      break;
    }
  if (horizon_steps < 1 || step_minutes < 1) bad.push_back("interpolate: bad step/horizon");
  if (bad.empty()) {
    double t_last = t0_min + static_cast<double>(horizon_steps - 1) * step_minutes;
    if (t0_min < t_min.front() || t_last > t_min.back())
      bad.push_back(strfmt("interpolate: horizon [%g, %g] min leaves the data span [%g, %g]",
                           t0_min, t_last, t_min.front(), t_min.back()));
  }
  if (!bad.empty()) throw ValidationError(bad);

  std::vector<double> out(horizon_steps);
  for (int k = 0; k < horizon_steps; ++k)
    out[k] = interp_at(t_min, values, t0_min + static_cast<double>(k) * step_minutes);
  return out;
}

std::vector<double> interpolate_series_periodic(const std::vector<double>& t_min,
                                                const std::vector<double>& values,
                                                int step_minutes, int horizon_steps,
                                                double t0_min) {
  if (t_min.size() < 2 || t_min.size() != values.size())
    throw ValidationError({"interpolate: need >= 2 (time, value) points of equal length"});
  double span = t_min.back() - t_min.front();
  if (!(span > 0)) throw ValidationError({"interpolate: zero data span"});
  std::vector<double> out(horizon_steps);
  for (int k = 0; k < horizon_steps; ++k) {
    double tq = t0_min + static_cast<double>(k) * step_minutes;
    double rel = std::fmod(tq - t_min.front(), span);
    if (rel < 0) rel += span;
    out[k] = interp_at(t_min, values, t_min.front() + rel);
  }
  return out;
}

RawCurves load_curves_csv(const std::string& text) {
  RawCurves rc;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> bad;
  if (!std::getline(in, line)) throw ValidationError({"curves: empty file"});
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> headers;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) headers.push_back(cell);
  }
  if (headers.empty() || headers[0] != "t_min")
    throw ValidationError({"curves: first column must be t_min"});
  for (size_t i = 1; i < headers.size(); ++i) {
    rc.names.push_back(headers[i]);
    rc.columns[headers[i]] = {};
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (...) {
        bad.push_back(strfmt("curves line %d: bad number '%s'", lineno, cell.c_str()));
        row.push_back(0);
      }
    }
    if (row.size() != headers.size()) {
      bad.push_back(strfmt("curves line %d: %zu cells, expected %zu", lineno, row.size(),
                           headers.size()));
      continue;
    }
    rc.t_min.push_back(row[0]);
    for (size_t i = 1; i < headers.size(); ++i) rc.columns[headers[i]].push_back(row[i]);
  }
  if (rc.t_min.size() < 2) bad.push_back("curves: need at least 2 data rows");
  for (size_t i = 0; i + 1 < rc.t_min.size(); ++i)
    if (!(rc.t_min[i] < rc.t_min[i + 1])) {
      bad.push_back("curves: t_min must be strictly increasing");
      break;
    }
  if (!bad.empty()) throw ValidationError(bad);
  return rc;
}

RawCurves load_curves_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"cannot open curves file " + path});
  std::stringstream ss;
  ss << in.rdbuf();
  return load_curves_csv(ss.str());
}

Scenario make_scenario(const RawCurves& curves, const Network& net, int step_minutes,
                       int horizon_steps, double t0_min, bool periodic) {
  auto sample = [&](const std::vector<double>& col) {
    return periodic ? interpolate_series_periodic(curves.t_min, col, step_minutes, horizon_steps,
                                                  t0_min)
                    : interpolate_series(curves.t_min, col, step_minutes, horizon_steps, t0_min);
  };
  Scenario sc;
  sc.step_minutes = step_minutes;
  sc.horizon_steps = horizon_steps;
  std::vector<double> zeros(horizon_steps, 0.0);

  auto col = [&](const std::string& name) -> const std::vector<double>* {
    auto it = curves.columns.find(name);
    return it == curves.columns.end() ? nullptr : &it->second;
  };
  sc.wind_speed = col("wind_mps") ? sample(*col("wind_mps")) : zeros;
  sc.h2_demand = col("h2_dem") ? sample(*col("h2_dem")) : zeros;
  for (const auto& b : net.buses) {
    const auto* pc = col(strfmt("p_load_%d", b.id));
    const auto* qc = col(strfmt("q_load_%d", b.id));
    sc.p_load[b.id] = pc ? sample(*pc) : zeros;
    sc.q_load[b.id] = qc ? sample(*qc) : zeros;
  }
  for (const auto& n : net.water_nodes) {
    const auto* wc = col("wdem_" + n.id);
    sc.water_demand[n.id] = wc ? sample(*wc) : zeros;
  }
  return sc;
}

}  // namespace ewh
