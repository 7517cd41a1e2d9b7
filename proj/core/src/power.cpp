#include "ewh/power.hpp"

#include <cmath>
#include <unordered_map>

#include "ewh/common.hpp"
#include "ewh/hydrogen.hpp"
#include "ewh/water.hpp"

namespace ewh {

namespace pid {
std::string v_sq(int bus, int t) { return strfmt("v[%d,%d]", bus, t); }
std::string i_sq(const Branch& br, int t) { return strfmt("isq[%d-%d,%d]", br.from, br.to, t); }
std::string p_flow(const Branch& br, int t) { return strfmt("fp[%d-%d,%d]", br.from, br.to, t); }
std::string q_flow(const Branch& br, int t) { return strfmt("fq[%d-%d,%d]", br.from, br.to, t); }
std::string p_dg(int bus, int t) { return strfmt("pdg[%d,%d]", bus, t); }
std::string q_dg(int bus, int t) { return strfmt("qdg[%d,%d]", bus, t); }
std::string p_sw(int bus, int t) { return strfmt("psw[%d,%d]", bus, t); }
std::string q_sw(int bus, int t) { return strfmt("qsw[%d,%d]", bus, t); }
std::string p_tr(int t) { return strfmt("ptr[%d]", t); }
}  // namespace pid

namespace {

std::string branch_name(const Branch& br) { return strfmt("%d-%d", br.from, br.to); }

// Per branch: (sending bus index, receiving bus index) in root->leaf
// orientation, regardless of the file's from/to order.
std::vector<std::pair<int, int>> orient_branches(const Network& net) {
  std::vector<std::pair<int, int>> ud(net.branches.size(), {-1, -1});
  for (int v = 0; v < static_cast<int>(net.buses.size()); ++v) {
    int bi = net.parent_branch[v];
    if (bi < 0) continue;
    const Branch& br = net.branches[bi];
    int from_idx = net.bus_index.at(br.from);
    int to_idx = net.bus_index.at(br.to);
    ud[bi] = {from_idx == v ? to_idx : from_idx, v};
  }
  return ud;
}

}  // namespace

void declare_all_variables(ProgramBuilder& b, const Network& net, const Scenario& sce) {
  const int T = sce.horizon_steps;

  for (const auto& bus : net.buses)
    for (int t = 0; t < T; ++t) b.add_variable(pid::v_sq(bus.id, t), bus.v_min, bus.v_max);
  for (const auto& br : net.branches) {
    for (int t = 0; t < T; ++t) {
      b.add_variable(pid::i_sq(br, t), br.i_min, br.i_max);
      b.add_variable(pid::p_flow(br, t), -br.s_max, br.s_max);
      b.add_variable(pid::q_flow(br, t), -br.s_max, br.s_max);
    }
  }
  for (const auto& g : net.diesel) {
    for (int t = 0; t < T; ++t) {
      b.add_variable(pid::p_dg(g.bus, t), g.p_min, g.p_max);
      b.add_variable(pid::q_dg(g.bus, t), g.q_min, g.q_max);
    }
  }
  for (const auto& w : net.wind) {
    for (int t = 0; t < T; ++t) {
      b.add_variable(pid::p_sw(w.bus, t), 0.0, w.rated_power);
      b.add_variable(pid::q_sw(w.bus, t), -w.q_sw_max, w.q_sw_max);
    }
  }
  if (!net.wind.empty()) {
    double rated = 0.0;
    for (const auto& w : net.wind) rated += w.rated_power;
    for (int t = 0; t < T; ++t) b.add_variable(pid::p_tr(t), 0.0, rated);
  }

  for (const auto& n : net.water_nodes)
    for (int t = 0; t < T; ++t) b.add_variable(wid::head(n.id, t), n.head_min, n.head_max);
  for (const auto& p : net.pipes) {
    for (int t = 0; t < T; ++t) b.add_variable(wid::flow(p.id, t), p.f_min, p.f_max);
    if (p.kind == PipeKind::Pump) {
      const PumpParams& pu = *p.pump;
      double p_cap = PumpParams::kUnitConst * (pu.a1 * p.f_max + pu.a0) * p.f_max / pu.efficiency;
      for (int t = 0; t < T; ++t) {
        b.add_binary(wid::pump_on(p.id, t));
        b.add_variable(wid::pump_gain(p.id, t), 0.0, pu.head_gain_max);
        b.add_variable(wid::pump_power(p.id, t), 0.0, p_cap);
      }
    }
  }
  for (const auto& tk : net.tanks) {
    for (int t = 0; t < T; ++t) {
      b.add_variable(wid::tank_volume(tk.node, t), tk.v_min, tk.v_max);
      b.add_variable(wid::tank_flow(tk.node, t), tk.flow_min, tk.flow_max);
    }
  }
  for (const auto& d : net.desalination) {
    for (int t = 0; t < T; ++t) {
      b.add_variable(wid::desal_flow(d.node, t), 0.0, d.f_max);
      for (int seg = 1; seg <= 4; ++seg) {
        b.add_binary(wid::desal_seg_on(d.node, seg, t));
        b.add_variable(wid::desal_seg_flow(d.node, seg, t), 0.0, 0.25 * seg * d.f_max);
      }
    }
  }

  for (const auto& hs : net.hydrogen) {
    for (int t = 0; t < T; ++t) {
      b.add_variable(hid::p_we(t), 0.0, hs.p_we_max);
      b.add_variable(hid::h_we(t), 0.0, hs.xi_we_p * hs.p_we_max);
      b.add_variable(hid::h_fc(t), 0.0, hs.h_fc_max);
      b.add_variable(hid::p_fc(t), 0.0, hs.xi_fc_h * hs.h_fc_max);
      b.add_variable(hid::q_hs(t), -hs.s_hs_max, hs.s_hs_max);
      b.add_binary(hid::we_on(t));
      b.add_binary(hid::fc_on(t));
      b.add_variable(hid::storage(t), hs.storage_min, hs.storage_max);
      b.add_variable(hid::h_meth(t), 0.0, kInf);
    }
  }

  if (!net.diesel.empty()) {
    double c_cap = net.carbon.c_s_cap > 0 ? net.carbon.c_s_cap : kInf;
    for (int t = 0; t < T; ++t) {
      b.add_variable(hid::c_gen(t), 0.0, kInf);
      b.add_variable(hid::c_emit(t), 0.0, kInf);
      b.add_variable(hid::c_store(t), 0.0, c_cap);
      b.add_variable(hid::c_meth(t), 0.0, kInf);
      b.add_variable(hid::revenue(t), 0.0, kInf);
    }
  }
}

void build_power_constraints(ProgramBuilder& b, const Network& net, const Scenario& sce) {
  const int T = sce.horizon_steps;
  std::vector<std::string> problems;
  for (const auto& bus : net.buses) {
    if (!sce.p_load.count(bus.id)) problems.push_back(strfmt("no p_load series for bus %d", bus.id));
    if (!sce.q_load.count(bus.id)) problems.push_back(strfmt("no q_load series for bus %d", bus.id));
  }
  if (!problems.empty()) throw ValidationError(problems);

  auto ud = orient_branches(net);

  for (int t = 0; t < T; ++t) {
    for (int bi = 0; bi < static_cast<int>(net.buses.size()); ++bi) {
      const Bus& bus = net.buses[bi];
      std::vector<std::pair<int, double>> p_terms, q_terms;
      int pb = net.parent_branch[bi];
      if (pb >= 0) {
        const Branch& br = net.branches[pb];
        p_terms.emplace_back(b.var(pid::p_flow(br, t)), 1.0);
        p_terms.emplace_back(b.var(pid::i_sq(br, t)), -br.r);
        q_terms.emplace_back(b.var(pid::q_flow(br, t)), 1.0);
        q_terms.emplace_back(b.var(pid::i_sq(br, t)), -br.x);
      }
      for (int cb : net.child_branches[bi]) {
        const Branch& br = net.branches[cb];
        p_terms.emplace_back(b.var(pid::p_flow(br, t)), -1.0);
        q_terms.emplace_back(b.var(pid::q_flow(br, t)), -1.0);
      }
      for (const auto& g : net.diesel) {
        if (g.bus != bus.id) continue;
        p_terms.emplace_back(b.var(pid::p_dg(g.bus, t)), 1.0);
        q_terms.emplace_back(b.var(pid::q_dg(g.bus, t)), 1.0);
      }
      for (const auto& w : net.wind) {
        if (w.bus != bus.id) continue;
        p_terms.emplace_back(b.var(pid::p_sw(w.bus, t)), 1.0);
        q_terms.emplace_back(b.var(pid::q_sw(w.bus, t)), 1.0);
      }
      for (const auto& hs : net.hydrogen) {
        if (hs.bus != bus.id) continue;
        p_terms.emplace_back(b.var(hid::p_fc(t)), 1.0);
        p_terms.emplace_back(b.var(hid::p_we(t)), -1.0);
        q_terms.emplace_back(b.var(hid::q_hs(t)), 1.0);
      }
      for (const auto& d : net.desalination) {
        if (d.power_bus != bus.id) continue;
        for (int seg = 1; seg <= 4; ++seg)
          p_terms.emplace_back(b.var(wid::desal_seg_flow(d.node, seg, t)), -d.seg_energy[seg - 1]);
      }
      for (const auto& p : net.pipes) {
        if (p.kind != PipeKind::Pump || p.pump->power_bus != bus.id) continue;
        p_terms.emplace_back(b.var(wid::pump_power(p.id, t)), -1.0);
      }
      b.add_linear(std::move(p_terms), Sense::Equal, sce.p_load.at(bus.id)[t],
                   strfmt("pwr/bal-p/%d/%d", bus.id, t));
      b.add_linear(std::move(q_terms), Sense::Equal, sce.q_load.at(bus.id)[t],
                   strfmt("pwr/bal-q/%d/%d", bus.id, t));
    }

    for (int bi = 0; bi < static_cast<int>(net.branches.size()); ++bi) {
      const Branch& br = net.branches[bi];
      const Bus& up = net.buses[ud[bi].first];
      const Bus& down = net.buses[ud[bi].second];
      int vu = b.var(pid::v_sq(up.id, t));
      int vd = b.var(pid::v_sq(down.id, t));
      int isq = b.var(pid::i_sq(br, t));
      int fp = b.var(pid::p_flow(br, t));
      int fq = b.var(pid::q_flow(br, t));
      b.add_linear({{vu, 1.0}, {vd, -1.0}, {fp, -2.0 * br.r}, {fq, -2.0 * br.x},
                    {isq, br.r * br.r + br.x * br.x}},
                   Sense::Equal, 0.0, strfmt("pwr/vdrop/%s/%d", branch_name(br).c_str(), t));
      double s2 = br.s_max * br.s_max;
      b.add_linear({{isq, up.v_min * up.v_max}, {vu, s2}}, Sense::LessEqual,
                   s2 * (up.v_min + up.v_max),
                   strfmt("pwr/vi/%s/%d", branch_name(br).c_str(), t));

      AffineExpr head, tail, mp, mq;
      head.add(vu, 1.0).add(isq, 1.0);
      tail.add(vu, 1.0).add(isq, -1.0);
      mp.add(fp, 2.0);
      mq.add(fq, 2.0);
      b.add_soc({head, mp, mq, tail}, strfmt("pwr/flow-cone/%s/%d", branch_name(br).c_str(), t));
      AffineExpr cap, tp, tq;
      cap.constant = br.s_max;
      tp.add(fp, 1.0);
      tq.add(fq, 1.0);
      b.add_soc({cap, tp, tq}, strfmt("pwr/thermal/%s/%d", branch_name(br).c_str(), t));
    }

    if (!net.wind.empty()) {
      std::vector<std::pair<int, double>> terms{{b.var(pid::p_tr(t)), 1.0}};
      double avail = 0.0;
      for (const auto& w : net.wind) {
        terms.emplace_back(b.var(pid::p_sw(w.bus, t)), 1.0);
        avail += wind_to_power(sce.wind_speed[t], w);
      }
      for (const auto& hs : net.hydrogen) {
        (void)hs;
        terms.emplace_back(b.var(hid::p_we(t)), 1.0);
      }
      b.add_linear(std::move(terms), Sense::Equal, avail, strfmt("pwr/wind-split/%d", t));
    }
  }
}

SocExactness soc_exactness(const ConicProgram& prog, const Solution& sol, const Network& net,
                           int horizon_steps) {
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < static_cast<int>(prog.variables.size()); ++i)
    index.emplace(prog.variables[i].id, i);
  auto at = [&](const std::string& id) {
    auto it = index.find(id);
    if (it == index.end()) throw ValidationError({"no variable " + id + " in program"});
    return sol.primal[it->second];
  };

  auto ud = orient_branches(net);
  SocExactness out;
  out.gap.reserve(net.branches.size() * horizon_steps);
  for (int bi = 0; bi < static_cast<int>(net.branches.size()); ++bi) {
    const Branch& br = net.branches[bi];
    const Bus& up = net.buses[ud[bi].first];
    for (int t = 0; t < horizon_steps; ++t) {
      double v = at(pid::v_sq(up.id, t));
      double i = at(pid::i_sq(br, t));
      double p = at(pid::p_flow(br, t));
      double q = at(pid::q_flow(br, t));
      out.gap.push_back(v * i - p * p - q * q);
    }
  }
  if (!out.gap.empty()) {
    out.max_gap = -kInf;
    for (double g : out.gap) {
      out.max_gap = std::max(out.max_gap, g);
      out.mean_gap += g;
    }
    out.mean_gap /= static_cast<double>(out.gap.size());
  }
  return out;
}

}  // namespace ewh
