#include "ewh/hydrogen.hpp"

#include "ewh/common.hpp"
#include "ewh/power.hpp"

namespace ewh {

namespace hid {
std::string p_we(int t) { return strfmt("pwe[%d]", t); }
std::string h_we(int t) { return strfmt("hwe[%d]", t); }
std::string h_fc(int t) { return strfmt("hfc[%d]", t); }
std::string p_fc(int t) { return strfmt("pfc[%d]", t); }
std::string q_hs(int t) { return strfmt("qhs[%d]", t); }
std::string we_on(int t) { return strfmt("bwe[%d]", t); }
std::string fc_on(int t) { return strfmt("bfc[%d]", t); }
std::string storage(int t) { return strfmt("lh2[%d]", t); }
std::string h_meth(int t) { return strfmt("hchi[%d]", t); }
std::string c_gen(int t) { return strfmt("cdg[%d]", t); }
std::string c_emit(int t) { return strfmt("ce[%d]", t); }
std::string c_store(int t) { return strfmt("cs[%d]", t); }
std::string c_meth(int t) { return strfmt("cchi[%d]", t); }
std::string revenue(int t) { return strfmt("ichi[%d]", t); }
}  // namespace hid

void build_hydrogen_constraints(ProgramBuilder& b, const Network& net, const Scenario& sce) {
  if (net.hydrogen.empty()) return;
  const HydrogenSystem& hs = net.hydrogen[0];
  const int T = sce.horizon_steps;
  const double dt = sce.dt_h();

  for (int t = 0; t < T; ++t) {
    int pwe = b.var(hid::p_we(t));
    int hwe = b.var(hid::h_we(t));
    int hfc = b.var(hid::h_fc(t));
    int pfc = b.var(hid::p_fc(t));
    int bwe = b.var(hid::we_on(t));
    int bfc = b.var(hid::fc_on(t));

    b.add_linear({{hwe, 1.0}, {pwe, -hs.xi_we_p}}, Sense::Equal, 0.0, strfmt("h2/prod/%d", t));
    b.add_linear({{pfc, 1.0}, {hfc, -hs.xi_fc_h}}, Sense::Equal, 0.0, strfmt("h2/fc/%d", t));

    AffineExpr cap, act, rea;
    cap.constant = hs.s_hs_max;
    act.add(pwe, 1.0).add(pfc, -1.0);
    rea.add(b.var(hid::q_hs(t)), 1.0);
    b.add_soc({cap, act, rea}, strfmt("h2/inv/%d", t));

    b.add_linear({{pwe, 1.0}, {bwe, -hs.p_we_max}}, Sense::LessEqual, 0.0,
                 strfmt("h2/we-hi/%d", t));
    b.add_linear({{pwe, -1.0}, {bwe, hs.p_we_min}}, Sense::LessEqual, 0.0,
                 strfmt("h2/we-lo/%d", t));
    b.add_linear({{hfc, 1.0}, {bfc, -hs.h_fc_max}}, Sense::LessEqual, 0.0,
                 strfmt("h2/fc-hi/%d", t));
    b.add_linear({{hfc, -1.0}, {bfc, hs.h_fc_min}}, Sense::LessEqual, 0.0,
                 strfmt("h2/fc-lo/%d", t));
    b.add_linear({{bwe, 1.0}, {bfc, 1.0}}, Sense::LessEqual, 1.0, strfmt("h2/excl/%d", t));

    double demand = t < static_cast<int>(sce.h2_demand.size()) ? sce.h2_demand[t] : 0.0;
    std::vector<std::pair<int, double>> stor{{b.var(hid::storage(t)), 1.0},
                                             {hwe, -dt},
                                             {hfc, dt},
                                             {b.var(hid::h_meth(t)), dt}};
    double rhs = -dt * demand;
    if (t == 0)
      rhs += hs.storage_init;
    else
      stor.emplace_back(b.var(hid::storage(t - 1)), -1.0);
    b.add_linear(std::move(stor), Sense::Equal, rhs, strfmt("h2/store/%d", t));
  }
}

void build_carbon_constraints(ProgramBuilder& b, const Network& net, const Scenario& sce) {
  if (net.diesel.empty()) return;
  const CarbonChain& cc = net.carbon;
  const int T = sce.horizon_steps;

  for (int t = 0; t < T; ++t) {
    int cdg = b.var(hid::c_gen(t));
    int ce = b.var(hid::c_emit(t));
    int cs = b.var(hid::c_store(t));
    int cx = b.var(hid::c_meth(t));

    std::vector<std::pair<int, double>> gen{{cdg, 1.0}};
    for (const auto& g : net.diesel) gen.emplace_back(b.var(pid::p_dg(g.bus, t)), -g.carbon_factor);
    b.add_linear(std::move(gen), Sense::Equal, 0.0, strfmt("co2/gen/%d", t));

    b.add_linear({{ce, 1.0}, {cdg, -1.0}, {cs, 1.0}, {cx, 1.0}}, Sense::Equal, 0.0,
                 strfmt("co2/split/%d", t));
    b.add_linear({{b.var(hid::revenue(t)), 1.0}, {cx, -cc.rho_chi * cc.xi_chi_c}}, Sense::Equal,
                 0.0, strfmt("co2/revenue/%d", t));
    b.add_linear({{cs, 1.0}, {cx, 1.0}, {cdg, -cc.capture_ratio_max}}, Sense::LessEqual, 0.0,
                 strfmt("co2/cap/%d", t));
    if (!net.hydrogen.empty())
      b.add_linear({{b.var(hid::h_meth(t)), 1.0}, {cx, -cc.xi_chi_h}}, Sense::Equal, 0.0,
                   strfmt("co2/meth/%d", t));
    else
      b.add_linear({{cx, 1.0}}, Sense::LessEqual, 0.0, strfmt("co2/meth/%d", t));
  }
}

void build_objective(ProgramBuilder& b, const Network& net, const Scenario& sce) {
  const ObjectiveWeights& w = net.weights;
  const int T = sce.horizon_steps;
  const double dt = sce.dt_h();
  for (int t = 0; t < T; ++t) {
    if (!net.wind.empty()) b.add_objective_coeff(b.var(pid::p_tr(t)), dt * w.alpha1);
    for (const auto& g : net.diesel)
      b.add_objective_coeff(b.var(pid::p_dg(g.bus, t)), dt * w.alpha2);
    if (!net.diesel.empty()) {
      b.add_objective_coeff(b.var(hid::c_emit(t)), dt * w.alpha3);
      b.add_objective_coeff(b.var(hid::c_store(t)), dt * w.alpha4);
      b.add_objective_coeff(b.var(hid::revenue(t)), -dt);
    }
  }
}

ConicProgram assemble(const Network& net, const Scenario& sce, HullMode mode) {
  auto problems = sce.validate(net);
  if (!problems.empty()) throw ValidationError(problems);
  ProgramBuilder b;
  declare_all_variables(b, net, sce);
  build_power_constraints(b, net, sce);
  build_water_constraints(b, net, sce, mode);
  build_hydrogen_constraints(b, net, sce);
  build_carbon_constraints(b, net, sce);
  build_objective(b, net, sce);
  return b.take();
}

}  // namespace ewh
