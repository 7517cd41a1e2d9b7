#pragma once

#include <string>

#include "ewh/conic.hpp"
#include "ewh/model.hpp"
#include "ewh/water.hpp"

namespace ewh {

/// Variable ids of the hydrogen and carbon blocks (one hydrogen system and
/// one carbon chain per network).
namespace hid {
std::string p_we(int t);
std::string h_we(int t);
std::string h_fc(int t);
std::string p_fc(int t);
std::string q_hs(int t);
std::string we_on(int t);
std::string fc_on(int t);
std::string storage(int t);
std::string h_meth(int t);
std::string c_gen(int t);
std::string c_emit(int t);
std::string c_store(int t);
std::string c_meth(int t);
std::string revenue(int t);
}  // namespace hid

/// Hydrogen block: electrolyzer production, fuel-cell conversion, inverter
/// rating cone on (p_we - p_fc, q_hs), on/off indicator bounds, mutual
/// exclusion, and the storage-level recursion fed by demand and methanation.
void build_hydrogen_constraints(ProgramBuilder& b, const Network& net, const Scenario& sce);

/// Carbon block: generator emissions, emit/store/reuse split, chemical
/// revenue, capture cap, and the methanation hydrogen draw.
void build_carbon_constraints(ProgramBuilder& b, const Network& net, const Scenario& sce);

/// Minimized cost: sum_t dt*(a1*p_tr + a2*p_dg + a3*c_emit + a4*c_store - revenue).
void build_objective(ProgramBuilder& b, const Network& net, const Scenario& sce);

/// Full dispatch program over the scenario horizon: declares every variable,
/// then emits the power, water, hydrogen, and carbon blocks plus the
/// objective. Deterministic: equal inputs give byte-identical programs.
ConicProgram assemble(const Network& net, const Scenario& sce,
                      HullMode mode = HullMode::Validated);

}  // namespace ewh
