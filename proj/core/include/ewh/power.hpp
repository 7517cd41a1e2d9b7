#pragma once

#include <string>
#include <vector>

#include "ewh/conic.hpp"
#include "ewh/model.hpp"

namespace ewh {

/// Variable ids of the power block. Flow variables are oriented root->leaf
/// (positive = toward the child bus), independent of the from/to order in
/// the network file; the branch keeps its file name.
namespace pid {
std::string v_sq(int bus, int t);
std::string i_sq(const Branch& br, int t);
std::string p_flow(const Branch& br, int t);
std::string q_flow(const Branch& br, int t);
std::string p_dg(int bus, int t);
std::string q_dg(int bus, int t);
std::string p_sw(int bus, int t);
std::string q_sw(int bus, int t);
std::string p_tr(int t);
}  // namespace pid

/// Declare every variable of the full dispatch program (power, water,
/// hydrogen, carbon) in a fixed order. Builders only reference variables,
/// so the same declarations serve standalone block construction in tests.
void declare_all_variables(ProgramBuilder& b, const Network& net, const Scenario& sce);

/// Branch-flow block: per-bus P/Q balance, per-branch voltage drop and
/// current-flow cone, linear V-I coupling, thermal cap, and the per-step
/// wind split p_tr = p_wind - (p_we + p_sw). Loads enter as constants.
void build_power_constraints(ProgramBuilder& b, const Network& net, const Scenario& sce);

/// Per-(branch,t) relaxation gap V_up * I - (p^2 + q^2) at a solution,
/// flattened branch-major. Zero gap = the cone recovered a physical flow.
struct SocExactness {
  std::vector<double> gap;
  double max_gap = 0.0;
  double mean_gap = 0.0;
};
SocExactness soc_exactness(const ConicProgram& prog, const Solution& sol, const Network& net,
                           int horizon_steps);

}  // namespace ewh
