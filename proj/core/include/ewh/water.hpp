#pragma once

#include <array>
#include <string>

#include "ewh/conic.hpp"
#include "ewh/model.hpp"

namespace ewh {

/// Variable ids of the water block.
namespace wid {
std::string head(const std::string& node, int t);
std::string flow(const std::string& pipe, int t);
std::string pump_on(const std::string& pipe, int t);
std::string pump_gain(const std::string& pipe, int t);
std::string pump_power(const std::string& pipe, int t);
std::string tank_volume(const std::string& node, int t);
std::string tank_flow(const std::string& node, int t);
std::string desal_flow(const std::string& node, int t);
std::string desal_seg_on(const std::string& node, int seg, int t);
std::string desal_seg_flow(const std::string& node, int seg, int t);
}  // namespace wid

enum class HullMode {
  StrictPaper,  // the four printed planes, kept verbatim for fidelity runs
  Validated,    // tangent/secant planes certified to bracket r*f*|f|
};

/// One affine bound on the pipe head difference: upper means Y <= coeff*f + constant,
/// otherwise Y >= coeff*f + constant.
struct HullPlane {
  double coeff = 0.0;
  double constant = 0.0;
  bool upper = false;
};

/// Four planes enclosing the signed head-loss curve y = r_w * f * |f| over
/// [f_min, f_max]. Validated mode picks tangents and secants per sign case
/// (always-valid fillers when a tangent cannot dominate the whole interval);
/// strict mode returns the classic fixed-coefficient set, which does not
/// bracket the curve for every sign pattern.
std::array<HullPlane, 4> headloss_hull_planes(double r_w, double f_min, double f_max,
                                              HullMode mode);

/// Water block: nodal balance with tank/desalination/electrolyzer terms,
/// hull planes per regular pipe, 4-segment desalination with exclusive
/// segment binaries, pump pipes as big-M indicator rows plus the conic
/// power envelope, tank volume recursion + level/head tie, PRV head band.
void build_water_constraints(ProgramBuilder& b, const Network& net, const Scenario& sce,
                             HullMode mode);

/// End-of-step tank volume after discharging `flow` (m^3/h, positive =
/// injection into the network) for dt_h hours. No clamping: bound
/// violations are the optimizer's concern, not this helper's.
double tank_step(double volume, double flow, double dt_h, const Tank& tank);

}  // namespace ewh
