#include "ewh/water.hpp"

#include <cmath>

#include "ewh/common.hpp"
#include "ewh/hydrogen.hpp"

namespace ewh {

namespace wid {
std::string head(const std::string& node, int t) { return strfmt("y[%s,%d]", node.c_str(), t); }
std::string flow(const std::string& pipe, int t) { return strfmt("f[%s,%d]", pipe.c_str(), t); }
std::string pump_on(const std::string& pipe, int t) { return strfmt("bp[%s,%d]", pipe.c_str(), t); }
std::string pump_gain(const std::string& pipe, int t) {
  return strfmt("yg[%s,%d]", pipe.c_str(), t);
}
std::string pump_power(const std::string& pipe, int t) {
  return strfmt("pp[%s,%d]", pipe.c_str(), t);
}
std::string tank_volume(const std::string& node, int t) {
  return strfmt("vwt[%s,%d]", node.c_str(), t);
}
std::string tank_flow(const std::string& node, int t) {
  return strfmt("fwt[%s,%d]", node.c_str(), t);
}
std::string desal_flow(const std::string& node, int t) {
  return strfmt("fdes[%s,%d]", node.c_str(), t);
}
std::string desal_seg_on(const std::string& node, int seg, int t) {
  return strfmt("bdes[%s,%d,%d]", node.c_str(), seg, t);
}
std::string desal_seg_flow(const std::string& node, int seg, int t) {
  return strfmt("fseg[%s,%d,%d]", node.c_str(), seg, t);
}
}  // namespace wid

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Tangent to y = r*f*|f| at the point a: y = coeff*f + constant.
HullPlane tangent_at(double r, double a, bool upper) {
  return {2.0 * r * std::fabs(a), (a >= 0 ? -1.0 : 1.0) * r * a * a, upper};
}

// Chord through (lo, g(lo)) and (hi, g(hi)).
HullPlane secant(double r, double lo, double hi, bool upper) {
  double glo = r * lo * std::fabs(lo);
  double ghi = r * hi * std::fabs(hi);
  double slope = (ghi - glo) / (hi - lo);
  return {slope, glo - slope * lo, upper};
}

}  // namespace

std::array<HullPlane, 4> headloss_hull_planes(double r_w, double f_min, double f_max,
                                              HullMode mode) {
  std::vector<std::string> problems;
  if (!(f_min < f_max)) problems.push_back("headloss hull: f_min must be < f_max");
  if (!(r_w >= 0)) problems.push_back("headloss hull: r_w must be >= 0");
  if (!problems.empty()) throw ValidationError(problems);

  const double r = r_w, lo = f_min, hi = f_max;
  if (mode == HullMode::StrictPaper) {
    double c1 = 2.0 * kSqrt2 - 2.0, c2 = 3.0 - 2.0 * kSqrt2;
    return {{{c1 * r * hi, c2 * r * hi * hi, true},
             {c1 * r * lo, -c2 * r * lo * lo, false},
             {2.0 * r * hi, -r * hi * hi, false},
             {2.0 * r * lo, r * lo * lo, true}}};
  }

  if (lo >= 0.0) {
    // Convex branch only: tangents below, chord above.
    return {{secant(r, lo, hi, true), tangent_at(r, lo, false), tangent_at(r, hi, false),
             tangent_at(r, 0.5 * (lo + hi), false)}};
  }
  if (hi <= 0.0) {
    // Concave branch only: tangents above, chord below.
    return {{secant(r, lo, hi, false), tangent_at(r, lo, true), tangent_at(r, hi, true),
             tangent_at(r, 0.5 * (lo + hi), true)}};
  }

  // Sign change inside the interval. A tangent on one branch dominates the
  // other branch only while the interval stays inside the sqrt(2) geometry
  // of the curve; otherwise the chord (or a flat plane at the range bound)
  // is the certified fallback.
  std::array<HullPlane, 4> planes;
  double c1 = 2.0 * kSqrt2 - 2.0, c2 = 3.0 - 2.0 * kSqrt2;
  if (-lo >= (kSqrt2 - 1.0) * hi)
    planes[0] = {c1 * r * hi, c2 * r * hi * hi, true};  // touches at -(sqrt2-1)*hi and at hi
  else
    planes[0] = secant(r, lo, hi, true);
  if (hi <= (kSqrt2 + 1.0) * -lo)
    planes[1] = tangent_at(r, lo, true);
  else
    planes[1] = {0.0, r * hi * hi, true};  // flat at the curve maximum
  if (hi >= (kSqrt2 - 1.0) * -lo)
    planes[2] = {c1 * r * -lo, -c2 * r * lo * lo, false};  // mirror of planes[0]
  else
    planes[2] = secant(r, lo, hi, false);
  if (-lo <= (kSqrt2 + 1.0) * hi)
    planes[3] = tangent_at(r, hi, false);
  else
    planes[3] = {0.0, -r * lo * lo, false};  // flat at the curve minimum
  return planes;
}

double tank_step(double volume, double flow, double dt_h, const Tank&) {
  return volume - flow * dt_h;
}

void build_water_constraints(ProgramBuilder& b, const Network& net, const Scenario& sce,
                             HullMode mode) {
  const int T = sce.horizon_steps;
  const double dt = sce.dt_h();
  const char* hl_tag[4] = {"wat/hl-a/%s/%d", "wat/hl-b/%s/%d", "wat/hl-c/%s/%d",
                           "wat/hl-d/%s/%d"};

  for (int t = 0; t < T; ++t) {
    for (const auto& n : net.water_nodes) {
      std::vector<std::pair<int, double>> terms;
      for (const auto& p : net.pipes) {
        if (p.from == n.id) terms.emplace_back(b.var(wid::flow(p.id, t)), 1.0);
        if (p.to == n.id) terms.emplace_back(b.var(wid::flow(p.id, t)), -1.0);
      }
      for (const auto& d : net.desalination)
        if (d.node == n.id) terms.emplace_back(b.var(wid::desal_flow(d.node, t)), -1.0);
      for (const auto& tk : net.tanks)
        if (tk.node == n.id) terms.emplace_back(b.var(wid::tank_flow(tk.node, t)), -1.0);
      for (const auto& hs : net.hydrogen)
        if (hs.water_node == n.id) terms.emplace_back(b.var(hid::h_we(t)), hs.xi_we_w);
      double demand = 0.0;
      auto it = sce.water_demand.find(n.id);
      if (it != sce.water_demand.end()) demand = it->second[t];
      b.add_linear(std::move(terms), Sense::Equal, -demand,
                   strfmt("wat/bal/%s/%d", n.id.c_str(), t));
    }

    for (const auto& p : net.pipes) {
      int yn = b.var(wid::head(p.from, t));
      int ym = b.var(wid::head(p.to, t));
      int f = b.var(wid::flow(p.id, t));
      if (p.kind == PipeKind::Regular) {
        auto planes = headloss_hull_planes(p.r_w, p.f_min, p.f_max, mode);
        for (int k = 0; k < 4; ++k) {
          const HullPlane& pl = planes[k];
          std::vector<std::pair<int, double>> terms{{yn, 1.0}, {ym, -1.0}, {f, -pl.coeff}};
          double rhs = pl.constant - p.h_offset;
          std::string tag = strfmt(hl_tag[k], p.id.c_str(), t);
          if (pl.upper)
            b.add_linear(std::move(terms), Sense::LessEqual, rhs, std::move(tag));
          else
            b.add_greater_equal(std::move(terms), rhs, std::move(tag));
        }
      } else if (p.kind == PipeKind::Prv) {
        b.add_linear({{yn, 1.0}, {ym, -1.0}}, Sense::LessEqual, p.prv_limit - p.h_offset,
                     strfmt("wat/prv-hi/%s/%d", p.id.c_str(), t));
        b.add_linear({{yn, -1.0}, {ym, 1.0}}, Sense::LessEqual, p.prv_limit + p.h_offset,
                     strfmt("wat/prv-lo/%s/%d", p.id.c_str(), t));
      } else {
        const PumpParams& pu = *p.pump;
        const WaterNode& nn = net.node(p.from);
        const WaterNode& nm = net.node(p.to);
        double y_span = std::max(std::fabs(nn.head_max - nm.head_min + p.h_offset),
                                 std::fabs(nn.head_min - nm.head_max + p.h_offset));
        double big_m = y_span + pu.head_gain_max +
                       p.r_w * std::max(p.f_min * p.f_min, p.f_max * p.f_max);
        int bp = b.var(wid::pump_on(p.id, t));
        int yg = b.var(wid::pump_gain(p.id, t));
        int pp = b.var(wid::pump_power(p.id, t));

        b.add_linear({{yn, -1.0}, {ym, 1.0}, {yg, -1.0}, {bp, big_m}}, Sense::LessEqual,
                     big_m + p.h_offset, strfmt("wat/pump-drop-lo1/%s/%d", p.id.c_str(), t));
        b.add_linear({{yn, -1.0}, {ym, 1.0}, {yg, -1.0}, {f, 2.0 * p.r_w * p.f_max}, {bp, big_m}},
                     Sense::LessEqual, big_m + p.r_w * p.f_max * p.f_max + p.h_offset,
                     strfmt("wat/pump-drop-lo2/%s/%d", p.id.c_str(), t));
        b.add_linear({{yn, 1.0}, {ym, -1.0}, {yg, 1.0}, {f, -p.r_w * p.f_max}, {bp, big_m}},
                     Sense::LessEqual, big_m - p.h_offset,
                     strfmt("wat/pump-drop-hi/%s/%d", p.id.c_str(), t));
        b.add_linear({{f, 1.0}, {bp, -p.f_max}}, Sense::LessEqual, 0.0,
                     strfmt("wat/pump-flow/%s/%d", p.id.c_str(), t));

        double k = PumpParams::kUnitConst;
        if (pu.a1 > 1e-12) {
          AffineExpr head, mid, tail;
          head.add(pp, pu.efficiency).add(f, -k * pu.a0);
          head.constant = 1.0;
          mid.add(f, 2.0 * std::sqrt(k * pu.a1));
          tail.add(pp, pu.efficiency).add(f, -k * pu.a0);
          tail.constant = -1.0;
          b.add_soc({head, mid, tail}, strfmt("wat/pump-pow-cone/%s/%d", p.id.c_str(), t));
        } else {
          b.add_linear({{pp, -pu.efficiency}, {f, k * pu.a0}}, Sense::LessEqual, 0.0,
                       strfmt("wat/pump-pow-cone/%s/%d", p.id.c_str(), t));
        }
        b.add_linear({{pp, pu.efficiency}, {f, -k * (pu.a1 * p.f_max + pu.a0)}},
                     Sense::LessEqual, 0.0, strfmt("wat/pump-pow-cap/%s/%d", p.id.c_str(), t));
      }
    }

    for (const auto& tk : net.tanks) {
      int v = b.var(wid::tank_volume(tk.node, t));
      int fw = b.var(wid::tank_flow(tk.node, t));
      if (t == 0) {
        b.add_linear({{v, 1.0}, {fw, dt}}, Sense::Equal, tk.v_init,
                     strfmt("wat/tank-vol/%s/%d", tk.node.c_str(), t));
      } else {
        int vp = b.var(wid::tank_volume(tk.node, t - 1));
        b.add_linear({{v, 1.0}, {vp, -1.0}, {fw, dt}}, Sense::Equal, 0.0,
                     strfmt("wat/tank-vol/%s/%d", tk.node.c_str(), t));
      }
      const WaterNode& n = net.node(tk.node);
      b.add_linear({{b.var(wid::head(tk.node, t)), tk.area}, {v, -1.0}}, Sense::Equal,
                   tk.area * n.elevation, strfmt("wat/tank-head/%s/%d", tk.node.c_str(), t));
    }

    for (const auto& d : net.desalination) {
      std::vector<std::pair<int, double>> sum{{b.var(wid::desal_flow(d.node, t)), 1.0}};
      std::vector<std::pair<int, double>> pick;
      for (int seg = 1; seg <= 4; ++seg) {
        int fs = b.var(wid::desal_seg_flow(d.node, seg, t));
        int bs = b.var(wid::desal_seg_on(d.node, seg, t));
        b.add_linear({{fs, 1.0}, {bs, -0.25 * seg * d.f_max}}, Sense::LessEqual, 0.0,
                     strfmt("wat/des-seg-hi/%s/%d/%d", d.node.c_str(), seg, t));
        b.add_linear({{fs, -1.0}, {bs, 0.25 * (seg - 1) * d.f_max}}, Sense::LessEqual, 0.0,
                     strfmt("wat/des-seg-lo/%s/%d/%d", d.node.c_str(), seg, t));
        sum.emplace_back(fs, -1.0);
        pick.emplace_back(bs, 1.0);
      }
      b.add_linear(std::move(sum), Sense::Equal, 0.0,
                   strfmt("wat/des-sum/%s/%d", d.node.c_str(), t));
      b.add_linear(std::move(pick), Sense::Equal, 1.0,
                   strfmt("wat/des-pick/%s/%d", d.node.c_str(), t));
    }
  }
}

}  // namespace ewh
