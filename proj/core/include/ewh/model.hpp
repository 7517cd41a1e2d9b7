#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ewh/common.hpp"

namespace ewh {

struct Bus {
  int id = 0;
  double v_min = 0.81;  // squared voltage bounds, p.u.^2
  double v_max = 1.21;
  // Derived by Network::finalize(); not part of the file schema.
  bool has_diesel = false;
  bool has_wind = false;
  bool has_hydrogen_system = false;
};

struct Branch {
  int from = 0;
  int to = 0;
  double r = 0.0;  // p.u.
  double x = 0.0;  // p.u.
  double s_max = 0.0;  // apparent-power rating, p.u.
  double i_min = 0.0;  // squared-current bounds, p.u.^2
  double i_max = 0.0;  // 0 in the file means "derive s_max^2 / v_min(from)"
};

struct DieselGenerator {
  int bus = 0;
  double p_min = 0.0, p_max = 0.0;  // p.u.
  double q_min = 0.0, q_max = 0.0;
  double carbon_factor = 0.0;  // kg CO2 per p.u.-h
};

struct WindPark {
  int bus = 0;
  double rated_power = 0.0;  // p.u.
  double cut_in = 0.0, rated_speed = 0.0, cut_out = 0.0;  // m/s
  double q_sw_max = 0.0;  // wind inverter reactive band, p.u.
};

struct WaterNode {
  std::string id;
  double head_min = 0.0, head_max = 0.0;  // m
  double elevation = 0.0;                 // m
};

struct PumpParams {
  double head_gain_max = 0.0;  // m
  double a1 = 0.0, a0 = 0.0;   // power-curve coefficients
  double efficiency = 1.0;
  int power_bus = 0;
  // Fixed unit-conversion constant of the pump power envelope.
  static constexpr double kUnitConst = 2.725;
};

enum class PipeKind { Regular, Pump, Prv };

struct Pipe {
  std::string id;
  std::string from, to;  // water node ids
  PipeKind kind = PipeKind::Regular;
  double r_w = 0.0;                // head-loss coefficient, m.h^2/m^6
  double f_min = 0.0, f_max = 0.0; // m^3/h
  double h_offset = 0.0;           // fixed head offset added to y_from - y_to
  double prv_limit = 0.0;          // |head difference| cap (prv only), m
  std::optional<PumpParams> pump;  // set iff kind == Pump
};

struct Tank {
  std::string node;
  double area = 0.0;  // m^2
  double v_min = 0.0, v_max = 0.0, v_init = 0.0;  // m^3
  double flow_min = 0.0, flow_max = 0.0;          // exchange flow bounds, m^3/h
};

struct Desalination {
  std::string node;
  int power_bus = 0;
  double f_max = 0.0;  // m^3/h
  std::array<double, 4> seg_energy{};  // p.u.-h per m^3/h, one per quarter segment
};

struct HydrogenSystem {
  int bus = 0;
  std::string water_node;
  double xi_we_p = 0.0;  // kg H2 per p.u.-h of electrolyzer power
  double xi_we_w = 0.0;  // m^3 water per kg H2
  double xi_fc_h = 0.0;  // p.u.-h per kg H2 through the fuel cell
  double p_we_min = 0.0, p_we_max = 0.0;  // p.u.
  double h_fc_min = 0.0, h_fc_max = 0.0;  // kg/h
  double s_hs_max = 0.0;  // inverter rating, p.u.
  double storage_min = 0.0, storage_max = 0.0, storage_init = 0.0;  // kg
};

struct CarbonChain {
  double capture_ratio_max = 0.0;  // fraction of generator CO2 capturable
  double xi_chi_c = 0.0;  // chemical-product units per kg CO2
  double rho_chi = 0.0;   // revenue per chemical-product unit
  double xi_chi_h = 8.0 / 44.0;  // kg H2 per kg CO2 (Sabatier stoichiometry)
  double c_s_cap = 0.0;   // per-step cap on stored carbon, kg/h
};

struct ObjectiveWeights {
  double alpha1 = 0.0;  // grid transfer
  double alpha2 = 0.0;  // diesel output
  double alpha3 = 0.0;  // emitted carbon
  double alpha4 = 0.0;  // stored carbon
};

struct Network {
  double base_mva = 1.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<DieselGenerator> diesel;
  std::vector<WindPark> wind;
  std::vector<WaterNode> water_nodes;
  std::vector<Pipe> pipes;
  std::vector<Tank> tanks;
  std::vector<Desalination> desalination;
  std::vector<HydrogenSystem> hydrogen;
  CarbonChain carbon;
  ObjectiveWeights weights;

  // Derived structure, filled by finalize().
  std::unordered_map<int, int> bus_index;            // bus id -> position
  std::unordered_map<std::string, int> node_index;   // water node id -> position
  int root_bus = 0;                                  // index into buses
  std::vector<int> parent_branch;   // per bus index: branch index feeding it, -1 at root
  std::vector<std::vector<int>> child_branches;  // per bus index: branches it feeds

  /// Rebuilds indexes/orientation and validates; returns all violations found
  /// (empty means the network is usable). Must be called after manual edits.
  std::vector<std::string> finalize();

  const Bus& bus(int id) const { return buses[bus_index.at(id)]; }
  const WaterNode& node(const std::string& id) const { return water_nodes[node_index.at(id)]; }
};

struct Scenario {
  int step_minutes = 60;
  int horizon_steps = 0;
  std::vector<double> wind_speed;                       // m/s, per step
  std::map<int, std::vector<double>> p_load, q_load;    // per bus id, p.u.
  std::map<std::string, std::vector<double>> water_demand;  // per node id, m^3/h
  std::vector<double> h2_demand;                        // kg/h

  double dt_h() const { return step_minutes / 60.0; }
  std::vector<std::string> validate(const Network& net) const;
};

/// Raw multi-column curve table keyed by header name, shared time axis in minutes.
struct RawCurves {
  std::vector<double> t_min;
  std::vector<std::string> names;                          // column order as in the file
  std::map<std::string, std::vector<double>> columns;
};

/// Parse a network document; throws ValidationError listing every violation.
Network load_network(const std::string& json_text);
Network load_network_file(const std::string& path);
std::string serialize_network(const Network& net);

/// Turbine curve: 0 outside [cut_in, cut_out], rated on [rated_speed, cut_out],
/// cubic ramp rated*(v^3 - ci^3)/(vr^3 - ci^3) in between.
double wind_to_power(double speed_mps, const WindPark& park);

/// Piecewise-linear resample of (t_min, values) at k*step_minutes + t0_min,
/// k = 0..horizon_steps-1. Throws if the horizon leaves the data span or
/// timestamps are not strictly increasing.
std::vector<double> interpolate_series(const std::vector<double>& t_min,
                                       const std::vector<double>& values, int step_minutes,
                                       int horizon_steps, double t0_min = 0.0);

/// Same sampling but wrapping periodically over the data span (used by the
/// rolling loop when the lookahead window passes the end of the day).
std::vector<double> interpolate_series_periodic(const std::vector<double>& t_min,
                                                const std::vector<double>& values,
                                                int step_minutes, int horizon_steps,
                                                double t0_min);

RawCurves load_curves_csv(const std::string& text);
RawCurves load_curves_file(const std::string& path);

/// Build a Scenario by resampling every recognized curve column
/// (wind_mps, p_load_<bus>, q_load_<bus>, wdem_<node>, h2_dem) on the grid
/// t0_min + k*step. Buses/nodes without a column get zero series. When
/// `periodic` is set the window may wrap past the end of the table.
Scenario make_scenario(const RawCurves& curves, const Network& net, int step_minutes,
                       int horizon_steps, double t0_min = 0.0, bool periodic = false);

}  // namespace ewh
