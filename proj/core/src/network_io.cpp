#include <fstream>
#include <set>
#include <sstream>

#include "ewh/model.hpp"
#include "json.hpp"

namespace ewh {

using nlohmann::json;

namespace {

// Strict field reader: every key must be known, required keys must be present.
class Obj {
 public:
  Obj(const json& j, std::string where, std::vector<std::string>& bad)
      : j_(j), where_(std::move(where)), bad_(bad) {
    if (!j.is_object()) bad_.push_back(where_ + ": expected an object");
  }
  ~Obj() {
    if (!j_.is_object()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) bad_.push_back(where_ + ": unknown key '" + it.key() + "'");
  }

  double num(const std::string& key, bool required = true, double dflt = 0.0) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) {
      if (required) bad_.push_back(where_ + ": missing key '" + key + "'");
      return dflt;
    }
    if (!j_[key].is_number()) {
      bad_.push_back(where_ + ": key '" + key + "' must be a number");
      return dflt;
    }
    return j_[key].get<double>();
  }
  int integer(const std::string& key, bool required = true, int dflt = 0) {
    return static_cast<int>(num(key, required, dflt));
  }
  std::string str(const std::string& key, bool required = true, std::string dflt = "") {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) {
      if (required) bad_.push_back(where_ + ": missing key '" + key + "'");
      return dflt;
    }
    if (!j_[key].is_string()) {
      bad_.push_back(where_ + ": key '" + key + "' must be a string");
      return dflt;
    }
    return j_[key].get<std::string>();
  }
  const json* sub(const std::string& key, bool required = true) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) {
      if (required) bad_.push_back(where_ + ": missing key '" + key + "'");
      return nullptr;
    }
    return &j_[key];
  }

 private:
  const json& j_;
  std::string where_;
  std::vector<std::string>& bad_;
  std::set<std::string> seen_;
};

template <typename Fn>
void each(const json* arr, const std::string& where, std::vector<std::string>& bad, Fn fn) {
  if (!arr) return;
  if (!arr->is_array()) {
    bad.push_back(where + ": expected an array");
    return;
  }
  for (size_t i = 0; i < arr->size(); ++i) fn((*arr)[i], where + strfmt("[%zu]", i));
}

}  // namespace

Network load_network(const std::string& text) {
  std::vector<std::string> bad;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError({std::string("network: JSON parse error: ") + e.what()});
  }
  Network net;
  {
    Obj root(doc, "network", bad);
    net.base_mva = root.num("base_mva", false, 1.0);

    each(root.sub("buses"), "buses", bad, [&](const json& j, const std::string& w) {
      Obj o(j, w, bad);
      Bus b;
      b.id = o.integer("id");
      b.v_min = o.num("v_min", false, 0.81);
      b.v_max = o.num("v_max", false, 1.21);
      net.buses.push_back(b);
    });
    each(root.sub("branches"), "branches", bad, [&](const json& j, const std::string& w) {
      Obj o(j, w, bad);
      Branch b;
      b.from = o.integer("from");
      b.to = o.integer("to");
      b.r = o.num("r");
      b.x = o.num("x");
      b.s_max = o.num("s_max");
      b.i_min = o.num("i_min", false, 0.0);
      b.i_max = o.num("i_max", false, 0.0);
      net.branches.push_back(b);
    });
    each(root.sub("diesel", false), "diesel", bad, [&](const json& j, const std::string& w) {
      Obj o(j, w, bad);
      DieselGenerator d;
      d.bus = o.integer("bus");
      d.p_min = o.num("p_min");
      d.p_max = o.num("p_max");
      d.q_min = o.num("q_min");
      d.q_max = o.num("q_max");
      d.carbon_factor = o.num("carbon_factor");
      net.diesel.push_back(d);
    });
    each(root.sub("wind", false), "wind", bad, [&](const json& j, const std::string& w) {
      Obj o(j, w, bad);
      WindPark p;
      p.bus = o.integer("bus");
      p.rated_power = o.num("rated_power");
      p.cut_in = o.num("cut_in");
      p.rated_speed = o.num("rated_speed");
      p.cut_out = o.num("cut_out");
      p.q_sw_max = o.num("q_sw_max", false, 0.0);
      net.wind.push_back(p);
    });

    // The water network lives under one key: nodes plus links.
    if (const json* water = root.sub("pipes", false)) {
      Obj o(*water, "pipes", bad);
      each(o.sub("nodes"), "pipes.nodes", bad, [&](const json& j, const std::string& w) {
        Obj n(j, w, bad);
        WaterNode wn;
        wn.id = n.str("id");
        wn.head_min = n.num("head_min");
        wn.head_max = n.num("head_max");
        wn.elevation = n.num("elevation", false, 0.0);
        net.water_nodes.push_back(wn);
      });
      each(o.sub("links"), "pipes.links", bad, [&](const json& j, const std::string& w) {
        Obj l(j, w, bad);
        Pipe p;
        p.id = l.str("id");
        p.from = l.str("from");
        p.to = l.str("to");
        std::string kind = l.str("kind", false, "regular");
        if (kind == "regular")
          p.kind = PipeKind::Regular;
        else if (kind == "pump")
          p.kind = PipeKind::Pump;
        else if (kind == "prv")
          p.kind = PipeKind::Prv;
        else
          bad.push_back(w + ": unknown pipe kind '" + kind + "'");
        p.r_w = l.num("r_w");
        p.f_min = l.num("f_min");
        p.f_max = l.num("f_max");
        p.h_offset = l.num("h_offset", false, 0.0);
        p.prv_limit = l.num("prv_limit", p.kind == PipeKind::Prv, 0.0);
        if (const json* pj = l.sub("pump", p.kind == PipeKind::Pump)) {
          Obj po(*pj, w + ".pump", bad);
          PumpParams pp;
          pp.head_gain_max = po.num("head_gain_max");
          pp.a1 = po.num("a1");
          pp.a0 = po.num("a0");
          pp.efficiency = po.num("efficiency");
          pp.power_bus = po.integer("power_bus");
          p.pump = pp;
        }
        net.pipes.push_back(p);
      });
    }
    each(root.sub("tanks", false), "tanks", bad, [&](const json& j, const std::string& w) {
      Obj o(j, w, bad);
      Tank t;
      t.node = o.str("node");
      t.area = o.num("area");
      t.v_min = o.num("v_min");
      t.v_max = o.num("v_max");
      t.v_init = o.num("v_init");
      t.flow_min = o.num("flow_min");
      t.flow_max = o.num("flow_max");
      net.tanks.push_back(t);
    });
    each(root.sub("desalination", false), "desalination", bad,
         [&](const json& j, const std::string& w) {
           Obj o(j, w, bad);
           Desalination d;
           d.node = o.str("node");
           d.power_bus = o.integer("power_bus");
           d.f_max = o.num("f_max");
           if (const json* seg = o.sub("seg_energy")) {
             if (!seg->is_array() || seg->size() != 4)
               bad.push_back(w + ": seg_energy must hold exactly 4 values");
             else
               for (int i = 0; i < 4; ++i) d.seg_energy[i] = (*seg)[i].get<double>();
           }
           net.desalination.push_back(d);
         });
    each(root.sub("hydrogen", false), "hydrogen", bad, [&](const json& j, const std::string& w) {
      Obj o(j, w, bad);
      HydrogenSystem h;
      h.bus = o.integer("bus");
      h.water_node = o.str("water_node");
      h.xi_we_p = o.num("xi_we_p");
      h.xi_we_w = o.num("xi_we_w");
      h.xi_fc_h = o.num("xi_fc_h");
      h.p_we_min = o.num("p_we_min");
      h.p_we_max = o.num("p_we_max");
      h.h_fc_min = o.num("h_fc_min");
      h.h_fc_max = o.num("h_fc_max");
      h.s_hs_max = o.num("s_hs_max");
      h.storage_min = o.num("storage_min");
      h.storage_max = o.num("storage_max");
      h.storage_init = o.num("storage_init");
      net.hydrogen.push_back(h);
    });
    if (const json* cj = root.sub("carbon", false)) {
      Obj o(*cj, "carbon", bad);
      net.carbon.capture_ratio_max = o.num("capture_ratio_max");
      net.carbon.xi_chi_c = o.num("xi_chi_c");
      net.carbon.rho_chi = o.num("rho_chi");
      net.carbon.xi_chi_h = o.num("xi_chi_h", false, 8.0 / 44.0);
      net.carbon.c_s_cap = o.num("c_s_cap", false, 0.0);
    }
    if (const json* wj = root.sub("weights", false)) {
      Obj o(*wj, "weights", bad);
      net.weights.alpha1 = o.num("alpha1");
      net.weights.alpha2 = o.num("alpha2");
      net.weights.alpha3 = o.num("alpha3");
      net.weights.alpha4 = o.num("alpha4");
    }
  }
  auto more = net.finalize();
  bad.insert(bad.end(), more.begin(), more.end());
  if (!bad.empty()) throw ValidationError(bad);
  return net;
}

Network load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"cannot open network file " + path});
  std::stringstream ss;
  ss << in.rdbuf();
  return load_network(ss.str());
}

std::string serialize_network(const Network& net) {
  json doc;
  doc["base_mva"] = net.base_mva;
  doc["buses"] = json::array();
  for (const auto& b : net.buses)
    doc["buses"].push_back({{"id", b.id}, {"v_min", b.v_min}, {"v_max", b.v_max}});
  doc["branches"] = json::array();
  for (const auto& b : net.branches)
    doc["branches"].push_back({{"from", b.from},
                               {"to", b.to},
                               {"r", b.r},
                               {"x", b.x},
                               {"s_max", b.s_max},
                               {"i_min", b.i_min},
                               {"i_max", b.i_max}});
  doc["diesel"] = json::array();
  for (const auto& d : net.diesel)
    doc["diesel"].push_back({{"bus", d.bus},
                             {"p_min", d.p_min},
                             {"p_max", d.p_max},
                             {"q_min", d.q_min},
                             {"q_max", d.q_max},
                             {"carbon_factor", d.carbon_factor}});
  doc["wind"] = json::array();
  for (const auto& w : net.wind)
    doc["wind"].push_back({{"bus", w.bus},
                           {"rated_power", w.rated_power},
                           {"cut_in", w.cut_in},
                           {"rated_speed", w.rated_speed},
                           {"cut_out", w.cut_out},
                           {"q_sw_max", w.q_sw_max}});
  json nodes = json::array();
  for (const auto& n : net.water_nodes)
    nodes.push_back({{"id", n.id},
                     {"head_min", n.head_min},
                     {"head_max", n.head_max},
                     {"elevation", n.elevation}});
  json links = json::array();
  for (const auto& p : net.pipes) {
    json pj{{"id", p.id},
            {"from", p.from},
            {"to", p.to},
            {"kind", p.kind == PipeKind::Regular ? "regular"
                     : p.kind == PipeKind::Pump  ? "pump"
                                                 : "prv"},
            {"r_w", p.r_w},
            {"f_min", p.f_min},
            {"f_max", p.f_max},
            {"h_offset", p.h_offset}};
    if (p.kind == PipeKind::Prv) pj["prv_limit"] = p.prv_limit;
    if (p.pump)
      pj["pump"] = {{"head_gain_max", p.pump->head_gain_max},
                    {"a1", p.pump->a1},
                    {"a0", p.pump->a0},
                    {"efficiency", p.pump->efficiency},
                    {"power_bus", p.pump->power_bus}};
    links.push_back(pj);
  }
  doc["pipes"] = {{"nodes", nodes}, {"links", links}};
  doc["tanks"] = json::array();
  for (const auto& t : net.tanks)
    doc["tanks"].push_back({{"node", t.node},
                            {"area", t.area},
                            {"v_min", t.v_min},
                            {"v_max", t.v_max},
                            {"v_init", t.v_init},
                            {"flow_min", t.flow_min},
                            {"flow_max", t.flow_max}});
  doc["desalination"] = json::array();
  for (const auto& d : net.desalination)
    doc["desalination"].push_back(
        {{"node", d.node},
         {"power_bus", d.power_bus},
         {"f_max", d.f_max},
         {"seg_energy", {d.seg_energy[0], d.seg_energy[1], d.seg_energy[2], d.seg_energy[3]}}});
  doc["hydrogen"] = json::array();
  for (const auto& h : net.hydrogen)
    doc["hydrogen"].push_back({{"bus", h.bus},
                               {"water_node", h.water_node},
                               {"xi_we_p", h.xi_we_p},
                               {"xi_we_w", h.xi_we_w},
                               {"xi_fc_h", h.xi_fc_h},
                               {"p_we_min", h.p_we_min},
                               {"p_we_max", h.p_we_max},
                               {"h_fc_min", h.h_fc_min},
                               {"h_fc_max", h.h_fc_max},
                               {"s_hs_max", h.s_hs_max},
                               {"storage_min", h.storage_min},
                               {"storage_max", h.storage_max},
                               {"storage_init", h.storage_init}});
  doc["carbon"] = {{"capture_ratio_max", net.carbon.capture_ratio_max},
                   {"xi_chi_c", net.carbon.xi_chi_c},
                   {"rho_chi", net.carbon.rho_chi},
                   {"xi_chi_h", net.carbon.xi_chi_h},
                   {"c_s_cap", net.carbon.c_s_cap}};
  doc["weights"] = {{"alpha1", net.weights.alpha1},
                    {"alpha2", net.weights.alpha2},
                    {"alpha3", net.weights.alpha3},
                    {"alpha4", net.weights.alpha4}};
  return doc.dump(2) + "\n";
}

}  // namespace ewh
