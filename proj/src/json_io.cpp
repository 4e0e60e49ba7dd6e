#include "sovor/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace sovor {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end())
    throw std::runtime_error(ctx + ": missing field '" + key + "'");
  return *it;
}

double num(const json& j, const char* key, const std::string& ctx) {
  const json& v = require(j, key, ctx);
  if (!v.is_number()) throw std::runtime_error(ctx + ": field '" + key + "' must be a number");
  return v.get<double>();
}

std::string str(const json& j, const char* key, const std::string& ctx) {
  const json& v = require(j, key, ctx);
  if (!v.is_string()) throw std::runtime_error(ctx + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

json to_json(const Site& s) {
  json j{{"id", s.id},
         {"power_cap", s.power_cap_kw},
         {"carbon_intensity", s.carbon_intensity_g_per_kwh},
         {"water_intensity", s.water_intensity_l_per_kwh},
         {"carbon_ceiling", s.carbon_ceiling_g_per_kwh},
         {"water_permit", s.water_permit_l_per_h},
         {"ups_headroom_frac", s.ups_headroom_frac},
         {"region_tag", s.region_tag},
         {"onsite_gen", s.onsite_gen_kw},
         {"onsite_batt", s.onsite_batt_kw}};
  if (std::isfinite(s.thermal_cooling_cap_kw)) j["thermal_cooling_cap"] = s.thermal_cooling_cap_kw;
  return j;
}

Site site_from_json(const json& j) {
  Site s;
  s.id = str(j, "id", "site");
  std::string ctx = "site '" + s.id + "'";
  s.power_cap_kw = num(j, "power_cap", ctx);
  s.carbon_intensity_g_per_kwh = num(j, "carbon_intensity", ctx);
  s.water_intensity_l_per_kwh = num(j, "water_intensity", ctx);
  s.carbon_ceiling_g_per_kwh = num(j, "carbon_ceiling", ctx);
  s.water_permit_l_per_h = num(j, "water_permit", ctx);
  if (j.contains("thermal_cooling_cap") && !j["thermal_cooling_cap"].is_null())
    s.thermal_cooling_cap_kw = num(j, "thermal_cooling_cap", ctx);
  if (j.contains("ups_headroom_frac")) s.ups_headroom_frac = num(j, "ups_headroom_frac", ctx);
  if (j.contains("region_tag")) s.region_tag = str(j, "region_tag", ctx);
  if (j.contains("onsite_gen")) s.onsite_gen_kw = num(j, "onsite_gen", ctx);
  if (j.contains("onsite_batt")) s.onsite_batt_kw = num(j, "onsite_batt", ctx);
  return s;
}

json to_json(const Link& l) {
  return json{{"from", l.from},
              {"to", l.to},
              {"capacity", l.capacity_gbps},
              {"delay", l.delay_ms},
              {"energy_per_bit", l.energy_j_per_bit},
              {"utilization", l.utilization},
              {"alarmed", l.alarmed}};
}

Link link_from_json(const json& j) {
  Link l;
  l.from = str(j, "from", "link");
  l.to = str(j, "to", "link");
  std::string ctx = "link " + l.from + "->" + l.to;
  l.capacity_gbps = num(j, "capacity", ctx);
  l.delay_ms = num(j, "delay", ctx);
  l.energy_j_per_bit = num(j, "energy_per_bit", ctx);
  if (j.contains("utilization")) l.utilization = num(j, "utilization", ctx);
  if (j.contains("alarmed")) {
    if (!j["alarmed"].is_boolean()) throw std::runtime_error(ctx + ": field 'alarmed' must be a bool");
    l.alarmed = j["alarmed"].get<bool>();
  }
  return l;
}

json to_json(const Workload& w) {
  json slo;
  if (w.latency_slo.is_unbounded())
    slo = "unbounded";
  else
    slo = w.latency_slo.ms();
  json overrides = json::object();
  for (const auto& [site, ms] : w.rehydration_overrides_ms) overrides[site] = ms;
  return json{{"id", w.id},
              {"power", w.power_kw},
              {"latency_slo", slo},
              {"traffic", w.traffic_gbps},
              {"portable", w.portable},
              {"state_size", w.state_size_gb},
              {"rehydration", w.rehydration_ms},
              {"rehydration_overrides", overrides},
              {"class", to_string(w.wl_class)},
              {"dest", w.dest},
              {"locality_tags", w.locality_tags}};
}

Workload workload_from_json(const json& j) {
  Workload w;
  w.id = str(j, "id", "workload");
  std::string ctx = "workload '" + w.id + "'";
  w.power_kw = num(j, "power", ctx);
  const json& slo = require(j, "latency_slo", ctx);
  if (slo.is_number())
    w.latency_slo = LatencyBudget::millis(slo.get<double>());
  else if (slo.is_null() || (slo.is_string() && slo.get<std::string>() == "unbounded"))
    w.latency_slo = LatencyBudget::unbounded();
  else
    throw std::runtime_error(ctx + ": latency_slo must be a number or \"unbounded\"");
  w.traffic_gbps = num(j, "traffic", ctx);
  const json& portable = require(j, "portable", ctx);
  if (!portable.is_boolean()) throw std::runtime_error(ctx + ": field 'portable' must be a bool");
  w.portable = portable.get<bool>();
  w.state_size_gb = num(j, "state_size", ctx);
  w.rehydration_ms = num(j, "rehydration", ctx);
  if (j.contains("rehydration_overrides")) {
    const json& o = j["rehydration_overrides"];
    if (!o.is_object()) throw std::runtime_error(ctx + ": rehydration_overrides must be an object");
    for (auto it = o.begin(); it != o.end(); ++it)
      w.rehydration_overrides_ms[it.key()] = it.value().get<double>();
  }
  w.wl_class = workload_class_from_string(str(j, "class", ctx));
  w.dest = str(j, "dest", ctx);
  if (j.contains("locality_tags")) {
    const json& tags = j["locality_tags"];
    if (!tags.is_array()) throw std::runtime_error(ctx + ": locality_tags must be an array");
    for (const auto& t : tags) w.locality_tags.push_back(t.get<std::string>());
  }
  return w;
}

json to_json(const TelemetrySnapshot& snap) {
  json sites = json::array();
  for (const auto& s : snap.sites) sites.push_back(to_json(s));
  json links = json::array();
  for (const auto& l : snap.links) links.push_back(to_json(l));
  json conf = json::object();
  for (const auto& [k, c] : snap.confidence) conf[k] = to_string(c);
  json forecasts = json::object();
  for (const auto& [k, v] : snap.forecasts) forecasts[k] = v;
  return json{{"timestamp", snap.timestamp_s}, {"sites", sites},
              {"links", links},               {"confidence", conf},
              {"forecast_horizon", snap.forecast_horizon_min}, {"forecasts", forecasts}};
}

TelemetrySnapshot snapshot_from_json(const json& j) {
  TelemetrySnapshot snap;
  std::string ctx = "snapshot";
  const json& ts = require(j, "timestamp", ctx);
  if (!ts.is_number()) throw std::runtime_error("snapshot: 'timestamp' must be a number");
  snap.timestamp_s = ts.get<std::int64_t>();
  for (const auto& js : require(j, "sites", ctx)) snap.sites.push_back(site_from_json(js));
  for (const auto& jl : require(j, "links", ctx)) snap.links.push_back(link_from_json(jl));
  if (j.contains("confidence"))
    for (auto it = j["confidence"].begin(); it != j["confidence"].end(); ++it)
      snap.confidence[it.key()] = confidence_from_string(it.value().get<std::string>());
  if (j.contains("forecast_horizon")) snap.forecast_horizon_min = j["forecast_horizon"].get<double>();
  if (j.contains("forecasts"))
    for (auto it = j["forecasts"].begin(); it != j["forecasts"].end(); ++it)
      snap.forecasts[it.key()] = it.value().get<std::vector<double>>();
  return snap;
}

json to_json(const Placement& p) {
  json assignment = json::object();
  for (const auto& [w, s] : p.assignment) assignment[w] = s;
  json paths = json::object();
  for (const auto& [w, list] : p.paths) {
    json arr = json::array();
    for (const auto& wp : list) arr.push_back(json{{"nodes", wp.nodes}, {"weight", wp.weight_gbps}});
    paths[w] = arr;
  }
  json flows = json::object();
  for (const auto& [w, fmap] : p.flows) {
    json per = json::object();
    for (const auto& [edge, f] : fmap) per[edge.first + "->" + edge.second] = f;
    flows[w] = per;
  }
  return json{{"assignment", assignment},
              {"paths", paths},
              {"flows", flows},
              {"objective", p.objective},
              {"carbon_rate_g_per_h", p.carbon_rate_g_per_h},
              {"water_rate_l_per_h", p.water_rate_l_per_h},
              {"migration_g", p.migration_g}};
}

Placement placement_from_json(const json& j) {
  Placement p;
  std::string ctx = "placement";
  for (auto it = require(j, "assignment", ctx).begin(); it != j["assignment"].end(); ++it)
    p.assignment[it.key()] = it.value().get<std::string>();
  if (j.contains("paths"))
    for (auto it = j["paths"].begin(); it != j["paths"].end(); ++it) {
      std::vector<WeightedPath> list;
      for (const auto& e : it.value()) {
        WeightedPath wp;
        wp.nodes = e.at("nodes").get<std::vector<std::string>>();
        wp.weight_gbps = e.at("weight").get<double>();
        list.push_back(std::move(wp));
      }
      p.paths[it.key()] = std::move(list);
    }
  if (j.contains("flows"))
    for (auto it = j["flows"].begin(); it != j["flows"].end(); ++it) {
      std::map<EdgeKey, double> fmap;
      for (auto fe = it.value().begin(); fe != it.value().end(); ++fe) {
        auto arrow = fe.key().find("->");
        if (arrow == std::string::npos)
          throw std::runtime_error("placement: malformed flow edge key '" + fe.key() + "'");
        fmap[{fe.key().substr(0, arrow), fe.key().substr(arrow + 2)}] = fe.value().get<double>();
      }
      p.flows[it.key()] = std::move(fmap);
    }
  if (j.contains("objective")) p.objective = j["objective"].get<double>();
  if (j.contains("carbon_rate_g_per_h")) p.carbon_rate_g_per_h = j["carbon_rate_g_per_h"].get<double>();
  if (j.contains("water_rate_l_per_h")) p.water_rate_l_per_h = j["water_rate_l_per_h"].get<double>();
  if (j.contains("migration_g")) p.migration_g = j["migration_g"].get<double>();
  return p;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

TelemetrySnapshot load_snapshot(const std::string& path) {
  try {
    return snapshot_from_json(load_json(path));
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::vector<Workload> load_workloads(const std::string& path) {
  json j = load_json(path);
  const json* arr = &j;
  if (j.is_object()) {
    if (!j.contains("workloads"))
      throw std::runtime_error(path + ": expected a 'workloads' array");
    arr = &j["workloads"];
  }
  std::vector<Workload> out;
  try {
    for (const auto& je : *arr) out.push_back(workload_from_json(je));
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return out;
}

void save_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

}  // namespace sovor
