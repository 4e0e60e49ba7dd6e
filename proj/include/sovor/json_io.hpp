#pragma once
// JSON serialization for the domain types.
//
// Field names are the stable external contract:
//   Site:     id, power_cap, carbon_intensity, water_intensity, carbon_ceiling,
//             water_permit, thermal_cooling_cap, ups_headroom_frac, region_tag,
//             onsite_gen, onsite_batt
//   Link:     from, to, capacity, delay, energy_per_bit, utilization, alarmed
//   Workload: id, power, latency_slo, traffic, portable, state_size,
//             rehydration, rehydration_overrides, class, dest, locality_tags
//   Snapshot: timestamp, sites, links, confidence, forecast_horizon, forecasts
//
// latency_slo is either a number (milliseconds) or the string "unbounded".
// An absent thermal_cooling_cap means "uncapped".

#include <string>
#include <vector>

#include "sovor/domain.hpp"

#include <json.hpp>

namespace sovor {

nlohmann::json to_json(const Site& s);
nlohmann::json to_json(const Link& l);
nlohmann::json to_json(const Workload& w);
nlohmann::json to_json(const TelemetrySnapshot& snap);
nlohmann::json to_json(const Placement& p);

Site site_from_json(const nlohmann::json& j);
Link link_from_json(const nlohmann::json& j);
Workload workload_from_json(const nlohmann::json& j);
TelemetrySnapshot snapshot_from_json(const nlohmann::json& j);
Placement placement_from_json(const nlohmann::json& j);

// File helpers. Parse errors throw std::runtime_error naming the file and the
// offending field.
TelemetrySnapshot load_snapshot(const std::string& path);
std::vector<Workload> load_workloads(const std::string& path);
void save_json(const std::string& path, const nlohmann::json& j);
nlohmann::json load_json(const std::string& path);

}  // namespace sovor
