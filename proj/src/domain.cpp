#include "sovor/domain.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace sovor {

const char* to_string(WorkloadClass c) {
  switch (c) {
    case WorkloadClass::Training: return "Training";
    case WorkloadClass::Inference: return "Inference";
    case WorkloadClass::Batch: return "Batch";
  }
  return "Batch";
}

WorkloadClass workload_class_from_string(const std::string& s) {
  if (s == "Training") return WorkloadClass::Training;
  if (s == "Inference") return WorkloadClass::Inference;
  if (s == "Batch") return WorkloadClass::Batch;
  throw std::invalid_argument("unknown workload class '" + s + "'");
}

const char* to_string(Confidence c) {
  switch (c) {
    case Confidence::Fresh: return "Fresh";
    case Confidence::Interpolated: return "Interpolated";
    case Confidence::ForecastSubstituted: return "ForecastSubstituted";
    case Confidence::ConservativeBound: return "ConservativeBound";
    case Confidence::Hold: return "Hold";
  }
  return "Fresh";
}

Confidence confidence_from_string(const std::string& s) {
  if (s == "Fresh") return Confidence::Fresh;
  if (s == "Interpolated") return Confidence::Interpolated;
  if (s == "ForecastSubstituted") return Confidence::ForecastSubstituted;
  if (s == "ConservativeBound") return Confidence::ConservativeBound;
  if (s == "Hold") return Confidence::Hold;
  throw std::invalid_argument("unknown confidence tag '" + s + "'");
}

std::string site_param(const SiteId& id, const std::string& field) {
  return "site/" + id + "/" + field;
}

std::string link_param(const SiteId& from, const SiteId& to, const std::string& field) {
  return "link/" + from + "->" + to + "/" + field;
}

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

void check_site(const Site& s, std::vector<std::string>& out) {
  std::string at = "site '" + s.id + "': ";
  if (s.id.empty()) out.push_back("site with empty id");
  if (!finite_nonneg(s.power_cap_kw)) out.push_back(at + "power_cap must be finite and >= 0");
  if (!finite_nonneg(s.carbon_intensity_g_per_kwh))
    out.push_back(at + "carbon_intensity must be finite and >= 0");
  if (!finite_nonneg(s.water_intensity_l_per_kwh))
    out.push_back(at + "water_intensity must be finite and >= 0");
  if (!finite_nonneg(s.carbon_ceiling_g_per_kwh))
    out.push_back(at + "carbon_ceiling must be finite and >= 0");
  if (!finite_nonneg(s.water_permit_l_per_h))
    out.push_back(at + "water_permit must be finite and >= 0");
  if (std::isnan(s.thermal_cooling_cap_kw) || s.thermal_cooling_cap_kw < 0.0)
    out.push_back(at + "thermal_cooling_cap must be >= 0");
  if (!(s.ups_headroom_frac >= 0.0 && s.ups_headroom_frac < 1.0))
    out.push_back(at + "ups_headroom_frac must lie in [0, 1)");
  if (!finite_nonneg(s.onsite_gen_kw)) out.push_back(at + "onsite_gen must be finite and >= 0");
  if (!finite_nonneg(s.onsite_batt_kw)) out.push_back(at + "onsite_batt must be finite and >= 0");
}

void check_link(const Link& l, const std::set<SiteId>& site_ids, std::vector<std::string>& out) {
  std::string at = "link " + l.from + "->" + l.to + ": ";
  if (l.from == l.to) out.push_back(at + "endpoints must be distinct");
  if (!site_ids.count(l.from)) out.push_back(at + "unknown 'from' site '" + l.from + "'");
  if (!site_ids.count(l.to)) out.push_back(at + "unknown 'to' site '" + l.to + "'");
  if (!finite_nonneg(l.capacity_gbps)) out.push_back(at + "capacity must be finite and >= 0");
  if (!(std::isfinite(l.delay_ms) && l.delay_ms > 0.0))
    out.push_back(at + "delay must be finite and > 0");
  if (!finite_nonneg(l.energy_j_per_bit)) out.push_back(at + "energy_per_bit must be finite and >= 0");
  if (!(l.utilization >= 0.0 && l.utilization <= 1.0))
    out.push_back(at + "utilization must lie in [0, 1]");
}

}  // namespace

std::vector<std::string> validate_snapshot(const TelemetrySnapshot& snap) {
  std::vector<std::string> out;
  std::set<SiteId> ids;
  for (const auto& s : snap.sites) {
    if (!ids.insert(s.id).second) out.push_back("duplicate site id '" + s.id + "'");
    check_site(s, out);
  }
  std::set<EdgeKey> edges;
  for (const auto& l : snap.links) {
    if (!edges.insert({l.from, l.to}).second)
      out.push_back("duplicate link " + l.from + "->" + l.to);
    check_link(l, ids, out);
  }
  for (const auto& [param, conf] : snap.confidence) {
    (void)conf;
    if (param.rfind("site/", 0) == 0) {
      auto rest = param.substr(5);
      auto slash = rest.find('/');
      if (slash == std::string::npos || !ids.count(rest.substr(0, slash)))
        out.push_back("confidence entry references unknown site: " + param);
    } else if (param.rfind("link/", 0) == 0) {
      auto rest = param.substr(5);
      auto slash = rest.find('/');
      auto arrow = rest.find("->");
      if (slash == std::string::npos || arrow == std::string::npos || arrow > slash) {
        out.push_back("malformed link parameter key: " + param);
      } else {
        EdgeKey key{rest.substr(0, arrow), rest.substr(arrow + 2, slash - arrow - 2)};
        if (!edges.count(key)) out.push_back("confidence entry references unknown link: " + param);
      }
    } else {
      out.push_back("malformed parameter key: " + param);
    }
  }
  if (!(snap.forecast_horizon_min >= 0.0))
    out.push_back("forecast_horizon must be >= 0 minutes");
  return out;
}

std::vector<std::string> validate_system(const TelemetrySnapshot& snap,
                                         const std::vector<Workload>& workloads) {
  std::vector<std::string> out = validate_snapshot(snap);
  std::set<SiteId> ids;
  for (const auto& s : snap.sites) ids.insert(s.id);
  std::set<WorkloadId> wids;
  for (const auto& w : workloads) {
    std::string at = "workload '" + w.id + "': ";
    if (w.id.empty()) out.push_back("workload with empty id");
    if (!wids.insert(w.id).second) out.push_back("duplicate workload id '" + w.id + "'");
    if (!finite_nonneg(w.power_kw)) out.push_back(at + "power must be finite and >= 0");
    if (!finite_nonneg(w.traffic_gbps)) out.push_back(at + "traffic must be finite and >= 0");
    if (!finite_nonneg(w.state_size_gb)) out.push_back(at + "state_size must be finite and >= 0");
    if (!finite_nonneg(w.rehydration_ms)) out.push_back(at + "rehydration must be finite and >= 0");
    if (w.wl_class == WorkloadClass::Training && w.portable)
      out.push_back(at + "training workloads cannot be portable");
    if (!ids.count(w.dest)) out.push_back(at + "unknown dest site '" + w.dest + "'");
    for (const auto& [site, ms] : w.rehydration_overrides_ms) {
      if (!ids.count(site)) out.push_back(at + "rehydration override for unknown site '" + site + "'");
      if (!finite_nonneg(ms)) out.push_back(at + "rehydration override for '" + site + "' must be >= 0");
    }
  }
  return out;
}

}  // namespace sovor
