#pragma once
// Core domain types for the orchestration engine.
//
// Every physical quantity carries its unit in the field name. All types are
// plain value types with exact equality, so snapshots can be serialized,
// replayed and compared byte-for-byte in tests.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sovor {

using SiteId = std::string;
using WorkloadId = std::string;

// One-way latency budget in milliseconds. "Unbounded" is an explicit state,
// never a sentinel number, so arithmetic on budgets cannot silently overflow.
class LatencyBudget {
 public:
  LatencyBudget() = default;

  static LatencyBudget unbounded() { return LatencyBudget(); }
  static LatencyBudget millis(double ms) {
    if (!(ms >= 0.0)) throw std::invalid_argument("latency budget must be >= 0 ms");
    LatencyBudget b;
    b.unbounded_ = false;
    b.ms_ = ms;
    return b;
  }

  bool is_unbounded() const { return unbounded_; }
  double ms() const {
    if (unbounded_) throw std::logic_error("latency budget is unbounded");
    return ms_;
  }
  // True when a path of the given delay satisfies this budget.
  bool admits(double delay_ms) const { return unbounded_ || delay_ms <= ms_ + 1e-12; }

  bool operator==(const LatencyBudget&) const = default;

 private:
  bool unbounded_ = true;
  double ms_ = 0.0;
};

struct Site {
  SiteId id;
  double power_cap_kw = 0.0;              // P_i, grid feed plus on-site headroom
  double carbon_intensity_g_per_kwh = 0.0;  // gamma_i
  double water_intensity_l_per_kwh = 0.0;   // omega_i
  double carbon_ceiling_g_per_kwh = 0.0;    // regulatory ceiling on gamma_i
  double water_permit_l_per_h = 0.0;        // withdrawal permit
  double thermal_cooling_cap_kw = std::numeric_limits<double>::infinity();
  double ups_headroom_frac = 0.0;           // required spare fraction of P_i
  std::string region_tag;
  double onsite_gen_kw = 0.0;               // renewable generation now
  double onsite_batt_kw = 0.0;              // battery discharge headroom now

  bool operator==(const Site&) const = default;
};

struct Link {
  SiteId from;
  SiteId to;
  double capacity_gbps = 0.0;
  double delay_ms = 0.0;
  double energy_j_per_bit = 0.0;
  double utilization = 0.0;  // observed fraction in [0, 1]
  bool alarmed = false;

  bool operator==(const Link&) const = default;
};

enum class WorkloadClass { Training, Inference, Batch };

const char* to_string(WorkloadClass c);
WorkloadClass workload_class_from_string(const std::string& s);

struct Workload {
  WorkloadId id;
  double power_kw = 0.0;                 // p_k
  LatencyBudget latency_slo;             // lambda_k
  double traffic_gbps = 0.0;             // rho_k toward dest
  bool portable = true;                  // mu_k
  double state_size_gb = 0.0;            // sigma_k, moved on migration
  double rehydration_ms = 0.0;           // default restart cost at destination
  std::map<SiteId, double> rehydration_overrides_ms;
  WorkloadClass wl_class = WorkloadClass::Batch;
  SiteId dest;                           // demand-serving endpoint d(k)
  std::vector<std::string> locality_tags;

  // Rehydration cost when restarting at the given site.
  double rehydration_at(const SiteId& site) const {
    auto it = rehydration_overrides_ms.find(site);
    return it == rehydration_overrides_ms.end() ? rehydration_ms : it->second;
  }

  bool operator==(const Workload&) const = default;
};

enum class Confidence { Fresh, Interpolated, ForecastSubstituted, ConservativeBound, Hold };

const char* to_string(Confidence c);
Confidence confidence_from_string(const std::string& s);

// State estimate of the whole plant at one control instant. Parameter keys in
// `confidence` and `forecasts` use the canonical form
//   site/<id>/<field>   and   link/<from>-><to>/<field>.
struct TelemetrySnapshot {
  std::int64_t timestamp_s = 0;
  std::vector<Site> sites;
  std::vector<Link> links;
  std::map<std::string, Confidence> confidence;
  double forecast_horizon_min = 0.0;
  std::map<std::string, std::vector<double>> forecasts;  // one value per future cycle

  bool hold() const {
    for (const auto& [k, c] : confidence)
      if (c == Confidence::Hold) return true;
    return false;
  }

  const Site* find_site(const SiteId& id) const {
    for (const auto& s : sites)
      if (s.id == id) return &s;
    return nullptr;
  }
  const Link* find_link(const SiteId& from, const SiteId& to) const {
    for (const auto& l : links)
      if (l.from == from && l.to == to) return &l;
    return nullptr;
  }

  bool operator==(const TelemetrySnapshot&) const = default;
};

using EdgeKey = std::pair<SiteId, SiteId>;

// A routed share of one workload's traffic along one concrete path.
struct WeightedPath {
  std::vector<SiteId> nodes;  // placement site first, dest last
  double weight_gbps = 0.0;

  bool operator==(const WeightedPath&) const = default;
};

// Full solver output: the assignment plus the routed flows that prove it.
struct Placement {
  std::map<WorkloadId, SiteId> assignment;
  std::map<WorkloadId, std::vector<WeightedPath>> paths;
  std::map<WorkloadId, std::map<EdgeKey, double>> flows;
  double objective = 0.0;            // dimensionless, normalized
  double carbon_rate_g_per_h = 0.0;  // raw placement carbon
  double water_rate_l_per_h = 0.0;   // raw placement water
  double migration_g = 0.0;          // one-time transfer carbon of this transition

  bool empty() const { return assignment.empty(); }
  bool operator==(const Placement&) const = default;
};

// Parameter key helpers shared by telemetry, validation and reports.
std::string site_param(const SiteId& id, const std::string& field);
std::string link_param(const SiteId& from, const SiteId& to, const std::string& field);

// Structural checks on a snapshot alone. Returns human-readable violations;
// empty means valid.
std::vector<std::string> validate_snapshot(const TelemetrySnapshot& snap);

// Snapshot checks plus workload invariants and cross-references.
std::vector<std::string> validate_system(const TelemetrySnapshot& snap,
                                         const std::vector<Workload>& workloads);

}  // namespace sovor
