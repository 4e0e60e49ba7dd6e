#pragma once
// Digital-twin validation, the simulated plant, and the closed control loop
// observe -> estimate -> optimize -> validate -> execute.
//
// The twin re-checks a solver candidate against plant-physics margins the
// MILP does not carry: thermal cooling headroom, UPS power-stability
// headroom, post-placement link congestion including background utilization,
// and region policy tags. A rejected candidate is excluded with a no-good
// cut and the solve repeats within a bounded retry budget. Placements reach
// the plant only through an atomic transition that books transition carbon
// exactly once.

#include <cstdint>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sovor/bnb.hpp"
#include "sovor/formulation.hpp"
#include "sovor/fsor.hpp"
#include "sovor/telemetry.hpp"

namespace sovor {

struct TwinThresholds {
  double congestion_threshold = 0.9;  // max post-placement link utilization
  double ambient_derating = 1.0;      // scales thermal cooling capacity
};

struct TwinVerdict {
  bool thermal = true;
  bool power_stability = true;
  bool congestion = true;
  bool policy = true;
  std::vector<std::string> failures;  // human-readable, naming the offender

  bool pass() const { return thermal && power_stability && congestion && policy; }
};

TwinVerdict validate(const Placement& candidate, const TelemetrySnapshot& snap,
                     const std::vector<Workload>& workloads,
                     const TwinThresholds& thresholds = {});

// Simulated plant. Value semantics: transitions return the successor state,
// so a cycle either commits a whole new state or keeps the old one - there is
// no observable intermediate. Measured draws are recomputed from the
// placement at every transition and accrual.
struct PlantState {
  Placement placement;  // currently executing; empty before the first install
  std::map<SiteId, double> power_draw_kw;
  std::map<SiteId, double> water_draw_l_per_h;
  std::map<EdgeKey, double> link_flows_gbps;
  double cumulative_carbon_g = 0.0;
  double cumulative_water_l = 0.0;
  std::int64_t last_update_s = 0;

  // Atomic install of a validated placement: compute and network planes swap
  // together, and the transition carbon of every actual move is booked once.
  PlantState with_placement(const Placement& next, const TelemetrySnapshot& snap,
                            const std::vector<Workload>& workloads, std::int64_t ts) const;

  // One cycle of operation billed at this snapshot's intensity rates.
  PlantState accrue(const TelemetrySnapshot& snap, const std::vector<Workload>& workloads,
                    double cycle_s) const;
};

enum class CycleOutcome { Executed, RetainedWithAlert, RetainedWithCertificate, Hold };

const char* to_string(CycleOutcome o);

struct CycleRecord {
  std::int64_t timestamp_s = 0;
  CycleOutcome outcome = CycleOutcome::Hold;
  Placement placement;  // in force after the cycle
  double objective = 0.0;
  long solver_nodes = 0;
  double solve_seconds = 0.0;
  int twin_retries = 0;
  std::vector<std::string> twin_failures;
  std::optional<InfeasibilityCertificate> certificate;
  std::vector<std::string> alerts;
  double cycle_carbon_g = 0.0;  // accrued this cycle, transition carbon included
  double cycle_water_l = 0.0;
  double cumulative_carbon_g = 0.0;
  double cumulative_water_l = 0.0;
};

nlohmann::json to_json(const CycleRecord& rec);

struct LoopConfig {
  BuildConfig build;
  Relaxation relaxed;  // constraint groups this deployment runs without
  FreshnessPolicy freshness;
  TwinThresholds twin;
  double cycle_s = 300.0;
  double delta_minutes = 30.0;  // estimator forecast horizon
  double solver_budget_s = 60.0;
  int max_twin_retries = 5;
  double iis_budget_s = 0.0;
  bool twin_enabled = true;  // comparison baselines run without the twin
  bool alerts_to_stderr = true;
};

class ControlLoop {
 public:
  ControlLoop(TelemetrySnapshot base, std::vector<Workload> workloads, LoopConfig config);

  // One full cycle against the sorted reading stream. Every call returns
  // exactly one record with outcome Executed, RetainedWithAlert,
  // RetainedWithCertificate or Hold, and the record is appended to the trail.
  CycleRecord run_cycle(const std::vector<RawReading>& readings, std::int64_t cycle_ts);

  const PlantState& plant() const { return plant_; }
  const std::vector<CycleRecord>& records() const { return records_; }
  const std::vector<Workload>& workloads() const { return workloads_; }

 private:
  TelemetrySnapshot base_;
  std::vector<Workload> workloads_;
  LoopConfig config_;
  PlantState plant_;
  std::vector<TelemetrySnapshot> history_;  // ingested non-hold snapshots
  std::vector<CycleRecord> records_;
};

}  // namespace sovor
