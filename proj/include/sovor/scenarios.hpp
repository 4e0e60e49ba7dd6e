#pragma once
// Reference scenarios, the three-configuration comparison harness, and the
// randomized solver benchmark.
//
// A: five sites in one zone with short delays and ample headroom everywhere;
//    sustainability-aware and compute-only placement should land within a few
//    percent of each other.
// B: eight sites across a busy zone and a remote clean zone (zone carbon
//    means separated by at least 2x, remote links 25-35 ms). Tight-SLO
//    inference must stay at its demand center while delay-tolerant work rides
//    to the clean zone; ignoring the network breaks the inference SLO.
// C: six sites where a mid-horizon water-stress window cuts two permits hard
//    enough that no placement fits while the window is active.
//
// Comparisons are scored on ground truth: the impact integral prices the
// placement in force against the true ingested snapshots under one
// normalization window shared by all configurations, and SLO checks use true
// graph delays, regardless of what each configuration's optimizer was told.

#include <cstdint>
#include <json.hpp>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sovor/twin.hpp"

namespace sovor {

enum class ScenarioId { A, B, C };

const char* to_string(ScenarioId s);
ScenarioId scenario_from_string(const std::string& s);

// Every number that shapes a scenario, so a run can be archived and replayed
// from its serialized spec alone.
struct ScenarioSpec {
  ScenarioId id = ScenarioId::A;
  std::uint64_t seed = 1;
  double cycle_s = 300.0;
  double horizon_s = 7.0 * 86400.0;
  double alpha = 0.5;
  int hop_limit = 3;
  double solver_budget_s = 60.0;

  double carbon_noise_sd = 10.0;
  double diurnal_amplitude_frac = 0.15;  // of the site's carbon mean

  // Single-zone shape (A, and the fleet means of C).
  double local_mean_g_per_kwh = 350.0;
  double local_delay_min_ms = 2.0, local_delay_max_ms = 8.0;
  double relaxed_slo_ms = 25.0;

  // Two-zone shape (B).
  double busy_mean_g_per_kwh = 480.0;
  double clean_mean_g_per_kwh = 120.0;
  double remote_delay_min_ms = 25.0, remote_delay_max_ms = 35.0;
  double tight_slo_ms = 3.0;

  // Stress window (C), bounds as fractions of the horizon.
  double stress_begin_frac = 1.0 / 3.0, stress_end_frac = 2.0 / 3.0;
  double stress_permit_factor = 0.2;
  double stress_intensity_factor = 1.2;

  bool operator==(const ScenarioSpec&) const = default;
};

ScenarioSpec default_spec(ScenarioId id, std::uint64_t seed = 1);

nlohmann::json to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_spec_from_json(const nlohmann::json& j);

// Materialized scenario: fleet, demand and the telemetry generator spec.
struct Scenario {
  ScenarioSpec spec;
  TelemetrySnapshot base;
  std::vector<Workload> workloads;
  StreamSpec stream;
  double stress_begin_s = 0.0, stress_end_s = 0.0;  // zero-width unless C
};

Scenario build_scenario(const ScenarioSpec& spec);

enum class Configuration { Baseline, ComputeOnly, Joint };

const char* to_string(Configuration c);
Configuration configuration_from_string(const std::string& s);

// One control-loop run of a scenario under one configuration, scored on
// ground truth as described above.
struct ConfigurationRun {
  Configuration configuration = Configuration::Joint;
  std::uint64_t seed = 0;
  int cycles = 0;
  double impact = 0.0;  // normalized environmental burden, summed over cycles
  double cumulative_carbon_g = 0.0;
  double cumulative_water_l = 0.0;
  int slo_violations = 0;     // workload-cycles past their budget, true delays
  int infeasible_cycles = 0;  // cycles retained with a certificate
  int hold_cycles = 0;
  std::map<WorkloadClass, double> mean_latency_ms;  // true served delay
  std::vector<char> infeasible_by_cycle;            // 1 where certified infeasible
  std::vector<CycleRecord> trace;
};

ConfigurationRun run_configuration(const Scenario& scenario, Configuration configuration);

struct ComparativeReport {
  ScenarioSpec spec;  // shape shared by all runs; per-run seeds vary
  std::vector<std::uint64_t> seeds;
  std::vector<ConfigurationRun> runs;  // grouped by seed, then configuration
};

// Every configuration for every seed on the spec's scenario shape.
ComparativeReport run_scenario(const ScenarioSpec& spec, const std::vector<std::uint64_t>& seeds);

std::string report_csv(const ComparativeReport& report);
nlohmann::json to_json(const ComparativeReport& report, bool include_traces = false);

// Randomized feasible instance at a given scale: complete digraph, uniform
// site and workload parameters, demand scaled to a comfortable fraction of
// eligible capacity so the instance always admits a placement.
struct BenchInstance {
  TelemetrySnapshot snap;
  std::vector<Workload> workloads;
};

BenchInstance random_bench_instance(int num_sites, int num_workloads, std::uint64_t seed);

struct BenchRow {
  std::string label = "uniform";
  int num_sites = 0;
  int num_workloads = 0;
  int binaries_post_gate = 0;  // max across instances
  int continuous = 0;          // nominal per-arc flow variables
  int instances = 0;
  int optimal_count = 0;
  double min_s = 0.0, median_s = 0.0, mean_s = 0.0, max_s = 0.0;
};

// Solves `instances_per_scale` random instances per scale and aggregates wall
// times. `rel_gap` is forwarded to the solver: the largest scales sit on
// near-degenerate packing bands where closing the last ~1e-4 of relative gap
// costs orders of magnitude more nodes than reaching it.
std::vector<BenchRow> run_bench(const std::vector<std::pair<int, int>>& scales,
                                int instances_per_scale, double budget_s, std::uint64_t seed,
                                double rel_gap = 1e-4);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace sovor
