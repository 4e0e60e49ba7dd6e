#pragma once
// Placement-and-routing MILP construction.
//
// Decision variables: binary x[site,workload] placements plus continuous
// per-path weights. Latency is enforced path-wise: a candidate site is only
// admissible when it is within the (migration-tightened) budget, and every
// enumerated path individually satisfies that budget, so any feasible routing
// meets the SLO by construction. Per-arc flows are reconstructed from path
// weights for reporting and verification.
//
// Constraint rows and gate decisions carry labeled groups (class x index) so
// infeasibility diagnosis can relax them one group at a time.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sovor/domain.hpp"
#include "sovor/lp.hpp"
#include "sovor/routing.hpp"

namespace sovor {

inline constexpr double kJoulesPerKwh = 3.6e6;
inline constexpr double kBitsPerGb = 8e9;  // bits in one gigabyte

enum class ConstraintClass { CarbonGate, WaterCap, PowerCap, LatencyGate, LinkCap, Assignment, FlowBalance, NoGood };

const char* to_string(ConstraintClass c);

// One relaxable unit of the constraint system: a class plus the site id,
// workload id or "from->to" edge key it is indexed by.
struct GroupId {
  ConstraintClass cls;
  std::string key;

  std::string label() const;
  auto operator<=>(const GroupId&) const = default;
};

enum class GateReason { Carbon, Latency, Portability, SingletonPower, SingletonWater };

const char* to_string(GateReason r);

struct GateEntry {
  SiteId site;
  WorkloadId workload;
  GateReason reason;
  double lhs = 0.0;  // offending value (intensity, delay, power, ...)
  double rhs = 0.0;  // the bound it exceeded
};

// Min-max scaling window over effective carbon and water intensity observed
// across sites over the planning horizon. A degenerate window (max == min)
// normalizes to zero.
struct NormalizationWindow {
  double gamma_min = 0.0, gamma_max = 0.0;
  double omega_min = 0.0, omega_max = 0.0;
  bool initialized = false;

  static NormalizationWindow from_snapshot(const TelemetrySnapshot& snap);
  void absorb(const TelemetrySnapshot& snap);
  void absorb_values(double gamma_eff, double omega);
  double norm_gamma(double gamma_eff) const;
  double norm_omega(double omega) const;

  bool operator==(const NormalizationWindow&) const = default;
};

enum class ObjectiveMode { Environmental, TotalLatency };

struct BuildConfig {
  double alpha = 1.0;  // carbon weight; water weight is 1 - alpha
  int hop_limit = 3;
  std::optional<NormalizationWindow> window;  // default: current snapshot
  std::optional<Placement> incumbent;         // enables migration semantics
  ObjectiveMode objective_mode = ObjectiveMode::Environmental;
  bool include_transport_energy = false;  // add per-flow network carbon
  bool latency_as_zero = false;           // treat every path delay as zero
  bool uncap_links = false;               // drop link capacity rows
};

// Groups removed from the constraint system, per class, keyed like GroupId.
struct Relaxation {
  std::set<std::string> carbon_sites;
  std::set<std::string> water_sites;
  std::set<std::string> power_sites;
  std::set<std::string> latency_workloads;
  std::set<std::string> link_edges;  // "from->to"
  std::set<std::string> assignment_workloads;

  bool empty() const {
    return carbon_sites.empty() && water_sites.empty() && power_sites.empty() &&
           latency_workloads.empty() && link_edges.empty() && assignment_workloads.empty();
  }
  bool drops(const GroupId& g) const;
  void drop(const GroupId& g);
};

struct MilpVarX {
  int site = -1;      // network site index
  int workload = -1;  // index into workloads vector
};

struct MilpPathVar {
  int workload = -1;
  int source = -1;  // candidate placement site
  Path path;
};

struct MilpRow {
  ConstraintClass cls;
  std::string key;   // group key (site, workload or edge)
  std::string name;  // row name for LP export, e.g. water_s3
  RowSense sense = RowSense::LessEq;
  double rhs = 0.0;
  std::vector<std::pair<int, double>> terms;  // unified columns: binaries then paths
};

struct MilpInstance {
  TelemetrySnapshot snapshot;
  std::vector<Workload> workloads;
  BuildConfig config;
  Relaxation relaxed;
  std::vector<std::map<WorkloadId, SiteId>> nogood_patterns;

  Network net;
  NormalizationWindow window;
  std::vector<std::vector<double>> delays;  // effective (zeroed when configured)

  std::vector<MilpVarX> binaries;  // surviving x variables, sorted (site, workload)
  std::vector<MilpPathVar> path_vars;
  std::vector<double> obj_binaries;
  std::vector<double> obj_paths;
  std::vector<MilpRow> rows;
  std::vector<GateEntry> gate_log;
  std::vector<std::vector<int>> candidates;  // per workload: surviving site indices

  bool trivially_infeasible = false;
  std::string trivially_infeasible_why;

  int nominal_binaries = 0;    // N * M before gating
  int nominal_continuous = 0;  // |E| * M nominal per-arc flow variables

  int num_binaries() const { return static_cast<int>(binaries.size()); }
  int num_vars() const { return static_cast<int>(binaries.size() + path_vars.size()); }
  int x_index(int site, int workload) const;  // -1 when gate-fixed

  // LP relaxation with binaries in [0, 1].
  LpProblem to_lp() const;
  // Droppable groups present in this instance, in deletion-filter order:
  // CarbonGate, WaterCap, PowerCap, LatencyGate, LinkCap, Assignment.
  std::vector<GroupId> groups() const;
  std::vector<std::string> group_labels() const;
};

// Effective blended carbon intensity: grid intensity prorated by the share of
// demand not covered by on-site generation and battery discharge.
double blended_carbon_intensity(const Site& site);

// One-time transfer carbon of moving state_gb across a hop with the given
// source-side intensity, in gCO2eq.
double migration_carbon_g(double gamma_source_g_per_kwh, double energy_j_per_bit,
                          double state_gb);

// Transfer carbon of moving `w` between two site indices of `net`, priced at
// the source's blended intensity. Uses the direct link's per-bit energy, else
// the total along the minimum-delay route; zero when from == to or the pair
// is unreachable.
double transition_carbon_g(const Network& net, const TelemetrySnapshot& snap, const Workload& w,
                           int from, int to);

// Remaining one-way latency budget when `workload` would run at `candidate`
// while its current placement is `source` (equal ids mean no move). Returns
// nullopt when the tightened budget is <= 0. Throws when a non-portable
// workload would have to move.
std::optional<LatencyBudget> effective_latency_budget(const Workload& workload,
                                                      const SiteId& source,
                                                      const SiteId& candidate,
                                                      const TelemetrySnapshot& snap);

MilpInstance build_instance(const TelemetrySnapshot& snap, const std::vector<Workload>& workloads,
                            const BuildConfig& config, const Relaxation& relaxed = {});

// Copy of `inst` with one more no-good row excluding the given (possibly
// partial) assignment pattern.
MilpInstance add_nogood_cut(const MilpInstance& inst, const std::map<WorkloadId, SiteId>& pattern);

// Instance in LP text format (CPLEX LP dialect) with labeled row names.
std::string write_lp(const MilpInstance& inst);

}  // namespace sovor
